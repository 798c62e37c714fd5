"""Command-line front end.

Subcommands:
  simulate      run a netlist on stimuli, write a trace (CSV, optional VCD)
  sweep         delay-vs-separation curve for a gate parameter file
  characterize  recover gate parameters from six characteristic delays
  continuity    perturbation-response report for a single-gate netlist

Exit codes: 0 success, 2 file/parse problems, 3 validation or domain errors,
4 runtime guards (event explosion, failed root bracketing).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import plotting
from .characterize import characterize_gate_detailed, load_delays
from .circuit import (
    SimulationGuardError,
    ValidationError,
    build_execution,
    load_netlist,
    validate,
)
from .delay import sweep_curve, write_curve_csv
from .gate import continuity_bound, continuity_probe
from .models import build_gate, dump_params, load_params
from .numerics import ConvergenceError, NoSignChangeError
from .signals import BinarySignal, Transition, is_pulse, load_stimuli
from .trace import write_trace_csv, write_trace_vcd

__all__ = ["main"]


def _png_path(out_path: str) -> str:
    stem = out_path[:-4] if out_path.endswith(".csv") else out_path
    return stem + ".png"


def cmd_simulate(args) -> int:
    netlist = load_netlist(args.netlist)
    diagnostics = validate(netlist)
    if diagnostics:
        for d in diagnostics:
            print(f"validation [{d.code}] {d.message}", file=sys.stderr)
        return 3
    signals, horizon = load_stimuli(args.stimuli)
    if args.horizon is not None:
        horizon = args.horizon
    execution = build_execution(netlist, signals, horizon, max_events=args.max_events)
    write_trace_csv(execution, args.out)
    if args.vcd:
        write_trace_vcd(execution, args.vcd)
    if args.plot:
        plotting.plot_trace(execution, _png_path(args.out))
    print(f"wrote {args.out} ({execution.event_count} transitions)")
    return 0


def cmd_sweep(args) -> int:
    params = load_params(args.params)
    curve = sweep_curve(args.edge, args.delta_min, args.delta_max, args.steps, params)
    write_curve_csv(curve, args.out)
    if not args.no_plot:
        plotting.plot_curve(curve, _png_path(args.out))
    print(f"wrote {args.out} ({args.steps} points)")
    return 0


def cmd_characterize(args) -> int:
    delays = load_delays(args.delays)
    result = characterize_gate_detailed(delays, args.capacitance, v_dd=args.v_dd)
    if len(result.sign_change_brackets) > 1:
        print(
            f"warning: {len(result.sign_change_brackets)} sign changes in the "
            f"pull-up resistance scan {result.sign_change_brackets}; using the first",
            file=sys.stderr,
        )
    dump_params(result.params, args.out)
    print(f"wrote {args.out}")
    return 0


def _shift_transition(signal: BinarySignal, index: int, eps: float) -> BinarySignal:
    if index >= len(signal.transitions):
        raise ValueError(f"signal has no transition index {index}")
    moved = [
        Transition(tr.time + eps, tr.value) if i == index else tr
        for i, tr in enumerate(signal.transitions)
    ]
    return BinarySignal(signal.initial, tuple(moved), signal.horizon)


def _pulse_of_width(signal: BinarySignal, width: float) -> BinarySignal:
    shape = is_pulse(signal)
    if shape is None:
        raise ValueError("pulse perturbation needs a single-pulse signal")
    start, _ = shape
    if width <= 0.0:
        return BinarySignal.constant(signal.initial, signal.horizon)
    return BinarySignal.from_pairs(
        signal.initial, [(start, 1), (start + width, 0)], signal.horizon
    )


def cmd_continuity(args) -> int:
    netlist = load_netlist(args.netlist)
    diagnostics = validate(netlist)
    if diagnostics:
        for d in diagnostics:
            print(f"validation [{d.code}] {d.message}", file=sys.stderr)
        return 3
    gates = netlist.gates()
    if len(gates) != 1:
        print("continuity probing needs a netlist with exactly one gate",
              file=sys.stderr)
        return 3
    vertex = gates[0]
    gate = build_gate(vertex.params)
    signals, horizon = load_stimuli(args.stimuli)
    drivers = [netlist.fan_in[vertex.id][j] for j in range(gate.input_count)]
    inputs = []
    port_slots = []
    for j, d in enumerate(drivers):
        dv = netlist.vertices[d]
        if dv.kind == "const":
            inputs.append(BinarySignal.constant(int(dv.value), horizon))
        elif dv.kind == "input":
            if d not in signals:
                print(f"stimulus missing for input port {d!r}", file=sys.stderr)
                return 3
            inputs.append(signals[d])
            port_slots.append(j)
        else:
            print("continuity probing needs port- or constant-driven inputs",
                  file=sys.stderr)
            return 3
    if not port_slots:
        print("no input port to perturb", file=sys.stderr)
        return 3
    target = args.signal or drivers[port_slots[0]]
    if target not in drivers:
        print(f"signal {target!r} does not drive the gate", file=sys.stderr)
        return 3
    slot = drivers.index(target)

    epsilons = [float(e) for e in args.epsilons.split(",")]
    rows = []
    for eps in epsilons:
        if args.perturb == "shift":
            base = inputs
            changed = _shift_transition(inputs[slot], args.transition_index, eps)
        else:
            base = list(inputs)
            base[slot] = _pulse_of_width(inputs[slot], 0.0)
            changed = _pulse_of_width(inputs[slot], eps)
        perturbed = list(base)
        perturbed[slot] = changed
        probe = continuity_probe(gate, base, perturbed, grid_points=args.grid)
        bound = continuity_bound(gate, horizon, probe.mode_dist)
        rows.append((eps, probe.mode_dist, probe.output_dist, probe.sup_analog, bound))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon_s", "d_mode_s", "d_out_s", "sup_analog", "bound"])
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])
    if not args.no_plot:
        plotting.plot_continuity(rows, _png_path(args.out))
    print(f"wrote {args.out} ({len(rows)} perturbations)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridsim",
        description="Dynamic timing analysis with threshold-digitized gate models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="event-driven circuit simulation")
    p.add_argument("netlist", help="netlist JSON file")
    p.add_argument("stimuli", help="stimulus JSON file")
    p.add_argument("--horizon", type=float, default=None,
                   help="analysis window in seconds (default: stimulus horizon)")
    p.add_argument("--out", required=True, help="trace CSV path")
    p.add_argument("--vcd", default=None, help="also write a VCD waveform dump")
    p.add_argument("--max-events", type=int, default=1_000_000,
                   help="transition budget guard")
    p.add_argument("--plot", action="store_true", help="render a waveform PNG")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="delay-vs-separation curve")
    p.add_argument("params", help="gate parameter JSON file")
    p.add_argument("--edge", required=True, choices=("fall", "rise"),
                   help="output edge to sweep")
    p.add_argument("--delta-min", type=float, required=True,
                   help="smallest input separation in seconds")
    p.add_argument("--delta-max", type=float, required=True,
                   help="largest input separation in seconds")
    p.add_argument("--steps", type=int, default=200, help="grid points")
    p.add_argument("--out", required=True, help="curve CSV path")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("characterize", help="parameters from six delays")
    p.add_argument("delays", help="characteristic-delays JSON file")
    p.add_argument("--capacitance", type=float, required=True,
                   help="chosen load capacitance in farads")
    p.add_argument("--v-dd", type=float, default=1.0, help="supply voltage")
    p.add_argument("--out", required=True, help="output parameter JSON path")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("continuity", help="perturbation-response report")
    p.add_argument("netlist", help="single-gate netlist JSON file")
    p.add_argument("stimuli", help="stimulus JSON file")
    p.add_argument("--perturb", choices=("shift", "pulse"), default="shift",
                   help="shift one transition, or sweep a pulse width")
    p.add_argument("--signal", default=None,
                   help="input port to perturb (default: the gate's first input)")
    p.add_argument("--transition-index", type=int, default=0,
                   help="which transition to shift")
    p.add_argument("--epsilons", default="1e-14,1e-13,1e-12,1e-11",
                   help="comma-separated perturbation sizes in seconds")
    p.add_argument("--grid", type=int, default=2001,
                   help="sampling points for the analog sup distance")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    p.set_defaults(func=cmd_continuity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"parse error: line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        for d in exc.diagnostics:
            print(f"validation [{d.code}] {d.message}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 3
    except (SimulationGuardError, ConvergenceError, NoSignChangeError) as exc:
        print(f"runtime guard: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
