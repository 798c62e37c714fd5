"""Circuit graphs and their deterministic event-driven execution.

A circuit is a directed graph of input ports, output ports, constant
sources, and gates.  Execution follows the constructive argument for unique
executions: events are processed in time order, all transitions sharing an
instant form one batch, a gate whose inputs change performs a single mode
switch on the batch-final bit vector, and its pending output crossings are
discarded and recomputed from the new trajectory.  Strictly positive pure
delays guarantee progress, so the loop terminates at the horizon.

Feedback loops are supported; gates inside a cycle need an explicit
``initial_output`` seed, which doubles as the cut value when the circuit is
unrolled into an acyclic approximation.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Optional

from . import models
from .gate import DigitizedGate, gate_response
from .signals import BinarySignal, Transition, l1_distance

__all__ = [
    "Vertex",
    "Edge",
    "Netlist",
    "Diagnostic",
    "ValidationError",
    "SimulationGuardError",
    "Execution",
    "UnrolledCircuit",
    "EquivalenceReport",
    "validate",
    "build_execution",
    "causal_depths",
    "verify_execution",
    "unroll",
    "simulation_equivalence_check",
    "load_netlist",
    "dump_netlist",
]

KINDS = ("input", "output", "gate", "const")


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str
    params: object = None  # gate parameter record for kind == "gate"
    value: Optional[int] = None  # constant value for kind == "const"
    initial_output: Optional[int] = None  # seed for gates inside feedback loops


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    input_index: int


class Netlist:
    def __init__(self, vertices, edges):
        self.vertices: dict[str, Vertex] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise ValueError(f"duplicate vertex id {v.id!r}")
            self.vertices[v.id] = v
        self.edges: list[Edge] = list(edges)
        # dst -> {input_index: src}; src -> [(dst, input_index)]
        self.fan_in: dict[str, dict[int, str]] = {vid: {} for vid in self.vertices}
        self.fan_out: dict[str, list[tuple[str, int]]] = {vid: [] for vid in self.vertices}
        for e in self.edges:
            if e.src in self.fan_out:
                self.fan_out[e.src].append((e.dst, e.input_index))
            if e.dst in self.fan_in:
                self.fan_in[e.dst].setdefault(e.input_index, e.src)

    def gates(self):
        return [v for v in self.vertices.values() if v.kind == "gate"]

    def ports(self, kind):
        return [v for v in self.vertices.values() if v.kind == kind]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str


class ValidationError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


class SimulationGuardError(RuntimeError):
    """Event budget exhausted; the model configuration is suspect."""


def _gate_of(vertex: Vertex) -> DigitizedGate:
    return models.build_gate(vertex.params)


def validate(netlist: Netlist) -> list[Diagnostic]:
    """Structural checks; an empty list means the netlist is well-formed."""
    out: list[Diagnostic] = []

    def bad(code, message, where):
        out.append(Diagnostic(code, message, where))

    incoming_count: dict[str, int] = {vid: 0 for vid in netlist.vertices}
    incoming_by_index: dict[str, dict[int, int]] = {vid: {} for vid in netlist.vertices}
    for e in netlist.edges:
        where = f"{e.src}->{e.dst}[{e.input_index}]"
        if e.src not in netlist.vertices:
            bad("edge-src", f"edge source {e.src!r} does not exist", where)
            continue
        if e.dst not in netlist.vertices:
            bad("edge-dst", f"edge target {e.dst!r} does not exist", where)
            continue
        src, dst = netlist.vertices[e.src], netlist.vertices[e.dst]
        if src.kind == "output":
            bad("output-fanout", f"output port {src.id!r} cannot drive anything", where)
        if dst.kind == "input":
            bad("input-fanin", f"input port {dst.id!r} cannot be driven", where)
        if dst.kind == "const":
            bad("const-fanin", f"constant {dst.id!r} cannot be driven", where)
        incoming_count[e.dst] = incoming_count.get(e.dst, 0) + 1
        by_index = incoming_by_index.setdefault(e.dst, {})
        by_index[e.input_index] = by_index.get(e.input_index, 0) + 1

    for v in netlist.vertices.values():
        if v.kind not in KINDS:
            bad("kind", f"vertex {v.id!r} has unknown kind {v.kind!r}", v.id)
            continue
        if v.kind == "output":
            if incoming_count.get(v.id, 0) != 1:
                bad("output-fanin",
                    f"output port {v.id!r} needs exactly one driver, has "
                    f"{incoming_count.get(v.id, 0)}", v.id)
        elif v.kind == "const":
            if v.value not in (0, 1):
                bad("const-value", f"constant {v.id!r} needs a 0/1 value", v.id)
        elif v.kind == "gate":
            if v.params is None:
                bad("gate-params", f"gate {v.id!r} has no parameters", v.id)
                continue
            try:
                gate = _gate_of(v)
            except Exception as exc:
                bad("gate-params", f"gate {v.id!r}: {exc}", v.id)
                continue
            seen = incoming_by_index.get(v.id, {})
            for j in range(gate.input_count):
                n = seen.get(j, 0)
                if n != 1:
                    bad("gate-fanin",
                        f"gate {v.id!r} input {j} needs exactly one driver, has {n}",
                        v.id)
            for j in sorted(seen):
                if j < 0 or j >= gate.input_count:
                    bad("gate-fanin",
                        f"gate {v.id!r} has no input index {j}", v.id)
            for j, delta in enumerate(gate.pure_delays):
                if not (delta > 0.0):
                    bad("strict-causality",
                        f"gate {v.id!r} input {j} has pure delay {delta}; strict "
                        "causality requires a positive pure delay", v.id)
    return out


def _resolve_initial_values(netlist: Netlist, port_initials: dict[str, int]) -> dict[str, int]:
    """Digitized value of every vertex before time zero.

    Gates take the steady value implied by their drivers; explicit seeds win
    and are what break feedback cycles.
    """
    value: dict[str, int] = {}
    for v in netlist.vertices.values():
        if v.kind == "input":
            if v.id not in port_initials:
                raise ValidationError([Diagnostic(
                    "stimulus-missing", f"no stimulus for input port {v.id!r}", v.id)])
            value[v.id] = port_initials[v.id]
        elif v.kind == "const":
            value[v.id] = int(v.value)

    pending = [v for v in netlist.vertices.values() if v.kind == "gate"]
    graph_changed = True
    while pending and graph_changed:
        graph_changed = False
        still = []
        for v in pending:
            drivers = netlist.fan_in[v.id]
            gate = _gate_of(v)
            known = all(drivers.get(j) in value for j in range(gate.input_count))
            if known:
                if v.initial_output is not None:
                    value[v.id] = int(v.initial_output)
                else:
                    bits = tuple(value[drivers[j]] for j in range(gate.input_count))
                    value[v.id] = gate.initial_output_value(bits)
                graph_changed = True
            else:
                still.append(v)
        if not graph_changed and still:
            # Cut the remaining cycles at every seeded gate and keep going.
            seeded = [v for v in still if v.initial_output is not None]
            if seeded:
                for v in seeded:
                    value[v.id] = int(v.initial_output)
                    still.remove(v)
                graph_changed = True
        pending = still
    if pending:
        names = sorted(v.id for v in pending)
        raise ValidationError([Diagnostic(
            "initial-underdetermined",
            f"gates {names} sit in feedback loops; give them initial_output seeds",
            ",".join(names))])
    for v in netlist.ports("output"):
        drivers = netlist.fan_in[v.id]
        if drivers:
            src = next(iter(drivers.values()))
            value[v.id] = value[src]
    return value


@dataclass
class Execution:
    """Per-vertex signals plus causal bookkeeping of every transition."""

    signals: dict[str, BinarySignal]
    depths: dict[str, tuple[int, ...]]
    causes: dict[str, tuple[tuple[tuple[int, float], ...], ...]]
    horizon: float
    event_count: int = 0

    def rows(self):
        """Trace rows (time, vertex, value, depth) sorted by (time, vertex)."""
        out = []
        for vid in self.signals:
            sig = self.signals[vid]
            dep = self.depths[vid]
            for tr, d in zip(sig.transitions, dep):
                out.append((tr.time, vid, tr.value, d))
        out.sort(key=lambda r: (r[0], r[1]))
        return out


class _GateRuntime:
    __slots__ = ("vertex", "gate", "tracker", "piece", "out_value", "generation",
                 "drivers")

    def __init__(self, vertex, gate, tracker, piece, out_value, drivers):
        self.vertex = vertex
        self.gate = gate
        self.tracker = tracker
        self.piece = piece
        self.out_value = out_value
        self.generation = 0
        self.drivers = drivers


def _clip(signal: BinarySignal, horizon: float) -> BinarySignal:
    if signal.horizon == horizon:
        return signal
    keep = tuple(tr for tr in signal.transitions if tr.time <= horizon)
    return BinarySignal(signal.initial, keep, horizon)


def build_execution(
    netlist: Netlist,
    stimuli: dict[str, BinarySignal],
    horizon: Optional[float] = None,
    max_events: int = 1_000_000,
) -> Execution:
    """Run the circuit on the given input-port signals.

    Deterministic: the result is a pure function of the arguments.  Raises
    ``ValidationError`` for structural problems and ``SimulationGuardError``
    when the event budget is exhausted.
    """
    diagnostics = validate(netlist)
    if diagnostics:
        raise ValidationError(diagnostics)
    ports = netlist.ports("input")
    for p in ports:
        if p.id not in stimuli:
            raise ValidationError([Diagnostic(
                "stimulus-missing", f"no stimulus for input port {p.id!r}", p.id)])
    if horizon is None:
        horizons = {stimuli[p.id].horizon for p in ports}
        if len(horizons) > 1:
            raise ValidationError([Diagnostic(
                "horizon-mismatch", "stimuli have differing horizons; pass one", "")])
        horizon = horizons.pop() if horizons else 1.0
    port_sig = {p.id: _clip(stimuli[p.id], horizon) for p in ports}

    value0 = _resolve_initial_values(
        netlist, {p.id: port_sig[p.id].initial for p in ports})

    transitions: dict[str, list[Transition]] = {vid: [] for vid in netlist.vertices}
    depths: dict[str, list[int]] = {vid: [] for vid in netlist.vertices}
    causes: dict[str, list] = {vid: [] for vid in netlist.vertices}

    heap: list = []
    seq = 0

    def push(time, kind, payload):
        nonlocal seq
        if time <= horizon:
            heapq.heappush(heap, (time, seq, kind, payload))
            seq += 1

    # Gate runtimes: initial mode from the drivers' pre-zero values; the
    # initial state is the mode's steady point unless a seed pins the output
    # to the opposite rail (which is how oscillators get started).
    runtimes: dict[str, _GateRuntime] = {}
    for v in netlist.gates():
        gate = _gate_of(v)
        drivers = [netlist.fan_in[v.id][j] for j in range(gate.input_count)]
        bits = tuple(value0[d] for d in drivers)
        tracker = gate.new_tracker(bits)
        steady = gate.steady_state(tracker.mode)
        out0 = value0[v.id]
        x0 = steady if gate.digitize(steady[gate.output_index]) == out0 \
            else gate.seeded_state(tracker.mode, out0)
        piece = gate.make_trajectory(tracker.mode, x0, 0.0)
        rt = _GateRuntime(v, gate, tracker, piece, out0, drivers)
        runtimes[v.id] = rt
        val = out0
        for tc in piece.output_crossings(gate.threshold, 0.0, horizon, 1e-15 * horizon):
            val = 1 - val
            push(tc, "cross", (v.id, val, 0, 0, ()))

    for p in ports:
        for tr in port_sig[p.id].transitions:
            push(tr.time, "stim", (p.id, tr.value))

    events = 0
    while heap:
        t = heap[0][0]
        batch = []
        while heap and heap[0][0] == t:
            batch.append(heapq.heappop(heap))
        arrivals: dict[str, list] = {}
        stims: list = []
        crossings: list = []
        for _, _, kind, payload in batch:
            if kind == "arr":
                arrivals.setdefault(payload[0], []).append(payload)
            elif kind == "stim":
                stims.append(payload)
            else:
                crossings.append(payload)

        def emit(vid, val, depth, cause):
            nonlocal events
            transitions[vid].append(Transition(t, val))
            depths[vid].append(depth)
            causes[vid].append(cause)
            events += 1
            if events > max_events:
                raise SimulationGuardError(
                    f"more than {max_events} transitions before {t}; "
                    "check the model configuration")
            for dst, j in netlist.fan_out[vid]:
                dv = netlist.vertices[dst]
                if dv.kind == "output":
                    transitions[dst].append(Transition(t, val))
                    depths[dst].append(depth)
                    causes[dst].append(cause)
                elif dv.kind == "gate":
                    delay = runtimes[dst].gate.pure_delays[j]
                    push(t + delay, "arr", (dst, j, val, depth, t))

        # 1. Mode switches: one batch-final switch per gate with arrivals.
        switched: set[str] = set()
        for vid in sorted(arrivals):
            rt = runtimes[vid]
            bits = list(rt.tracker.bits)
            depth_in = 0
            for _, j, val, depth, _src in arrivals[vid]:
                bits[j] = val
                depth_in = max(depth_in, depth)
            cause = tuple(sorted((j, src) for _, j, _, _, src in arrivals[vid]))
            old_mode = rt.tracker.mode
            mode = rt.tracker.switch(t, tuple(bits))
            if mode == old_mode:
                continue  # pending crossings stay valid
            switched.add(vid)
            rt.generation += 1
            state = rt.gate.clamp_state(rt.piece.state(t))
            rt.piece = rt.gate.make_trajectory(mode, state, t)
            val = rt.out_value
            for tc in rt.piece.output_crossings(rt.gate.threshold, t, horizon,
                                                1e-15 * horizon):
                val = 1 - val
                push(tc, "cross", (vid, val, depth_in + 1, rt.generation, cause))

        # 2. Stimulus transitions at t.
        for vid, val in sorted(stims):
            emit(vid, val, 0, ())

        # 3. Output crossings at t; a simultaneous mode switch wins.
        for vid, val, depth, generation, cause in sorted(crossings):
            rt = runtimes[vid]
            if generation != rt.generation or vid in switched:
                continue
            rt.out_value = val
            emit(vid, val, depth, cause)

    signals = {}
    for vid, v in netlist.vertices.items():
        if v.kind == "input":
            signals[vid] = port_sig[vid]
            depths[vid] = [0] * len(port_sig[vid].transitions)
            causes[vid] = [()] * len(port_sig[vid].transitions)
        elif v.kind == "const":
            signals[vid] = BinarySignal.constant(int(v.value), horizon)
        else:
            signals[vid] = BinarySignal(value0[vid], tuple(transitions[vid]), horizon)
    return Execution(
        signals=signals,
        depths={vid: tuple(d) for vid, d in depths.items()},
        causes={vid: tuple(c) for vid, c in causes.items()},
        horizon=horizon,
        event_count=events,
    )


def causal_depths(execution: Execution) -> dict[str, tuple[int, ...]]:
    """Per-vertex causal depth of every transition, in transition order."""
    return dict(execution.depths)


def verify_execution(netlist: Netlist, execution: Execution) -> list[str]:
    """Re-evaluate every gate function on its final input signals.

    Returns a list of mismatch descriptions; an empty list certifies the
    execution against the gate-function and output-port equations.
    """
    problems = []
    for v in netlist.gates():
        gate = _gate_of(v)
        drivers = [netlist.fan_in[v.id][j] for j in range(gate.input_count)]
        ins = [execution.signals[d] for d in drivers]
        recorded = execution.signals[v.id]
        if v.initial_output is not None and v.initial_output != recorded.initial:
            problems.append(f"gate {v.id}: seed differs from recorded initial")
        expected = gate_response(gate, ins, initial_output=v.initial_output)
        if expected != recorded:
            gap = l1_distance(expected, recorded)
            problems.append(f"gate {v.id}: recomputed response differs (l1={gap})")
    for v in netlist.ports("output"):
        src = next(iter(netlist.fan_in[v.id].values()))
        a, b = execution.signals[v.id], execution.signals[src]
        if a.transitions != b.transitions:
            problems.append(f"output port {v.id}: signal differs from driver {src}")
    return problems


# ---------------------------------------------------------------------------
# unrolling


@dataclass
class UnrolledCircuit:
    netlist: Netlist
    z_values: dict[str, float]  # math.inf for unreachable-from-cut vertices
    original: dict[str, str]
    sink: str


def unroll(
    netlist: Netlist,
    k: int,
    sink: str,
    port_initials: Optional[dict[str, int]] = None,
) -> UnrolledCircuit:
    """Acyclic depth-``k`` approximation of the circuit seen from ``sink``.

    Gate copies at depth 0 collapse to constants carrying the gate's initial
    digitized output value; every input port keeps a single shared copy.
    Each vertex gets a cut distance: 0 on the cut constants, infinity on
    vertices no cut constant can reach, else one plus the shortest
    predecessor distance.
    """
    if k < 0:
        raise ValueError("unroll depth must be nonnegative")
    if sink not in netlist.vertices:
        raise ValueError(f"unknown sink vertex {sink!r}")
    diagnostics = validate(netlist)
    if diagnostics:
        raise ValidationError(diagnostics)
    value0 = _resolve_initial_values(netlist, port_initials or {})

    vertices: list[Vertex] = []
    edges: list[Edge] = []
    z: dict[str, float] = {}
    original: dict[str, str] = {}
    memo: dict[tuple[str, int], str] = {}

    def build(vid: str, depth: int) -> str:
        key = (vid, depth)
        if key in memo:
            return memo[key]
        v = netlist.vertices[vid]
        if v.kind == "input":
            name = vid  # all copies of an input port are the same vertex
            if (vid, -1) not in memo:
                memo[(vid, -1)] = name
                vertices.append(Vertex(name, "input"))
                z[name] = math.inf
                original[name] = vid
            memo[key] = name
            return name
        if v.kind == "const":
            name = vid  # constant sources unify across levels, like input ports
            if (vid, -1) not in memo:
                memo[(vid, -1)] = name
                vertices.append(Vertex(name, "const", value=v.value))
                z[name] = math.inf
                original[name] = vid
            memo[key] = name
            return name
        if v.kind == "output":
            driver = next(iter(netlist.fan_in[vid].values()))
            child = build(driver, depth)
            name = f"{vid}@{depth}"
            vertices.append(Vertex(name, "output"))
            edges.append(Edge(child, name, 0))
            z[name] = z[child]
            original[name] = vid
            memo[key] = name
            return name
        # gate
        if depth == 0:
            cut_value = value0[vid]
            name = f"X{cut_value}@{vid}"
            if (name, -1) not in memo:
                memo[(name, -1)] = name
                vertices.append(Vertex(name, "const", value=cut_value))
                z[name] = 0.0
                original[name] = vid
            memo[key] = name
            return name
        name = f"{vid}@{depth}"
        memo[key] = name
        gate = _gate_of(v)
        children = []
        for j in range(gate.input_count):
            src = netlist.fan_in[vid][j]
            child = build(src, depth - 1)
            children.append(child)
            edges.append(Edge(child, name, j))
        vertices.append(Vertex(name, "gate", params=v.params,
                               initial_output=value0[vid]))
        z[name] = 1.0 + min(z[c] for c in children)
        original[name] = vid
        return name

    sink_name = build(sink, k)
    return UnrolledCircuit(
        netlist=Netlist(vertices, edges), z_values=z, original=original, sink=sink_name
    )


@dataclass
class EquivalenceReport:
    mismatches: list[str]
    compared: int

    @property
    def ok(self) -> bool:
        return not self.mismatches


def simulation_equivalence_check(
    netlist: Netlist,
    k: int,
    stimuli: dict[str, BinarySignal],
    horizon: float,
    sink: Optional[str] = None,
) -> EquivalenceReport:
    """Run circuit and unrolling; shallow transitions must agree per copy.

    For every copy with cut distance z, the original's transitions of causal
    depth <= z must appear identically at the copy, and vice versa.
    """
    if sink is None:
        outs = netlist.ports("output")
        if len(outs) != 1:
            raise ValueError("pass sink= when the circuit has != 1 output port")
        sink = outs[0].id
    port_initials = {p.id: stimuli[p.id].initial for p in netlist.ports("input")
                     if p.id in stimuli}
    unrolled = unroll(netlist, k, sink, port_initials)
    exec_orig = build_execution(netlist, stimuli, horizon)
    sub_stim = {p.id: stimuli[p.id] for p in unrolled.netlist.ports("input")}
    exec_copy = build_execution(unrolled.netlist, sub_stim, horizon)

    mismatches = []
    compared = 0
    for copy_id, orig_id in unrolled.original.items():
        v = unrolled.netlist.vertices[copy_id]
        if v.kind not in ("gate", "output"):
            continue
        zc = unrolled.z_values[copy_id]
        orig_events = [
            (tr.time, tr.value)
            for tr, d in zip(exec_orig.signals[orig_id].transitions,
                             exec_orig.depths[orig_id])
            if d <= zc
        ]
        copy_events = [
            (tr.time, tr.value)
            for tr, d in zip(exec_copy.signals[copy_id].transitions,
                             exec_copy.depths[copy_id])
            if d <= zc
        ]
        compared += 1
        if orig_events != copy_events:
            mismatches.append(
                f"{copy_id} (z={zc}) vs {orig_id}: {copy_events} != {orig_events}"
            )
    return EquivalenceReport(mismatches=mismatches, compared=compared)


# ---------------------------------------------------------------------------
# netlist JSON


def load_netlist(path) -> Netlist:
    with open(path) as fh:
        doc = json.load(fh)
    return netlist_from_dict(doc)


def netlist_from_dict(doc: dict) -> Netlist:
    vertices = []
    for body in doc.get("vertices", []):
        kind = body.get("kind")
        params = None
        if "params" in body and body["params"] is not None:
            params = models.params_from_dict(body["params"])
        vertices.append(Vertex(
            id=str(body["id"]),
            kind=kind,
            params=params,
            value=body.get("value"),
            initial_output=body.get("initial_output"),
        ))
    edges = [
        Edge(str(e["from"]), str(e["to"]), int(e["input_index"]))
        for e in doc.get("edges", [])
    ]
    return Netlist(vertices, edges)


def dump_netlist(netlist: Netlist, path) -> None:
    doc = {"vertices": [], "edges": []}
    for v in netlist.vertices.values():
        body = {"id": v.id, "kind": v.kind}
        if v.params is not None:
            body["params"] = models.params_to_dict(v.params)
        if v.value is not None:
            body["value"] = v.value
        if v.initial_output is not None:
            body["initial_output"] = v.initial_output
        doc["vertices"].append(body)
    for e in netlist.edges:
        doc["edges"].append({"from": e.src, "to": e.dst, "input_index": e.input_index})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
