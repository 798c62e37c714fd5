"""Trace writers: delimited text and value-change-dump waveforms."""

from __future__ import annotations

import csv

from .circuit import Execution

__all__ = ["write_trace_csv", "write_trace_vcd"]

VCD_TIMESCALE_S = 1e-15  # 1 fs ticks


def write_trace_csv(execution: Execution, path) -> None:
    """One row per transition, sorted by (time, vertex)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "vertex", "value", "causal_depth"])
        for t, vid, val, depth in execution.rows():
            writer.writerow([f"{t:.17g}", vid, val, depth])


def _vcd_id(index: int) -> str:
    # Printable identifier alphabet per the VCD format ('!' .. '~').
    chars = []
    index += 1
    while index:
        index, rem = divmod(index - 1, 94)
        chars.append(chr(33 + rem))
    return "".join(chars)


def write_trace_vcd(execution: Execution, path) -> None:
    """Waveform dump with a 1 fs timescale; times are rounded to the tick."""
    ids = {vid: _vcd_id(i) for i, vid in enumerate(sorted(execution.signals))}
    with open(path, "w") as fh:
        fh.write("$timescale 1fs $end\n")
        fh.write("$scope module circuit $end\n")
        for vid, code in ids.items():
            fh.write(f"$var wire 1 {code} {vid} $end\n")
        fh.write("$upscope $end\n")
        fh.write("$enddefinitions $end\n")
        fh.write("#0\n$dumpvars\n")
        for vid, code in ids.items():
            fh.write(f"{execution.signals[vid].value_at(0.0)}{code}\n")
        fh.write("$end\n")
        last_tick = 0
        for t, vid, val, _ in execution.rows():
            tick = round(t / VCD_TIMESCALE_S)
            if tick > last_tick:
                fh.write(f"#{tick}\n")
                last_tick = tick
            if tick >= 1 or t > 0.0:
                fh.write(f"{val}{ids[vid]}\n")
            # transitions at tick 0 were already covered by the dumpvars block
        fh.write(f"#{round(execution.horizon / VCD_TIMESCALE_S)}\n")
