"""Digital signal types, metrics, thresholding, and pulse utilities.

A binary signal is a right-continuous step function on a bounded window
[0, horizon], stored as the value just before time zero plus a strictly
increasing list of transitions.  Mode-switch signals are the same thing with
hashable mode identifiers instead of bits.  All measure computations are
exact interval arithmetic over the transition lists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional

from .trajectory import Trajectory

__all__ = [
    "Transition",
    "BinarySignal",
    "ModeSwitchSignal",
    "SpfReport",
    "pure_delay_shift",
    "l1_distance",
    "mode_distance",
    "threshold_digitize",
    "is_pulse",
    "spf_check",
    "load_stimuli",
    "dump_stimuli",
]


@dataclass(frozen=True)
class Transition:
    time: float
    value: int

    def __post_init__(self):
        if not math.isfinite(self.time) or self.time < 0.0:
            raise ValueError(f"transition time must be finite and >= 0, got {self.time}")
        if self.value not in (0, 1):
            raise ValueError(f"transition value must be 0 or 1, got {self.value}")


@dataclass(frozen=True)
class BinarySignal:
    """Step function on [0, horizon]; ``initial`` is the value at 0-."""

    initial: int
    transitions: tuple[Transition, ...]
    horizon: float

    def __post_init__(self):
        if self.initial not in (0, 1):
            raise ValueError("initial value must be 0 or 1")
        if not (self.horizon > 0.0) or not math.isfinite(self.horizon):
            raise ValueError("horizon must be positive and finite")
        object.__setattr__(self, "transitions", tuple(self.transitions))
        prev_t = -math.inf
        prev_v = self.initial
        for tr in self.transitions:
            if tr.time <= prev_t:
                raise ValueError("transition times must be strictly increasing")
            if tr.time > self.horizon:
                raise ValueError("transition beyond the horizon")
            if tr.value == prev_v:
                raise ValueError("consecutive transitions must alternate in value")
            prev_t, prev_v = tr.time, tr.value

    @classmethod
    def from_pairs(cls, initial, pairs, horizon) -> "BinarySignal":
        return cls(initial, tuple(Transition(t, v) for t, v in pairs), horizon)

    @classmethod
    def constant(cls, value: int, horizon: float) -> "BinarySignal":
        return cls(value, (), horizon)

    def value_at(self, t: float) -> int:
        if t < 0.0:
            return self.initial
        v = self.initial
        for tr in self.transitions:
            if tr.time > t:
                break
            v = tr.value
        return v

    @property
    def final_value(self) -> int:
        return self.transitions[-1].value if self.transitions else self.initial

    def intervals(self):
        """Yield (start, end, value) covering [0, horizon]."""
        t, v = 0.0, self.value_at(0.0)
        for tr in self.transitions:
            if tr.time > t:
                yield (t, tr.time, v)
            t, v = tr.time, tr.value
        if t < self.horizon:
            yield (t, self.horizon, v)

    def is_zero(self) -> bool:
        return self.initial == 0 and not self.transitions


@dataclass(frozen=True)
class ModeSwitchSignal:
    """Step function from [0, horizon] into a set of mode identifiers."""

    initial_mode: Hashable
    switches: tuple[tuple[float, Hashable], ...]
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "switches", tuple(self.switches))
        prev_t = -math.inf
        prev_m = self.initial_mode
        for t, m in self.switches:
            if t <= prev_t:
                raise ValueError("switch times must be strictly increasing")
            if t > self.horizon:
                raise ValueError("switch beyond the horizon")
            if m == prev_m:
                raise ValueError("consecutive modes must be distinct")
            prev_t, prev_m = t, m

    def mode_at(self, t: float) -> Hashable:
        m = self.initial_mode
        for st, sm in self.switches:
            if st > t:
                break
            m = sm
        return m

    def segments(self):
        """Yield (start, end, mode) covering [0, horizon]."""
        t, m = 0.0, self.initial_mode
        for st, sm in self.switches:
            if st > t:
                yield (t, st, m)
            t, m = st, sm
        if t < self.horizon:
            yield (t, self.horizon, m)


def pure_delay_shift(s: BinarySignal, delay: float) -> BinarySignal:
    """Shift a signal right by ``delay``, holding the 0- value up front."""
    if delay < 0.0:
        raise ValueError("pure delay must be nonnegative")
    if delay == 0.0:
        return s
    shifted = tuple(
        Transition(tr.time + delay, tr.value)
        for tr in s.transitions
        if tr.time + delay <= s.horizon
    )
    return BinarySignal(s.initial, shifted, s.horizon)


def _disagreement_measure(segs_a, segs_b) -> float:
    # Sweep the merged breakpoints of two piecewise-constant functions.
    total = 0.0
    ia = ib = 0
    a = segs_a[ia]
    b = segs_b[ib]
    t = 0.0
    while True:
        end = min(a[1], b[1])
        if a[2] != b[2]:
            total += end - t
        t = end
        if a[1] == end:
            ia += 1
            if ia == len(segs_a):
                break
            a = segs_a[ia]
        if b[1] == end:
            ib += 1
            if ib == len(segs_b):
                break
            b = segs_b[ib]
    return total


def l1_distance(s1: BinarySignal, s2: BinarySignal) -> float:
    """Measure of the set where two equal-horizon binary signals differ."""
    if s1.horizon != s2.horizon:
        raise ValueError("signals must share the same horizon")
    return _disagreement_measure(list(s1.intervals()), list(s2.intervals()))


def mode_distance(a: ModeSwitchSignal, b: ModeSwitchSignal) -> float:
    """Measure of the set where two mode-switch signals select different modes."""
    if a.horizon != b.horizon:
        raise ValueError("signals must share the same horizon")
    return _disagreement_measure(list(a.segments()), list(b.segments()))


def threshold_digitize(x: Trajectory, threshold: float, horizon: float) -> BinarySignal:
    """Digitize an analog trajectory: 1 exactly where the output exceeds ``threshold``.

    Crossing times are located by per-piece analytic inversion or bracketed
    root finding to an absolute tolerance of ``1e-15 * horizon``.
    """
    if horizon > x.horizon:
        raise ValueError("digitization window exceeds the trajectory window")
    xtol = 1e-15 * horizon
    initial = 1 if x.output(0.0) > threshold else 0
    value = initial
    transitions = []
    for t in x.output_crossings(threshold, xtol):
        if t > horizon:
            break
        value = 1 - value
        transitions.append(Transition(t, value))
    return BinarySignal(initial, tuple(transitions), horizon)


def is_pulse(s: BinarySignal) -> Optional[tuple[float, float]]:
    """Return (start, width) if the signal is a single high pulse from 0."""
    if s.initial != 0 or len(s.transitions) != 2:
        return None
    rise, fall = s.transitions
    if rise.value != 1:  # alternation makes the second transition falling
        return None
    return (rise.time, fall.time - rise.time)


@dataclass(frozen=True)
class SpfReport:
    """Pulse-filtration bookkeeping for one output signal."""

    nonzero_output: bool
    min_pulse_width: Optional[float]
    short_pulse_violation: bool
    last_transition: Optional[float]
    late_transition_violation: bool
    fails: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.fails


def spf_check(
    output: BinarySignal, eps: float, stabilization: float, input_pulse: tuple[float, float]
) -> SpfReport:
    """Check an output signal against the pulse-filtration conditions.

    ``eps`` is the minimum tolerated output pulse width, ``stabilization`` the
    allowed settling time after the input pulse ends, and ``input_pulse`` the
    (start, width) of the driving pulse.
    """
    if eps <= 0.0 or stabilization <= 0.0:
        raise ValueError("eps and stabilization bound must be positive")
    t0, width = input_pulse
    widths = []
    rise_at = None
    for tr in output.transitions:
        if tr.value == 1:
            rise_at = tr.time
        elif rise_at is not None:
            widths.append(tr.time - rise_at)
            rise_at = None
    min_width = min(widths) if widths else None
    short = min_width is not None and min_width <= eps
    last = output.transitions[-1].time if output.transitions else None
    late = last is not None and last > t0 + width + stabilization
    fails = []
    if short:
        fails.append("short-pulse")
    if late:
        fails.append("late-transition")
    return SpfReport(
        nonzero_output=not output.is_zero(),
        min_pulse_width=min_width,
        short_pulse_violation=short,
        last_transition=last,
        late_transition_violation=late,
        fails=tuple(fails),
    )


def load_stimuli(path) -> tuple[dict[str, BinarySignal], float]:
    """Read the stimulus JSON file: named signals plus a shared horizon."""
    with open(path) as fh:
        doc = json.load(fh)
    horizon = float(doc["horizon"])
    signals = {}
    for name, body in doc["signals"].items():
        signals[name] = BinarySignal.from_pairs(
            int(body["initial"]),
            [(float(t), int(v)) for t, v in body.get("transitions", [])],
            horizon,
        )
    return signals, horizon


def dump_stimuli(signals: dict[str, BinarySignal], horizon: float, path) -> None:
    doc = {
        "horizon": horizon,
        "signals": {
            name: {
                "initial": s.initial,
                "transitions": [[tr.time, tr.value] for tr in s.transitions],
            }
            for name, s in signals.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
