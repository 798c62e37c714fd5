"""The threshold-digitized gate abstraction.

A gate is: per-input pure delays, a mode choice driven by the delayed input
bits (possibly with memory of the previous state), a family of closed-form
trajectories indexed by mode, and an output comparator.  The full gate
function is the composition

    inputs -> pure delay -> mode-switch signal -> pasted trajectory
           -> threshold comparator -> output signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .signals import (
    BinarySignal,
    ModeSwitchSignal,
    l1_distance,
    mode_distance,
    pure_delay_shift,
    threshold_digitize,
)
from .trajectory import ModeTrajectory, Trajectory

__all__ = [
    "DigitizedGate",
    "ModeTracker",
    "ContinuityProbe",
    "build_mode_switch_signal",
    "matching_output",
    "gate_response",
    "continuity_probe",
    "continuity_bound",
]

STATE_CLAMP_REL_TOL = 1e-9


class ModeTracker:
    """Walks a gate's mode through a sequence of input-bit changes.

    The base tracker is memoryless (mode is a pure function of the bits);
    gates whose mode depends on the switching history override it.
    """

    def __init__(self, gate: "DigitizedGate", bits: tuple[int, ...]):
        self.gate = gate
        self.bits = bits
        self.mode = gate.mode_of(bits)

    def switch(self, time: float, bits: tuple[int, ...]) -> Hashable:
        self.bits = bits
        self.mode = self.gate.mode_of(bits)
        return self.mode


class DigitizedGate:
    """Base class for concrete gate models."""

    input_count: int
    pure_delays: tuple[float, ...]
    threshold: float
    v_dd: float
    state_dim: int = 1
    output_index: int = 0

    # -- mode logic ---------------------------------------------------------
    def mode_of(self, bits: tuple[int, ...]) -> Hashable:
        """Mode selected by a bit vector with no relevant history."""
        raise NotImplementedError

    def new_tracker(self, bits: tuple[int, ...]) -> ModeTracker:
        return ModeTracker(self, bits)

    # -- trajectory family --------------------------------------------------
    def steady_state(self, mode: Hashable) -> tuple[float, ...]:
        raise NotImplementedError

    def make_trajectory(
        self, mode: Hashable, entry_state: tuple[float, ...], entry_time: float
    ) -> ModeTrajectory:
        raise NotImplementedError

    # -- documented ODE bounds over the admissible box ------------------------
    def rhs_bound(self) -> float:
        """Upper bound on the norm of every mode's right-hand side."""
        raise NotImplementedError

    def lipschitz_bound(self) -> float:
        """Common Lipschitz constant of the right-hand sides in the state."""
        raise NotImplementedError

    # -- helpers -------------------------------------------------------------
    def digitize(self, output_value: float) -> int:
        return 1 if output_value > self.threshold else 0

    def initial_output_value(self, bits: tuple[int, ...]) -> int:
        """Digitized output after the inputs have been constant forever."""
        tracker = self.new_tracker(bits)
        steady = self.steady_state(tracker.mode)
        return self.digitize(steady[self.output_index])

    def seeded_state(self, mode: Hashable, output_bit: int) -> tuple[float, ...]:
        """Initial state pinned to the rail matching an assumed output bit."""
        state = list(self.steady_state(mode))
        state[self.output_index] = self.v_dd if output_bit else 0.0
        return tuple(state)

    def clamp_state(self, state: Sequence[float]) -> tuple[float, ...]:
        """Snap rounding overshoot back into the admissible box [0, v_dd]."""
        tol = STATE_CLAMP_REL_TOL * self.v_dd
        out = []
        for v in state:
            if v < -tol or v > self.v_dd + tol:
                raise ValueError(
                    f"state component {v!r} escaped the admissible box [0, {self.v_dd}]"
                )
            out.append(min(max(v, 0.0), self.v_dd))
        return tuple(out)


def build_mode_switch_signal(
    gate: DigitizedGate, inputs: Sequence[BinarySignal]
) -> ModeSwitchSignal:
    """Delay the inputs, merge their transitions, and map to gate modes.

    Transitions landing on the same instant are applied as one batch, so a
    simultaneous multi-input change produces a single mode switch.
    """
    if len(inputs) != gate.input_count:
        raise ValueError(f"gate expects {gate.input_count} inputs, got {len(inputs)}")
    horizon = inputs[0].horizon
    if any(s.horizon != horizon for s in inputs):
        raise ValueError("inputs must share a horizon")
    delayed = [pure_delay_shift(s, d) for s, d in zip(inputs, gate.pure_delays)]

    events: dict[float, list[tuple[int, int]]] = {}
    for j, s in enumerate(delayed):
        for tr in s.transitions:
            events.setdefault(tr.time, []).append((j, tr.value))

    bits = [s.initial for s in delayed]
    tracker = gate.new_tracker(tuple(bits))
    current = tracker.mode
    initial_mode = current
    switches: list[tuple[float, Hashable]] = []
    for t in sorted(events):
        for j, v in events[t]:
            bits[j] = v
        mode = tracker.switch(t, tuple(bits))
        if mode != current:
            if t == 0.0:
                initial_mode = mode  # zero-length initial segment collapses
            else:
                switches.append((t, mode))
            current = mode
    return ModeSwitchSignal(initial_mode, tuple(switches), horizon)


def matching_output(
    gate: DigitizedGate, mode_signal: ModeSwitchSignal, x0: Sequence[float]
) -> Trajectory:
    """Paste the per-mode closed forms into the unique continuous trajectory."""
    state = gate.clamp_state(x0)
    entry = 0.0
    mode = mode_signal.initial_mode
    pieces: list[ModeTrajectory] = []
    for t, next_mode in mode_signal.switches:
        if t == entry:
            mode = next_mode
            continue
        piece = gate.make_trajectory(mode, state, entry)
        pieces.append(piece)
        state = gate.clamp_state(piece.state(t))
        entry, mode = t, next_mode
    pieces.append(gate.make_trajectory(mode, state, entry))
    return Trajectory(pieces, mode_signal.horizon)


def gate_response(
    gate: DigitizedGate,
    inputs: Sequence[BinarySignal],
    initial_output: int | None = None,
) -> BinarySignal:
    """The full digitized gate function.

    By default the initial state is the steady point of the mode selected by
    the inputs' values before time zero.  An explicit ``initial_output`` bit
    pins the output to the matching rail instead, which is how gates inside
    feedback loops are started off-steady.
    """
    mode_signal = build_mode_switch_signal(gate, inputs)
    x0 = gate.steady_state(mode_signal.initial_mode)
    if initial_output is not None and gate.digitize(x0[gate.output_index]) != initial_output:
        x0 = gate.seeded_state(mode_signal.initial_mode, initial_output)
    trajectory = matching_output(gate, mode_signal, x0)
    return threshold_digitize(trajectory, gate.threshold, mode_signal.horizon)


@dataclass(frozen=True)
class ContinuityProbe:
    """Distances between a gate's responses to two nearby input vectors."""

    mode_dist: float
    output_dist: float
    sup_analog: float


def continuity_probe(
    gate: DigitizedGate,
    inputs: Sequence[BinarySignal],
    perturbed_inputs: Sequence[BinarySignal],
    grid_points: int = 2001,
) -> ContinuityProbe:
    """Measure how far apart the responses to two input vectors are.

    Returns the mode-switch-signal distance, the binary output distance, and
    the supremum (on a sampling grid) of the analog state difference.
    """
    a = build_mode_switch_signal(gate, inputs)
    b = build_mode_switch_signal(gate, perturbed_inputs)
    d_in = mode_distance(a, b)
    xa = matching_output(gate, a, gate.steady_state(a.initial_mode))
    xb = matching_output(gate, b, gate.steady_state(b.initial_mode))
    out_a = threshold_digitize(xa, gate.threshold, a.horizon)
    out_b = threshold_digitize(xb, gate.threshold, b.horizon)
    d_out = l1_distance(out_a, out_b)
    ts = np.linspace(0.0, a.horizon, grid_points)
    diff = xa.states(ts) - xb.states(ts)
    sup = float(np.max(np.linalg.norm(diff, axis=1))) if len(ts) else 0.0
    return ContinuityProbe(mode_dist=d_in, output_dist=d_out, sup_analog=sup)


def continuity_bound(gate: DigitizedGate, horizon: float, mode_dist: float) -> float:
    """The a-priori bound 2*M*exp(T*K)*d on the analog state difference.

    Computed in log space; returns inf when the exponential overflows.
    """
    if mode_dist <= 0.0:
        return 0.0
    log_bound = (
        math.log(2.0 * gate.rhs_bound()) + horizon * gate.lipschitz_bound() + math.log(mode_dist)
    )
    if log_bound > 700.0:
        return math.inf
    return math.exp(log_bound)
