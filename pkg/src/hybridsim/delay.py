"""Multi-input-switching delay functions of the advanced NOR model.

Delays are measured at the half-supply crossing of the output.  For the
falling output edge (both inputs rising) the crossing of the pasted
exponentials inverts in closed form.  For the rising output edge (both
inputs falling) the crossing time solves a transcendental equation; this
module provides both the pasted asymptotic formula (exact at separations of
zero and +/-infinity, linear in between) and the exact numeric root.

Sign convention: ``delta`` is the separation of the *delayed* input switching
instants, input B minus input A; negative values mirror the gate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

from .models import NorAdvancedGate, NorAdvancedParams, symmetry_swap
from .numerics import lambert_wm1
from .trajectory import ExpTrajectory, Trajectory

__all__ = [
    "ExtremalDelays",
    "MisDelayCurve",
    "mis_delay_falling_output",
    "exact_delay_falling_output",
    "extremal_delays",
    "mis_delay_rising_output",
    "exact_delay_rising_output",
    "total_gate_delay",
    "sweep_curve",
    "write_curve_csv",
]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ExtremalDelays:
    """Rising-output delays at separations 0, +infinity and -infinity."""

    at_zero: float
    at_plus_inf: float
    at_minus_inf: float


def mis_delay_falling_output(delta: float, p: NorAdvancedParams) -> float:
    """Half-supply crossing time for two rising inputs separated by ``delta``.

    Measured from the first rising input; ramps linearly in the separation
    and saturates once the first input alone pulls the output low.
    """
    if delta < 0.0:
        p, delta = symmetry_swap(p, delta)
    saturation = LOG2 * p.c * p.r_na
    if delta >= saturation:
        return saturation
    return (LOG2 * p.c * p.r_na * p.r_nb - delta * p.r_nb) / (p.r_na + p.r_nb) + delta


def exact_delay_falling_output(delta: float, p: NorAdvancedParams) -> float:
    """Same quantity computed from the pasted discharge trajectories.

    Independent of the closed-form algebra: builds the one- or two-piece
    exponential discharge and locates the crossing by inversion.
    """
    if delta < 0.0:
        p, delta = symmetry_swap(p, delta)
    gate = NorAdvancedGate(p)
    level = p.v_dd / 2.0
    both_tau = gate.discharge_tau(("fall", "ab"))
    if delta == 0.0:
        horizon = 20.0 * both_tau
        traj = Trajectory([ExpTrajectory(("fall", "ab"), 0.0, p.v_dd, 0.0, both_tau)],
                          horizon)
    elif math.isinf(delta):
        horizon = 20.0 * p.c * p.r_na
        traj = Trajectory(
            [ExpTrajectory(("fall", "a"), 0.0, p.v_dd, 0.0, p.c * p.r_na)], horizon)
    else:
        first = ExpTrajectory(("fall", "a"), 0.0, p.v_dd, 0.0, p.c * p.r_na)
        horizon = delta + 20.0 * p.c * max(p.r_na, p.r_nb)
        second = ExpTrajectory(("fall", "ab"), delta, first.output(delta), 0.0, both_tau)
        traj = Trajectory([first, second], horizon)
    crossings = traj.output_crossings(level, xtol=0.0)
    if not crossings:
        raise RuntimeError("discharge trajectory never reached half supply")
    return crossings[0]


def _charge_extremal_delay(slope_sum: float, p: NorAdvancedParams) -> float:
    """Crossing time of the one-sided charge law with combined slope ``slope_sum``.

    Solves exp(-t/b) * (1 + t/b) = 2^(-2RC/b) for t, with b the slope over
    the pull-up resistance, via the lower Lambert branch.
    """
    b = slope_sum / (2.0 * p.r)
    exponent = 2.0 * p.r * p.c / b  # == 4 R^2 C / slope_sum
    arg = -math.exp(-1.0 - exponent * LOG2)
    if arg == 0.0:
        # Underflow: asymptotic expansion of the lower branch at 0-.
        l1 = -1.0 - exponent * LOG2
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)
    else:
        w = lambert_wm1(arg)
    return -b * (1.0 + w)


def extremal_delays(p: NorAdvancedParams) -> ExtremalDelays:
    """Rising-output delays at zero and infinite input separation."""
    return ExtremalDelays(
        at_zero=_charge_extremal_delay(p.alpha1 + p.alpha2, p),
        at_plus_inf=_charge_extremal_delay(p.alpha2, p),
        at_minus_inf=_charge_extremal_delay(p.alpha1, p),
    )


def mis_delay_rising_output(delta: float, p: NorAdvancedParams) -> float:
    """Pasted asymptotic rising-output delay, measured from the later falling input."""
    ext = extremal_delays(p)
    if delta < 0.0:
        p, delta = symmetry_swap(p, delta)
        limit = ext.at_minus_inf
    else:
        limit = ext.at_plus_inf
    if math.isinf(delta):
        return limit
    linear = ext.at_zero - p.alpha1 / (p.alpha1 + p.alpha2) * delta
    return linear if linear > limit else limit


def exact_delay_rising_output(delta: float, p: NorAdvancedParams) -> float:
    """Exact rising-output delay: root of the charge law at half supply.

    Bracketed from [0, 10*(delay_at_zero + 2RC)] with doubling; the returned
    time satisfies the defining equation to root-finder precision.
    """
    if delta < 0.0:
        p, delta = symmetry_swap(p, delta)
    gate = NorAdvancedGate(p)
    if delta == 0.0:
        mode = ("rise", "both")
    else:
        mode = ("rise", "b_last", delta)
    traj = gate.make_trajectory(mode, (0.0,), 0.0)
    hint = 10.0 * (extremal_delays(p).at_zero + 2.0 * p.r * p.c)
    return traj.crossing_time(p.v_dd / 2.0, hint)


def total_gate_delay(delta: float, edge: str, p: NorAdvancedParams) -> float:
    """Externally observable delay: pure delay plus the switching delay.

    ``edge`` names the output edge: "fall" for rising inputs, "rise" for
    falling inputs.  Uses the exact crossing for the rising edge so that the
    value matches a full event-driven simulation of the gate.
    """
    if edge == "fall":
        return p.delta_min + mis_delay_falling_output(delta, p)
    if edge == "rise":
        return p.delta_min + exact_delay_rising_output(delta, p)
    raise ValueError(f"edge must be 'fall' or 'rise', got {edge!r}")


@dataclass(frozen=True)
class MisDelayCurve:
    """Sampled delay-vs-separation curve with both computation routes."""

    edge: str
    samples: tuple[tuple[float, float, float], ...]  # (delta, asymptotic, exact)


def sweep_curve(
    edge: str, delta_lo: float, delta_hi: float, steps: int, p: NorAdvancedParams
) -> MisDelayCurve:
    """Evaluate both delay routes on a uniform separation grid."""
    if edge not in ("fall", "rise"):
        raise ValueError(f"edge must be 'fall' or 'rise', got {edge!r}")
    if steps < 2:
        raise ValueError("a sweep needs at least 2 steps")
    if not (delta_lo < delta_hi):
        raise ValueError("sweep range must satisfy delta_lo < delta_hi")
    samples = []
    for i in range(steps):
        delta = delta_lo + (delta_hi - delta_lo) * i / (steps - 1)
        if edge == "fall":
            asym = mis_delay_falling_output(delta, p)
            exact = exact_delay_falling_output(delta, p)
        else:
            asym = mis_delay_rising_output(delta, p)
            exact = exact_delay_rising_output(delta, p)
        samples.append((delta, asym, exact))
    return MisDelayCurve(edge=edge, samples=tuple(samples))


def write_curve_csv(curve: MisDelayCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta_s", "delay_asymptotic_s", "delay_exact_s"])
        for delta, asym, exact in curve.samples:
            writer.writerow([f"{delta:.17g}", f"{asym:.17g}", f"{exact:.17g}"])


def read_curve_rows(path) -> Iterable[tuple[float, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [(float(a), float(b), float(c)) for a, b, c in reader]
