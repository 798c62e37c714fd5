"""Fitting-free gate parametrization from six characteristic delays.

Given the measured total delays of a NOR gate at input separations of zero
and +/-infinity for both output edges, the advanced model's parameters are
recovered in closed form (pure delay and pull-down resistances) plus one
one-dimensional root solve (pull-up resistance), with the turn-on slopes
falling out of the same inversion.  The load capacitance is a free scale
choice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .models import NorAdvancedParams
from .numerics import Bracket, find_root, lambert_wm1

__all__ = [
    "CharacteristicDelays",
    "CharacterizationResult",
    "InconsistentDelaysError",
    "derive_pure_delay_and_nmos",
    "pullup_slope_from_delay",
    "characterize_gate",
    "characterize_gate_detailed",
    "load_delays",
    "dump_delays",
]

LOG2 = math.log(2.0)


class InconsistentDelaysError(ValueError):
    """The six delays cannot be produced by any parameter assignment."""


@dataclass(frozen=True)
class CharacteristicDelays:
    """Total measured delays (including the pure delay), in seconds.

    ``fall_*`` are falling-output delays at separations -inf, 0, +inf;
    ``rise_*`` the rising-output ones.  A physical gate slows the falling
    edge and speeds the rising edge as the separation shrinks, so the zero
    entries must be extremal.
    """

    fall_minus_inf: float
    fall_zero: float
    fall_inf: float
    rise_minus_inf: float
    rise_zero: float
    rise_inf: float

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise InconsistentDelaysError(f"{name} must be positive, got {v}")
        if not (self.fall_zero < min(self.fall_inf, self.fall_minus_inf)):
            raise InconsistentDelaysError(
                "falling-output delay at zero separation must be the smallest"
            )
        if not (self.rise_zero > max(self.rise_inf, self.rise_minus_inf)):
            raise InconsistentDelaysError(
                "rising-output delay at zero separation must be the largest"
            )


def derive_pure_delay_and_nmos(
    d: CharacteristicDelays, c: float
) -> tuple[float, float, float]:
    """Pure delay and pull-down resistances from the falling-output delays.

    Returns (delta_min, r_na, r_nb).  The pure delay solves the parallel-
    resistance consistency condition between the three delays; its radicand
    being negative means no model instance can match the inputs.
    """
    if not (c > 0.0):
        raise ValueError("capacitance must be positive")
    radicand = (d.fall_inf - d.fall_zero) * (d.fall_minus_inf - d.fall_zero)
    if radicand < 0.0:
        raise InconsistentDelaysError(
            "negative radicand in the pure-delay solution; the falling-output "
            "delays are inconsistent"
        )
    delta_min = d.fall_zero - math.sqrt(radicand)
    if not (0.0 < delta_min < d.fall_zero):
        raise InconsistentDelaysError(
            f"pure delay must come out in (0, fall_zero), got {delta_min}"
        )
    r_nb = (d.fall_minus_inf - delta_min) / (c * LOG2)
    r_na = (d.fall_inf - delta_min) / (c * LOG2)
    return delta_min, r_na, r_nb


def pullup_slope_from_delay(t: float, r: float, c: float) -> float:
    """Invert the one-sided charge law: the slope sum that yields crossing time ``t``.

    Requires ``t > 2*r*c*log(2)`` (the crossing can never beat the plain RC
    charge); evaluates the lower Lambert branch on the reformulated equation.
    """
    g = 2.0 * r * c * LOG2
    if not (t > g):
        raise InconsistentDelaysError(
            f"delay {t} is not above the plain-RC crossing time {g}"
        )
    u = g / t - 1.0  # in (-1, 0)
    w = lambert_wm1(u * math.exp(u))
    return -2.0 * r * (t - g) / (w - u)


@dataclass(frozen=True)
class CharacterizationResult:
    params: NorAdvancedParams
    sign_change_brackets: tuple[tuple[float, float], ...]


def characterize_gate_detailed(
    d: CharacteristicDelays,
    c: float,
    r_lo: float = 1.0,
    r_hi: float = 1e9,
    scan_points: int = 240,
    v_dd: float = 1.0,
) -> CharacterizationResult:
    """Full parametrization; also reports every sign change seen in the scan.

    The pull-up resistance solves a scalar consistency equation between the
    three rising-output delays.  The residual is scanned over a log-spaced
    grid (restricted to the domain where all three inversions exist); the
    first sign change is refined, and any further ones are surfaced so the
    caller can judge uniqueness.
    """
    delta_min, r_na, r_nb = derive_pure_delay_and_nmos(d, c)
    t_zero = d.rise_zero - delta_min
    t_inf = d.rise_inf - delta_min
    t_minus = d.rise_minus_inf - delta_min
    for name, t in (("rise_zero", t_zero), ("rise_inf", t_inf), ("rise_minus_inf", t_minus)):
        if t <= 0.0:
            raise InconsistentDelaysError(f"{name} does not exceed the pure delay")

    def residual(r: float) -> float:
        return (
            pullup_slope_from_delay(t_zero, r, c)
            - pullup_slope_from_delay(t_inf, r, c)
            - pullup_slope_from_delay(t_minus, r, c)
        )

    # All three inversions need t > 2*r*c*log(2); stay inside that domain.
    r_max = min(t_zero, t_inf, t_minus) / (2.0 * c * LOG2)
    hi = min(r_hi, r_max * (1.0 - 1e-12))
    if hi <= r_lo:
        raise InconsistentDelaysError("no admissible pull-up resistance range")
    grid = [r_lo * (hi / r_lo) ** (i / (scan_points - 1)) for i in range(scan_points)]
    brackets = []
    prev_r, prev_f = grid[0], residual(grid[0])
    for r in grid[1:]:
        f = residual(r)
        if prev_f == 0.0:
            brackets.append((prev_r, prev_r))
        elif f != 0.0 and (prev_f > 0.0) != (f > 0.0):
            brackets.append((prev_r, r))
        prev_r, prev_f = r, f
    if not brackets:
        raise InconsistentDelaysError(
            "no pull-up resistance solves the rising-output consistency equation"
        )
    lo, hi = brackets[0]
    r = lo if lo == hi else find_root(residual, Bracket(lo, hi), tol=0.0)
    alpha1 = pullup_slope_from_delay(t_minus, r, c)
    alpha2 = pullup_slope_from_delay(t_inf, r, c)
    params = NorAdvancedParams(
        alpha1=alpha1, alpha2=alpha2, r=r, r_na=r_na, r_nb=r_nb, c=c,
        v_dd=v_dd, threshold=v_dd / 2.0, delta_min=delta_min,
    )
    return CharacterizationResult(params=params, sign_change_brackets=tuple(brackets))


def characterize_gate(d: CharacteristicDelays, c: float, **kwargs) -> NorAdvancedParams:
    """Parametrize the advanced NOR from six delays and a chosen capacitance."""
    return characterize_gate_detailed(d, c, **kwargs).params


_DELAY_KEYS = (
    "fall_minus_inf", "fall_zero", "fall_inf",
    "rise_minus_inf", "rise_zero", "rise_inf",
)


def load_delays(path) -> CharacteristicDelays:
    with open(path) as fh:
        doc = json.load(fh)
    missing = [k for k in _DELAY_KEYS if k not in doc]
    if missing:
        raise ValueError(f"delay file is missing fields: {missing}")
    return CharacteristicDelays(**{k: float(doc[k]) for k in _DELAY_KEYS})


def dump_delays(d: CharacteristicDelays, path) -> None:
    with open(path, "w") as fh:
        json.dump({k: getattr(d, k) for k in _DELAY_KEYS}, fh, indent=2)
        fh.write("\n")
