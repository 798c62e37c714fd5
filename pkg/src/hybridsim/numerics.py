"""Special functions and bracketed root finding used by the delay formulas.

The two real branches of the Lambert W function (the inverse of ``w * exp(w)``)
are implemented from scratch: an asymptotic or series initial guess refined by
Halley iteration, with a dedicated series expansion around the branch point
``x = -1/e`` where Halley's method degenerates.  Root finding is a classic
bracketing hybrid (bisection / secant / inverse quadratic interpolation) that
converges for any continuous function with a sign change on the bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "Bracket",
    "DomainError",
    "NoSignChangeError",
    "ConvergenceError",
    "lambert_w0",
    "lambert_wm1",
    "find_root",
]

BRANCH_POINT = -1.0 / math.e


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class NoSignChangeError(ValueError):
    """Root bracket does not enclose a sign change."""


class ConvergenceError(RuntimeError):
    """Iteration failed to converge within the iteration budget."""


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] asserted by the caller to enclose a root."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def _branch_series(x: float, branch: int) -> float:
    # Expansion around the branch point in p = sqrt(2*(e*x + 1)); the lower
    # branch takes p -> -p.  Error is O(p^5), far below 1e-12 for |p| < 1e-2.
    p = math.sqrt(2.0 * (math.e * x + 1.0))
    if branch == -1:
        p = -p
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))


def _halley(w: float, x: float) -> float:
    # Halley iteration on f(w) = w*exp(w) - x; cubic convergence away from the
    # branch point where f'(w) = exp(w)*(w + 1) vanishes.
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            return w
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0 or not math.isfinite(denom):
            break
        step = f / denom
        w -= step
        if abs(step) <= 2e-16 * (1.0 + abs(w)):
            return w
    return w


def _residual_ok(w: float, x: float) -> bool:
    return abs(w * math.exp(w) - x) <= 1e-12 * max(abs(x), 1e-300)


def lambert_w0(x: float) -> float:
    """Principal real branch: the solution w >= -1 of ``w * exp(w) = x``.

    Defined for ``x >= -1/e``; accurate to a relative residual of 1e-12.
    """
    if math.isnan(x) or x < BRANCH_POINT:
        if x > BRANCH_POINT - 1e-12 * abs(BRANCH_POINT):
            return -1.0
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x}")
    if x <= BRANCH_POINT + 1e-12 * abs(BRANCH_POINT):
        return -1.0  # cancellation-free representative of the branch point
    if x == 0.0:
        return 0.0
    if x <= -0.25:
        w = _branch_series(x, 0)
        if 2.0 * (math.e * x + 1.0) < 1e-8:
            return w  # Halley unstable this close to the branch point
    elif x < 1.0:
        # Taylor series of W0 at 0 as the starting point.
        w = x * (1.0 + x * (-1.0 + x * 1.5))
        if x > 0.5:
            w = 0.4
    else:
        l1 = math.log(x)
        l2 = math.log(l1) if l1 > 0 else 0.0
        w = l1 - l2 + (l2 / l1 if l1 != 0 else 0.0)
        w = max(w, 1e-8)
    w = _halley(w, x)
    if w < -1.0:
        w = -1.0
    if not _residual_ok(w, x):
        raise ConvergenceError(f"lambert_w0 failed to converge at x={x!r}")
    return w


def lambert_wm1(x: float) -> float:
    """Lower real branch: the solution w <= -1 of ``w * exp(w) = x``.

    Defined for ``-1/e <= x < 0``; accurate to a relative residual of 1e-12.
    """
    if math.isnan(x) or x >= 0.0:
        raise DomainError(f"lambert_wm1 requires x < 0, got {x}")
    if x < BRANCH_POINT:
        if x > BRANCH_POINT - 1e-12 * abs(BRANCH_POINT):
            return -1.0
        raise DomainError(f"lambert_wm1 requires x >= -1/e, got {x}")
    if x <= BRANCH_POINT + 1e-12 * abs(BRANCH_POINT):
        return -1.0
    if x >= -0.27:
        # Log-based asymptotic guess, exact in the x -> 0- limit.
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    else:
        w = _branch_series(x, -1)
        if 2.0 * (math.e * x + 1.0) < 1e-8:
            return w
    w = _halley(w, x)
    if w > -1.0:
        w = -1.0
    if not _residual_ok(w, x):
        raise ConvergenceError(f"lambert_wm1 failed to converge at x={x!r}")
    return w


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = 1e-15,
    max_iter: int = 200,
) -> float:
    """Locate a root of ``f`` inside ``bracket`` by Brent's method.

    The bracket must satisfy ``f(lo) * f(hi) <= 0``.  Returns a point where
    either the residual is exactly zero or the enclosing interval has shrunk
    to ``tol`` plus a machine-precision term.  Deterministic: identical inputs
    always produce the identical float.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a, b = bracket.lo, bracket.hi
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChangeError(
            f"f({a!r})={fa!r} and f({b!r})={fb!r} have the same sign"
        )
    c, fc = a, fa
    e = d = b - a
    for _ in range(max_iter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        eps_tol = 2.0 * 2.220446049250313e-16 * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= eps_tol or fb == 0.0:
            return b
        if abs(e) < eps_tol or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(eps_tol * q), abs(e * q)):
                e = d
                d = p / q
            else:
                e = d = m
        a, fa = b, fb
        b += d if abs(d) > eps_tol else math.copysign(eps_tol, m)
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            e = d = b - a
    raise ConvergenceError(f"find_root did not converge within {max_iter} iterations")
