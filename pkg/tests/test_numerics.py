import math

import numpy as np
import pytest

from hybridsim.numerics import (
    Bracket,
    DomainError,
    NoSignChangeError,
    find_root,
    lambert_w0,
    lambert_wm1,
)

BP = -1.0 / math.e


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestLambertW0:
    def test_identity_at_zero(self):
        assert lambert_w0(0.0) == 0.0

    def test_branch_point(self):
        assert lambert_w0(BP) == -1.0

    def test_omega_constant_vs_bisection(self):
        # independent oracle: bisection on w*exp(w) - 1 over [0.5, 0.6]
        ref = bisect(lambda w: w * math.exp(w) - 1.0, 0.5, 0.6)
        assert lambert_w0(1.0) == pytest.approx(ref, rel=1e-14)
        assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, rel=1e-13)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            lambert_w0(BP - 1e-6)

    def test_residual_sweep(self):
        xs = np.concatenate([
            BP + np.logspace(-14, 0, 200),
            np.logspace(-10, 10, 200),
        ])
        for x in xs:
            x = float(x)
            if x < BP:
                continue
            w = lambert_w0(x)
            assert abs(w * math.exp(w) - x) <= 1e-12 * max(abs(x), 1e-300)
            assert w >= -1.0


class TestLambertWm1:
    def test_branch_point(self):
        assert lambert_wm1(BP) == -1.0

    def test_small_argument_vs_bisection(self):
        ref = bisect(lambda w: w * math.exp(w) + 1e-3, -20.0, -1.0)
        got = lambert_wm1(-1e-3)
        assert got == pytest.approx(ref, rel=1e-12)
        assert got <= -1.0

    def test_quarter(self):
        w = lambert_wm1(-0.25)
        assert -3.0 < w < -1.0
        assert w * math.exp(w) == pytest.approx(-0.25, rel=1e-13)

    def test_domain_errors(self):
        for bad in (0.0, 1e-3, BP - 1e-6):
            with pytest.raises(DomainError):
                lambert_wm1(bad)

    def test_residual_sweep(self):
        xs = -np.logspace(math.log10(1 / math.e) - 1e-12, -300, 200)
        for x in xs:
            x = float(x)
            if not (BP <= x < 0.0):
                continue
            w = lambert_wm1(x)
            assert abs(w * math.exp(w) - x) <= 1e-12 * abs(x)
            assert w <= -1.0


def test_branch_separation():
    for x in -np.logspace(-8, math.log10(1 / math.e) - 1e-9, 50):
        x = float(x)
        assert lambert_w0(x) >= -1.0 >= lambert_wm1(x)


class TestFindRoot:
    def test_sqrt_two(self):
        r = find_root(lambda t: t * t - 2.0, Bracket(1.0, 2.0), tol=1e-14)
        assert r == pytest.approx(math.sqrt(2.0), abs=1e-14)

    def test_log_three(self):
        r = find_root(lambda t: math.exp(t) - 3.0, Bracket(0.0, 2.0))
        assert r == pytest.approx(math.log(3.0), rel=1e-14)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            find_root(lambda t: t * t + 1.0, Bracket(0.0, 1.0))

    def test_deterministic(self):
        f = lambda t: math.cos(t) - t  # noqa: E731
        a = find_root(f, Bracket(0.0, 1.0))
        b = find_root(f, Bracket(0.0, 1.0))
        assert a == b

    def test_bracket_ordering(self):
        with pytest.raises(ValueError):
            Bracket(2.0, 1.0)

    def test_endpoint_roots(self):
        assert find_root(lambda t: t, Bracket(0.0, 1.0)) == 0.0
        assert find_root(lambda t: t - 1.0, Bracket(0.0, 1.0)) == 1.0

    def test_iteration_budget(self):
        from hybridsim.numerics import ConvergenceError

        with pytest.raises(ConvergenceError):
            find_root(lambda t: t * t - 2.0, Bracket(1.0, 2.0), tol=0.0, max_iter=2)

    def test_charge_relation_cross_validation(self, p15):
        # The same crossing time must come out of (i) the lower Lambert
        # branch and (ii) a direct root solve of the defining relation.
        from hybridsim.delay import extremal_delays

        p = p15
        a = (p.alpha1 + p.alpha2) / (2.0 * p.r)
        rhs = 2.0 ** (-(2.0 * p.r * p.c) / a)
        root = find_root(
            lambda t: math.exp(-t / a) * (1.0 + t / a) - rhs,
            Bracket(1e-15, 1e-9),
            tol=0.0,
        )
        assert root == pytest.approx(extremal_delays(p).at_zero, rel=1e-12)
