"""Closed-form trajectory pieces and piecewise pasted trajectories.

Every gate mode has an analytic solution family; a full response over an
analysis window is a sequence of such pieces pasted continuously at the mode
switching times.  Pieces expose evaluation (scalar and vectorized), the first
state component as the analog output, and threshold-crossing queries that use
analytic inversion where available and bracketed root finding otherwise.
"""

from __future__ import annotations

import bisect
import math
from typing import Hashable, Sequence

import numpy as np

from .numerics import Bracket, find_root

__all__ = [
    "ModeTrajectory",
    "ConstantTrajectory",
    "ExpTrajectory",
    "MultiExpTrajectory",
    "Linear2x2Trajectory",
    "ChargeTrajectory",
    "Trajectory",
]


class ModeTrajectory:
    """One mode's solution, valid for all times >= entry_time.

    The state is a tuple of voltages; index ``output_index`` is the analog
    output fed to the comparator.
    """

    mode: Hashable
    entry_time: float
    entry_state: tuple[float, ...]
    output_index: int = 0

    def __init__(self, mode, entry_time, entry_state, output_index=0):
        self.mode = mode
        self.entry_time = float(entry_time)
        self.entry_state = tuple(float(v) for v in entry_state)
        self.output_index = output_index

    @property
    def dim(self) -> int:
        return len(self.entry_state)

    def state(self, t: float) -> tuple[float, ...]:
        raise NotImplementedError

    def states(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized state evaluation, shape (len(ts), dim)."""
        return np.array([self.state(float(t)) for t in ts])

    def output(self, t: float) -> float:
        return self.state(t)[self.output_index]

    def outputs(self, ts: np.ndarray) -> np.ndarray:
        return self.states(ts)[:, self.output_index]

    def output_crossings(
        self, level: float, t_lo: float, t_hi: float, xtol: float
    ) -> list[float]:
        """All times in (t_lo, t_hi] where the output passes ``level``.

        A start value exactly at ``level`` is not reported (it belongs to the
        preceding piece); an end value exactly at ``level`` is.
        """
        raise NotImplementedError


class ConstantTrajectory(ModeTrajectory):
    def state(self, t):
        return self.entry_state

    def states(self, ts):
        return np.tile(self.entry_state, (len(ts), 1))

    def output_crossings(self, level, t_lo, t_hi, xtol):
        return []


class ExpTrajectory(ModeTrajectory):
    """Scalar exponential approach to a fixed target with time constant tau."""

    def __init__(self, mode, entry_time, entry_value, target, tau):
        super().__init__(mode, entry_time, (entry_value,))
        self.target = float(target)
        self.tau = float(tau)

    def state(self, t):
        s = t - self.entry_time
        v = self.target + (self.entry_state[0] - self.target) * math.exp(-s / self.tau)
        return (v,)

    def states(self, ts):
        s = np.asarray(ts, dtype=float) - self.entry_time
        v = self.target + (self.entry_state[0] - self.target) * np.exp(-s / self.tau)
        return v[:, None]

    def output_crossings(self, level, t_lo, t_hi, xtol):
        v0 = self.entry_state[0]
        num = v0 - self.target
        den = level - self.target
        if num == 0.0 or den == 0.0:
            return []
        ratio = num / den
        if ratio < 1.0:  # level not between v0 and target, or already past it
            return []
        t = self.entry_time + self.tau * math.log(ratio)
        if t_lo < t <= t_hi:
            return [t]
        return []


class MultiExpTrajectory(ModeTrajectory):
    """Componentwise-independent exponentials (decoupled modes)."""

    def __init__(self, mode, entry_time, entry_state, targets, taus, output_index=0):
        super().__init__(mode, entry_time, entry_state, output_index)
        self.targets = tuple(float(v) for v in targets)
        self.taus = tuple(float(v) for v in taus)  # tau=inf means frozen component

    def state(self, t):
        s = t - self.entry_time
        out = []
        for v0, tgt, tau in zip(self.entry_state, self.targets, self.taus):
            if math.isinf(tau):
                out.append(v0)
            else:
                out.append(tgt + (v0 - tgt) * math.exp(-s / tau))
        return tuple(out)

    def states(self, ts):
        s = np.asarray(ts, dtype=float) - self.entry_time
        cols = []
        for v0, tgt, tau in zip(self.entry_state, self.targets, self.taus):
            if math.isinf(tau):
                cols.append(np.full_like(s, v0))
            else:
                cols.append(tgt + (v0 - tgt) * np.exp(-s / tau))
        return np.stack(cols, axis=1)

    def output_crossings(self, level, t_lo, t_hi, xtol):
        k = self.output_index
        proxy = ExpTrajectory(
            self.mode, self.entry_time, self.entry_state[k], self.targets[k], self.taus[k]
        )
        if math.isinf(self.taus[k]):
            return []
        return proxy.output_crossings(level, t_lo, t_hi, xtol)


class Linear2x2Trajectory(ModeTrajectory):
    """Exact solution of x' = A x + b for a constant 2x2 system.

    Requires A to be invertible with real eigenvalues; the repeated-eigenvalue
    (defective) case falls back to the ``(u + v s) e^{lambda s}`` form.
    """

    def __init__(self, mode, entry_time, entry_state, matrix, offset, output_index=1):
        super().__init__(mode, entry_time, entry_state, output_index)
        A = np.asarray(matrix, dtype=float)
        b = np.asarray(offset, dtype=float)
        self.matrix = A
        self.offset = b
        self.fixed_point = np.linalg.solve(A, -b)
        y0 = np.asarray(self.entry_state) - self.fixed_point
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = tr * tr - 4.0 * det
        if disc < 0:
            raise ValueError("complex eigenvalues are outside the RC model family")
        sq = math.sqrt(disc)
        lam1 = 0.5 * (tr + sq)
        lam2 = 0.5 * (tr - sq)
        scale = max(abs(lam1), abs(lam2), 1.0)
        if abs(lam1 - lam2) > 1e-9 * scale:
            self.degenerate = False
            self.lam = (lam1, lam2)
            # x(s) = x* + P1 y0 e^{lam1 s} + P2 y0 e^{lam2 s} with spectral projectors
            ident = np.eye(2)
            p1 = (A - lam2 * ident) / (lam1 - lam2)
            p2 = (A - lam1 * ident) / (lam2 - lam1)
            self.coef = (p1 @ y0, p2 @ y0)
        else:
            lam = 0.5 * (lam1 + lam2)
            self.degenerate = True
            self.lam = (lam, lam)
            # x(s) = x* + (y0 + s (A - lam I) y0) e^{lam s}
            self.coef = (y0, (A - lam * np.eye(2)) @ y0)

    def state(self, t):
        s = t - self.entry_time
        if self.degenerate:
            x = self.fixed_point + (self.coef[0] + s * self.coef[1]) * math.exp(self.lam[0] * s)
        else:
            x = (
                self.fixed_point
                + self.coef[0] * math.exp(self.lam[0] * s)
                + self.coef[1] * math.exp(self.lam[1] * s)
            )
        return tuple(x)

    def states(self, ts):
        s = (np.asarray(ts, dtype=float) - self.entry_time)[:, None]
        if self.degenerate:
            return self.fixed_point + (self.coef[0] + s * self.coef[1]) * np.exp(self.lam[0] * s)
        return (
            self.fixed_point
            + self.coef[0] * np.exp(self.lam[0] * s)
            + self.coef[1] * np.exp(self.lam[1] * s)
        )

    def _out(self, s):
        k = self.output_index
        if self.degenerate:
            return self.fixed_point[k] + (self.coef[0][k] + s * self.coef[1][k]) * math.exp(
                self.lam[0] * s
            )
        return (
            self.fixed_point[k]
            + self.coef[0][k] * math.exp(self.lam[0] * s)
            + self.coef[1][k] * math.exp(self.lam[1] * s)
        )

    def _critical_point(self):
        # Zero of the output derivative; a two-exponential sum has at most one.
        k = self.output_index
        if self.degenerate:
            c, d = self.coef[0][k], self.coef[1][k]
            lam = self.lam[0]
            if d == 0.0 or lam == 0.0:
                return None
            s = -(c * lam + d) / (d * lam)
            return s if s > 0 else None
        c1 = self.coef[0][k] * self.lam[0]
        c2 = self.coef[1][k] * self.lam[1]
        if c1 == 0.0 or c2 == 0.0:
            return None
        ratio = -c2 / c1
        if ratio <= 0.0:
            return None
        s = math.log(ratio) / (self.lam[0] - self.lam[1])
        return s if s > 0 else None

    def output_crossings(self, level, t_lo, t_hi, xtol):
        lo = max(t_lo, self.entry_time) - self.entry_time
        hi = t_hi - self.entry_time
        if hi <= lo:
            return []
        knots = [lo, hi]
        sc = self._critical_point()
        if sc is not None and lo < sc < hi:
            knots = [lo, sc, hi]
        found = []
        for a, b in zip(knots[:-1], knots[1:]):
            fa = self._out(a) - level
            fb = self._out(b) - level
            if fa == 0.0 and not found and a == lo:
                continue  # boundary value at the window start belongs upstream
            if fb == 0.0:
                found.append(self.entry_time + b)
                continue
            if fa * fb < 0.0:
                s = find_root(lambda u: self._out(u) - level, Bracket(a, b), tol=xtol)
                found.append(self.entry_time + s)
        return found


class ChargeTrajectory(ModeTrajectory):
    """Monotone charge toward the supply rail through turning-on resistors.

    The decay factor of the distance to the rail has the product form
    ``exp(-s/tau) * prod_k (1 + s/b_k)^{w_k}``, which covers the plain RC
    charge (no product terms), the simultaneous-switch case (one term), and
    the staggered-switch case (two terms).
    """

    def __init__(self, mode, entry_time, entry_value, rail, tau, terms=()):
        super().__init__(mode, entry_time, (entry_value,))
        self.rail = float(rail)
        self.tau = float(tau)
        self.terms = tuple((float(w), float(b)) for w, b in terms)
        for _, b in self.terms:
            if b <= 0:
                raise ValueError("product-term origin must be positive")

    def decay(self, s: float) -> float:
        """Fraction of the initial rail distance remaining after s seconds."""
        acc = -s / self.tau
        for w, b in self.terms:
            acc += w * math.log1p(s / b)
        return math.exp(acc)

    def state(self, t):
        s = t - self.entry_time
        return (self.rail + (self.entry_state[0] - self.rail) * self.decay(s),)

    def states(self, ts):
        s = np.asarray(ts, dtype=float) - self.entry_time
        acc = -s / self.tau
        for w, b in self.terms:
            acc = acc + w * np.log1p(s / b)
        v = self.rail + (self.entry_state[0] - self.rail) * np.exp(acc)
        return v[:, None]

    def output_crossings(self, level, t_lo, t_hi, xtol):
        v0 = self.entry_state[0]
        if v0 == self.rail:
            return []
        target = (level - self.rail) / (v0 - self.rail)
        if not (0.0 < target < 1.0):
            return []
        lo = max(t_lo, self.entry_time) - self.entry_time
        hi = t_hi - self.entry_time
        if hi <= lo:
            return []
        if self.decay(lo) <= target or self.decay(hi) > target:
            return []
        s = find_root(lambda u: self.decay(u) - target, Bracket(lo, hi), tol=xtol)
        return [self.entry_time + s]

    def crossing_time(self, level, hint: float, xtol: float = 0.0) -> float:
        """Time after entry to reach ``level``, with bracket doubling from ``hint``."""
        v0 = self.entry_state[0]
        target = (level - self.rail) / (v0 - self.rail)
        hi = hint
        for _ in range(200):
            if self.decay(hi) <= target:
                break
            hi *= 2.0
        else:
            raise ValueError("charge trajectory never reaches the requested level")
        return find_root(lambda u: self.decay(u) - target, Bracket(0.0, hi), tol=xtol)


class Trajectory:
    """Contiguous mode pieces covering an analysis window [0, horizon]."""

    def __init__(self, pieces: Sequence[ModeTrajectory], horizon: float):
        if not pieces:
            raise ValueError("a trajectory needs at least one piece")
        self.pieces = list(pieces)
        self.horizon = float(horizon)
        self.starts = [p.entry_time for p in self.pieces]
        if self.starts[0] != 0.0:
            raise ValueError("first piece must start at time 0")
        if any(b <= a for a, b in zip(self.starts[:-1], self.starts[1:])):
            raise ValueError("piece entry times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    def piece_index(self, t: float) -> int:
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def piece_at(self, t: float) -> ModeTrajectory:
        return self.pieces[self.piece_index(t)]

    def state(self, t: float) -> tuple[float, ...]:
        return self.piece_at(t).state(t)

    def output(self, t: float) -> float:
        return self.piece_at(t).output(t)

    def states(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), self.dim))
        idx = np.searchsorted(self.starts, ts, side="right") - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        for k in range(len(self.pieces)):
            mask = idx == k
            if mask.any():
                out[mask] = self.pieces[k].states(ts[mask])
        return out

    def outputs(self, ts: np.ndarray) -> np.ndarray:
        k = self.pieces[0].output_index
        return self.states(ts)[:, k]

    def output_crossings(self, level: float, xtol: float) -> list[float]:
        """All crossing times of the output through ``level`` in (0, horizon].

        Each piece is searched on (entry, horizon] and the hits are clipped
        to the piece's validity window; a crossing landing exactly on the
        next mode-switch instant is dropped, mirroring the event engine
        where a simultaneous mode switch supersedes the crossing.
        """
        times: list[float] = []
        for i, piece in enumerate(self.pieces):
            lo = self.starts[i]
            final = i + 1 == len(self.pieces)
            end = self.horizon if final else self.starts[i + 1]
            if end <= lo and not final:
                continue
            for t in piece.output_crossings(level, lo, self.horizon, xtol):
                if t < end or (final and t <= self.horizon):
                    times.append(t)
        return times

    def seam_mismatch(self) -> float:
        """Largest output discontinuity across piece boundaries."""
        worst = 0.0
        for prev, nxt in zip(self.pieces[:-1], self.pieces[1:]):
            a = prev.output(nxt.entry_time)
            b = nxt.output(nxt.entry_time)
            worst = max(worst, abs(a - b))
        return worst
