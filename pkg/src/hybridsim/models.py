"""Concrete gate families.

Three models are provided:

* a single-input first-order RC channel (optionally inverting) whose rising
  and falling waveforms are plain exponentials,
* a two-input CMOS NOR with an internal node, where each input state selects
  a constant-coefficient 2x2 linear system solved in closed form, and
* an advanced two-input CMOS NOR whose pull-up resistors turn on gradually
  (hyperbolic resistance decay), which reproduces multi-input-switching
  delay effects for both output edges.

All quantities are SI: seconds, ohms, farads, volts.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .gate import DigitizedGate, ModeTracker
from .trajectory import (
    ChargeTrajectory,
    ExpTrajectory,
    Linear2x2Trajectory,
    ModeTrajectory,
    MultiExpTrajectory,
)

__all__ = [
    "IdmExpParams",
    "NorSimpleParams",
    "NorAdvancedParams",
    "ChargeCoefficients",
    "IdmExpGate",
    "NorSimpleGate",
    "NorAdvancedGate",
    "symmetry_swap",
    "build_gate",
    "load_params",
    "dump_params",
    "nor_15nm",
]


def _require_positive(**fields) -> None:
    for name, value in fields.items():
        if not (value > 0.0) or not math.isfinite(value):
            raise ValueError(f"{name} must be positive and finite, got {value}")


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class IdmExpParams:
    """First-order RC channel: exponential rise/fall with time constant tau."""

    tau: float
    delta_min: float
    v_dd: float = 1.0
    threshold: float | None = None
    inverting: bool = False

    def __post_init__(self):
        _require_positive(tau=self.tau, v_dd=self.v_dd)
        if self.delta_min < 0.0:
            raise ValueError("delta_min must be nonnegative")
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.v_dd / 2.0)
        if not (0.0 < self.threshold < self.v_dd):
            raise ValueError("threshold must lie strictly inside (0, v_dd)")


@dataclass(frozen=True)
class NorSimpleParams:
    """Four-mode NOR: ideal switches with on-resistances and an internal node.

    r1/r2 are the series pull-up resistances (supply -> internal node ->
    output), r3/r4 the parallel pull-down resistances, c the load capacitance
    and c_int the internal-node capacitance.
    """

    r1: float
    r2: float
    r3: float
    r4: float
    c: float
    c_int: float
    v_dd: float = 1.0
    threshold: float | None = None
    delta_min_a: float = 1e-12
    delta_min_b: float = 1e-12

    def __post_init__(self):
        _require_positive(
            r1=self.r1, r2=self.r2, r3=self.r3, r4=self.r4, c=self.c, c_int=self.c_int,
            v_dd=self.v_dd,
        )
        if self.delta_min_a < 0.0 or self.delta_min_b < 0.0:
            raise ValueError("pure delays must be nonnegative")
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.v_dd / 2.0)
        if not (0.0 < self.threshold < self.v_dd):
            raise ValueError("threshold must lie strictly inside (0, v_dd)")


@dataclass(frozen=True)
class NorAdvancedParams:
    """NOR with gradually turning-on pull-ups.

    alpha1/alpha2 (ohm-seconds) are the turn-on slopes of the pull-up
    resistors driven by inputs A and B; 2*r is the summed pull-up
    on-resistance; r_na/r_nb the pull-down on-resistances.
    """

    alpha1: float
    alpha2: float
    r: float
    r_na: float
    r_nb: float
    c: float
    v_dd: float = 1.0
    threshold: float | None = None
    delta_min: float = 1e-12

    def __post_init__(self):
        _require_positive(
            alpha1=self.alpha1, alpha2=self.alpha2, r=self.r, r_na=self.r_na,
            r_nb=self.r_nb, c=self.c, v_dd=self.v_dd,
        )
        if self.delta_min < 0.0:
            raise ValueError("delta_min must be nonnegative")
        if self.threshold is None:
            object.__setattr__(self, "threshold", self.v_dd / 2.0)
        if not (0.0 < self.threshold < self.v_dd):
            raise ValueError("threshold must lie strictly inside (0, v_dd)")


def symmetry_swap(p: NorAdvancedParams, delta: float) -> tuple[NorAdvancedParams, float]:
    """Mirror a negative input separation onto the canonical orientation.

    Exchanging the roles of the two inputs (alpha1 <-> alpha2 and
    r_na <-> r_nb) maps a separation of ``delta < 0`` onto ``|delta|``.
    """
    if delta >= 0:
        raise ValueError("symmetry swap applies to negative separations")
    swapped = replace(p, alpha1=p.alpha2, alpha2=p.alpha1, r_na=p.r_nb, r_nb=p.r_na)
    return swapped, -delta


@dataclass(frozen=True)
class ChargeCoefficients:
    """Derived quantities of the staggered pull-up charge law.

    For separation ``delta >= 0`` between the two turn-on instants:
    ``a`` is the combined slope over the pull-up resistance, ``d = a + delta``,
    ``c_prime`` the product of the quadratic's roots, ``chi`` its discriminant
    (provably nonnegative for positive parameters), and ``weight`` the
    partial-fraction weight of the late root.
    """

    a: float
    d: float
    c_prime: float
    chi: float
    sqrt_chi: float
    weight: float
    delta: float

    @classmethod
    def from_params(cls, p: NorAdvancedParams, delta: float) -> "ChargeCoefficients":
        if delta < 0.0:
            raise ValueError("use symmetry_swap for negative separations")
        two_r = 2.0 * p.r
        a = (p.alpha1 + p.alpha2) / two_r
        d = a + delta
        c_prime = p.alpha2 * delta / two_r
        chi = d * d - 4.0 * c_prime
        sqrt_chi = math.sqrt(chi)
        # d - sqrt(chi) via the conjugate form: stable for large delta.
        d_minus = 4.0 * c_prime / (d + sqrt_chi) if c_prime != 0.0 else 0.0
        weight = (a * d_minus / 2.0 - c_prime) / (-sqrt_chi) if sqrt_chi != 0.0 else 0.0
        return cls(a=a, d=d, c_prime=c_prime, chi=chi, sqrt_chi=sqrt_chi,
                   weight=weight, delta=delta)

    @property
    def d_minus(self) -> float:
        return 4.0 * self.c_prime / (self.d + self.sqrt_chi) if self.c_prime else 0.0

    @property
    def roots(self) -> tuple[float, float]:
        return (-self.d_minus / 2.0, -(self.d + self.sqrt_chi) / 2.0)


# ---------------------------------------------------------------------------
# IDM exp channel


class IdmExpGate(DigitizedGate):
    """Single-input channel: pure delay, exponential slew, comparator."""

    input_count = 1
    state_dim = 1
    output_index = 0

    def __init__(self, params: IdmExpParams):
        self.params = params
        self.pure_delays = (params.delta_min,)
        self.threshold = params.threshold
        self.v_dd = params.v_dd

    def mode_of(self, bits):
        high = bool(bits[0]) != self.params.inverting
        return "charge" if high else "discharge"

    def steady_state(self, mode):
        return (self.v_dd,) if mode == "charge" else (0.0,)

    def make_trajectory(self, mode, entry_state, entry_time) -> ModeTrajectory:
        target = self.v_dd if mode == "charge" else 0.0
        return ExpTrajectory(mode, entry_time, entry_state[0], target, self.params.tau)

    def rhs_bound(self):
        return self.v_dd / self.params.tau

    def lipschitz_bound(self):
        return 1.0 / self.params.tau


# ---------------------------------------------------------------------------
# simple NOR


class NorSimpleGate(DigitizedGate):
    """Two-input NOR whose four input states select 2x2 linear systems."""

    input_count = 2
    state_dim = 2
    output_index = 1  # state is (internal node, output)

    def __init__(self, params: NorSimpleParams):
        self.params = params
        self.pure_delays = (params.delta_min_a, params.delta_min_b)
        self.threshold = params.threshold
        self.v_dd = params.v_dd
        p = params
        k1i = 1.0 / (p.c_int * p.r1)
        k2i = 1.0 / (p.c_int * p.r2)
        k2o = 1.0 / (p.c * p.r2)
        k3o = 1.0 / (p.c * p.r3)
        # Coupled systems: both pull-ups on, or the A-side path to ground.
        self._sys = {
            (1, 0): ([[-k2i, k2i], [k2o, -(k2o + k3o)]], [0.0, 0.0]),
            (0, 0): ([[-(k1i + k2i), k2i], [k2o, -k2o]], [p.v_dd * k1i, 0.0]),
        }

    def mode_of(self, bits):
        return tuple(bits)

    def steady_state(self, mode):
        a, b = mode
        if (a, b) == (0, 0):
            return (self.v_dd, self.v_dd)
        if (a, b) == (0, 1):
            return (self.v_dd, 0.0)
        # Both-high keeps the internal node isolated; the fully discharged
        # point is the conventional representative of its fixed-point family.
        return (0.0, 0.0)

    def make_trajectory(self, mode, entry_state, entry_time) -> ModeTrajectory:
        p = self.params
        a, b = mode
        if (a, b) == (1, 1):
            tau_out = p.c / (1.0 / p.r3 + 1.0 / p.r4)
            return MultiExpTrajectory(
                mode, entry_time, entry_state,
                targets=(entry_state[0], 0.0), taus=(math.inf, tau_out), output_index=1,
            )
        if (a, b) == (0, 1):
            return MultiExpTrajectory(
                mode, entry_time, entry_state,
                targets=(p.v_dd, 0.0), taus=(p.c_int * p.r1, p.c * p.r4), output_index=1,
            )
        matrix, offset = self._sys[(a, b)]
        return Linear2x2Trajectory(mode, entry_time, entry_state, matrix, offset,
                                   output_index=1)

    def mode_matrix(self, mode):
        """Right-hand side (matrix, offset) of a mode, for residual checks."""
        p = self.params
        a, b = mode
        if (a, b) == (1, 1):
            k34 = (1.0 / p.r3 + 1.0 / p.r4) / p.c
            return np.array([[0.0, 0.0], [0.0, -k34]]), np.zeros(2)
        if (a, b) == (0, 1):
            k1i = 1.0 / (p.c_int * p.r1)
            k4o = 1.0 / (p.c * p.r4)
            return np.array([[-k1i, 0.0], [0.0, -k4o]]), np.array([p.v_dd * k1i, 0.0])
        matrix, offset = self._sys[(a, b)]
        return np.array(matrix), np.array(offset)

    def rhs_bound(self):
        worst = 0.0
        corners = [(x, y) for x in (0.0, self.v_dd) for y in (0.0, self.v_dd)]
        for mode in ((0, 0), (0, 1), (1, 0), (1, 1)):
            matrix, offset = self.mode_matrix(mode)
            for corner in corners:
                worst = max(worst, float(np.linalg.norm(matrix @ corner + offset)))
        return worst

    def lipschitz_bound(self):
        return max(
            float(np.linalg.norm(self.mode_matrix(m)[0], 2))
            for m in ((0, 0), (0, 1), (1, 0), (1, 1))
        )


# ---------------------------------------------------------------------------
# advanced NOR


class _NorAdvancedTracker(ModeTracker):
    """Tracks the last turn-on instant of each pull-up resistor.

    A pull-up starts turning on when its input falls; the charge law of a
    later all-low state depends on how much earlier the other pull-up
    started.  Inputs that are low from the start count as switched on in the
    infinite past.
    """

    def __init__(self, gate: "NorAdvancedGate", bits):
        self.gate = gate
        self.bits = bits
        self.fall_time = [-math.inf if b == 0 else None for b in bits]
        self.mode = gate.mode_of(bits)

    def switch(self, time, bits):
        for j, (old, new) in enumerate(zip(self.bits, bits)):
            if old == 1 and new == 0:
                self.fall_time[j] = time
        self.bits = bits
        a, b = bits
        if (a, b) != (0, 0):
            self.mode = self.gate.mode_of(bits)
            return self.mode
        age_a = time - self.fall_time[0]
        age_b = time - self.fall_time[1]
        if age_a == 0.0 and age_b == 0.0:
            self.mode = ("rise", "both")
        elif age_a == 0.0:
            self.mode = ("rise", "a_last", age_b)
        else:
            self.mode = ("rise", "b_last", age_a)
        return self.mode


class NorAdvancedGate(DigitizedGate):
    """Two-input NOR with gradually turning-on pull-up resistors."""

    input_count = 2
    state_dim = 1
    output_index = 0

    def __init__(self, params: NorAdvancedParams):
        self.params = params
        self.pure_delays = (params.delta_min, params.delta_min)
        self.threshold = params.threshold
        self.v_dd = params.v_dd

    def mode_of(self, bits):
        a, b = bits
        if (a, b) == (1, 0):
            return ("fall", "a")
        if (a, b) == (0, 1):
            return ("fall", "b")
        if (a, b) == (1, 1):
            return ("fall", "ab")
        # All-low with no recorded history: pull-ups fully on since forever.
        return ("rise", "dc")

    def new_tracker(self, bits):
        return _NorAdvancedTracker(self, bits)

    def steady_state(self, mode):
        return (0.0,) if mode[0] == "fall" else (self.v_dd,)

    def discharge_tau(self, mode) -> float:
        p = self.params
        if mode == ("fall", "a"):
            return p.c * p.r_na
        if mode == ("fall", "b"):
            return p.c * p.r_nb
        return p.c * p.r_na * p.r_nb / (p.r_na + p.r_nb)

    def charge_terms(self, mode) -> tuple[tuple[float, float], ...]:
        """Product terms of the charge decay factor for an all-low mode."""
        p = self.params
        two_rc = 2.0 * p.r * p.c
        kind = mode[1]
        if kind == "dc":
            return ()
        if kind == "both":
            b = (p.alpha1 + p.alpha2) / (2.0 * p.r)
            return ((b / two_rc, b),)
        sep = mode[2]
        params = p
        if kind == "a_last":
            params, sep = replace(p, alpha1=p.alpha2, alpha2=p.alpha1), sep
        if math.isinf(sep):
            b = params.alpha2 / (2.0 * params.r)
            return ((b / two_rc, b),)
        if sep == 0.0:
            b = (params.alpha1 + params.alpha2) / (2.0 * params.r)
            return ((b / two_rc, b),)
        k = ChargeCoefficients.from_params(params, sep)
        b1 = (k.d + k.sqrt_chi) / 2.0
        b2 = k.d_minus / 2.0
        return ((k.a - k.weight) / two_rc, b1), (k.weight / two_rc, b2)

    def make_trajectory(self, mode, entry_state, entry_time) -> ModeTrajectory:
        p = self.params
        if mode[0] == "fall":
            return ExpTrajectory(mode, entry_time, entry_state[0], 0.0,
                                 self.discharge_tau(mode))
        return ChargeTrajectory(mode, entry_time, entry_state[0], p.v_dd,
                                2.0 * p.r * p.c, self.charge_terms(mode))

    def rhs_bound(self):
        return self.v_dd * self.lipschitz_bound()

    def lipschitz_bound(self):
        p = self.params
        return max(1.0 / (p.c * p.r_na) + 1.0 / (p.c * p.r_nb),
                   1.0 / (2.0 * p.r * p.c))

    def rhs_value(self, mode, t_local: float, v: float) -> float:
        """Mode right-hand side dV/dt at local time ``t_local``; oracle hook."""
        p = self.params
        if mode == ("fall", "a"):
            return -v / (p.c * p.r_na)
        if mode == ("fall", "b"):
            return -v / (p.c * p.r_nb)
        if mode == ("fall", "ab"):
            return -(v / p.c) * (1.0 / p.r_na + 1.0 / p.r_nb)
        kind = mode[1]
        if kind == "dc":
            conductance = 1.0 / (2.0 * p.r)
        elif kind == "both":
            conductance = t_local / (2.0 * p.r * t_local + p.alpha1 + p.alpha2)
        else:
            # The input that fell last contributes slope/t_local; the earlier
            # one is already ``sep`` seconds into its turn-on.
            sep = mode[2]
            late_slope, early_slope = p.alpha2, p.alpha1
            if kind == "a_last":
                late_slope, early_slope = p.alpha1, p.alpha2
            early = early_slope / (t_local + sep) if not math.isinf(sep) else 0.0
            conductance = (
                1.0 / (late_slope / t_local + early + 2.0 * p.r) if t_local > 0 else 0.0
            )
        return (p.v_dd - v) * conductance / p.c


# ---------------------------------------------------------------------------
# parameter file I/O

_MODEL_FIELDS = {
    "idm_exp": ("tau", "delta_min", "v_dd", "threshold", "inverting"),
    "nor_simple": ("r1", "r2", "r3", "r4", "c", "c_int", "v_dd", "threshold",
                   "delta_min_a", "delta_min_b"),
    "nor_advanced": ("alpha1", "alpha2", "r", "r_na", "r_nb", "c", "v_dd",
                     "threshold", "delta_min"),
}

_MODEL_TYPES = {
    "idm_exp": IdmExpParams,
    "nor_simple": NorSimpleParams,
    "nor_advanced": NorAdvancedParams,
}

_GATE_TYPES = {
    IdmExpParams: IdmExpGate,
    NorSimpleParams: NorSimpleGate,
    NorAdvancedParams: NorAdvancedGate,
}

_MODEL_NAMES = {v: k for k, v in _MODEL_TYPES.items()}


def params_from_dict(doc: dict):
    try:
        model = doc["model"]
    except KeyError:
        raise ValueError("parameter object is missing the 'model' field") from None
    if model not in _MODEL_TYPES:
        raise ValueError(f"unknown gate model {model!r}")
    fields = {}
    for name in _MODEL_FIELDS[model]:
        if name in doc:
            fields[name] = doc[name]
    extra = set(doc) - set(_MODEL_FIELDS[model]) - {"model"}
    if extra:
        raise ValueError(f"unknown fields for model {model!r}: {sorted(extra)}")
    return _MODEL_TYPES[model](**fields)


def params_to_dict(params) -> dict:
    model = _MODEL_NAMES[type(params)]
    doc = {"model": model}
    for name in _MODEL_FIELDS[model]:
        doc[name] = getattr(params, name)
    return doc


def load_params(path):
    with open(path) as fh:
        return params_from_dict(json.load(fh))


def dump_params(params, path) -> None:
    with open(path, "w") as fh:
        json.dump(params_to_dict(params), fh, indent=2)
        fh.write("\n")


def build_gate(params) -> DigitizedGate:
    return _GATE_TYPES[type(params)](params)


def nor_15nm() -> NorAdvancedParams:
    """Reference parameter set of the bundled 15nm NOR instance."""
    ref = importlib.resources.files("hybridsim").joinpath("data/nor_advanced_15nm.json")
    return params_from_dict(json.loads(ref.read_text()))
