"""Dynamic timing analysis with threshold-digitized analog gate models.

Gates are mode-switched first-order systems: delayed digital inputs select a
closed-form analog trajectory, and a comparator digitizes the output.  The
package provides exact output trajectories, multi-input-switching delay
functions, a fitting-free gate parametrization, and a deterministic
event-driven circuit simulator.
"""

from .characterize import (
    CharacteristicDelays,
    CharacterizationResult,
    InconsistentDelaysError,
    characterize_gate,
    characterize_gate_detailed,
    derive_pure_delay_and_nmos,
    pullup_slope_from_delay,
)
from .circuit import (
    Edge,
    EquivalenceReport,
    Execution,
    Netlist,
    SimulationGuardError,
    UnrolledCircuit,
    ValidationError,
    Vertex,
    build_execution,
    causal_depths,
    load_netlist,
    simulation_equivalence_check,
    unroll,
    validate,
    verify_execution,
)
from .delay import (
    ExtremalDelays,
    MisDelayCurve,
    exact_delay_falling_output,
    exact_delay_rising_output,
    extremal_delays,
    mis_delay_falling_output,
    mis_delay_rising_output,
    sweep_curve,
    total_gate_delay,
)
from .gate import (
    ContinuityProbe,
    DigitizedGate,
    build_mode_switch_signal,
    continuity_bound,
    continuity_probe,
    gate_response,
    matching_output,
)
from .models import (
    ChargeCoefficients,
    IdmExpGate,
    IdmExpParams,
    NorAdvancedGate,
    NorAdvancedParams,
    NorSimpleGate,
    NorSimpleParams,
    build_gate,
    load_params,
    nor_15nm,
    symmetry_swap,
)
from .numerics import Bracket, find_root, lambert_w0, lambert_wm1
from .signals import (
    BinarySignal,
    ModeSwitchSignal,
    SpfReport,
    Transition,
    is_pulse,
    l1_distance,
    load_stimuli,
    mode_distance,
    pure_delay_shift,
    spf_check,
    threshold_digitize,
)
from .trajectory import Trajectory

__version__ = "0.1.0"
