import math

import pytest

from hybridsim.models import NorAdvancedParams, NorSimpleParams, nor_15nm


@pytest.fixture(scope="session")
def p15() -> NorAdvancedParams:
    return nor_15nm()


@pytest.fixture(scope="session")
def simple_params() -> NorSimpleParams:
    return NorSimpleParams(
        r1=4.0e3, r2=5.0e3, r3=9.0e3, r4=8.5e3,
        c=4.0e-15, c_int=1.5e-15, v_dd=1.0,
        delta_min_a=2.0e-12, delta_min_b=2.5e-12,
    )


def random_binary_signal(rng, horizon, max_transitions=6):
    """Strictly increasing, alternating random signal on [0, horizon]."""
    from hybridsim.signals import BinarySignal

    n = int(rng.integers(0, max_transitions + 1))
    times = sorted(set(float(t) for t in rng.uniform(0.0, horizon, size=n)))
    initial = int(rng.integers(0, 2))
    pairs = []
    v = initial
    for t in times:
        v = 1 - v
        pairs.append((t, v))
    return BinarySignal.from_pairs(initial, pairs, horizon)


def total_delay_scale(p: NorAdvancedParams) -> float:
    return max(2.0 * p.r * p.c, p.c * p.r_na, p.c * p.r_nb, p.delta_min)


def table3_characteristic_delays(p: NorAdvancedParams):
    """Total measured delays implied by a parameter set (round-trip input)."""
    from hybridsim.characterize import CharacteristicDelays
    from hybridsim.delay import extremal_delays

    ext = extremal_delays(p)
    ln2 = math.log(2.0)
    return CharacteristicDelays(
        fall_minus_inf=p.delta_min + ln2 * p.c * p.r_nb,
        fall_zero=p.delta_min + ln2 * p.c * p.r_na * p.r_nb / (p.r_na + p.r_nb),
        fall_inf=p.delta_min + ln2 * p.c * p.r_na,
        rise_minus_inf=p.delta_min + ext.at_minus_inf,
        rise_zero=p.delta_min + ext.at_zero,
        rise_inf=p.delta_min + ext.at_plus_inf,
    )
