import json
import math

import numpy as np
import pytest

from hybridsim.signals import (
    BinarySignal,
    ModeSwitchSignal,
    Transition,
    is_pulse,
    l1_distance,
    load_stimuli,
    mode_distance,
    pure_delay_shift,
    spf_check,
    threshold_digitize,
)
from hybridsim.trajectory import ExpTrajectory, Trajectory

from conftest import random_binary_signal


class TestConstruction:
    def test_transition_validation(self):
        with pytest.raises(ValueError):
            Transition(-1.0, 1)
        with pytest.raises(ValueError):
            Transition(math.inf, 1)
        with pytest.raises(ValueError):
            Transition(0.5, 2)

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            BinarySignal.from_pairs(0, [(2.0, 1), (1.0, 0)], 10.0)

    def test_alternation_enforced(self):
        with pytest.raises(ValueError):
            BinarySignal.from_pairs(0, [(1.0, 1), (2.0, 1)], 10.0)
        with pytest.raises(ValueError):
            BinarySignal.from_pairs(1, [(1.0, 1)], 10.0)

    def test_horizon_bound(self):
        with pytest.raises(ValueError):
            BinarySignal.from_pairs(0, [(11.0, 1)], 10.0)

    def test_value_lookup(self):
        s = BinarySignal.from_pairs(0, [(1.0, 1), (3.0, 0)], 10.0)
        assert s.value_at(-1e-9) == 0
        assert s.value_at(1.0) == 1
        assert s.value_at(2.9) == 1
        assert s.value_at(3.0) == 0
        assert list(s.intervals()) == [(0.0, 1.0, 0), (1.0, 3.0, 1), (3.0, 10.0, 0)]

    def test_mode_switch_distinct_modes(self):
        with pytest.raises(ValueError):
            ModeSwitchSignal("a", ((1.0, "a"),), 10.0)


class TestPureDelayShift:
    def test_zero_delay_identity(self):
        s = BinarySignal.from_pairs(0, [(1.0, 1)], 10.0)
        assert pure_delay_shift(s, 0.0) == s

    def test_shift(self):
        s = BinarySignal.from_pairs(0, [(1.0, 1)], 10.0)
        out = pure_delay_shift(s, 0.5)
        assert out.transitions == (Transition(1.5, 1),)
        assert out.horizon == 10.0

    def test_constant_signal(self):
        s = BinarySignal.constant(1, 10.0)
        assert pure_delay_shift(s, 3.0) == s

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            pure_delay_shift(BinarySignal.constant(0, 1.0), -1e-12)

    def test_composition(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            s = random_binary_signal(rng, 10.0)
            d1, d2 = rng.uniform(0.0, 2.0, size=2)
            once = pure_delay_shift(s, d1 + d2)
            twice = pure_delay_shift(pure_delay_shift(s, d1), d2)
            # equal up to float associativity of the two time additions
            assert l1_distance(once, twice) <= 4e-15 * s.horizon


class TestL1Distance:
    def test_identical(self):
        s = BinarySignal.from_pairs(0, [(1.0, 1), (4.0, 0)], 10.0)
        assert l1_distance(s, s) == 0.0

    def test_pulse_vs_zero(self):
        pulse = BinarySignal.from_pairs(0, [(2.0, 1), (5.5, 0)], 10.0)
        zero = BinarySignal.constant(0, 10.0)
        assert l1_distance(pulse, zero) == 3.5

    def test_offset_pulses_vs_sampling_oracle(self):
        a = BinarySignal.from_pairs(0, [(2.0, 1), (4.0, 0)], 10.0)
        b = BinarySignal.from_pairs(0, [(2.5, 1), (4.5, 0)], 10.0)
        ts = np.arange(0.0, 10.0, 1e-4)
        grid = float(np.sum([a.value_at(t) != b.value_at(t) for t in ts]) * 1e-4)
        assert l1_distance(a, b) == pytest.approx(1.0, abs=1e-12)
        assert l1_distance(a, b) == pytest.approx(grid, abs=1e-3)

    def test_horizon_mismatch(self):
        with pytest.raises(ValueError):
            l1_distance(BinarySignal.constant(0, 1.0), BinarySignal.constant(0, 2.0))

    def test_metric_axioms_random(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            s1 = random_binary_signal(rng, 8.0)
            s2 = random_binary_signal(rng, 8.0)
            s3 = random_binary_signal(rng, 8.0)
            d12 = l1_distance(s1, s2)
            d13 = l1_distance(s1, s3)
            d23 = l1_distance(s2, s3)
            assert d12 == l1_distance(s2, s1)
            assert d12 >= 0.0
            assert l1_distance(s1, s1) == 0.0
            assert d13 <= d12 + d23 + 1e-12


class TestModeDistance:
    def _sig(self, initial, switches, horizon=10.0):
        return ModeSwitchSignal(initial, tuple(switches), horizon)

    def test_identical(self):
        a = self._sig("m", [(1.0, "n")])
        assert mode_distance(a, a) == 0.0

    def test_constant_disagreement(self):
        a = self._sig("m", [])
        b = self._sig("n", [])
        assert mode_distance(a, b) == 10.0

    def test_shifted_switch(self):
        a = self._sig("m", [(1.0, "n")])
        b = self._sig("m", [(1.3, "n")])
        assert mode_distance(a, b) == pytest.approx(0.3, abs=1e-15)
        ts = np.arange(0.0, 10.0, 1e-4)
        grid = float(np.sum([a.mode_at(t) != b.mode_at(t) for t in ts]) * 1e-4)
        assert mode_distance(a, b) == pytest.approx(grid, abs=1e-3)

    def test_metric_axioms_random(self):
        rng = np.random.default_rng(3)
        modes = ["p", "q", "r"]
        def rand_mode_signal():
            n = int(rng.integers(0, 5))
            times = sorted(set(float(t) for t in rng.uniform(0, 10.0, size=n)))
            cur = modes[rng.integers(0, 3)]
            initial = cur
            sw = []
            for t in times:
                nxt = modes[rng.integers(0, 3)]
                if nxt != cur:
                    sw.append((t, nxt))
                    cur = nxt
            return self._sig(initial, sw)
        for _ in range(200):
            a, b, c = rand_mode_signal(), rand_mode_signal(), rand_mode_signal()
            assert mode_distance(a, b) == mode_distance(b, a)
            assert mode_distance(a, c) <= mode_distance(a, b) + mode_distance(b, c) + 1e-12


class TestThresholdDigitize:
    def test_constant_below(self):
        traj = Trajectory(
            [ExpTrajectory("hold", 0.0, 0.3, 0.3, 1.0)], 10.0)
        out = threshold_digitize(traj, 0.5, 10.0)
        assert out.is_zero()

    def test_exponential_decay_crossing(self):
        tau = 2.0
        traj = Trajectory([ExpTrajectory("down", 0.0, 1.0, 0.0, tau)], 10.0)
        out = threshold_digitize(traj, 0.5, 10.0)
        assert out.initial == 1
        assert len(out.transitions) == 1
        assert out.transitions[0].value == 0
        assert out.transitions[0].time == pytest.approx(tau * math.log(2.0), rel=1e-14)

    def test_matches_half_supply_delay(self, p15):
        # Cross-module consistency: digitizing the charge trajectory must
        # place the rising edge at the exact delay root.
        from hybridsim.delay import exact_delay_rising_output
        from hybridsim.models import NorAdvancedGate

        gate = NorAdvancedGate(p15)
        delta = 7e-12
        traj = Trajectory(
            [gate.make_trajectory(("rise", "b_last", delta), (0.0,), 0.0)], 1e-9)
        out = threshold_digitize(traj, p15.v_dd / 2.0, 1e-9)
        assert len(out.transitions) == 1
        expected = exact_delay_rising_output(delta, p15)
        assert out.transitions[0].time == pytest.approx(expected, rel=1e-12)

    def test_dense_grid_agreement_random(self):
        rng = np.random.default_rng(11)
        horizon = 10.0
        for _ in range(25):
            pieces = []
            t0 = 0.0
            value = float(rng.uniform(0.0, 1.0))
            for _ in range(int(rng.integers(1, 5))):
                target = float(rng.uniform(0.0, 1.0))
                tau = float(rng.uniform(0.5, 3.0))
                pieces.append(ExpTrajectory("m", t0, value, target, tau))
                t1 = t0 + float(rng.uniform(0.5, 3.0))
                value = pieces[-1].output(min(t1, horizon))
                t0 = t1
                if t0 >= horizon:
                    break
            traj = Trajectory(pieces, horizon)
            out = threshold_digitize(traj, 0.5, horizon)
            ts = np.linspace(0.0, horizon, 10_000, endpoint=False)
            sampled = traj.outputs(ts) > 0.5
            mine = np.array([out.value_at(t) for t in ts], dtype=bool)
            err = float(np.mean(sampled != mine)) * horizon
            assert err <= horizon * 1e-3


class TestIsPulse:
    def test_zero_signal(self):
        assert is_pulse(BinarySignal.constant(0, 10.0)) is None

    def test_single_pulse(self):
        s = BinarySignal.from_pairs(0, [(2.0, 1), (5.0, 0)], 10.0)
        assert is_pulse(s) == (2.0, 3.0)

    def test_rising_only(self):
        s = BinarySignal.from_pairs(0, [(2.0, 1)], 10.0)
        assert is_pulse(s) is None

    def test_starts_high(self):
        s = BinarySignal.from_pairs(1, [(2.0, 0), (5.0, 1)], 10.0)
        assert is_pulse(s) is None


class TestSpfCheck:
    def test_zero_output_passes(self):
        rep = spf_check(BinarySignal.constant(0, 10.0), 0.1, 2.0, (1.0, 0.5))
        assert rep.ok
        assert not rep.nonzero_output
        assert rep.min_pulse_width is None

    def test_short_pulse_violation(self):
        out = BinarySignal.from_pairs(0, [(2.0, 1), (2.04, 0)], 10.0)
        rep = spf_check(out, 0.1, 5.0, (1.0, 0.5))
        assert rep.short_pulse_violation
        assert not rep.ok
        assert rep.min_pulse_width == pytest.approx(0.04)

    def test_late_transition_violation(self):
        out = BinarySignal.from_pairs(0, [(8.0, 1)], 10.0)
        rep = spf_check(out, 0.1, 2.0, (1.0, 0.5))  # deadline 1.0+0.5+2.0
        assert rep.late_transition_violation
        assert not rep.ok
        assert not rep.short_pulse_violation


def test_stimulus_file_round_trip(tmp_path):
    doc = {
        "horizon": 2e-9,
        "signals": {
            "A": {"initial": 0, "transitions": [[1e-10, 1], [9e-10, 0]]},
            "B": {"initial": 1, "transitions": []},
        },
    }
    path = tmp_path / "stim.json"
    path.write_text(json.dumps(doc))
    signals, horizon = load_stimuli(path)
    assert horizon == 2e-9
    assert signals["A"].transitions == (Transition(1e-10, 1), Transition(9e-10, 0))
    assert signals["B"] == BinarySignal.constant(1, 2e-9)
