import math

import pytest

from hybridsim.circuit import (
    Edge,
    Netlist,
    SimulationGuardError,
    ValidationError,
    Vertex,
    build_execution,
    causal_depths,
    dump_netlist,
    load_netlist,
    simulation_equivalence_check,
    unroll,
    validate,
    verify_execution,
)
from hybridsim.delay import total_gate_delay
from hybridsim.models import NorAdvancedParams
from hybridsim.signals import BinarySignal
from hybridsim.trace import write_trace_csv, write_trace_vcd


def single_nor(p, initial_output=None):
    return Netlist(
        [Vertex("A", "input"), Vertex("zero", "const", value=0),
         Vertex("g1", "gate", params=p, initial_output=initial_output),
         Vertex("O", "output")],
        [Edge("A", "g1", 0), Edge("zero", "g1", 1), Edge("g1", "O", 0)],
    )


def inverter_ring(p, n=3):
    vertices = [Vertex("zero", "const", value=0), Vertex("O", "output")]
    edges = [Edge(f"n{n}", "O", 0)]
    for i in range(1, n + 1):
        seed = 0 if i == 1 else None
        vertices.append(Vertex(f"n{i}", "gate", params=p, initial_output=seed))
        prev = f"n{n}" if i == 1 else f"n{i-1}"
        edges.append(Edge(prev, f"n{i}", 0))
        edges.append(Edge("zero", f"n{i}", 1))
    return Netlist(vertices, edges)


def figure_loop_circuit(p):
    """Input -> gate A; gate B in a self-loop (tied inactive); C = NOR(A, B)."""
    return Netlist(
        [Vertex("I", "input"), Vertex("zero", "const", value=0),
         Vertex("one", "const", value=1),
         Vertex("A", "gate", params=p),
         Vertex("B", "gate", params=p, initial_output=0),
         Vertex("C", "gate", params=p),
         Vertex("O", "output")],
        [Edge("I", "A", 0), Edge("zero", "A", 1),
         Edge("B", "B", 0), Edge("one", "B", 1),
         Edge("A", "C", 0), Edge("B", "C", 1),
         Edge("C", "O", 0)],
    )


class TestValidate:
    def test_valid_single_nor(self, p15):
        assert validate(single_nor(p15)) == []

    def test_double_driven_input(self, p15):
        net = single_nor(p15)
        net = Netlist(list(net.vertices.values()),
                      net.edges + [Edge("A", "g1", 1)])
        codes = {d.code for d in validate(net)}
        assert "gate-fanin" in codes

    def test_zero_pure_delay_flagged(self, p15):
        lazy = NorAdvancedParams(
            alpha1=p15.alpha1, alpha2=p15.alpha2, r=p15.r, r_na=p15.r_na,
            r_nb=p15.r_nb, c=p15.c, delta_min=0.0)
        diags = validate(single_nor(lazy))
        assert any(d.code == "strict-causality" for d in diags)

    def test_output_port_shape(self, p15):
        net = Netlist(
            [Vertex("A", "input"), Vertex("O", "output"), Vertex("P", "output")],
            [Edge("A", "O", 0), Edge("A", "P", 0), Edge("O", "P", 0)],
        )
        codes = {d.code for d in validate(net)}
        assert "output-fanout" in codes and "output-fanin" in codes

    def test_driven_input_port(self, p15):
        net = Netlist(
            [Vertex("A", "input"), Vertex("B", "input"), Vertex("O", "output")],
            [Edge("A", "B", 0), Edge("A", "O", 0)],
        )
        assert any(d.code == "input-fanin" for d in validate(net))

    def test_dangling_edge(self):
        net = Netlist([Vertex("A", "input")], [Edge("A", "ghost", 0)])
        assert any(d.code == "edge-dst" for d in validate(net))

    def test_missing_gate_params(self):
        net = Netlist(
            [Vertex("A", "input"), Vertex("g", "gate"), Vertex("O", "output")],
            [Edge("A", "g", 0), Edge("g", "O", 0)],
        )
        assert any(d.code == "gate-params" for d in validate(net))


class TestBuildExecution:
    def test_constant_inputs_constant_everywhere(self, p15):
        net = single_nor(p15)
        hor = 1e-9
        ex = build_execution(net, {"A": BinarySignal.constant(0, hor)}, hor)
        assert ex.signals["g1"] == BinarySignal.constant(1, hor)
        assert ex.signals["O"] == BinarySignal.constant(1, hor)

    def test_single_nor_edges_match_delay_module(self, p15):
        net = single_nor(p15)
        hor = 4e-9
        rise_t, fall_t = 3e-10, 2.3e-9
        stim = {"A": BinarySignal.from_pairs(0, [(rise_t, 1), (fall_t, 0)], hor)}
        ex = build_execution(net, stim, hor)
        out = ex.signals["g1"]
        assert [tr.value for tr in out.transitions] == [0, 1]
        assert out.transitions[0].time == pytest.approx(
            rise_t + total_gate_delay(math.inf, "fall", p15), rel=1e-12)
        assert out.transitions[1].time == pytest.approx(
            fall_t + total_gate_delay(-math.inf, "rise", p15), rel=1e-9)
        assert ex.depths["g1"] == (1, 1)
        assert ex.depths["A"] == (0, 0)  # port transitions sit at depth zero
        assert verify_execution(net, ex) == []

    def test_missing_stimulus(self, p15):
        with pytest.raises(ValidationError):
            build_execution(single_nor(p15), {}, 1e-9)

    def test_invalid_netlist_raises(self, p15):
        net = Netlist([Vertex("A", "input"), Vertex("O", "output")], [])
        with pytest.raises(ValidationError):
            build_execution(net, {"A": BinarySignal.constant(0, 1e-9)}, 1e-9)

    def test_ring_is_deterministic_and_periodic(self, p15):
        net = inverter_ring(p15)
        hor = 2e-9
        ex1 = build_execution(net, {}, hor)
        ex2 = build_execution(net, {}, hor)
        assert ex1.rows() == ex2.rows()
        out = ex1.signals["n3"]
        assert len(out.transitions) >= 6
        rises = [tr.time for tr in out.transitions if tr.value == 1]
        periods = [b - a for a, b in zip(rises, rises[1:])]
        assert all(q == pytest.approx(periods[0], rel=1e-9) for q in periods)
        assert periods[0] > 0.0
        assert verify_execution(net, ex1) == []
        # progress bound: gates * (1 + T/delta_min) * max crossings per mode
        gate_transitions = sum(
            len(ex1.signals[f"n{i}"].transitions) for i in (1, 2, 3))
        assert gate_transitions <= 3 * (1 + hor / p15.delta_min) * 2

    def test_depths_nondecreasing(self, p15):
        ex = build_execution(inverter_ring(p15), {}, 2e-9)
        for vid, depths in causal_depths(ex).items():
            assert list(depths) == sorted(depths)

    def test_causal_separation(self, p15):
        # every caused transition respects its input's pure delay
        net = inverter_ring(p15)
        ex = build_execution(net, {}, 2e-9)
        for vid, cause_list in ex.causes.items():
            v = net.vertices[vid]
            if v.kind != "gate":
                continue
            delays = (v.params.delta_min, v.params.delta_min)
            for tr, causes in zip(ex.signals[vid].transitions, cause_list):
                for j, src_time in causes:
                    assert tr.time - src_time >= delays[j]

    def test_event_guard(self, p15):
        with pytest.raises(SimulationGuardError):
            build_execution(inverter_ring(p15), {}, 2e-9, max_events=5)

    def test_unseeded_cycle_rejected(self, p15):
        net = inverter_ring(p15)
        vertices = [
            Vertex(v.id, v.kind, v.params, v.value, None)
            for v in net.vertices.values()
        ]
        bare = Netlist(vertices, net.edges)
        with pytest.raises(ValidationError) as err:
            build_execution(bare, {}, 1e-9)
        assert any(d.code == "initial-underdetermined" for d in err.value.diagnostics)

    def test_seed_consistent_latch_is_quiet(self, p15):
        latch = Netlist(
            [Vertex("S", "input"), Vertex("R", "input"),
             Vertex("q", "gate", params=p15, initial_output=0),
             Vertex("qb", "gate", params=p15, initial_output=1),
             Vertex("Q", "output")],
            [Edge("R", "q", 0), Edge("qb", "q", 1),
             Edge("S", "qb", 0), Edge("q", "qb", 1),
             Edge("q", "Q", 0)],
        )
        hor = 1e-9
        stim = {"S": BinarySignal.constant(0, hor),
                "R": BinarySignal.constant(0, hor)}
        ex = build_execution(latch, stim, hor)
        assert ex.signals["q"] == BinarySignal.constant(0, hor)
        assert ex.signals["qb"] == BinarySignal.constant(1, hor)

    def test_mixed_model_chain(self, p15, simple_params):
        from hybridsim.models import IdmExpParams

        channel = IdmExpParams(tau=8e-12, delta_min=3e-12)
        net = Netlist(
            [Vertex("A", "input"), Vertex("zero", "const", value=0),
             Vertex("g1", "gate", params=p15),
             Vertex("ch", "gate", params=channel),
             Vertex("g2", "gate", params=simple_params),
             Vertex("O", "output")],
            [Edge("A", "g1", 0), Edge("zero", "g1", 1),
             Edge("g1", "ch", 0),
             Edge("ch", "g2", 0), Edge("zero", "g2", 1),
             Edge("g2", "O", 0)],
        )
        hor = 6e-9
        stim = {"A": BinarySignal.from_pairs(0, [(4e-10, 1), (3e-9, 0)], hor)}
        ex = build_execution(net, stim, hor)
        # two inverting stages and a buffer: O follows A, delayed
        out = ex.signals["O"]
        assert [tr.value for tr in out.transitions] == [1, 0]
        assert out.transitions[0].time > 4e-10
        assert verify_execution(net, ex) == []
        assert ex.depths["O"] == (3, 3)

    def test_latch_set_pulse(self, p15):
        latch = Netlist(
            [Vertex("S", "input"), Vertex("R", "input"),
             Vertex("q", "gate", params=p15, initial_output=0),
             Vertex("qb", "gate", params=p15, initial_output=1),
             Vertex("Q", "output")],
            [Edge("R", "q", 0), Edge("qb", "q", 1),
             Edge("S", "qb", 0), Edge("q", "qb", 1),
             Edge("q", "Q", 0)],
        )
        hor = 1.5e-9
        stim = {"S": BinarySignal.from_pairs(0, [(2e-10, 1), (6e-10, 0)], hor),
                "R": BinarySignal.constant(0, hor)}
        ex = build_execution(latch, stim, hor)
        assert ex.signals["q"].final_value == 1  # latched after the set pulse
        assert ex.signals["qb"].final_value == 0
        assert ex.depths["qb"] == (1,)
        assert ex.depths["q"] == (2,)
        assert verify_execution(latch, ex) == []


class TestUnroll:
    def test_figure_z_values(self, p15):
        u = unroll(figure_loop_circuit(p15), 3, "O", {"I": 0})
        assert u.z_values["X0@B"] == 0
        assert u.z_values["B@1"] == 1
        assert u.z_values["B@2"] == 2
        assert u.z_values["C@3"] == 3
        assert u.z_values["O@3"] == 3
        assert u.z_values["I"] == math.inf
        assert u.z_values["A@2"] == math.inf
        assert validate(u.netlist) == []

    def test_zero_depth_is_single_constant(self, p15):
        u = unroll(figure_loop_circuit(p15), 0, "B", {"I": 0})
        assert set(u.netlist.vertices) == {"X0@B"}
        assert u.netlist.vertices["X0@B"].value == 0
        assert u.z_values["X0@B"] == 0

    def test_forward_chain_isomorphic(self, p15):
        chain = Netlist(
            [Vertex("A", "input"), Vertex("zero", "const", value=0),
             Vertex("g1", "gate", params=p15), Vertex("g2", "gate", params=p15),
             Vertex("O", "output")],
            [Edge("A", "g1", 0), Edge("zero", "g1", 1),
             Edge("g1", "g2", 0), Edge("zero", "g2", 1),
             Edge("g2", "O", 0)],
        )
        u = unroll(chain, 3, "O", {"A": 0})
        # same shape: one copy per vertex, no cut constants on any path
        assert len(u.netlist.vertices) == len(chain.vertices)
        assert not any(vid.startswith("X") for vid in u.netlist.vertices)
        mapped = sorted(u.original.values())
        assert mapped == sorted(chain.vertices)

    def test_input_port_copies_unified(self, p15):
        diamond = Netlist(
            [Vertex("A", "input"), Vertex("zero", "const", value=0),
             Vertex("g1", "gate", params=p15), Vertex("g2", "gate", params=p15),
             Vertex("g3", "gate", params=p15), Vertex("O", "output")],
            [Edge("A", "g1", 0), Edge("zero", "g1", 1),
             Edge("A", "g2", 0), Edge("zero", "g2", 1),
             Edge("g1", "g3", 0), Edge("g2", "g3", 1),
             Edge("g3", "O", 0)],
        )
        u = unroll(diamond, 4, "O", {"A": 0})
        inputs = [v for v in u.netlist.vertices.values() if v.kind == "input"]
        assert len(inputs) == 1


class TestSimulationEquivalence:
    def test_forward_circuit_exact_for_any_depth(self, p15):
        net = single_nor(p15)
        hor = 4e-9
        stim = {"A": BinarySignal.from_pairs(0, [(3e-10, 1), (2.3e-9, 0)], hor)}
        for k in (1, 2, 5):
            rep = simulation_equivalence_check(net, k, stim, hor)
            assert rep.ok

    def test_figure_circuit_depth_three(self, p15):
        net = figure_loop_circuit(p15)
        hor = 1.2e-9
        stim = {"I": BinarySignal.from_pairs(0, [(2e-10, 1), (7e-10, 0)], hor)}
        rep = simulation_equivalence_check(net, 3, stim, hor)
        assert rep.ok
        assert rep.compared == 5

    def test_zero_depth_compares_nothing_nontrivial(self, p15):
        net = figure_loop_circuit(p15)
        hor = 1.2e-9
        stim = {"I": BinarySignal.from_pairs(0, [(2e-10, 1)], hor)}
        rep = simulation_equivalence_check(net, 0, stim, hor)
        assert rep.ok

    def test_stale_cut_value_is_reported(self, p15):
        # an oscillating self-loop diverges from its cut constant at the
        # depth boundary; the checker must surface that honestly
        ring = inverter_ring(p15, n=1)
        hor = 1e-9
        rep = simulation_equivalence_check(ring, 2, {}, hor, sink="O")
        assert not rep.ok


class TestNetlistIO:
    def test_round_trip(self, tmp_path, p15):
        net = figure_loop_circuit(p15)
        path = tmp_path / "net.json"
        dump_netlist(net, path)
        back = load_netlist(path)
        assert set(back.vertices) == set(net.vertices)
        assert back.edges == net.edges
        assert back.vertices["B"].initial_output == 0
        assert back.vertices["one"].value == 1
        assert back.vertices["A"].params == p15


class TestTraceWriters:
    def test_csv_format_and_order(self, tmp_path, p15):
        net = single_nor(p15)
        hor = 4e-9
        stim = {"A": BinarySignal.from_pairs(0, [(3e-10, 1), (2.3e-9, 0)], hor)}
        ex = build_execution(net, stim, hor)
        path = tmp_path / "trace.csv"
        write_trace_csv(ex, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "time_s,vertex,value,causal_depth"
        rows = [line.split(",") for line in lines[1:]]
        keys = [(float(r[0]), r[1]) for r in rows]
        assert keys == sorted(keys)
        assert len(rows) == 6  # A twice, g1 twice, O twice

    def test_vcd_structure(self, tmp_path, p15):
        net = single_nor(p15)
        hor = 4e-9
        stim = {"A": BinarySignal.from_pairs(0, [(3e-10, 1), (2.3e-9, 0)], hor)}
        ex = build_execution(net, stim, hor)
        path = tmp_path / "trace.vcd"
        write_trace_vcd(ex, path)
        text = path.read_text()
        assert "$timescale 1fs $end" in text
        assert text.count("$var wire 1 ") == len(ex.signals)
        assert "$dumpvars" in text
        # the first rising edge of A lands on its femtosecond tick
        assert f"#{round(3e-10 / 1e-15)}\n" in text
