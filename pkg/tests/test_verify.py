import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from oocrn import funcspec as F
from oocrn import synth as S
from oocrn.crn import Crn, Reaction, apply
from oocrn.verify import (
    FAIL, INCONCLUSIVE, PASS, NotClosedError, check_random, check_stable_computation, explore,
    monitor_fissure_invariant, monitor_monotonic, run_seed, simulate, stable_set, sweep,
)

R = Reaction.parse


def one_input(*rxns, leader="L"):
    return Crn.build(rxns, inputs=("X",), outputs=("Y",), leader=leader)


class TestExplore:
    def test_fig2_diamond(self, dip_leader):
        g = explore(dip_leader, (1, 1))
        assert not g.bounded
        assert g.nodes == {
            _c({"Q0": 1, "X1": 1, "X2": 1}), _c({"QA": 1, "X2": 1, "Y": 1}),
            _c({"QB": 1, "X1": 1, "Y": 1}), _c({"Q0": 1, "Y": 1}),
        }

    def test_linear_chain(self):
        assert len(explore(one_input("X -> 2 Y"), (2,))) == 3

    def test_branch_once(self):
        assert len(explore(one_input("L -> Y", "L -> 2 Y"), (0,))) == 3

    def test_edges_are_reaction_applications(self, dip_leader):
        g = explore(dip_leader, (2, 3))
        for src, ri, dst in g.edges():
            assert apply(src, dip_leader.reactions[ri]) == dst

    def test_bound(self):
        g = explore(one_input("X -> 2 Y"), (10,), max_configs=4)
        assert g.bounded and len(g) == 4
        with pytest.raises(NotClosedError):
            stable_set(g)


def _c(d):
    from oocrn.crn import Configuration

    return Configuration(d)


class TestStable:
    def test_terminal_nodes_are_stable(self, dip_leader):
        g = explore(dip_leader, (2, 1))
        stable = stable_set(g)
        for u in range(len(g)):
            if g.out_start[u] == g.out_start[u + 1]:
                assert g.config(u) in stable

    def test_fig2_stable_outputs(self, dip_leader):
        assert {c["Y"] for c in stable_set(explore(dip_leader, (2, 2)))} == {2}

    def test_double_minus_one_stable_outputs(self, double_crn):
        assert {c.get("Y") for c in stable_set(explore(double_crn, (2,)))} == {3}


class TestCheck:
    def test_fig2(self, dip_leader):
        assert check_stable_computation(dip_leader, (2, 2), 2).outcome == PASS
        assert check_stable_computation(dip_leader, (1, 3), 2).outcome == PASS
        v = check_stable_computation(dip_leader, (2, 2), 3)
        assert v.outcome == FAIL and v.witness_end["Y"] == 2

    def test_wrong_stable_witness_replays(self):
        crn = one_input("L -> Y", "L -> 2 Y")
        v = check_stable_computation(crn, (0,), 1)
        assert v.outcome == FAIL and v.witness_end == {"Y": 2}
        c = v.witness[0][0]
        for _, ri in v.witness:
            c = apply(c, crn.reactions[ri])
        assert c == v.witness_end

    def test_never_stabilizes(self):
        crn = one_input("L -> M + Y", "M + Y -> L")
        v = check_stable_computation(crn, (0,), 1)
        assert v.outcome == FAIL and "no stable configuration" in v.reason

    def test_bounded_is_inconclusive(self):
        v = check_stable_computation(one_input("X -> 2 Y"), (50,), 100, max_configs=10)
        assert v.outcome == INCONCLUSIVE

    def test_explicit_initial(self):
        crn = S.synth_min(["Y.b1", "Y.b2"])
        v = check_stable_computation(crn, (0, 0), 3, initial={"Y.b1": 3, "Y.b2": 5})
        assert v.passed

    def test_to_line(self, dip_leader):
        line = check_stable_computation(dip_leader, (1, 1), 1).to_line()
        assert line == "n=(1,1) expected=1 outcome=PASS nodes=4 edges=4 stable=3"


def naive_verdict(crn, n, expected):
    """Stable computation straight from the definition, with explicit reachable sets."""
    g = explore(crn, n, max_configs=400)
    if g.bounded:
        return None
    succ = {u: [g.edge_dst[e] for e in range(g.out_start[u], g.out_start[u + 1])] for u in range(len(g))}
    y = [dict(g.config(u)).get("Y", 0) for u in range(len(g))]

    def reach(u):
        seen, todo = {u}, [u]
        while todo:
            for v in succ[todo.pop()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    reach_of = {u: reach(u) for u in range(len(g))}
    stable = {u for u in range(len(g)) if all(y[v] == y[u] for v in reach_of[u])}
    ok = all(any(v in stable and y[v] == expected for v in reach_of[u]) for u in range(len(g)))
    return PASS if ok else FAIL


species = st.sampled_from(["L", "X", "Y", "A", "B"])
side = st.dictionaries(species, st.integers(1, 2), max_size=2)
rxn = st.builds(Reaction, side, side).filter(lambda r: not r.is_trivial())


@settings(max_examples=150, suppress_health_check=[HealthCheck.filter_too_much])
@given(st.lists(rxn, min_size=1, max_size=4), st.integers(0, 3), st.integers(0, 4))
def test_checker_agrees_with_definition(rxns, n, expected):
    crn = Crn.build(rxns, inputs=("X",), outputs=("Y",), leader="L", species=["L", "X", "Y", "A", "B"])
    oracle = naive_verdict(crn, (n,), expected)
    assume(oracle is not None)
    assert check_stable_computation(crn, (n,), expected).outcome == oracle


class TestSimulate:
    def test_affine(self, specs):
        crn = S.synth(specs["affine"]).crn
        runs = [simulate(crn, (3, 2), seed) for seed in range(5)]
        assert all(e.quiescent and e.output() == 13 for e in runs)
        assert len({tuple(ri for _, ri in e.steps) for e in runs}) > 1

    def test_reproducible(self, specs):
        crn = S.synth(specs["wedges"]).crn
        a, b = simulate(crn, (3, 4), "s:3,4:0"), simulate(crn, (3, 4), "s:3,4:0")
        assert a.steps == b.steps and a.final == b.final

    def test_zero_steps(self):
        e = simulate(one_input("X -> Y"), (0,), 1)
        assert len(e) == 0 and e.quiescent and e.final == {"L": 1}

    def test_budget(self):
        e = simulate(one_input("L -> M", "M -> L"), (0,), 0, max_steps=25)
        assert not e.quiescent and len(e) == 25

    def test_run_seed(self):
        assert run_seed(7, (1, 2), 3) == "7:1,2:3"


class TestMonitors:
    def test_monotonic(self, double_crn, dip_leader):
        e = simulate(double_crn, (2,), 0)
        fired = {ri for _, ri in e.steps}
        assert fired == {0, 1} and not monitor_monotonic(e)
        assert monitor_monotonic(simulate(dip_leader, (3, 3), 0))
        assert monitor_monotonic(simulate(double_crn, (0,), 0, max_steps=0))

    @pytest.mark.parametrize("name, n", [("dip", (3, 3)), ("wedges", (4, 1))])
    def test_fissure_invariant_holds(self, specs, name, n):
        report = S.synth(specs[name])
        fs, meta = specs[name].partials()[0], report.fissure_meta[0]
        for run in range(150):
            e = simulate(report.crn, n, run_seed(0, n, run))
            assert monitor_fissure_invariant(meta, fs, e) == []

    def test_fissure_invariant_catches_mutation(self, specs):
        fs = specs["wedges"].partials()[0]
        meta = S.fissure_meta(fs)
        meta.z1_delta[0] += 1
        report = S.synth_partial_fissure(fs, meta=meta)
        hits = [monitor_fissure_invariant(report.fissure_meta[0], fs, simulate(report.crn, (2, 3), s))
                for s in range(20)]
        assert any(hits)
        assert any("deficit" in str(v) for vs in hits for v in vs)


class TestRandom:
    def test_double_minus_one(self, double_crn):
        v = check_random(double_crn, (3,), 5, runs=20)
        assert v.passed and v.stats["non_monotonic"] > 0

    def test_non_monotonic_fails_on_request(self, double_crn):
        v = check_random(double_crn, (4,), 7, runs=30, require_monotonic=True)
        assert v.outcome == FAIL and "decreased" in v.reason

    def test_wrong_output(self, dip_leader):
        v = check_random(dip_leader, (2, 2), 3, runs=3)
        assert v.outcome == FAIL and "quiesced with output 2" in v.reason

    def test_budget_is_inconclusive(self):
        v = check_random(one_input("L -> M", "M -> L"), (0,), 0, runs=2, max_steps=10)
        assert v.outcome == INCONCLUSIVE


class TestSweep:
    def test_affine(self, specs):
        crn = S.synth(specs["affine"]).crn
        verdicts = sweep(crn, specs["affine"], (4, 4))
        assert [v.input for v in verdicts] == [(a, b) for a in range(5) for b in range(5)]
        assert all(v.passed for v in verdicts)

    def test_parallel_order(self, specs, dip_leader):
        serial = sweep(dip_leader, specs["dip"], (3, 3))
        parallel = sweep(dip_leader, specs["dip"], (3, 3), jobs=2)
        assert [v.to_line() for v in serial] == [v.to_line() for v in parallel]

    def test_one_input_crn(self, specs, double_crn):
        verdicts = sweep(double_crn, specs["double_minus_one"], (4, 4))
        assert [v.input for v in verdicts] == [(a,) for a in range(5)]
        assert all(v.passed for v in verdicts)

    def test_random_mode(self, specs, dip_leader):
        verdicts = sweep(dip_leader, specs["dip"], (2, 2), mode="random", runs=5)
        assert all(v.passed and v.stats["runs"] == 5 for v in verdicts)

    def test_deleting_line_clear_fails_on_diagonal(self, specs):
        crn = S.synth(specs["dip"]).crn
        target = R("st.0.0.1 -> st.0.0.0 + Y")
        mutant = Crn(crn.species, tuple(r for r in crn.reactions if r != target), crn.inputs, crn.outputs, crn.leader)
        assert len(mutant.reactions) == len(crn.reactions) - 1
        failed = [v.input for v in sweep(mutant, specs["dip"], (3, 3)) if v.outcome == FAIL]
        assert failed and any(a == b for a, b in failed)

    def test_unknown_mode(self, specs, dip_leader):
        with pytest.raises(ValueError):
            sweep(dip_leader, specs["dip"], (1, 1), mode="fast")
