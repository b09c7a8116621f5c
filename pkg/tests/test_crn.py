import pytest
from hypothesis import given, strategies as st

from oocrn.crn import (
    CompiledCrn, Configuration, Crn, CrnError, NotApplicableError, Reaction, applicable_reactions, apply,
    check_output_oblivious, initial_configuration, is_applicable, validate_crn,
)

R = Reaction.parse
# The three-reaction CRN for 2n1 + 3n2 + 1 written directly with a leader.
AFFINE_CORE = Crn.build(["L -> Y", "X1 -> 2 Y", "X2 -> 3 Y"])


class TestConfiguration:
    def test_zero_counts_dropped(self):
        assert dict(Configuration({"A": 0, "B": 2})) == {"B": 2}

    def test_equality_with_mapping(self):
        assert Configuration({"B": 1, "A": 2}) == {"A": 2, "B": 1, "C": 0}

    def test_canonical_key_sorted(self):
        assert Configuration({"Y": 1, "L": 1}).key == (("L", 1), ("Y", 1))

    def test_hashable(self):
        assert len({Configuration({"A": 1}), Configuration([("A", 1)])}) == 1

    def test_negative_rejected(self):
        with pytest.raises(CrnError):
            Configuration({"A": -1})


class TestReaction:
    def test_equality_ignores_term_order(self):
        assert R("A + B -> C") == R("B + A -> C")
        assert hash(R("A + B -> C")) == hash(R("B + A -> C"))

    def test_net(self):
        r = R("L + 2 X1 -> L + Y")
        assert (r.net("X1"), r.net("L"), r.net("Y")) == (-2, 0, 1)

    def test_str_keeps_written_order(self):
        assert str(R("Lp + X1 -> Lp + 2 Y")) == "Lp + X1 -> Lp + 2 Y"


def test_initial_configuration():
    assert initial_configuration(AFFINE_CORE, (3, 2)) == {"L": 1, "X1": 3, "X2": 2}
    assert initial_configuration(AFFINE_CORE, (0, 0)) == {"L": 1}


def test_initial_configuration_arity():
    with pytest.raises(CrnError):
        initial_configuration(AFFINE_CORE, (1,))


@pytest.mark.parametrize("conf, rxn, ok", [
    ({"X": 1}, "2 X -> Y", False),
    ({"X1": 1, "X2": 1}, "X1 + X2 -> Y", True),
    ({}, "A -> B", False),
])
def test_is_applicable(conf, rxn, ok):
    assert is_applicable(Configuration(conf), R(rxn)) is ok


def test_apply_examples():
    assert apply(Configuration({"L": 1}), R("L -> Y")) == {"Y": 1}
    c = Configuration({"X1": 3, "X2": 2, "L": 1})
    assert apply(c, R("X1 -> 2 Y")) == {"X1": 2, "X2": 2, "L": 1, "Y": 2}


def test_apply_double_minus_one_sequence():
    c = Configuration({"X": 2, "L": 1})
    for r in ("X -> 2 Y", "X -> 2 Y", "Y + L -> 0"):
        c = apply(c, R(r))
    assert c == {"Y": 3}


def test_apply_not_applicable():
    with pytest.raises(NotApplicableError):
        apply(Configuration({"X": 1}), R("2 X -> Y"))


def test_applicable_reactions_definition_order():
    c = initial_configuration(AFFINE_CORE, (1, 0))
    assert applicable_reactions(AFFINE_CORE, c) == [R("L -> Y"), R("X1 -> 2 Y")]


def test_applicable_reactions_empty_config():
    crn = Crn.build(["0 -> A", "A -> B"], inputs=("A",), outputs=("B",), leader="L")
    assert applicable_reactions(crn, Configuration()) == [R("0 -> A")]


def test_applicable_hand_written(dip_leader):
    c = Configuration({"Q0": 1, "X1": 1, "X2": 1})
    assert applicable_reactions(dip_leader, c) == [R("Q0 + X1 -> QA + Y"), R("Q0 + X2 -> QB + Y")]


def test_output_oblivious(dip_leader, double_crn):
    assert check_output_oblivious(dip_leader) == []
    (v,) = check_output_oblivious(double_crn)
    assert (v.reaction_index, v.species) == (1, "Y")
    catalytic = Crn.build(["X -> Y", "L + Y -> 2 Y"], inputs=("X",))
    (v,) = check_output_oblivious(catalytic)
    assert v.reaction_index == 1 and "catalyst" in v.message


def test_validate_crn(dip_leader):
    assert validate_crn(dip_leader) == []
    trivial = Crn.build(["A -> A"], inputs=("X1",), species=["L", "X1", "Y", "A"])
    assert any("reactants equal products" in v.message for v in validate_crn(trivial))
    undeclared = Crn.build(["X1 -> Q"], species=["L", "X1", "X2", "Y"])
    assert any(v.species == "Q" for v in validate_crn(undeclared))


def test_validate_roles():
    bad = Crn.build(["X1 -> Y"], inputs=("X1", "L"))
    assert any("leader" in v.message for v in validate_crn(bad))
    bad = Crn.build(["X1 -> X2"], outputs=("X1",))
    assert any("output X1" in v.message for v in validate_crn(bad))


# -- properties ----------------------------------------------------------------

species = st.sampled_from(["A", "B", "C", "D"])
counts = st.dictionaries(species, st.integers(0, 4), max_size=4)
reactions = st.builds(Reaction, counts, counts).filter(lambda r: not r.is_trivial())


@given(counts, reactions)
def test_apply_conserves_net_change(c, r):
    conf = Configuration(c)
    if not is_applicable(conf, r):
        with pytest.raises(NotApplicableError):
            apply(conf, r)
        return
    after = apply(conf, r)
    for s in {"A", "B", "C", "D"}:
        assert after.get(s) == conf.get(s) + r.net(s)
        assert after.get(s) >= 0


@given(counts, st.lists(reactions, min_size=1, max_size=5))
def test_compiled_matches_reference(c, rxns):
    crn = Crn.build(rxns, inputs=("A",), outputs=("B",), leader="C", species=["A", "B", "C", "D"])
    comp = CompiledCrn(crn)
    state = comp.encode(c)
    expected = [i for i, r in enumerate(crn.reactions) if is_applicable(Configuration(c), r)]
    assert comp.applicable(state) == expected
    for i in expected:
        assert comp.decode(comp.fire(state, i)) == apply(Configuration(c), crn.reactions[i])
