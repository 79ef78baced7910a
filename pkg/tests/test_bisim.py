import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bisim import (
    Relation, Violation, check_bc, check_structural, definable_pairs, distinguishing_formula,
    equivalence_relation, greatest_bisimulation, greatest_structural, hennessy_milner,
    identity_relation, load_relation, modal_equiv,
)
from src.errors import ModelInputError, PairCapExceeded
from src.generate import GenSpec, generate, inflate
from src.model import Model
from src.semantics import Evaluator, holds
from src.syntax import Atom, Not, Op, enumerate_formulas

K, BC, BPLUS, GT = Op.K, Op.Bc, Op.Bplus, Op.Gt


def test_corpus_relation_clauses(thm15):
    z = thm15.z()
    assert check_structural(z, {K})
    assert check_bc(z, {K, BC})
    result = check_structural(z, {BPLUS})
    assert not result
    assert result.violation == Violation("Bplus-zag", ("v", "vp"), "a", "wp")


def test_atom_clause(thm15):
    z = Relation(thm15.left, thm15.right, frozenset({("w", "vp")}))
    assert check_structural(z, {K}).violation == Violation("atoms", ("w", "vp"), None, "p")


def test_greatest_relations(thm15):
    assert greatest_structural(thm15.left, thm15.right, {K, BPLUS}).pairs == frozenset()
    expected = {("w", "wp"), ("v", "vp")}
    assert greatest_bisimulation(thm15.left, thm15.right, {K, BC}).pairs == expected
    assert greatest_bisimulation(thm15.left, thm15.right, {K}).pairs == expected


def test_definable_pairs_of_equivalent_models(thm15):
    family = definable_pairs(thm15.left, thm15.right, {K, BC})
    assert len(family.blocks) == 2
    assert len(family) == 4
    assert family.blocks[0].left == {"v"} and family.blocks[0].right == {"vp"}
    assert family.blocks[0].formula == Not(Atom("p"))
    assert ({"w"}, {"wp"}) in family
    assert ({"w"}, {"vp"}) not in family
    assert family.witness(({"w"}, {"wp"})) == Atom("p")
    assert set(family.members()) >= {(frozenset(), frozenset()), (thm15.left.state_set, thm15.right.state_set)}


def test_block_formulas_define_their_blocks(thm14):
    for fragment in ({K}, {BC}, {K, BPLUS}, {K, BPLUS, BC}, {GT}):
        family = definable_pairs(thm14.left, thm14.right, fragment)
        left, right = Evaluator(thm14.left), Evaluator(thm14.right)
        for block in family.blocks:
            assert left.truth_set(block.formula) == block.left
            assert right.truth_set(block.formula) == block.right


def test_distinguishing_formula(thm15, thm21):
    found = distinguishing_formula(thm15.left, "w", thm15.right, "wp", {K, BPLUS})
    assert found is not None
    assert holds(thm15.left, "w", found) and not holds(thm15.right, "wp", found)
    assert distinguishing_formula(thm15.left, "w", thm15.right, "wp", {K, BC}) is None
    assert modal_equiv(thm21.left, "w", thm21.right, "wp", {K, BC, BPLUS})
    assert not modal_equiv(thm21.left, "w", thm21.right, "wp", {K, GT})


def test_conditional_belief_separates_thm14(thm14):
    result = check_bc(thm14.z(), {K, BC})
    assert not result
    assert result.violation.clause in {"Bc-zig", "Bc-zag"}
    assert result.violation.condition is not None
    assert ("w", "wp") not in equivalence_relation(thm14.left, thm14.right, {K, BC})


def test_hennessy_milner_on_corpus(corpus):
    for entry in corpus.values():
        report = hennessy_milner(entry.left, entry.right)
        assert report
        assert check_bc(report.relation, {K, BC})


def test_pair_cap(thm15):
    with pytest.raises(PairCapExceeded) as caught:
        definable_pairs(thm15.left, thm15.right, {K, BC}, cap=2)
    assert caught.value.cap == 2


def test_input_errors(chain, two_agents):
    with pytest.raises(ModelInputError, match="different agents"):
        greatest_structural(chain, two_agents, {K})
    with pytest.raises(ModelInputError):
        greatest_bisimulation(chain, chain, {K, Op.Ann})
    with pytest.raises(ModelInputError):
        check_bc(identity_relation(chain), {K})
    with pytest.raises(ModelInputError):
        Relation(chain, chain, frozenset({("s0", "s9")}))


def test_relation_files(tmp_path, thm15):
    path = tmp_path / "z.json"
    path.write_text(thm15.z().to_json("thm15L.json", "thm15R.json"), encoding="utf-8")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data == {"left": "thm15L.json", "pairs": [["v", "vp"], ["w", "wp"]], "right": "thm15R.json"}
    assert load_relation(path, thm15.left, thm15.right).pairs == thm15.z().pairs
    path.write_text("{}", encoding="utf-8")
    with pytest.raises(ModelInputError):
        load_relation(path, thm15.left, thm15.right)


def test_identity_is_a_bisimulation_for_everything(two_agents):
    z = identity_relation(two_agents)
    assert check_structural(z, {K, BPLUS, GT})
    assert check_bc(z, {K, BPLUS, GT, BC})


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_inflated_copies_are_bisimilar(seed):
    m = generate(GenSpec(max_states=4, agents=2, atoms=2), seed)
    bigger, back = inflate(m, random.Random(seed))
    z = Relation(m, bigger, frozenset((back[x], x) for x in bigger.states))
    assert check_structural(z, {K, BPLUS, GT})
    assert check_bc(z, {K, BC})
    assert z.pairs <= greatest_structural(m, bigger, {K, BPLUS, GT}).pairs
    assert z.pairs <= equivalence_relation(m, bigger, {K, BC, BPLUS, GT}).pairs


def test_relation_files_name_their_models(tmp_path, thm15):
    path = tmp_path / "z.json"
    path.write_text(thm15.z().to_json("thm15L.json", "thm15R.json"), encoding="utf-8")
    z = load_relation(path, thm15.left, thm15.right, "corpus/thm15L.json", "corpus/thm15R.json")
    assert z.pairs == thm15.z().pairs
    with pytest.raises(ModelInputError, match="right model thm15R.json"):
        load_relation(path, thm15.left, thm15.right, "thm15L.json", "other.json")
    path.write_text(thm15.z().to_json(), encoding="utf-8")
    assert load_relation(path, thm15.left, thm15.right, "a.json", "b.json").pairs == thm15.z().pairs
    path.write_text('{"pairs": [["w"]]}', encoding="utf-8")
    with pytest.raises(ModelInputError, match="malformed"):
        load_relation(path, thm15.left, thm15.right)


def test_hennessy_milner_needs_image_finite_models():
    stray = Model(
        states=("w",), agents=("a",),
        epist={"a": frozenset({("w", "w"), ("w", "x")})},
        plaus={"a": {"w": frozenset({("w", "w")})}},
    )
    with pytest.raises(ModelInputError, match="image-finite"):
        hennessy_milner(stray, stray)


def _truth_pairs(left, right, formulas):
    here, there = Evaluator(left), Evaluator(right)
    return {(here.truth_set(f), there.truth_set(f)) for f in formulas}


def test_definable_pairs_match_enumeration(thm15):
    formulas = list(enumerate_formulas(["p"], ["a"], {K, BC}, 2))
    family = definable_pairs(thm15.left, thm15.right, {K, BC})
    assert _truth_pairs(thm15.left, thm15.right, formulas) == set(family.members())


def test_enumerated_formulas_separate_the_blocks(thm15):
    formulas = list(enumerate_formulas(["p"], ["a"], {K, BPLUS}, 2))
    family = definable_pairs(thm15.left, thm15.right, {K, BPLUS})
    here, there = Evaluator(thm15.left), Evaluator(thm15.right)
    signatures = {}
    for side, evaluator, m in ((0, here, thm15.left), (1, there, thm15.right)):
        for s in m.states:
            key = tuple(s in evaluator.truth_set(f) for f in formulas)
            signatures.setdefault(key, set()).add((side, s))
    assert sorted(map(sorted, signatures.values())) == sorted(sorted(b.points) for b in family.blocks)
    assert _truth_pairs(thm15.left, thm15.right, formulas) <= set(family.members())


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    fragment=st.sampled_from([frozenset({K}), frozenset({K, BC}), frozenset({BPLUS, GT})]),
)
def test_enumerated_truth_pairs_are_definable(seed, fragment):
    spec = GenSpec(max_states=3, agents=1, atoms=1)
    left, right = generate(spec, seed), generate(spec, seed + 1)
    family = definable_pairs(left, right, fragment)
    formulas = enumerate_formulas(["p"], ["a"], fragment, 2)
    assert _truth_pairs(left, right, formulas) <= set(family.members())


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    fragment=st.sampled_from([frozenset({K}), frozenset({BPLUS}), frozenset({K, GT}), frozenset({K, BPLUS, GT})]),
)
def test_greatest_structural_bisimulation_is_maximal(seed, fragment):
    spec = GenSpec(max_states=3, agents=2, atoms=1)
    left, right = generate(spec, seed), generate(spec, seed + 1)
    z = greatest_structural(left, right, fragment)
    assert check_structural(z, fragment)
    for w in left.states:
        for v in right.states:
            if (w, v) not in z:
                assert not check_structural(Relation(left, right, z.pairs | {(w, v)}), fragment)
