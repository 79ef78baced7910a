import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.dynamics import promote, restrict
from src.errors import ModelInputError
from src.generate import GenSpec, generate
from src.model import Model, min_set, min_set_strict
from src.semantics import Evaluator, holds, is_valid_on, truth_set
from src.syntax import (
    And, Announce, Atom, Bot, CondBelief, Formula, GtBox, Implies, Know, Not, Op, Or, SafeBelief, Top,
    Upgrade, parse, sample_formula,
)

ALL = {"s0", "s1", "s2"}


@pytest.mark.parametrize("text, expected", [
    ("B[a | true] p", set()),
    ("B[a | true] q", ALL),
    ("B[a | p] ~q", ALL),
    ("Bplus[a] q", {"s0"}),
    ("Bplus[a] p", set()),
    ("Gt[a] p", {"s0"}),
    ("GtDia[a] true", {"s1", "s2"}),
    ("K[a](p | q)", ALL),
    ("K[a] q", set()),
    ("Khat[a] q", ALL),
])
def test_static_truth_sets(chain, text, expected):
    assert truth_set(chain, parse(text)) == expected


@pytest.mark.parametrize("text, expected", [
    ("[! p] B[a | true] p", ALL),
    ("[! p] K[a] p", ALL),
    ("[! q] K[a] p", {"s1", "s2"}),
    ("[up p] B[a | true] p", ALL),
    ("[up p] B[a | true] q", set()),
    ("[up p] K[a] q", set()),
])
def test_dynamic_truth_sets(chain, text, expected):
    assert truth_set(chain, parse(text)) == expected


def test_announcing_a_contradiction_is_vacuous(chain):
    assert truth_set(chain, parse("[! p & q] false")) == ALL


def test_corpus_facts(thm15, thm21, thm14):
    assert holds(thm15.left, "w", parse("Bplus[a] p"))
    assert not holds(thm15.right, "wp", parse("Bplus[a] p"))
    assert holds(thm21.left, "w", parse("GtDia[a] true"))
    assert not holds(thm21.right, "wp", parse("GtDia[a] true"))
    assert holds(thm14.left, "w", parse("B[a | p] q"))
    assert not holds(thm14.right, "wp", parse("B[a | p] q"))


def test_validity_reports_least_failing_state(chain):
    assert is_valid_on(chain, parse("K[a](p | q)"))
    result = is_valid_on(chain, parse("p"))
    assert not result
    assert result.witness == ("s0",)


def test_unknown_state_raises(chain):
    with pytest.raises(ModelInputError):
        holds(chain, "s9", parse("p"))


def test_unknown_agent_raises(chain):
    with pytest.raises(ModelInputError):
        truth_set(chain, parse("K[z] p"))


def test_evaluator_reuses_results(chain):
    evaluator = Evaluator(chain)
    f = parse("[up p] B[a | true] p")
    first = evaluator.truth_set(f)
    assert evaluator.truth_set(f) is first


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_conditional_belief_matches_minimal_states(seed):
    m = generate(GenSpec(max_states=4, agents=2, atoms=2), seed)
    rng = random.Random(seed)
    cond = sample_formula(rng, ["p", "q"], ["a", "b"], {Op.K}, 1)
    evaluator = Evaluator(m)
    body = Atom("p")
    for agent in m.agents:
        believed = evaluator.truth_set(CondBelief(agent, cond, body))
        for w in m.states:
            low = min_set(m, agent, w, evaluator.truth_set(cond) & m.eq_class(agent, w))
            assert (w in believed) == (low <= m.extension("p"))
        known = evaluator.truth_set(Know(agent, body))
        assert known == {w for w in m.states if m.eq_class(agent, w) <= m.extension("p")}


def _reference(m: Model, w: str, f: Formula) -> bool:
    """Truth at one state read straight off the truth conditions, with no caching."""
    match f:
        case Atom(name):
            return w in m.extension(name)
        case Top():
            return True
        case Bot():
            return False
        case Not(sub):
            return not _reference(m, w, sub)
        case And(left, right):
            return _reference(m, w, left) and _reference(m, w, right)
        case Or(left, right):
            return _reference(m, w, left) or _reference(m, w, right)
        case Implies(left, right):
            return not _reference(m, w, left) or _reference(m, w, right)
        case Know(agent, body):
            return all(_reference(m, v, body) for v in m.eq_class(agent, w))
        case SafeBelief(agent, body):
            order = m.leq(agent, w)
            return all(_reference(m, v, body) for v in m.eq_class(agent, w) if (v, w) in order)
        case GtBox(agent, body):
            order = m.leq(agent, w)
            return all(
                _reference(m, v, body) for v in m.eq_class(agent, w)
                if (v, w) in order and (w, v) not in order
            )
        case CondBelief(agent, cond, body):
            candidates = {v for v in m.eq_class(agent, w) if _reference(m, v, cond)}
            return all(_reference(m, x, body) for x in min_set_strict(m, agent, w, candidates))
        case Announce(pre, body):
            if not _reference(m, w, pre):
                return True
            keep = {v for v in m.states if _reference(m, v, pre)}
            return _reference(restrict(m, keep), w, body)
        case Upgrade(pre, body):
            zone = {v for v in m.states if _reference(m, v, pre)}
            return _reference(promote(m, zone), w, body)
    raise TypeError(f)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), depth=st.integers(min_value=0, max_value=4))
def test_evaluator_agrees_with_the_truth_conditions(seed, depth):
    m = generate(GenSpec(max_states=4, agents=2, atoms=2), seed)
    f = sample_formula(random.Random(seed), ["p", "q"], ["a", "b"], set(Op), depth)
    for w in m.states:
        expected = _reference(m, w, f)
        assert holds(m, w, f) == expected
        assert holds(m, w, Not(f)) != expected
