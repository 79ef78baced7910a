import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.corpus import gt_translation_counterexample, safe_translation_counterexample
from src.errors import ModelInputError
from src.generate import GenSpec, generate
from src.semantics import Evaluator, holds, is_valid_on
from src.syntax import (
    Announce, Atom, CondBelief, Op, Upgrade, is_static, parse, sample_formula, show,
)
from src.translate import (
    RewriteStep, RewriteTrace, measure_decreased, reduce_dynamic, reduction_axioms, replace_at,
    replay, rewrite_measure, static_fragment_for, translate_gt, translate_safe,
)


def test_announcement_over_knowledge():
    result, trace = reduce_dynamic(parse("[! p] K[a] q"))
    assert show(result) == "p -> K[a](p -> q)"
    assert [step.rule for step in trace] == ["ann-K", "ann-atom"]
    assert trace.steps[1].path == (1, 0)
    assert trace.steps[1].describe() == "ann-atom at 1.0: [! p] q  ==>  p -> q"


@pytest.mark.parametrize("text, expected", [
    ("[up p] q", "q"),
    ("[! p] true", "true"),
    ("[up p] ~q", "~q"),
    ("[! p] (q & r)", "(p -> q) & (p -> r)"),
    ("K[a] p", "K[a] p"),
])
def test_small_reductions(text, expected):
    assert show(reduce_dynamic(parse(text))[0]) == expected


def test_static_input_has_empty_trace():
    result, trace = reduce_dynamic(parse("B[a | p] q"))
    assert result == parse("B[a | p] q")
    assert len(trace) == 0


def test_replay_checks_every_step():
    f = parse("[up p] B[a | q] r")
    result, trace = reduce_dynamic(f)
    assert replay(f, trace) == result
    first = trace.steps[0]
    tampered = RewriteTrace((RewriteStep(first.path, "ann-K", first.before, first.after),) + trace.steps[1:])
    with pytest.raises(ModelInputError):
        replay(f, tampered)


def test_axiom_names():
    axioms = reduction_axioms(Atom("p"), Atom("q"), Atom("r"), "a")
    assert len(axioms) == 22
    assert {"ann-atom", "up-atom", "ann-Bc", "up-Bc", "up-Gt"} <= set(axioms)
    assert "ann-atom" not in reduction_axioms(Atom("p"), Atom("q"), parse("~r"), "a")


def test_axioms_are_valid_on_the_chain(chain):
    for phi in ("p", "~q", "K[a] p"):
        for name, axiom in reduction_axioms(parse(phi), parse("q | p"), parse("p"), "a").items():
            assert is_valid_on(chain, axiom), name


def test_static_fragment_for():
    assert static_fragment_for({Op.Up, Op.Bc}) == {Op.K, Op.Bc}
    assert static_fragment_for({Op.Ann, Op.K}) == {Op.K}
    assert static_fragment_for({Op.Ann, Op.Up}) == frozenset()


def test_translation_texts():
    assert show(translate_gt(parse("B[a | p] q"))) == "K[a](p & ~~Gt[a] ~p -> q)"
    assert show(translate_safe(parse("B[a | p] q"))) == "~K[a] ~p -> ~K[a] ~(p & Bplus[a](p -> q))"
    assert translate_gt(parse("K[a] p")) == parse("K[a] p")


def test_translations_reject_other_operators():
    with pytest.raises(ModelInputError):
        translate_gt(parse("Bplus[a] p"))
    with pytest.raises(ModelInputError):
        translate_safe(parse("Gt[a] p"))


def test_translation_counterexamples_fail():
    model, cond, body, state = gt_translation_counterexample()
    f = CondBelief("a", parse(cond), parse(body))
    assert holds(model, state, f) != holds(model, state, translate_gt(f))

    model, cond, body, state = safe_translation_counterexample()
    f = CondBelief("a", parse(cond), parse(body))
    assert holds(model, state, f) != holds(model, state, translate_safe(f))


def _dynamic(rng: random.Random) -> object:
    wrap = rng.choice((Announce, Upgrade))
    ops = set(Op)
    return wrap(
        sample_formula(rng, ["p", "q"], ["a", "b"], ops, 1),
        sample_formula(rng, ["p", "q"], ["a", "b"], ops, 2),
    )


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_reduction_preserves_meaning_and_terminates(seed):
    rng = random.Random(seed)
    f = _dynamic(rng)
    result, trace = reduce_dynamic(f)
    assert is_static(result)
    m = generate(GenSpec(max_states=4, agents=2, atoms=2), seed)
    assert Evaluator(m).truth_set(f) == Evaluator(m).truth_set(result)

    current, measure = f, rewrite_measure(f)
    for step in trace:
        current = replace_at(current, step.path, step.after)
        following = rewrite_measure(current)
        assert measure_decreased(measure, following)
        measure = following
    assert current == result


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_translations_agree_on_their_model_classes(seed):
    rng = random.Random(seed)
    uniform = generate(GenSpec(max_states=4, agents=2, atoms=2, uniform=True), seed)
    f = sample_formula(rng, ["p", "q"], ["a", "b"], {Op.K, Op.Bc}, 2)
    evaluator = Evaluator(uniform)
    assert evaluator.truth_set(f) == evaluator.truth_set(translate_gt(f))

    connected = generate(GenSpec(max_states=4, agents=2, atoms=2, uniform=True, locally_connected=True), seed)
    g = sample_formula(rng, ["p", "q"], ["a", "b"], {Op.K, Op.Bc, Op.Bplus}, 2)
    evaluator = Evaluator(connected)
    assert evaluator.truth_set(g) == evaluator.truth_set(translate_safe(g))
