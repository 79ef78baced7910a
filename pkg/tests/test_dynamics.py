import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.dynamics import announce, apply_sequence, promote, restrict, upgrade
from src.errors import EmptyAnnouncementError, ModelInputError
from src.generate import GenSpec, generate
from src.model import is_locally_connected, is_uniform, strict, validate
from src.semantics import truth_set
from src.syntax import Op, Top, parse, sample_formula


def test_announcement_restricts_everything(chain):
    after = announce(chain, parse("p"))
    assert after.states == ("s1", "s2")
    assert set(after.plaus["a"]) == {"s1", "s2"}
    assert after.leq("a", "s1") == {("s1", "s1"), ("s2", "s2"), ("s1", "s2")}
    assert after.extension("q") == frozenset()
    assert validate(after) == []


def test_empty_announcement_raises(chain):
    with pytest.raises(EmptyAnnouncementError):
        announce(chain, parse("p & q"))


def test_upgrade_puts_the_zone_on_top(chain):
    after = upgrade(chain, parse("p"))
    order = after.leq("a", "s0")
    assert {("s1", "s0"), ("s2", "s0"), ("s1", "s2")} <= order
    assert ("s0", "s1") not in order
    assert after.states == chain.states
    assert validate(after) == []


@pytest.mark.parametrize("zone", [set(), {"s0", "s1", "s2"}])
def test_trivial_upgrades_change_nothing(chain, zone):
    assert promote(chain, zone).to_json() == chain.to_json()


def test_unknown_states_are_rejected(chain):
    with pytest.raises(ModelInputError):
        restrict(chain, {"s7"})
    with pytest.raises(ModelInputError):
        promote(chain, {"s7"})


def test_sequences(chain):
    after = apply_sequence(chain, [("upgrade", parse("p")), ("announce", parse("~q"))])
    assert after.states == ("s1", "s2")
    assert truth_set(after, parse("B[a | true] p")) == {"s1", "s2"}
    with pytest.raises(ModelInputError):
        apply_sequence(chain, [("forget", parse("p"))])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), connected=st.booleans())
def test_transformations_keep_model_shape(seed, connected):
    m = generate(GenSpec(max_states=5, agents=2, atoms=2, uniform=True, locally_connected=connected), seed)
    f = sample_formula(random.Random(seed), ["p", "q"], ["a", "b"], {Op.K, Op.Bc, Op.Bplus}, 2)
    results = [promote(m, truth_set(m, f))]
    if truth_set(m, f):
        results.append(restrict(m, truth_set(m, f)))
    for changed in results:
        assert validate(changed) == []
        assert is_uniform(changed)
        if connected:
            assert is_locally_connected(changed)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_upgrade_puts_every_zone_state_strictly_first(seed):
    m = generate(GenSpec(max_states=5, agents=2, atoms=2), seed)
    f = sample_formula(random.Random(seed), ["p", "q"], ["a", "b"], {Op.K, Op.Bc, Op.Bplus, Op.Gt}, 2)
    zone = truth_set(m, f)
    after = upgrade(m, f)
    below = strict(after).lt
    for agent in m.agents:
        for w in m.states:
            members = m.eq_class(agent, w)
            for x in members & zone:
                for y in members - zone:
                    assert (x, y) in below[(agent, w)]
            for x in members:
                for y in members:
                    if (x in zone) == (y in zone):
                        assert ((x, y) in after.leq(agent, w)) == ((x, y) in m.leq(agent, w))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32))
def test_announcing_true_after_an_announcement_changes_nothing(seed):
    m = generate(GenSpec(max_states=5, agents=2, atoms=2), seed)
    f = sample_formula(random.Random(seed), ["p", "q"], ["a", "b"], {Op.K, Op.Bc, Op.Bplus}, 2)
    if not truth_set(m, f):
        f = Top()
    once = announce(m, f)
    assert announce(once, Top()).to_json() == once.to_json()
