import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.errors import ModelInputError
from src.generate import (
    GenSpec, agent_names, all_models, atom_names, generate, inflate, preorders, set_partitions,
)
from src.model import is_locally_connected, is_uniform, validate


def test_generation_is_reproducible():
    spec = GenSpec(max_states=5, agents=2, atoms=3, uniform=True)
    assert generate(spec, 7).to_json() == generate(spec, 7).to_json()
    assert generate(GenSpec(seed=3)).to_json() == generate(GenSpec(), 3).to_json()


def test_seed_comes_from_environment(monkeypatch):
    monkeypatch.setenv("PLAUSIKIT_SEED", "11")
    assert generate(GenSpec(max_states=5)).to_json() == generate(GenSpec(max_states=5), 11).to_json()


def test_single_state_model():
    m = generate(GenSpec(min_states=1, max_states=1), 0)
    assert m.states == ("s0",)
    assert validate(m) == []


def test_discrete_and_total_orders():
    discrete = generate(GenSpec(max_states=5, agents=2, discrete_preorders=True), 1)
    for agent in discrete.agents:
        for w in discrete.states:
            assert discrete.leq(agent, w) == {(s, s) for s in discrete.states}
    total = generate(GenSpec(max_states=5, agents=2, total_preorders=True), 1)
    assert is_locally_connected(total)


def test_conflicting_flags():
    with pytest.raises(ModelInputError):
        generate(GenSpec(max_states=3, total_preorders=True, discrete_preorders=True), 0)
    assert generate(GenSpec(max_states=1, total_preorders=True, discrete_preorders=True), 0).states == ("s0",)
    with pytest.raises(ValidationError):
        GenSpec(min_states=4, max_states=2)
    with pytest.raises(ValidationError):
        GenSpec(agents=27)


def test_names():
    assert agent_names(3) == ["a", "b", "c"]
    assert atom_names(2) == ["p", "q"]
    assert atom_names(7) == [f"p{k}" for k in range(7)]


def test_exhaustive_building_blocks():
    assert len(list(set_partitions(["x", "y", "z"]))) == 5
    assert len(preorders(["x", "y"])) == 4
    assert len(preorders(["x", "y", "z"])) == 29


def test_all_models():
    assert len(list(all_models(1))) == 2
    models = list(all_models(2, uniform=True, locally_connected=True))
    assert models
    for m in models:
        assert validate(m) == []
        assert is_uniform(m)
        assert is_locally_connected(m)


def test_inflate_adds_one_state(chain):
    bigger, back = inflate(chain, random.Random(0))
    assert len(bigger.states) == 4
    assert set(back.values()) == set(chain.states)
    assert validate(bigger) == []
    assert is_uniform(bigger) and is_locally_connected(bigger)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**63),
    uniform=st.booleans(),
    connected=st.booleans(),
)
def test_requested_constraints_hold(seed, uniform, connected):
    m = generate(GenSpec(max_states=6, agents=3, atoms=2, uniform=uniform, locally_connected=connected), seed)
    assert validate(m) == []
    assert 1 <= len(m.states) <= 6
    if uniform:
        assert is_uniform(m)
    if connected:
        assert is_locally_connected(m)
