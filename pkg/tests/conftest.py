import pytest

from src.corpus import corpus_entries
from src.model import assemble

CHAIN_STATES = ["s0", "s1", "s2"]


@pytest.fixture
def corpus():
    return {entry.name: entry for entry in corpus_entries()}


@pytest.fixture
def thm15(corpus):
    return corpus["thm15"]


@pytest.fixture
def thm21(corpus):
    return corpus["thm21"]


@pytest.fixture
def thm14(corpus):
    return corpus["thm14"]


@pytest.fixture
def chain():
    """One agent, one class, s0 < s1 < s2 at every state; p at s1 and s2, q at s0."""
    return assemble(
        CHAIN_STATES, {"a": [CHAIN_STATES]},
        {"a": {w: [("s0", "s1"), ("s1", "s2")] for w in CHAIN_STATES}},
        valuation={"p": ["s1", "s2"], "q": ["s0"]},
    )


@pytest.fixture
def two_agents():
    """Agent a cannot tell s0 from s1; agent b sees everything."""
    return assemble(
        ["s0", "s1", "s2"],
        {"a": [["s0", "s1"], ["s2"]], "b": [["s0"], ["s1"], ["s2"]]},
        {"a": {w: [("s1", "s0")] for w in ("s0", "s1")}},
        valuation={"p": ["s0"]},
    )
