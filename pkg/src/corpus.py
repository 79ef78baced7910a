"""
Worked counterexample models.

Each entry pairs two models with a relation and the verdicts the toolkit must
reproduce on them. ``load_corpus`` re-derives every verdict and refuses to
return a corpus that no longer matches.

- thm14: a {K, Bplus}-bisimulation relating states that disagree on
  conditional belief, so conditional belief is not definable from knowledge
  and safe belief.
- thm15: a {K, Bc}-bisimulation relating states that disagree on safe belief.
- thm21: states equivalent for knowledge, safe belief and conditional belief
  that disagree on the strict plausibility diamond.
"""

import itertools
import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field

from src.bisim import (
    Relation, check_bc, check_structural, greatest_bisimulation, greatest_structural, modal_equiv,
)
from src.errors import CorpusMismatchError, ModelInputError
from src.model import Model, Pair, assemble, min_set, save_model
from src.semantics import holds
from src.syntax import parse, parse_fragment

logger = logging.getLogger("plausikit.corpus")


class Verdict(BaseModel):
    kind: Literal["structural", "bc", "holds", "equiv", "in-greatest"]
    expected: bool
    fragment: str | None = None
    side: Literal["left", "right"] | None = None
    state: str | None = None
    formula: str | None = None
    pair: tuple[str, str] | None = None

    def describe(self) -> str:
        match self.kind:
            case "structural" | "bc":
                return f"Z is a {self.fragment} bisimulation"
            case "holds":
                return f"{self.side} model, {self.state} |= {self.formula}"
            case "equiv":
                return f"{self.pair} equivalent for {self.fragment}"
            case "in-greatest":
                return f"{self.pair} in greatest {self.fragment} bisimulation"
        return self.kind


class CorpusEntry(BaseModel):
    name: str
    description: str
    left: Model
    right: Model
    relation: list[Pair] = Field(default_factory=list)
    verdicts: list[Verdict]

    def z(self) -> Relation:
        return Relation(self.left, self.right, frozenset(self.relation))


def evaluate_verdict(entry: CorpusEntry, verdict: Verdict) -> bool:
    fragment = parse_fragment(verdict.fragment or "")
    match verdict.kind:
        case "structural":
            return check_structural(entry.z(), fragment).ok
        case "bc":
            return check_bc(entry.z(), fragment).ok
        case "holds":
            model = entry.left if verdict.side == "left" else entry.right
            return holds(model, verdict.state, parse(verdict.formula))
        case "equiv":
            w, v = verdict.pair
            return modal_equiv(entry.left, w, entry.right, v, fragment)
        case "in-greatest":
            return tuple(verdict.pair) in greatest_bisimulation(entry.left, entry.right, fragment)
    raise ModelInputError(f"unknown verdict kind {verdict.kind!r}")


def verify_entry(entry: CorpusEntry) -> list[str]:
    """Differences between stored and re-derived verdicts, one line each."""
    diffs = []
    for verdict in entry.verdicts:
        actual = evaluate_verdict(entry, verdict)
        if actual != verdict.expected:
            diffs.append(f"{entry.name}: {verdict.describe()}: expected {verdict.expected}, got {actual}")
    return diffs


def _thm15() -> CorpusEntry:
    left = assemble(["w", "v"], {"a": [["w", "v"]]}, valuation={"p": ["w"]})
    right = assemble(
        ["wp", "vp"], {"a": [["wp", "vp"]]},
        {"a": {s: [("wp", "vp"), ("vp", "wp")] for s in ("wp", "vp")}},
        valuation={"p": ["wp"]},
    )
    return CorpusEntry(
        name="thm15",
        description="Safe belief is not definable from knowledge and conditional belief",
        left=left,
        right=right,
        relation=[("w", "wp"), ("v", "vp")],
        verdicts=[
            Verdict(kind="structural", fragment="K", expected=True),
            Verdict(kind="bc", fragment="K,Bc", expected=True),
            Verdict(kind="holds", side="left", state="w", formula="Bplus[a] p", expected=True),
            Verdict(kind="holds", side="right", state="wp", formula="Bplus[a] p", expected=False),
            Verdict(kind="equiv", fragment="K,Bc", pair=("w", "wp"), expected=True),
            Verdict(kind="equiv", fragment="K,Bplus", pair=("w", "wp"), expected=False),
            Verdict(kind="in-greatest", fragment="K,Bplus", pair=("w", "wp"), expected=False),
        ],
    )


def _thm21() -> CorpusEntry:
    left = assemble(
        ["w", "v"], {"a": [["w", "v"]]},
        {"a": {"w": [("v", "w")]}},
        valuation={"p": ["w", "v"]},
    )
    right = assemble(
        ["wp", "vp"], {"a": [["wp", "vp"]]},
        {"a": {s: [("wp", "vp"), ("vp", "wp")] for s in ("wp", "vp")}},
        valuation={"p": ["wp", "vp"]},
    )
    return CorpusEntry(
        name="thm21",
        description="The strict plausibility box is not definable from knowledge, safe and conditional belief",
        left=left,
        right=right,
        relation=[("v", "vp"), ("v", "wp"), ("w", "vp"), ("w", "wp")],
        verdicts=[
            Verdict(kind="structural", fragment="K,Bplus", expected=True),
            Verdict(kind="bc", fragment="K,Bplus,Bc", expected=True),
            Verdict(kind="structural", fragment="K,Gt", expected=False),
            Verdict(kind="equiv", fragment="K,Bc,Bplus", pair=("w", "wp"), expected=True),
            Verdict(kind="equiv", fragment="K,Gt", pair=("w", "wp"), expected=False),
            Verdict(kind="holds", side="left", state="w", formula="GtDia[a] true", expected=True),
            Verdict(kind="holds", side="right", state="wp", formula="GtDia[a] true", expected=False),
        ],
    )


def _thm14() -> CorpusEntry:
    left = assemble(
        ["w", "v", "u"], {"a": [["w", "v", "u"]]},
        {"a": {"w": [("w", "u")]}},
        valuation={"p": ["w", "v", "u"], "q": ["w", "v"]},
    )
    right = assemble(
        ["wp", "vp"], {"a": [["wp", "vp"]]},
        valuation={"p": ["wp", "vp"], "q": ["wp"]},
    )
    return CorpusEntry(
        name="thm14",
        description="Conditional belief is not definable from knowledge and safe belief",
        left=left,
        right=right,
        relation=[("u", "vp"), ("v", "wp"), ("w", "wp")],
        verdicts=[
            Verdict(kind="structural", fragment="K,Bplus", expected=True),
            Verdict(kind="holds", side="left", state="w", formula="B[a | p] q", expected=True),
            Verdict(kind="holds", side="right", state="wp", formula="B[a | p] q", expected=False),
            Verdict(kind="bc", fragment="K,Bc", expected=False),
            Verdict(kind="equiv", fragment="K,Bplus", pair=("w", "wp"), expected=True),
            Verdict(kind="equiv", fragment="K,Bc", pair=("w", "wp"), expected=False),
        ],
    )


def corpus_entries() -> list[CorpusEntry]:
    return [_thm14(), _thm15(), _thm21()]


def load_corpus(verify: bool = True) -> list[CorpusEntry]:
    """
    The corpus, with every verdict re-derived.

    Raises:
        CorpusMismatchError: if any stored verdict is not reproduced.
    """
    entries = corpus_entries()
    if verify:
        diffs = [line for entry in entries for line in verify_entry(entry)]
        if diffs:
            raise CorpusMismatchError(diffs)
        logger.info(f"Verified {sum(len(e.verdicts) for e in entries)} corpus verdicts")
    return entries


def export_corpus(directory: str | Path) -> list[Path]:
    """Write ``<name>L.json``, ``<name>R.json`` and ``<name>Z.json`` for every entry."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in corpus_entries():
        left_path = directory / f"{entry.name}L.json"
        right_path = directory / f"{entry.name}R.json"
        relation_path = directory / f"{entry.name}Z.json"
        save_model(entry.left, left_path)
        save_model(entry.right, right_path)
        relation_path.write_text(entry.z().to_json(left_path.name, right_path.name), encoding="utf-8")
        written += [left_path, right_path, relation_path]
    return written


# ---------- counterexamples to the translations off their model classes ----------

def gt_translation_counterexample() -> tuple[Model, str, str, str]:
    """
    A non-uniform model where the strict plausibility translation of
    conditional belief fails: (model, condition, body, falsifying state).
    """
    model = assemble(
        ["w", "v"], {"a": [["w", "v"]]},
        {"a": {"w": [("v", "w")]}},
        valuation={"p": ["v"]},
    )
    return model, "true", "p", "v"


def safe_translation_counterexample() -> tuple[Model, str, str, str]:
    """A uniform model that is not locally connected where the safe belief translation fails."""
    model = assemble(
        ["w", "v"], {"a": [["w", "v"]]},
        valuation={"p": ["w", "v"], "q": ["w"]},
    )
    return model, "p", "q", "w"


# ---------- search for the knowledge/safe belief witness ----------

def _star_orders(centre: str, block: list[str]) -> list[list[Pair]]:
    """Preorders whose non-reflexive pairs all involve ``centre``."""
    others = [x for x in block if x != centre]
    shapes = ([], [(centre, "_")], [("_", centre)], [(centre, "_"), ("_", centre)])
    found = []
    for choice in itertools.product(shapes, repeat=len(others)):
        pairs = [
            tuple(other if s == "_" else s for s in pair)
            for other, shape in zip(others, choice) for pair in shape
        ]
        below = {x for x, y in pairs if y == centre}
        above = {y for x, y in pairs if x == centre}
        if any(x != y for x in below for y in above):
            continue
        found.append(pairs)
    return found


def search_thm14_witness() -> CorpusEntry | None:
    """
    Bounded search for two models and a {K, Bplus}-bisimulation relating w to
    wp while ``B[a | p] q`` separates them. The left model has states w, v, u
    with w and v satisfying p and q and u only p; the right model has wp
    (p and q) and vp (only p). Left orders range over star shaped preorders,
    right orders over all preorders on two states.
    """
    block = ["w", "v", "u"]
    formula = parse("B[a | p] q")
    two_state = [[], [("wp", "vp")], [("vp", "wp")], [("wp", "vp"), ("vp", "wp")]]
    right_options = [
        assemble(
            ["wp", "vp"], {"a": [["wp", "vp"]]},
            {"a": {"wp": at_wp, "vp": at_vp}},
            valuation={"p": ["wp", "vp"], "q": ["wp"]},
        )
        for at_wp in two_state for at_vp in two_state
    ]
    right_options = [
        r for r in right_options
        if min_set(r, "a", "wp", r.state_set) == r.state_set and not holds(r, "wp", formula)
    ]
    for at_w in _star_orders("w", block):
        for at_v in _star_orders("v", block):
            for at_u in _star_orders("u", block):
                left = assemble(
                    block, {"a": [block]},
                    {"a": {"w": at_w, "v": at_v, "u": at_u}},
                    valuation={"p": block, "q": ["w", "v"]},
                )
                if min_set(left, "a", "w", left.state_set) != {"w", "v"}:
                    continue
                if not holds(left, "w", formula):
                    continue
                for right in right_options:
                    z = greatest_structural(left, right, parse_fragment("K,Bplus"))
                    if ("w", "wp") in z:
                        logger.info(f"Found witness with {len(z.pairs)} related pairs")
                        return CorpusEntry(
                            name="thm14-search",
                            description="Search result for the knowledge/safe belief witness",
                            left=left,
                            right=right,
                            relation=sorted(z.pairs),
                            verdicts=[
                                Verdict(kind="structural", fragment="K,Bplus", expected=True),
                                Verdict(kind="holds", side="left", state="w", formula="B[a | p] q", expected=True),
                                Verdict(kind="holds", side="right", state="wp", formula="B[a | p] q", expected=False),
                            ],
                        )
    return None
