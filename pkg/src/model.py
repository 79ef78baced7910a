"""
Finite epistemic plausibility models and their structural properties.

A model carries, per agent, an epistemic equivalence relation and, per agent
and state, a plausibility preorder stored as explicit pairs. A pair (x, y) in
``plaus[i][w]`` reads "at w, agent i considers x at least as plausible as y".
"""

import json
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import ModelInputError

logger = logging.getLogger("plausikit.model")

IDENTIFIER = re.compile(r"^[A-Za-z0-9_]+$")

Pair = tuple[str, str]


class Model(BaseModel):
    """
    An epistemic plausibility model. Instances are immutable; equality between
    models should be checked on ``to_json()``, not with ``==``.
    """
    model_config = ConfigDict(frozen=True)

    states: tuple[str, ...]
    agents: tuple[str, ...]
    epist: dict[str, frozenset[Pair]]
    plaus: dict[str, dict[str, frozenset[Pair]]]
    valuation: dict[str, frozenset[str]] = Field(default_factory=dict)

    @field_validator("states", "agents")
    @classmethod
    def _sorted_identifiers(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        for name in value:
            if not IDENTIFIER.match(name):
                raise ValueError(f"identifier {name!r} must match [A-Za-z0-9_]+")
        if len(set(value)) != len(value):
            raise ValueError("duplicate identifiers")
        return tuple(sorted(value))

    @field_validator("valuation")
    @classmethod
    def _atom_names(cls, value: dict[str, frozenset[str]]) -> dict[str, frozenset[str]]:
        for atom in value:
            if not IDENTIFIER.match(atom):
                raise ValueError(f"atom {atom!r} must match [A-Za-z0-9_]+")
        return value

    @cached_property
    def state_set(self) -> frozenset[str]:
        return frozenset(self.states)

    @cached_property
    def class_index(self) -> dict[tuple[str, str], frozenset[str]]:
        classes: dict[tuple[str, str], set[str]] = {}
        for agent, pairs in self.epist.items():
            for x, y in pairs:
                classes.setdefault((agent, x), set()).add(y)
        return {key: frozenset(members) for key, members in classes.items()}

    def _require(self, agent: str, state: str) -> None:
        if agent not in self.agents:
            raise ModelInputError(f"unknown agent {agent!r}")
        if state not in self.state_set:
            raise ModelInputError(f"unknown state {state!r}")

    def eq_class(self, agent: str, state: str) -> frozenset[str]:
        self._require(agent, state)
        return self.class_index.get((agent, state), frozenset())

    def leq(self, agent: str, state: str) -> frozenset[Pair]:
        self._require(agent, state)
        return self.plaus.get(agent, {}).get(state, frozenset())

    def down_set(self, agent: str, state: str) -> frozenset[str]:
        """States in the agent's class at ``state`` that are at least as plausible as it."""
        order = self.leq(agent, state)
        return frozenset(v for v in self.eq_class(agent, state) if (v, state) in order)

    def strict_down_set(self, agent: str, state: str) -> frozenset[str]:
        order = self.leq(agent, state)
        return frozenset(
            v for v in self.eq_class(agent, state)
            if (v, state) in order and (state, v) not in order
        )

    def extension(self, atom: str) -> frozenset[str]:
        return self.valuation.get(atom, frozenset())

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(sorted(self.valuation))

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "agents": list(self.agents),
            "epist": {i: sorted([x, y] for x, y in pairs) for i, pairs in self.epist.items()},
            "plaus": {
                i: {w: sorted([x, y] for x, y in pairs) for w, pairs in by_state.items()}
                for i, by_state in self.plaus.items()
            },
            "valuation": {p: sorted(ext) for p, ext in self.valuation.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


@dataclass(frozen=True)
class Check:
    """A yes/no answer together with the first witness when the answer is no."""
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class StrictOrders:
    lt: dict[tuple[str, str], frozenset[Pair]]
    eqv: dict[tuple[str, str], frozenset[Pair]]


def model_from_dict(data: Mapping) -> Model:
    try:
        return Model.model_validate(data)
    except ValidationError as e:
        raise ModelInputError(f"malformed model: {e}") from e


def load_model(path: str | Path) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelInputError(f"cannot read model file {path}: {e}") from e
    try:
        model = Model.model_validate_json(text)
    except ValidationError as e:
        raise ModelInputError(f"malformed model file {path}: {e}") from e
    logger.info(f"Loaded model from {path}: {len(model.states)} states, {len(model.agents)} agents")
    return model


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(model.to_json(), encoding="utf-8")


def transitive_closure(pairs: Iterable[Pair]) -> frozenset[Pair]:
    closure = set(pairs)
    while True:
        extra = {(x, z) for x, y in closure for y2, z in closure if y == y2} - closure
        if not extra:
            return frozenset(closure)
        closure |= extra


def assemble(
    states: Iterable[str],
    partitions: Mapping[str, Iterable[Iterable[str]]],
    orders: Mapping[str, Mapping[str, Iterable[Pair]]] | None = None,
    valuation: Mapping[str, Iterable[str]] | None = None,
) -> Model:
    """
    Build a model from epistemic partitions and generating pairs for the
    plausibility orders; each order is closed reflexively over all states and
    transitively. Agents without an entry in ``orders`` get discrete orders.
    """
    states = tuple(states)
    orders = orders or {}
    epist = {
        agent: frozenset((x, y) for block in blocks for x in block for y in block)
        for agent, blocks in ((a, [tuple(b) for b in bs]) for a, bs in partitions.items())
    }
    identity = {(s, s) for s in states}
    plaus = {
        agent: {
            w: transitive_closure(identity | set(orders.get(agent, {}).get(w, ())))
            for w in states
        }
        for agent in epist
    }
    return model_from_dict({
        "states": states,
        "agents": tuple(epist),
        "epist": epist,
        "plaus": plaus,
        "valuation": {p: frozenset(ext) for p, ext in (valuation or {}).items()},
    })


def _relation_violations(label: str, pairs: frozenset[Pair], domain: tuple[str, ...]) -> list[str]:
    problems = []
    for s in domain:
        if (s, s) not in pairs:
            problems.append(f"{label} not reflexive at {s}")
    successors: dict[str, set[str]] = {}
    for x, y in pairs:
        successors.setdefault(x, set()).add(y)
    for x, y in sorted(pairs):
        for z in sorted(successors.get(y, ())):
            if (x, z) not in pairs:
                problems.append(f"{label} not transitive: ({x}, {y}) and ({y}, {z}) without ({x}, {z})")
    return problems


def validate(m: Model) -> list[str]:
    """
    Every violated model invariant, with witnesses. An empty list means the
    model is a legal epistemic plausibility model.
    """
    problems: list[str] = []
    known = m.state_set
    if not m.states:
        problems.append("model has no states")
    if not m.agents:
        problems.append("model has no agents")

    for agent in sorted(m.epist):
        if agent not in m.agents:
            problems.append(f"epist names unknown agent {agent}")
    for agent in sorted(m.plaus):
        if agent not in m.agents:
            problems.append(f"plaus names unknown agent {agent}")

    for agent in m.agents:
        if agent not in m.epist:
            problems.append(f"epist has no entry for agent {agent}")
            continue
        pairs = m.epist[agent]
        unknown = sorted({s for pair in pairs for s in pair} - known)
        if unknown:
            problems.extend(f"epist[{agent}] mentions unknown state {s}" for s in unknown)
            continue
        problems.extend(_relation_violations(f"epist[{agent}]", pairs, m.states))
        for x, y in sorted(pairs):
            if (y, x) not in pairs:
                problems.append(f"epist[{agent}] not symmetric: ({x}, {y}) without ({y}, {x})")

    for agent in m.agents:
        by_state = m.plaus.get(agent, {})
        for w in sorted(by_state):
            if w not in known:
                problems.append(f"plaus[{agent}] has entry for unknown state {w}")
        for w in m.states:
            if w not in by_state:
                problems.append(f"plaus has no entry for ({agent}, {w})")
                continue
            pairs = by_state[w]
            unknown = sorted({s for pair in pairs for s in pair} - known)
            if unknown:
                problems.extend(f"plaus[{agent}][{w}] mentions unknown state {s}" for s in unknown)
                continue
            problems.extend(_relation_violations(f"plaus[{agent}][{w}]", pairs, m.states))

    for atom in sorted(m.valuation):
        for s in sorted(m.valuation[atom] - known):
            problems.append(f"valuation[{atom}] mentions unknown state {s}")

    if problems:
        logger.debug(f"Model has {len(problems)} violations, first: {problems[0]}")
    return problems


def _subset(m: Model, xs: Iterable[str]) -> frozenset[str]:
    xs = frozenset(xs)
    stray = xs - m.state_set
    if stray:
        raise ModelInputError(f"unknown states {sorted(stray)}")
    return xs


def min_set(m: Model, agent: str, state: str, xs: Iterable[str]) -> frozenset[str]:
    """Elements x of xs such that every y in xs with y <= x also has x <= y."""
    order = m.leq(agent, state)
    xs = _subset(m, xs)
    return frozenset(
        x for x in xs
        if all((x, y) in order for y in xs if (y, x) in order)
    )


def min_set_strict(m: Model, agent: str, state: str, xs: Iterable[str]) -> frozenset[str]:
    """Same set as ``min_set``, phrased as "no y in xs is strictly below x"."""
    order = m.leq(agent, state)
    xs = _subset(m, xs)
    return frozenset(
        x for x in xs
        if not any((y, x) in order and (x, y) not in order for y in xs)
    )


def strict(m: Model) -> StrictOrders:
    lt: dict[tuple[str, str], frozenset[Pair]] = {}
    eqv: dict[tuple[str, str], frozenset[Pair]] = {}
    for agent in m.agents:
        for w in m.states:
            order = m.leq(agent, w)
            lt[(agent, w)] = frozenset((x, y) for x, y in order if (y, x) not in order)
            eqv[(agent, w)] = frozenset((x, y) for x, y in order if (y, x) in order)
    return StrictOrders(lt=lt, eqv=eqv)


def is_uniform(m: Model) -> Check:
    """Orders agree across each epistemic class; witness (agent, w, v, differing pair)."""
    for agent in m.agents:
        for w in m.states:
            for v in sorted(m.eq_class(agent, w)):
                if v == w:
                    continue
                difference = m.leq(agent, w) ^ m.leq(agent, v)
                if difference:
                    return Check(False, (agent, w, v, min(difference)))
    return Check(True)


def is_locally_connected(m: Model) -> Check:
    """Indistinguishable states are comparable at the evaluation state; witness (agent, w, v)."""
    for agent in m.agents:
        for w in m.states:
            order = m.leq(agent, w)
            for v in sorted(m.eq_class(agent, w)):
                if (w, v) not in order and (v, w) not in order:
                    return Check(False, (agent, w, v))
    return Check(True)


def is_image_finite(m: Model) -> Check:
    """Every epistemic class and every order lies inside the finite state set; witness (agent, w)."""
    for agent in m.agents:
        for w in m.states:
            scope = m.eq_class(agent, w) | {s for pair in m.leq(agent, w) for s in pair}
            if not scope <= m.state_set:
                return Check(False, (agent, w))
    return Check(True)
