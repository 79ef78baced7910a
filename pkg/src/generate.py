"""
Random and exhaustive model generation.
"""

import itertools
import logging
import random
from typing import Iterable, Iterator

from pydantic import BaseModel, Field, model_validator

from src.config import load_config
from src.errors import ModelInputError
from src.model import Model, Pair, model_from_dict

logger = logging.getLogger("plausikit.generate")

ATOM_NAMES = ("p", "q", "r", "s", "t", "u")


class GenSpec(BaseModel):
    """
    Parameters for ``generate``. Orders are random preorders inside each
    epistemic class; the flags restrict their shape.
    """
    min_states: int = Field(default=1, ge=1)
    max_states: int = Field(default=4, ge=1)
    agents: int = Field(default=1, ge=1, le=26)
    atoms: int = Field(default=1, ge=0)
    uniform: bool = False
    locally_connected: bool = False
    total_preorders: bool = False
    discrete_preorders: bool = False
    seed: int | None = None

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.min_states > self.max_states:
            raise ValueError("min_states must not exceed max_states")
        return self


def agent_names(count: int) -> list[str]:
    return [chr(ord("a") + k) for k in range(count)]


def atom_names(count: int) -> list[str]:
    if count <= len(ATOM_NAMES):
        return list(ATOM_NAMES[:count])
    return [f"p{k}" for k in range(count)]


def _random_partition(rng: random.Random, states: list[str]) -> list[list[str]]:
    labels: dict[int, list[str]] = {}
    for s in states:
        labels.setdefault(rng.randrange(len(states)), []).append(s)
    return list(labels.values())


def _ranking_order(rng: random.Random, block: list[str]) -> set[Pair]:
    rank = {x: rng.randrange(len(block)) for x in block}
    return {(x, y) for x in block for y in block if rank[x] <= rank[y]}


def _random_order(rng: random.Random, block: list[str], spec: GenSpec) -> set[Pair]:
    if spec.discrete_preorders:
        return {(x, x) for x in block}
    if spec.total_preorders or spec.locally_connected:
        return _ranking_order(rng, block)
    # Two rankings intersected: still a preorder, but may leave states incomparable.
    return _ranking_order(rng, block) & _ranking_order(rng, block)


def generate(spec: GenSpec, seed: int | None = None) -> Model:
    """
    A random model meeting ``spec``; identical spec and seed give an identical model.

    Raises:
        ModelInputError: when the constraint flags cannot be met together.
    """
    if spec.total_preorders and spec.discrete_preorders and spec.max_states > 1:
        raise ModelInputError("total and discrete preorders together only fit single-state classes")
    if seed is None:
        seed = spec.seed if spec.seed is not None else load_config().seed
    rng = random.Random(seed)

    states = [f"s{k}" for k in range(rng.randint(spec.min_states, spec.max_states))]
    agents = agent_names(spec.agents)
    valuation = {
        p: frozenset(s for s in states if rng.random() < 0.5)
        for p in atom_names(spec.atoms)
    }
    identity = {(s, s) for s in states}
    epist: dict[str, frozenset[Pair]] = {}
    plaus: dict[str, dict[str, frozenset[Pair]]] = {}
    for agent in agents:
        blocks = _random_partition(rng, states)
        epist[agent] = frozenset((x, y) for block in blocks for x in block for y in block)
        plaus[agent] = {}
        for block in blocks:
            shared = _random_order(rng, block, spec) if spec.uniform else None
            for w in block:
                order = shared if shared is not None else _random_order(rng, block, spec)
                plaus[agent][w] = frozenset(identity | order)
    model = model_from_dict({
        "states": states, "agents": agents, "epist": epist, "plaus": plaus, "valuation": valuation,
    })
    logger.debug(f"Generated {len(states)}-state model from seed {seed}")
    return model


def inflate(m: Model, rng: random.Random) -> tuple[Model, dict[str, str]]:
    """
    Copy of ``m`` with one state duplicated. The copy is tied with its
    original everywhere, so the result is bisimilar to ``m`` for every notion
    and keeps uniformity and local connectedness.

    Returns:
        The inflated model and the map from its states back to ``m``'s states.
    """
    original = rng.choice(m.states)
    clone = f"{original}c"
    while clone in m.state_set:
        clone += "c"
    back = {s: s for s in m.states} | {clone: original}

    def lift(pairs: frozenset[Pair]) -> frozenset[Pair]:
        return frozenset(
            (x, y) for x in back for y in back if (back[x], back[y]) in pairs
        )

    plaus = {
        i: {w: lift(by_state[back[w]]) for w in back}
        for i, by_state in m.plaus.items()
    }
    valuation = {
        p: ext | ({clone} if original in ext else set()) for p, ext in m.valuation.items()
    }
    inflated = model_from_dict({
        "states": tuple(back),
        "agents": m.agents,
        "epist": {i: lift(pairs) for i, pairs in m.epist.items()},
        "plaus": plaus,
        "valuation": valuation,
    })
    return inflated, back


def set_partitions(items: list[str]) -> Iterator[list[list[str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in set_partitions(rest):
        for k in range(len(partial)):
            yield partial[:k] + [[first] + partial[k]] + partial[k + 1:]
        yield [[first]] + partial


def preorders(block: list[str]) -> list[frozenset[Pair]]:
    """Every reflexive and transitive relation on ``block``."""
    off_diagonal = [(x, y) for x in block for y in block if x != y]
    identity = {(x, x) for x in block}
    found = []
    for bits in itertools.product((False, True), repeat=len(off_diagonal)):
        relation = identity | {pair for pair, bit in zip(off_diagonal, bits) if bit}
        if all((x, z) in relation for x, y in relation for y2, z in relation if y == y2):
            found.append(frozenset(relation))
    return found


def _connected_at(order: frozenset[Pair], w: str, block: list[str]) -> bool:
    return all((w, v) in order or (v, w) in order for v in block)


def all_models(
    max_states: int,
    agents: Iterable[str] = ("a",),
    atoms: Iterable[str] = ("p",),
    uniform: bool = False,
    locally_connected: bool = False,
) -> Iterator[Model]:
    """
    Every model over states s0..s(n-1), n <= ``max_states``, meeting the
    requested constraints. Models are not reduced up to isomorphism.
    """
    agents, atoms = list(agents), list(atoms)
    for n in range(1, max_states + 1):
        states = [f"s{k}" for k in range(n)]
        identity = frozenset((s, s) for s in states)

        def orders_for(partition: list[list[str]]) -> Iterator[dict[str, frozenset[Pair]]]:
            per_block = []
            for block in partition:
                candidates = preorders(block)
                if uniform:
                    if locally_connected:
                        candidates = [o for o in candidates if all(_connected_at(o, w, block) for w in block)]
                    per_block.append([{w: o for w in block} for o in candidates])
                else:
                    per_state = []
                    for w in block:
                        own = [o for o in candidates if not locally_connected or _connected_at(o, w, block)]
                        per_state.append([(w, o) for o in own])
                    per_block.append([dict(choice) for choice in itertools.product(*per_state)])
            for choice in itertools.product(*per_block):
                merged: dict[str, frozenset[Pair]] = {}
                for part in choice:
                    merged.update({w: o | identity for w, o in part.items()})
                yield merged

        per_agent = []
        for _ in agents:
            options = []
            for partition in set_partitions(states):
                epist = frozenset((x, y) for block in partition for x in block for y in block)
                options.extend((epist, orders) for orders in orders_for(partition))
            per_agent.append(options)
        for frame in itertools.product(*per_agent):
            for bits in itertools.product((False, True), repeat=n * len(atoms)):
                valuation = {
                    p: frozenset(s for k, s in enumerate(states) if bits[a * n + k])
                    for a, p in enumerate(atoms)
                }
                yield Model(
                    states=tuple(states),
                    agents=tuple(agents),
                    epist={i: epist for i, (epist, _) in zip(agents, frame)},
                    plaus={i: orders for i, (_, orders) in zip(agents, frame)},
                    valuation=valuation,
                )
