"""
Bisimulation for epistemic plausibility models.

Structural notions (knowledge, safe belief, strict plausibility) are decided
clause by clause and by greatest-fixpoint refinement. Conditional belief
quantifies over formulas; on finite models that quantifier is replaced by the
family of simultaneously definable truth-set pairs, computed as the coarsest
partition of the disjoint union of both models that is stable under the
fragment's operators. Every union of blocks is a definable pair and every
definable pair is a union of blocks.
"""

import json
import logging
from dataclasses import dataclass
from functools import reduce
from pathlib import Path as FilePath
from typing import Callable, Iterable, Iterator, NamedTuple

from pydantic import BaseModel, ValidationError

from src.config import load_config
from src.errors import ModelInputError, PairCapExceeded, PlausikitError
from src.model import Model, is_image_finite, min_set
from src.syntax import (
    And, Atom, Bot, CondBelief, Formula, Fragment, GtBox, Know, Not, Op, Or, SafeBelief, Top,
    fragment_text,
)

logger = logging.getLogger("plausikit.bisim")

STRUCTURAL = (Op.K, Op.Bplus, Op.Gt)

Pair = tuple[str, str]


class RelationFile(BaseModel):
    """On-disk relation: names of the two model files and the related state pairs."""
    left: str = "left"
    right: str = "right"
    pairs: list[tuple[str, str]]


@dataclass(frozen=True)
class Relation:
    left: Model
    right: Model
    pairs: frozenset[Pair]

    def __post_init__(self):
        for w, v in self.pairs:
            if w not in self.left.state_set or v not in self.right.state_set:
                raise ModelInputError(f"relation pair ({w}, {v}) is not in W x W'")

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def sorted_pairs(self) -> list[Pair]:
        return sorted(self.pairs)

    def to_json(self, left_ref: str = "left", right_ref: str = "right") -> str:
        payload = RelationFile(left=left_ref, right=right_ref, pairs=self.sorted_pairs())
        return json.dumps(payload.model_dump(), sort_keys=True) + "\n"


def identity_relation(m: Model) -> Relation:
    return Relation(m, m, frozenset((s, s) for s in m.states))


def load_relation(
    path: str | FilePath, left: Model, right: Model,
    left_ref: str | None = None, right_ref: str | None = None,
) -> Relation:
    """
    Read a relation file between ``left`` and ``right``. When ``left_ref`` or
    ``right_ref`` is given, the file must name the same model file.
    """
    try:
        data = RelationFile.model_validate_json(FilePath(path).read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        raise ModelInputError(f"malformed relation file {path}: {e}") from e
    for side, recorded, given in (("left", data.left, left_ref), ("right", data.right, right_ref)):
        if given is not None and recorded != side and recorded != FilePath(given).name:
            raise ModelInputError(f"relation file {path} is for {side} model {recorded}, not {FilePath(given).name}")
    return Relation(left, right, frozenset(data.pairs))


class Violation(NamedTuple):
    """A failed clause: which one, at which pair, for which agent, and the unmatched state."""
    clause: str
    pair: Pair
    agent: str | None
    state: str
    condition: Formula | None = None


@dataclass(frozen=True)
class BisimCheck:
    ok: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


def _same_agents(left: Model, right: Model) -> tuple[str, ...]:
    if left.agents != right.agents:
        raise ModelInputError(f"models have different agents: {list(left.agents)} vs {list(right.agents)}")
    return left.agents


def _static(fragment: Iterable[Op], allowed: Iterable[Op], name: str) -> Fragment:
    fragment = frozenset(fragment)
    extra = fragment - frozenset(allowed)
    if extra:
        raise ModelInputError(f"{name} does not accept operators {fragment_text(extra)}")
    return fragment


_SCOPES: dict[Op, Callable[[Model], Callable[[str, str], frozenset[str]]]] = {
    Op.K: lambda m: m.eq_class,
    Op.Bplus: lambda m: m.down_set,
    Op.Gt: lambda m: m.strict_down_set,
}


def _atoms_differ(left: Model, right: Model, w: str, v: str) -> str | None:
    for atom in sorted(set(left.valuation) | set(right.valuation)):
        if (w in left.extension(atom)) != (v in right.extension(atom)):
            return atom
    return None


def _structural_violation(
    left: Model, right: Model, pairs: frozenset[Pair], w: str, v: str, ops: Iterable[Op]
) -> Violation | None:
    atom = _atoms_differ(left, right, w, v)
    if atom is not None:
        return Violation("atoms", (w, v), None, atom)
    for op in STRUCTURAL:
        if op not in ops:
            continue
        scope_left, scope_right = _SCOPES[op](left), _SCOPES[op](right)
        for agent in left.agents:
            here, there = scope_left(agent, w), scope_right(agent, v)
            for x in sorted(here):
                if not any((x, y) in pairs for y in there):
                    return Violation(f"{op.value}-zig", (w, v), agent, x)
            for y in sorted(there):
                if not any((x, y) in pairs for x in here):
                    return Violation(f"{op.value}-zag", (w, v), agent, y)
    return None


def check_structural(z: Relation, fragment: Iterable[Op]) -> BisimCheck:
    """
    Check the atom clause and the zig/zag clauses of every requested
    structural notion. The first violation in pair, operator, agent order is
    reported.
    """
    ops = _static(fragment, STRUCTURAL, "check_structural")
    _same_agents(z.left, z.right)
    for w, v in z.sorted_pairs():
        found = _structural_violation(z.left, z.right, z.pairs, w, v, ops)
        if found is not None:
            return BisimCheck(False, found)
    return BisimCheck(True)


def greatest_structural(left: Model, right: Model, fragment: Iterable[Op]) -> Relation:
    ops = _static(fragment, STRUCTURAL, "greatest_structural")
    _same_agents(left, right)
    current = {
        (w, v) for w in left.states for v in right.states
        if _atoms_differ(left, right, w, v) is None
    }
    rounds = 0
    while True:
        rounds += 1
        frozen = frozenset(current)
        failing = {
            (w, v) for w, v in frozen
            if _structural_violation(left, right, frozen, w, v, ops) is not None
        }
        if not failing:
            break
        current -= failing
    logger.info(f"Greatest {fragment_text(ops)} bisimulation: {len(current)} pairs after {rounds} rounds")
    return Relation(left, right, frozenset(current))


# ---------- definable pairs ----------

Point = tuple[int, str]  # (0, w) for the left model, (1, w') for the right one


@dataclass(frozen=True)
class Block:
    """A class of the definability partition with a formula defining it in both models."""
    points: frozenset[Point]
    formula: Formula
    origin: str

    @property
    def left(self) -> frozenset[str]:
        return frozenset(s for side, s in self.points if side == 0)

    @property
    def right(self) -> frozenset[str]:
        return frozenset(s for side, s in self.points if side == 1)


@dataclass
class PairFamily:
    """
    All truth-set pairs (X, X') of formulas of ``fragment``, represented by the
    blocks they are unions of. Members are enumerated lazily by bitmask.
    """
    left: Model
    right: Model
    fragment: Fragment
    blocks: tuple[Block, ...]

    def __len__(self) -> int:
        return 2 ** len(self.blocks)

    def block_index(self, side: int, state: str) -> int:
        for index, block in enumerate(self.blocks):
            if (side, state) in block.points:
                return index
        raise ModelInputError(f"unknown state {state!r}")

    def member(self, mask: int) -> tuple[frozenset[str], frozenset[str]]:
        chosen = [b for i, b in enumerate(self.blocks) if mask >> i & 1]
        return (
            frozenset().union(*(b.left for b in chosen)),
            frozenset().union(*(b.right for b in chosen)),
        )

    def members(self) -> Iterator[tuple[frozenset[str], frozenset[str]]]:
        for mask in range(len(self)):
            yield self.member(mask)

    def member_formula(self, mask: int) -> Formula:
        chosen = [b.formula for i, b in enumerate(self.blocks) if mask >> i & 1]
        if not chosen:
            return Bot()
        if len(chosen) == len(self.blocks):
            return Top()
        return reduce(Or, chosen)

    def __contains__(self, pair: tuple[Iterable[str], Iterable[str]]) -> bool:
        points = {(0, s) for s in pair[0]} | {(1, s) for s in pair[1]}
        return all(block.points <= points or not (block.points & points) for block in self.blocks)

    def equivalence(self) -> Relation:
        """Pairs of states lying in the same block."""
        return Relation(
            self.left, self.right,
            frozenset((w, v) for block in self.blocks for w in block.left for v in block.right),
        )

    def witness(self, pair: tuple[Iterable[str], Iterable[str]]) -> Formula | None:
        """A formula whose truth sets in the two models are exactly ``pair``."""
        if pair not in self:
            return None
        points = {(0, s) for s in pair[0]} | {(1, s) for s in pair[1]}
        mask = sum(1 << i for i, b in enumerate(self.blocks) if b.points <= points)
        return self.member_formula(mask)


def _atom_blocks(left: Model, right: Model) -> list[Block]:
    atoms = sorted(set(left.valuation) | set(right.valuation))
    groups: dict[tuple[bool, ...], set[Point]] = {}
    for side, m in ((0, left), (1, right)):
        for s in m.states:
            signature = tuple(s in m.extension(p) for p in atoms)
            groups.setdefault(signature, set()).add((side, s))
    blocks = []
    for signature in sorted(groups, reverse=True):
        literals = [Atom(p) if bit else Not(Atom(p)) for p, bit in zip(atoms, signature)]
        formula = reduce(And, literals) if literals else Top()
        blocks.append(Block(frozenset(groups[signature]), formula, "atoms"))
    return blocks


def _boxed(
    left: Model, right: Model, op: Op, agent: str, target: frozenset[Point]
) -> frozenset[Point]:
    result = set()
    for side, m in ((0, left), (1, right)):
        scope = _SCOPES[op](m)
        for s in m.states:
            if all((side, v) in target for v in scope(agent, s)):
                result.add((side, s))
    return frozenset(result)


def _box_formula(op: Op, agent: str, body: Formula) -> Formula:
    return {Op.K: Know, Op.Bplus: SafeBelief, Op.Gt: GtBox}[op](agent, body)


def _splitters(
    left: Model, right: Model, ops: Fragment, blocks: list[Block]
) -> Iterator[tuple[frozenset[Point], Formula, str]]:
    everything = frozenset().union(*(b.points for b in blocks))
    for op in STRUCTURAL:
        if op not in ops:
            continue
        for agent in left.agents:
            for index, block in enumerate(blocks):
                body = Not(block.formula)
                yield _boxed(left, right, op, agent, everything - block.points), \
                    _box_formula(op, agent, body), f"{op.value}[{agent}] of block {index}"
    if Op.Bc not in ops:
        return
    for agent in left.agents:
        for mask in range(1, 2 ** len(blocks)):
            chosen = [b for i, b in enumerate(blocks) if mask >> i & 1]
            condition_points = frozenset().union(*(b.points for b in chosen))
            condition = reduce(Or, (b.formula for b in chosen))
            mins: dict[Point, frozenset[Point]] = {}
            for side, m in ((0, left), (1, right)):
                chosen_here = {s for sd, s in condition_points if sd == side}
                for s in m.states:
                    found = min_set(m, agent, s, chosen_here & m.eq_class(agent, s))
                    mins[(side, s)] = frozenset((side, x) for x in found)
            for index, block in enumerate(blocks):
                avoided = frozenset(p for p, low in mins.items() if not (low & block.points))
                yield avoided, CondBelief(agent, condition, Not(block.formula)), \
                    f"B[{agent}] of union {mask:b} and block {index}"


def definable_pairs(
    left: Model, right: Model, fragment: Iterable[Op], cap: int | None = None
) -> PairFamily:
    """
    The family of truth-set pairs definable in ``fragment`` over both models.

    Raises:
        PairCapExceeded: when the family would grow past ``cap`` pairs.
    """
    ops = _static(fragment, (Op.K, Op.Bc, Op.Bplus, Op.Gt), "definable_pairs")
    _same_agents(left, right)
    cap = load_config().pair_cap if cap is None else cap
    blocks = _atom_blocks(left, right)
    rounds = 0
    while True:
        rounds += 1
        if 2 ** len(blocks) > cap:
            raise PairCapExceeded(cap, 2 ** len(blocks))
        refined = list(blocks)
        for points, formula, origin in _splitters(left, right, ops, blocks):
            next_blocks = []
            for block in refined:
                inside, outside = block.points & points, block.points - points
                if inside and outside:
                    next_blocks.append(Block(inside, And(block.formula, formula), origin))
                    next_blocks.append(Block(outside, And(block.formula, Not(formula)), origin))
                    logger.debug(f"Split block {sorted(block.points)} by {origin}")
                else:
                    next_blocks.append(block)
            refined = next_blocks
        if len(refined) == len(blocks):
            break
        blocks = refined
    ordered = tuple(sorted(blocks, key=lambda b: min(b.points)))
    logger.info(
        f"Definable pairs for {fragment_text(ops)}: {len(ordered)} blocks, "
        f"{2 ** len(ordered)} pairs after {rounds} rounds"
    )
    return PairFamily(left, right, ops, ordered)


def check_bc(
    z: Relation, fragment: Iterable[Op], family: PairFamily | None = None, cap: int | None = None
) -> BisimCheck:
    """
    Conditional belief bisimulation, with the condition ranging over every
    pair definable in ``fragment``; the structural clauses of the fragment's
    other operators are checked first.
    """
    ops = _static(fragment, (Op.K, Op.Bc, Op.Bplus, Op.Gt), "check_bc")
    if Op.Bc not in ops:
        raise ModelInputError("check_bc needs a fragment containing Bc")
    left, right = z.left, z.right
    structural = check_structural(z, ops & set(STRUCTURAL))
    if not structural:
        return structural
    family = family or definable_pairs(left, right, ops, cap)
    ordered = z.sorted_pairs()
    for mask in range(len(family)):
        cond_left, cond_right = family.member(mask)
        for w, v in ordered:
            for agent in left.agents:
                here = min_set(left, agent, w, cond_left & left.eq_class(agent, w))
                there = min_set(right, agent, v, cond_right & right.eq_class(agent, v))
                for x in sorted(here):
                    if not any((x, y) in z.pairs for y in there):
                        return BisimCheck(False, Violation("Bc-zig", (w, v), agent, x, family.member_formula(mask)))
                for y in sorted(there):
                    if not any((x, y) in z.pairs for x in here):
                        return BisimCheck(False, Violation("Bc-zag", (w, v), agent, y, family.member_formula(mask)))
    return BisimCheck(True)


def equivalence_relation(
    left: Model, right: Model, fragment: Iterable[Op], cap: int | None = None
) -> Relation:
    return definable_pairs(left, right, fragment, cap).equivalence()


def modal_equiv(
    left: Model, w: str, right: Model, v: str, fragment: Iterable[Op], cap: int | None = None
) -> bool:
    """Whether ``w`` and ``v`` satisfy the same formulas of ``fragment``."""
    family = definable_pairs(left, right, fragment, cap)
    return family.block_index(0, w) == family.block_index(1, v)


def distinguishing_formula(
    left: Model, w: str, right: Model, v: str, fragment: Iterable[Op], cap: int | None = None
) -> Formula | None:
    """A formula of ``fragment`` true at ``w`` and false at ``v``, or None if they are equivalent."""
    family = definable_pairs(left, right, fragment, cap)
    here = family.block_index(0, w)
    if here == family.block_index(1, v):
        return None
    return family.blocks[here].formula


def greatest_bisimulation(
    left: Model, right: Model, fragment: Iterable[Op], cap: int | None = None
) -> Relation:
    """
    The largest bisimulation for ``fragment``. With conditional belief this is
    fragment equivalence, which is checked to be a bisimulation before it is
    returned.
    """
    ops = _static(fragment, (Op.K, Op.Bc, Op.Bplus, Op.Gt), "greatest_bisimulation")
    if Op.Bc not in ops:
        return greatest_structural(left, right, ops)
    family = definable_pairs(left, right, ops, cap)
    relation = family.equivalence()
    verdict = check_bc(relation, ops, family)
    if not verdict:
        raise PlausikitError(f"equivalence for {fragment_text(ops)} is not a bisimulation: {verdict.violation}")
    return relation


@dataclass(frozen=True)
class HennessyMilnerReport:
    ok: bool
    relation: Relation
    violation: Violation | None

    def __bool__(self) -> bool:
        return self.ok


def hennessy_milner(left: Model, right: Model, cap: int | None = None) -> HennessyMilnerReport:
    """
    Check that equivalence for knowledge and conditional belief is itself
    such a bisimulation. The argument needs image-finite models.

    Raises:
        ModelInputError: when either model is not image-finite.
    """
    for side, m in (("left", left), ("right", right)):
        finite = is_image_finite(m)
        if not finite:
            raise ModelInputError(f"{side} model is not image-finite at {finite.witness}")
    fragment = frozenset({Op.K, Op.Bc})
    family = definable_pairs(left, right, fragment, cap)
    relation = family.equivalence()
    verdict = check_bc(relation, fragment, family)
    if not verdict:
        logger.error(f"Equivalence relation failed the bisimulation check: {verdict.violation}")
    return HennessyMilnerReport(verdict.ok, relation, verdict.violation)
