"""
Formula translations.

``reduce_dynamic`` removes announcement and upgrade operators with the
reduction axioms, rewriting the innermost-leftmost dynamic node first and
recording every step. ``translate_gt`` and ``translate_safe`` replace
conditional belief by the strict plausibility box and by safe belief; they
are equivalences only on uniform (and, for safe belief, locally connected)
models.
"""

import logging
from dataclasses import dataclass
from typing import Iterable

from src.errors import ModelInputError
from src.syntax import (
    And, Announce, Atom, Bot, CondBelief, Formula, Fragment, GtBox, Implies, Know, Not, Op,
    Or, SafeBelief, Top, Upgrade, children, fragment_of, fragment_text, iff, khat, show,
    size, with_children,
)

logger = logging.getLogger("plausikit.translate")

Path = tuple[int, ...]


@dataclass(frozen=True)
class RewriteStep:
    path: Path
    rule: str
    before: Formula
    after: Formula

    def describe(self) -> str:
        where = ".".join(map(str, self.path)) or "root"
        return f"{self.rule} at {where}: {show(self.before)}  ==>  {show(self.after)}"


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[RewriteStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def _announcement_rule(pre: Formula, body: Formula) -> tuple[str, Formula]:
    def ann(f: Formula) -> Formula:
        return Announce(pre, f)

    match body:
        case Atom():
            return "ann-atom", Implies(pre, body)
        case Top():
            return "ann-top", Top()
        case Bot():
            return "ann-bot", Implies(pre, Bot())
        case Not(sub):
            return "ann-not", Implies(pre, Not(ann(sub)))
        case And(left, right):
            return "ann-and", And(ann(left), ann(right))
        case Or(left, right):
            return "ann-or", Or(ann(left), ann(right))
        case Implies(left, right):
            return "ann-implies", Implies(ann(left), ann(right))
        case Know(agent, sub):
            return "ann-K", Implies(pre, Know(agent, ann(sub)))
        case CondBelief(agent, cond, sub):
            return "ann-Bc", Implies(pre, CondBelief(agent, And(pre, ann(cond)), ann(sub)))
        case SafeBelief(agent, sub):
            return "ann-Bplus", Implies(pre, SafeBelief(agent, ann(sub)))
        case GtBox(agent, sub):
            return "ann-Gt", Implies(pre, GtBox(agent, ann(sub)))
    raise ModelInputError(f"no reduction axiom for announcement body {show(body)}")


def _upgrade_rule(pre: Formula, body: Formula) -> tuple[str, Formula]:
    def up(f: Formula) -> Formula:
        return Upgrade(pre, f)

    def split_box(box, agent: str, sub: Formula) -> Formula:
        inside = Implies(pre, up(sub))
        outside = Implies(Not(pre), up(sub))
        return And(
            Implies(pre, box(agent, inside)),
            Implies(Not(pre), And(box(agent, outside), Know(agent, inside))),
        )

    match body:
        case Atom():
            return "up-atom", body
        case Top():
            return "up-top", Top()
        case Bot():
            return "up-bot", Bot()
        case Not(sub):
            return "up-not", Not(up(sub))
        case And(left, right):
            return "up-and", And(up(left), up(right))
        case Or(left, right):
            return "up-or", Or(up(left), up(right))
        case Implies(left, right):
            return "up-implies", Implies(up(left), up(right))
        case Know(agent, sub):
            return "up-K", Know(agent, up(sub))
        case CondBelief(agent, cond, sub):
            promoted = And(pre, up(cond))
            reachable = khat(agent, promoted)
            return "up-Bc", Or(
                And(reachable, CondBelief(agent, promoted, up(sub))),
                And(Not(reachable), CondBelief(agent, up(cond), up(sub))),
            )
        case SafeBelief(agent, sub):
            return "up-Bplus", split_box(SafeBelief, agent, sub)
        case GtBox(agent, sub):
            return "up-Gt", split_box(GtBox, agent, sub)
    raise ModelInputError(f"no reduction axiom for upgrade body {show(body)}")


def apply_rule(redex: Formula) -> tuple[str, Formula]:
    """One reduction axiom step on a dynamic node whose arguments are static."""
    match redex:
        case Announce(pre, body):
            return _announcement_rule(pre, body)
        case Upgrade(pre, body):
            return _upgrade_rule(pre, body)
    raise ModelInputError(f"{show(redex)} is not a dynamic formula")


def _innermost(f: Formula, path: Path = ()) -> tuple[Path, Formula] | None:
    for index, child in enumerate(children(f)):
        found = _innermost(child, path + (index,))
        if found is not None:
            return found
    if isinstance(f, (Announce, Upgrade)):
        return path, f
    return None


def subformula_at(f: Formula, path: Path) -> Formula:
    for index in path:
        f = children(f)[index]
    return f


def replace_at(f: Formula, path: Path, replacement: Formula) -> Formula:
    if not path:
        return replacement
    kids = list(children(f))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], replacement)
    return with_children(f, tuple(kids))


def reduce_dynamic(f: Formula) -> tuple[Formula, RewriteTrace]:
    """
    Rewrite ``f`` into an equivalent formula without announcements and upgrades.

    Returns:
        The static formula and the trace of rewrite steps that produced it.
    """
    steps: list[RewriteStep] = []
    current = f
    while (found := _innermost(current)) is not None:
        path, redex = found
        rule, reduct = apply_rule(redex)
        steps.append(RewriteStep(path, rule, redex, reduct))
        current = replace_at(current, path, reduct)
    if steps:
        logger.info(f"Reduced dynamic formula in {len(steps)} steps, size {size(f)} -> {size(current)}")
    return current, RewriteTrace(tuple(steps))


def replay(f: Formula, trace: RewriteTrace) -> Formula:
    """Re-apply recorded steps; each step must find its recorded redex and reduct."""
    current = f
    for number, step in enumerate(trace, start=1):
        try:
            found = subformula_at(current, step.path)
        except IndexError:
            raise ModelInputError(f"step {number}: no subformula at {step.path}") from None
        if found != step.before:
            raise ModelInputError(f"step {number}: expected {show(step.before)}, found {show(found)}")
        rule, reduct = apply_rule(found)
        if rule != step.rule or reduct != step.after:
            raise ModelInputError(f"step {number}: recorded {step.rule} does not reproduce")
        current = replace_at(current, step.path, reduct)
    return current


def rewrite_measure(f: Formula) -> tuple[int, ...]:
    """
    Termination measure for ``reduce_dynamic``. Entry k sums 4 ** size(body)
    over the dynamic nodes below exactly k dynamic ancestors. Each step lowers
    the entry of the rewritten node's level and only touches shallower levels,
    so the vectors decrease when compared deepest level first
    (see ``measure_decreased``).
    """
    totals: dict[int, int] = {}

    def visit(g: Formula, level: int) -> None:
        below = level
        if isinstance(g, (Announce, Upgrade)):
            totals[level] = totals.get(level, 0) + 4 ** size(g.body)
            below = level + 1
        for child in children(g):
            visit(child, below)

    visit(f, 0)
    if not totals:
        return ()
    return tuple(totals.get(k, 0) for k in range(max(totals) + 1))


def measure_decreased(before: tuple[int, ...], after: tuple[int, ...]) -> bool:
    width = max(len(before), len(after))
    padded_before = tuple(reversed(before + (0,) * (width - len(before))))
    padded_after = tuple(reversed(after + (0,) * (width - len(after))))
    return padded_after < padded_before


def reduction_axioms(phi: Formula, alpha: Formula, psi: Formula, agent: str) -> dict[str, Formula]:
    """
    Instances of the reduction axioms as named biconditionals, for announcing
    or upgrading ``phi`` over each operator applied to ``psi`` (``alpha`` is
    the condition of conditional belief and the second conjunct).
    """
    bodies = [
        Top(), Bot(), Not(psi), And(alpha, psi), Or(alpha, psi), Implies(alpha, psi),
        Know(agent, psi), CondBelief(agent, alpha, psi), SafeBelief(agent, psi), GtBox(agent, psi),
    ]
    if isinstance(psi, Atom):
        bodies.insert(0, psi)
    axioms: dict[str, Formula] = {}
    for wrap in (Announce, Upgrade):
        for body in bodies:
            lhs = wrap(phi, body)
            rule, rhs = apply_rule(lhs)
            axioms[rule] = iff(lhs, rhs)
    return axioms


def static_fragment_for(fragment: Iterable[Op]) -> Fragment:
    """The static fragment that ``reduce_dynamic`` output lands in for an input fragment."""
    ops = set(fragment)
    result = ops - {Op.Ann, Op.Up}
    if Op.Up in ops and result & {Op.Bc, Op.Bplus, Op.Gt}:
        result.add(Op.K)
    return frozenset(result)


def _require_fragment(f: Formula, allowed: frozenset[Op], name: str) -> None:
    extra = fragment_of(f) - allowed
    if extra:
        raise ModelInputError(
            f"{name} accepts formulas in {fragment_text(allowed)}, got operators {fragment_text(extra)}"
        )


def _translate(f: Formula, replace) -> Formula:
    kids = tuple(_translate(c, replace) for c in children(f))
    rebuilt = with_children(f, kids)
    if isinstance(rebuilt, CondBelief):
        return replace(rebuilt.agent, rebuilt.cond, rebuilt.body)
    return rebuilt


def translate_gt(f: Formula) -> Formula:
    """Conditional belief as knowledge of "the most plausible condition states satisfy the body"."""
    _require_fragment(f, frozenset({Op.K, Op.Bc}), "translate_gt")

    def replace(agent: str, cond: Formula, body: Formula) -> Formula:
        nothing_better = Not(Not(GtBox(agent, Not(cond))))
        return Know(agent, Implies(And(cond, nothing_better), body))

    return _translate(f, replace)


def translate_safe(f: Formula) -> Formula:
    _require_fragment(f, frozenset({Op.K, Op.Bc, Op.Bplus}), "translate_safe")

    def replace(agent: str, cond: Formula, body: Formula) -> Formula:
        return Implies(khat(agent, cond), khat(agent, And(cond, SafeBelief(agent, Implies(cond, body)))))

    return _translate(f, replace)
