"""
Model checking for the full static and dynamic language.

Truth sets are computed bottom-up with a per-evaluation cache. Dynamic
operators materialize the transformed model and evaluate inside it; the
transformed evaluators are cached by the extension they were built from.
"""

import logging

from src.dynamics import promote, restrict
from src.errors import ModelInputError
from src.model import Check, Model, min_set
from src.syntax import (
    And, Announce, Atom, Bot, CondBelief, Formula, GtBox, Implies, Know, Not, Or,
    SafeBelief, Top, Upgrade,
)

logger = logging.getLogger("plausikit.semantics")


class Evaluator:
    """
    Evaluates formulas on one model. Caches live as long as the evaluator, so
    create one per batch of related queries.
    """

    def __init__(self, model: Model):
        self.model = model
        self.everything = model.state_set
        self._truth: dict[Formula, frozenset[str]] = {}
        self._announced: dict[frozenset[str], "Evaluator"] = {}
        self._upgraded: dict[frozenset[str], "Evaluator"] = {}

    def truth_set(self, f: Formula) -> frozenset[str]:
        found = self._truth.get(f)
        if found is None:
            found = self._compute(f)
            self._truth[f] = found
        return found

    def holds(self, state: str, f: Formula) -> bool:
        if state not in self.everything:
            raise ModelInputError(f"unknown state {state!r}")
        return state in self.truth_set(f)

    def _boxed(self, f: Formula, agent: str, scope) -> frozenset[str]:
        target = self.truth_set(f)
        return frozenset(w for w in self.model.states if scope(agent, w) <= target)

    def _compute(self, f: Formula) -> frozenset[str]:
        m = self.model
        match f:
            case Atom(name):
                return m.extension(name)
            case Top():
                return self.everything
            case Bot():
                return frozenset()
            case Not(sub):
                return self.everything - self.truth_set(sub)
            case And(left, right):
                return self.truth_set(left) & self.truth_set(right)
            case Or(left, right):
                return self.truth_set(left) | self.truth_set(right)
            case Implies(left, right):
                return (self.everything - self.truth_set(left)) | self.truth_set(right)
            case Know(agent, body):
                return self._boxed(body, agent, m.eq_class)
            case SafeBelief(agent, body):
                return self._boxed(body, agent, m.down_set)
            case GtBox(agent, body):
                return self._boxed(body, agent, m.strict_down_set)
            case CondBelief(agent, cond, body):
                condition = self.truth_set(cond)
                target = self.truth_set(body)
                return frozenset(
                    w for w in m.states
                    if min_set(m, agent, w, condition & m.eq_class(agent, w)) <= target
                )
            case Announce(pre, body):
                keep = self.truth_set(pre)
                if not keep:
                    return self.everything
                inner = self._announced.get(keep)
                if inner is None:
                    inner = self._announced[keep] = Evaluator(restrict(m, keep))
                return (self.everything - keep) | inner.truth_set(body)
            case Upgrade(pre, body):
                zone = self.truth_set(pre)
                inner = self._upgraded.get(zone)
                if inner is None:
                    inner = self._upgraded[zone] = Evaluator(promote(m, zone))
                return inner.truth_set(body)
        raise TypeError(f"not a formula: {f!r}")


def truth_set(m: Model, f: Formula) -> frozenset[str]:
    return Evaluator(m).truth_set(f)


def holds(m: Model, state: str, f: Formula) -> bool:
    return Evaluator(m).holds(state, f)


def is_valid_on(m: Model, f: Formula) -> Check:
    """Whether ``f`` holds everywhere; the witness is the least falsifying state."""
    falsified = m.state_set - truth_set(m, f)
    if not falsified:
        return Check(True)
    return Check(False, (min(falsified),))
