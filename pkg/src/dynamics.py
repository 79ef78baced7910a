"""
Model transformations: public announcement (hard information) and radical
upgrade (soft information).
"""

import logging
from typing import Iterable

from src.errors import EmptyAnnouncementError, ModelInputError
from src.model import Model
from src.syntax import Formula, show

logger = logging.getLogger("plausikit.dynamics")


def _known(m: Model, states: Iterable[str]) -> frozenset[str]:
    states = frozenset(states)
    stray = states - m.state_set
    if stray:
        raise ModelInputError(f"unknown states {sorted(stray)}")
    return states


def restrict(m: Model, keep: Iterable[str]) -> Model:
    """
    Submodel on ``keep``: relations and valuation are intersected, plausibility
    entries of removed states are dropped.

    Raises:
        EmptyAnnouncementError: if ``keep`` is empty.
    """
    keep = _known(m, keep)
    if not keep:
        raise EmptyAnnouncementError("announcement result would have no states")

    def inside(pairs: frozenset) -> frozenset:
        return frozenset((x, y) for x, y in pairs if x in keep and y in keep)

    return Model(
        states=tuple(s for s in m.states if s in keep),
        agents=m.agents,
        epist={i: inside(pairs) for i, pairs in m.epist.items()},
        plaus={
            i: {w: inside(pairs) for w, pairs in by_state.items() if w in keep}
            for i, by_state in m.plaus.items()
        },
        valuation={p: ext & keep for p, ext in m.valuation.items()},
    )


def promote(m: Model, zone: Iterable[str]) -> Model:
    """
    Radical upgrade by an extension: inside ``zone`` and inside its complement
    the old order survives, and every zone state becomes at least as plausible
    as every state outside it. The cross part ranges over all states.
    """
    zone = _known(m, zone)
    rest = m.state_set - zone
    promoted = frozenset((x, y) for x in zone for y in rest)

    def rebuilt(pairs: frozenset) -> frozenset:
        return frozenset((x, y) for x, y in pairs if (x in zone) == (y in zone)) | promoted

    return Model(
        states=m.states,
        agents=m.agents,
        epist=m.epist,
        plaus={
            i: {w: rebuilt(pairs) for w, pairs in by_state.items()}
            for i, by_state in m.plaus.items()
        },
        valuation=m.valuation,
    )


def announce(m: Model, f: Formula) -> Model:
    from src.semantics import truth_set

    keep = truth_set(m, f)
    logger.info(f"Announcing {show(f)}: {len(keep)} of {len(m.states)} states survive")
    return restrict(m, keep)


def upgrade(m: Model, f: Formula) -> Model:
    from src.semantics import truth_set

    zone = truth_set(m, f)
    logger.info(f"Upgrading with {show(f)}: {len(zone)} states promoted")
    return promote(m, zone)


def apply_sequence(m: Model, steps: Iterable[tuple[str, Formula]]) -> Model:
    """Apply ``("announce" | "upgrade", formula)`` steps left to right."""
    for kind, f in steps:
        if kind == "announce":
            m = announce(m, f)
        elif kind == "upgrade":
            m = upgrade(m, f)
        else:
            raise ModelInputError(f"unknown transformation {kind!r}")
    return m
