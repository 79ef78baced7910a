"""
Formula syntax: AST, parser, printer, fragments and formula enumeration.

Concrete syntax, loosest binding last:
    ~f  K[i] f  Khat[i] f  B[i | c] f  Bplus[i] f  Gt[i] f  GtDia[i] f  [! a] f  [up a] f
    f & g      (left associative)
    f | g      (left associative)
    f -> g     (right associative)
Atoms are identifiers over [A-Za-z0-9_]; ``true`` and ``false`` are constants.
Keywords (K, Khat, B, Bplus, Gt, GtDia, up, true, false) cannot be atom names.
"""

import logging
import random
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
from typing import Iterable, Iterator

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken

from src.errors import FormulaSyntaxError, ModelInputError

logger = logging.getLogger("plausikit.syntax")


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bot:
    pass


@dataclass(frozen=True, slots=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Know:
    agent: str
    body: "Formula"


@dataclass(frozen=True, slots=True)
class CondBelief:
    agent: str
    cond: "Formula"
    body: "Formula"


@dataclass(frozen=True, slots=True)
class SafeBelief:
    agent: str
    body: "Formula"


@dataclass(frozen=True, slots=True)
class GtBox:
    """Box over strictly more plausible states in the agent's class."""
    agent: str
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Announce:
    pre: "Formula"
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Upgrade:
    pre: "Formula"
    body: "Formula"


Formula = Atom | Top | Bot | Not | And | Or | Implies | Know | CondBelief | SafeBelief | GtBox | Announce | Upgrade


class Op(StrEnum):
    K = "K"
    Bc = "Bc"
    Bplus = "Bplus"
    Gt = "Gt"
    Ann = "Ann"
    Up = "Up"


Fragment = frozenset[Op]

OP_ORDER = (Op.K, Op.Bc, Op.Bplus, Op.Gt, Op.Ann, Op.Up)
STATIC_OPS = frozenset({Op.K, Op.Bc, Op.Bplus, Op.Gt})
DYNAMIC_OPS = frozenset({Op.Ann, Op.Up})


def parse_fragment(text: str) -> Fragment:
    """Parse a comma separated operator list such as ``K,Bplus``; empty text is the Boolean fragment."""
    ops = set()
    for part in text.replace("{", "").replace("}", "").split(","):
        part = part.strip()
        if not part:
            continue
        try:
            ops.add(Op(part))
        except ValueError:
            raise ModelInputError(f"unknown operator {part!r} in fragment, expected one of {', '.join(OP_ORDER)}")
    return frozenset(ops)


def fragment_text(fragment: Iterable[Op]) -> str:
    present = set(fragment)
    return "{" + ",".join(op.value for op in OP_ORDER if op in present) + "}"


# ---------- parsing ----------

GRAMMAR = r"""
    ?start: formula

    ?formula: disj
        | disj "->" formula                     -> implies

    ?disj: conj
        | disj "|" conj                         -> or_

    ?conj: unary
        | conj "&" unary                        -> and_

    ?unary: "~" unary                           -> not_
        | "K" "[" IDENT "]" unary               -> know
        | "Khat" "[" IDENT "]" unary            -> khat
        | "B" "[" IDENT "|" formula "]" unary   -> cond_belief
        | "Bplus" "[" IDENT "]" unary           -> safe_belief
        | "Gt" "[" IDENT "]" unary              -> gt_box
        | "GtDia" "[" IDENT "]" unary           -> gt_dia
        | "[" "!" formula "]" unary             -> announce
        | "[" "up" formula "]" unary            -> upgrade
        | primary

    ?primary: "true"                            -> top
        | "false"                               -> bot
        | IDENT                                 -> atom
        | "(" formula ")"

    IDENT: /[A-Za-z0-9_]+/

    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class _Builder(Transformer):
    def implies(self, left, right):
        return Implies(left, right)

    def or_(self, left, right):
        return Or(left, right)

    def and_(self, left, right):
        return And(left, right)

    def not_(self, sub):
        return Not(sub)

    def know(self, agent, body):
        return Know(str(agent), body)

    def khat(self, agent, body):
        return khat(str(agent), body)

    def cond_belief(self, agent, cond, body):
        return CondBelief(str(agent), cond, body)

    def safe_belief(self, agent, body):
        return SafeBelief(str(agent), body)

    def gt_box(self, agent, body):
        return GtBox(str(agent), body)

    def gt_dia(self, agent, body):
        return gt_dia(str(agent), body)

    def announce(self, pre, body):
        return Announce(pre, body)

    def upgrade(self, pre, body):
        return Upgrade(pre, body)

    def top(self):
        return Top()

    def bot(self):
        return Bot()

    def atom(self, name):
        return Atom(str(name))


_PARSER = Lark(GRAMMAR, parser="lalr", transformer=_Builder())


def _describe_terminal(name: str) -> str:
    if name == "$END":
        return "end of input"
    try:
        terminal = _PARSER.get_terminal(name)
    except KeyError:
        return name
    if terminal.pattern.type == "str":
        return repr(terminal.pattern.value)
    return "identifier" if name == "IDENT" else name.lower()


def parse(text: str) -> Formula:
    """
    Parse formula text.

    Raises:
        FormulaSyntaxError: with a 1-based character position and the set of
            tokens that would have been accepted there.
    """
    try:
        return _PARSER.parse(text)
    except UnexpectedToken as e:
        if e.token.type == "$END":
            position = len(text) + 1
        else:
            position = (e.token.start_pos or 0) + 1
        expected = {_describe_terminal(name) for name in e.expected}
        logger.debug(f"Parse failed for {text!r} at {position}")
        raise FormulaSyntaxError(text, position, sorted(expected)) from None
    except UnexpectedCharacters as e:
        expected = {_describe_terminal(name) for name in (e.allowed or ())}
        raise FormulaSyntaxError(text, e.pos_in_stream + 1, sorted(expected)) from None
    except UnexpectedInput as e:
        raise FormulaSyntaxError(text, (getattr(e, "pos_in_stream", None) or len(text)) + 1, []) from None


# ---------- printing ----------

_IMPLIES, _OR, _AND, _UNARY = 1, 2, 3, 4


def _show(f: Formula) -> tuple[str, int]:
    match f:
        case Atom(name):
            return name, _UNARY
        case Top():
            return "true", _UNARY
        case Bot():
            return "false", _UNARY
        case Not(sub):
            return "~" + _wrap(sub, _UNARY), _UNARY
        case And(left, right):
            return f"{_wrap(left, _AND)} & {_wrap(right, _UNARY)}", _AND
        case Or(left, right):
            return f"{_wrap(left, _OR)} | {_wrap(right, _AND)}", _OR
        case Implies(left, right):
            return f"{_wrap(left, _OR)} -> {_wrap(right, _IMPLIES)}", _IMPLIES
        case Know(agent, body):
            return _prefixed(f"K[{agent}]", body), _UNARY
        case CondBelief(agent, cond, body):
            return _prefixed(f"B[{agent} | {show(cond)}]", body), _UNARY
        case SafeBelief(agent, body):
            return _prefixed(f"Bplus[{agent}]", body), _UNARY
        case GtBox(agent, body):
            return _prefixed(f"Gt[{agent}]", body), _UNARY
        case Announce(pre, body):
            return _prefixed(f"[! {show(pre)}]", body), _UNARY
        case Upgrade(pre, body):
            return _prefixed(f"[up {show(pre)}]", body), _UNARY
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, least: int) -> str:
    text, level = _show(f)
    return text if level >= least else f"({text})"


def _prefixed(prefix: str, body: Formula) -> str:
    text = _wrap(body, _UNARY)
    return prefix + text if text.startswith("(") else f"{prefix} {text}"


def show(f: Formula) -> str:
    """Canonical text of a formula; ``parse(show(f)) == f``."""
    return _show(f)[0]


# ---------- helpers ----------

def iff(left: Formula, right: Formula) -> Formula:
    return And(Implies(left, right), Implies(right, left))


def khat(agent: str, f: Formula) -> Formula:
    return Not(Know(agent, Not(f)))


def gt_dia(agent: str, f: Formula) -> Formula:
    return Not(GtBox(agent, Not(f)))


def belief(agent: str, f: Formula) -> Formula:
    """Plain belief, conditional belief on ``true``."""
    return CondBelief(agent, Top(), f)


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Atom() | Top() | Bot():
            return ()
        case Not(sub):
            return (sub,)
        case And(a, b) | Or(a, b) | Implies(a, b) | CondBelief(_, a, b) | Announce(a, b) | Upgrade(a, b):
            return (a, b)
        case Know(_, body) | SafeBelief(_, body) | GtBox(_, body):
            return (body,)
    raise TypeError(f"not a formula: {f!r}")


def with_children(f: Formula, kids: tuple[Formula, ...]) -> Formula:
    """Same node as ``f`` with its immediate subformulas replaced, in ``children`` order."""
    match f:
        case Atom() | Top() | Bot():
            return f
        case Not():
            return Not(kids[0])
        case And():
            return And(*kids)
        case Or():
            return Or(*kids)
        case Implies():
            return Implies(*kids)
        case Know(agent, _):
            return Know(agent, kids[0])
        case CondBelief(agent, _, _):
            return CondBelief(agent, kids[0], kids[1])
        case SafeBelief(agent, _):
            return SafeBelief(agent, kids[0])
        case GtBox(agent, _):
            return GtBox(agent, kids[0])
        case Announce():
            return Announce(*kids)
        case Upgrade():
            return Upgrade(*kids)
    raise TypeError(f"not a formula: {f!r}")


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def height(f: Formula) -> int:
    subs = children(f)
    return 1 + max(height(c) for c in subs) if subs else 0


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset({f.name})
    return frozenset().union(*(atoms_of(c) for c in children(f)))


def agents_of(f: Formula) -> frozenset[str]:
    own = {f.agent} if isinstance(f, (Know, CondBelief, SafeBelief, GtBox)) else set()
    return frozenset(own).union(*(agents_of(c) for c in children(f)))


_OP_OF = {Know: Op.K, CondBelief: Op.Bc, SafeBelief: Op.Bplus, GtBox: Op.Gt, Announce: Op.Ann, Upgrade: Op.Up}


def fragment_of(f: Formula) -> Fragment:
    """Smallest fragment containing every modal and dynamic operator of ``f``."""
    own = {_OP_OF[type(f)]} if type(f) in _OP_OF else set()
    return frozenset(own).union(*(fragment_of(c) for c in children(f)))


def is_static(f: Formula) -> bool:
    return not (fragment_of(f) & DYNAMIC_OPS)


# ---------- enumeration and sampling ----------

def enumerate_formulas(
    atoms: Iterable[str],
    agents: Iterable[str],
    fragment: Iterable[Op],
    depth: int,
) -> Iterator[Formula]:
    """
    Every formula over the Boolean basis (atoms, true, ~, &) plus the
    operators of ``fragment`` whose AST height is at most ``depth``.

    Order: by height; within one height by constructor (~, &, K, B, Bplus,
    Gt, announcement, upgrade), then agent, then the positions of the
    arguments in this same order. Height 0 is the atoms in the given order
    followed by ``true``.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    atoms = list(atoms)
    agents = list(agents)
    ops = set(fragment)

    layer: list[Formula] = [Atom(p) for p in atoms] + [Top()]
    known: list[Formula] = list(layer)
    yield from layer
    for _ in range(depth):
        fresh_from = len(known) - len(layer)
        last = known[fresh_from:]

        def pairs():
            for i, x in enumerate(known):
                for j, y in enumerate(known):
                    if i >= fresh_from or j >= fresh_from:
                        yield x, y

        nxt: list[Formula] = [Not(x) for x in last]
        nxt += [And(x, y) for x, y in pairs()]
        if Op.K in ops:
            nxt += [Know(i, x) for i in agents for x in last]
        if Op.Bc in ops:
            nxt += [CondBelief(i, x, y) for i in agents for x, y in pairs()]
        if Op.Bplus in ops:
            nxt += [SafeBelief(i, x) for i in agents for x in last]
        if Op.Gt in ops:
            nxt += [GtBox(i, x) for i in agents for x in last]
        if Op.Ann in ops:
            nxt += [Announce(x, y) for x, y in pairs()]
        if Op.Up in ops:
            nxt += [Upgrade(x, y) for x, y in pairs()]
        yield from nxt
        known += nxt
        layer = nxt


def count_formulas(atoms: Iterable[str], agents: Iterable[str], fragment: Iterable[Op], depth: int) -> int:
    """Closed form count of ``enumerate_formulas`` for the same arguments."""
    atoms, agents, ops = list(atoms), list(agents), set(fragment)
    unary = 1 + len(agents) * len(ops & {Op.K, Op.Bplus, Op.Gt})
    binary = 1 + len(agents) * (Op.Bc in ops) + (Op.Ann in ops) + (Op.Up in ops)
    total = last = len(atoms) + 1
    for _ in range(depth):
        older = total - last
        new = unary * last + binary * (total * total - older * older)
        total, last = total + new, new
    return total


@lru_cache(maxsize=None)
def _op_choices(ops: Fragment) -> tuple[str, ...]:
    return ("not", "and", "or", "implies") + tuple(op.value for op in OP_ORDER if op in ops)


def sample_formula(
    rng: random.Random,
    atoms: Iterable[str],
    agents: Iterable[str],
    fragment: Iterable[Op],
    depth: int,
    leaf_bias: float = 0.25,
) -> Formula:
    """A random formula of height at most ``depth``, using the full Boolean syntax."""
    atoms, agents = list(atoms), list(agents)
    choices = _op_choices(frozenset(fragment))

    def grow(d: int) -> Formula:
        if d == 0 or rng.random() < leaf_bias:
            roll = rng.random()
            if roll < 0.08:
                return Top()
            if roll < 0.12:
                return Bot()
            return Atom(rng.choice(atoms))
        kind = rng.choice(choices)
        agent = rng.choice(agents)
        match kind:
            case "not":
                return Not(grow(d - 1))
            case "and":
                return And(grow(d - 1), grow(d - 1))
            case "or":
                return Or(grow(d - 1), grow(d - 1))
            case "implies":
                return Implies(grow(d - 1), grow(d - 1))
            case "K":
                return Know(agent, grow(d - 1))
            case "Bc":
                return CondBelief(agent, grow(d - 1), grow(d - 1))
            case "Bplus":
                return SafeBelief(agent, grow(d - 1))
            case "Gt":
                return GtBox(agent, grow(d - 1))
            case "Ann":
                return Announce(grow(d - 1), grow(d - 1))
            case "Up":
                return Upgrade(grow(d - 1), grow(d - 1))
        raise AssertionError(kind)

    return grow(depth)
