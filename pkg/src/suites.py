"""
Property suites: each checks one result about bisimulation, translations or
dynamics on seeded random (or exhaustively enumerated) models.
"""

import logging
import random
from itertools import product
from typing import Callable, Iterable

from pydantic import BaseModel, Field

from src.bisim import (
    Relation, check_bc, check_structural, definable_pairs, greatest_bisimulation,
    greatest_structural, hennessy_milner,
)
from src.config import load_config
from src.corpus import gt_translation_counterexample, safe_translation_counterexample
from src.dynamics import promote, restrict
from src.errors import ModelInputError
from src.generate import GenSpec, agent_names, all_models, atom_names, generate, inflate
from src.model import Model, is_image_finite, is_locally_connected, is_uniform, min_set, validate
from src.semantics import Evaluator, is_valid_on, truth_set
from src.syntax import (
    Announce, Atom, CondBelief, Formula, Fragment, Implies, Know, Not, Op, Upgrade, belief,
    fragment_text, iff, parse, sample_formula, show,
)
from src.translate import (
    measure_decreased, reduce_dynamic, reduction_axioms, replace_at, replay,
    rewrite_measure, translate_gt, translate_safe,
)

logger = logging.getLogger("plausikit.suites")

K, BC, BPLUS, GT = Op.K, Op.Bc, Op.Bplus, Op.Gt
STATIC = frozenset({K, BC, BPLUS, GT})
EVERYTHING = frozenset(Op)


class SuiteBudget(BaseModel):
    trials: int = Field(default=500, ge=1)
    max_states: int = Field(default=5, ge=1)
    agents: int = Field(default=2, ge=1)
    atoms: int = Field(default=2, ge=0)
    depth: int = Field(default=3, ge=0)
    formulas_per_trial: int = Field(default=20, ge=1)


class SuiteFailure(BaseModel):
    trial: int
    seed: int
    detail: str
    models: list[str] = Field(default_factory=list)


class SuiteReport(BaseModel):
    name: str
    # Trials that reached at least one check; skipped trials are counted apart
    trials: int = 0
    checks: int = 0
    skipped: int = 0
    failures: list[SuiteFailure] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, trial: int, seed: int, detail: str, *models: Model) -> None:
        logger.warning(f"{self.name}: trial {trial} (seed {seed}) failed: {detail}")
        self.failures.append(SuiteFailure(
            trial=trial, seed=seed, detail=detail, models=[m.to_json().strip() for m in models],
        ))

    def summary(self) -> str:
        verdict = "ok" if self.ok else f"{len(self.failures)} failures"
        return f"{self.name}: {self.trials} trials, {self.checks} checks, {self.skipped} skipped, {verdict}"


SuiteRunner = Callable[[SuiteBudget, int, SuiteReport], None]


# ---------- shared helpers ----------

INDEPENDENT_DRAWS = 8


def _spec(budget: SuiteBudget, max_states: int | None = None, **flags) -> GenSpec:
    return GenSpec(
        min_states=1, max_states=max_states or budget.max_states,
        agents=budget.agents, atoms=budget.atoms, **flags,
    )


def _formulas(rng: random.Random, budget: SuiteBudget, fragment: Iterable[Op], depth: int | None = None) -> list[Formula]:
    atoms = atom_names(budget.atoms) or ["p"]
    agents = agent_names(budget.agents)
    depth = budget.depth if depth is None else depth
    return [sample_formula(rng, atoms, agents, fragment, depth) for _ in range(budget.formulas_per_trial)]


def _related_pair(
    trial: int, seed: int, budget: SuiteBudget, fragment: Fragment, **flags
) -> tuple[Model, Model, Relation]:
    """
    A pair of models with a nonempty bisimulation for ``fragment``.

    Even trials: a model and an inflated copy related by the copy map. Odd
    trials: the greatest bisimulation between the model and an independent
    one, redrawn up to INDEPENDENT_DRAWS times until it relates something;
    after that the right model is an inflated copy and the relation is still
    the greatest one rather than the copy map.
    """
    if trial % 2 == 0:
        left = generate(_spec(budget, **flags), seed)
        right, back = inflate(left, random.Random(seed))
        return left, right, Relation(left, right, frozenset((back[x], x) for x in right.states))
    small = min(budget.max_states, 3) if BC in fragment else budget.max_states
    left = generate(_spec(budget, small, **flags), seed)
    for draw in range(1, INDEPENDENT_DRAWS + 1):
        right = generate(_spec(budget, small, **flags), seed + 7919 * draw)
        z = greatest_bisimulation(left, right, fragment)
        if z.pairs:
            return left, right, z
    logger.debug(f"No independent partner for seed {seed}; using an inflated copy")
    right = inflate(left, random.Random(seed))[0]
    return left, right, greatest_bisimulation(left, right, fragment)


def _disagreement(
    left: Model, right: Model, pairs: Iterable[tuple[str, str]], formulas: Iterable[Formula]
) -> tuple[Formula, str, str] | None:
    here, there = Evaluator(left), Evaluator(right)
    pairs = sorted(pairs)
    for f in formulas:
        truth_left, truth_right = here.truth_set(f), there.truth_set(f)
        for w, v in pairs:
            if (w in truth_left) != (v in truth_right):
                return f, w, v
    return None


def _inequivalent(
    left: Model, right: Model, pairs: Iterable[tuple[str, str]], fragment: Fragment
) -> tuple[Formula, str, str] | None:
    """The first pair that some formula of ``fragment`` separates, with that formula."""
    family = definable_pairs(left, right, fragment)
    for w, v in sorted(pairs):
        here = family.block_index(0, w)
        if here != family.block_index(1, v):
            return family.blocks[here].formula, w, v
    return None


def _check(z: Relation, fragment: Fragment):
    return check_bc(z, fragment) if BC in fragment else check_structural(z, fragment)


# ---------- bisimulation implies equivalence ----------

def _bisimulation_preserves(bisim: Fragment, language: Fragment, **flags) -> SuiteRunner:
    def run(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
        for trial in range(budget.trials):
            s = seed + trial
            left, right, z = _related_pair(trial, s, budget, bisim, **flags)
            if not z.pairs:
                report.skipped += 1
                continue
            report.trials += 1
            verdict = _check(z, bisim)
            if not verdict:
                report.fail(trial, s, f"relation rejected: {verdict.violation}", left, right)
                continue
            formulas = _formulas(random.Random(s), budget, language)
            report.checks += len(formulas)
            found = _disagreement(left, right, z.pairs, formulas)
            if found:
                f, w, v = found
                report.fail(trial, s, f"{show(f)} separates related states {w} and {v}", left, right)
    return run


def _structural_inside_bc(structural: Fragment, **flags) -> SuiteRunner:
    """
    On the model class given by ``flags``, the greatest structural
    bisimulation is itself a {K, Bc} bisimulation, and {K, Bc} equivalence is
    one too.
    """
    def run(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
        target = frozenset({K, BC})
        for trial in range(budget.trials):
            s = seed + trial
            report.trials += 1
            left = generate(_spec(budget, min(budget.max_states, 4), **flags), s)
            right = inflate(left, random.Random(s))[0] if trial % 2 == 0 else \
                generate(_spec(budget, min(budget.max_states, 4), **flags), s + 7919)
            z = greatest_structural(left, right, structural)
            family = definable_pairs(left, right, target)
            report.checks += 1
            verdict = check_bc(z, target, family)
            if not verdict:
                report.fail(
                    trial, s, f"{fragment_text(structural)} bisimulation is not a {fragment_text(target)} one: "
                    f"{verdict.violation}", left, right,
                )
                continue
            equivalent = family.equivalence()
            report.checks += 1
            outside = sorted(z.pairs - equivalent.pairs)
            if outside:
                report.fail(trial, s, f"{outside[0]} bisimilar but not {fragment_text(target)} equivalent", left, right)
                continue
            report.checks += 1
            verdict = check_bc(equivalent, target, family)
            if not verdict:
                report.fail(trial, s, f"equivalence is not a bisimulation: {verdict.violation}", left, right)
    return run


def _hennessy_milner(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
    for trial in range(budget.trials):
        s = seed + trial
        report.trials += 1
        spec = _spec(budget, min(budget.max_states, 4))
        left = generate(spec, s)
        right = inflate(left, random.Random(s))[0] if trial % 3 == 0 else generate(spec, s + 7919)
        finite = [is_image_finite(m) for m in (left, right)]
        report.checks += len(finite)
        if not all(finite):
            report.fail(trial, s, "generated model is not image-finite", left, right)
            continue
        result = hennessy_milner(left, right)
        report.checks += 1
        if not result:
            report.fail(trial, s, f"equivalence is not a bisimulation: {result.violation}", left, right)


# ---------- introspection and robustness ----------

def _introspection(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
    for trial in range(budget.trials):
        s = seed + trial
        report.trials += 1
        rng = random.Random(s)
        m = generate(_spec(budget, uniform=True), s)
        evaluator = Evaluator(m)
        conditions = _formulas(rng, budget, {K, BC, BPLUS}, depth=2)
        bodies = _formulas(rng, budget, {K, BC, BPLUS}, depth=2)
        for alpha, phi in zip(conditions, bodies):
            for agent in m.agents:
                for believed in (CondBelief(agent, alpha, phi), belief(agent, phi)):
                    f = Implies(believed, Know(agent, believed))
                    report.checks += 1
                    falsified = m.state_set - evaluator.truth_set(f)
                    if falsified:
                        report.fail(trial, s, f"{show(f)} fails at {min(falsified)}", m)
                        return


def _robustness(property_name: str, check, **flags) -> SuiteRunner:
    def run(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
        for trial in range(budget.trials):
            s = seed + trial
            report.trials += 1
            m = generate(_spec(budget, **flags), s)
            evaluator = Evaluator(m)
            for f in _formulas(random.Random(s), budget, EVERYTHING, depth=2):
                extension = evaluator.truth_set(f)
                results = [("upgrade", promote(m, extension))]
                if extension:
                    results.append(("announcement", restrict(m, extension)))
                else:
                    report.skipped += 1
                for label, changed in results:
                    report.checks += 1
                    problems = validate(changed)
                    verdict = check(changed)
                    if problems or not verdict:
                        detail = problems[0] if problems else f"witness {verdict.witness}"
                        report.fail(trial, s, f"{label} by {show(f)} not {property_name}: {detail}", m)
                        break
    return run


# ---------- translations ----------

def _subset_valuations(m: Model) -> Iterable[Model]:
    """``m`` with fresh atoms x and y ranging over every pair of state sets."""
    subsets = [
        frozenset(s for k, s in enumerate(m.states) if bits[k])
        for bits in product((False, True), repeat=len(m.states))
    ]
    for xs in subsets:
        for ys in subsets:
            yield Model(
                states=m.states, agents=m.agents, epist=m.epist, plaus=m.plaus,
                valuation=dict(m.valuation) | {"x": xs, "y": ys},
            )


def _translation_suite(translation, fragment: Fragment, law, counterexample, **flags) -> SuiteRunner:
    """
    Exhaustive over small models meeting ``flags``: the biconditional ``law``
    holds for every pair of truth sets of condition and body, and the
    translation preserves sampled formulas. The stored counterexample off
    the model class must still fail.
    """
    def run(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
        rng = random.Random(seed)
        x, y = Atom("x"), Atom("y")
        for trial, m in enumerate(all_models(min(budget.max_states, 3), uniform=True, **flags)):
            report.trials = trial + 1
            for variant in _subset_valuations(m):
                report.checks += 1
                verdict = is_valid_on(variant, law("a", x, y))
                if not verdict:
                    report.fail(trial, seed, f"{show(law('a', x, y))} fails at {verdict.witness[0]}", variant)
                    return
            evaluator = Evaluator(m)
            for _ in range(3):
                f = sample_formula(rng, ["p"], ["a"], fragment, 2)
                report.checks += 1
                if evaluator.truth_set(f) != evaluator.truth_set(translation(f)):
                    report.fail(trial, seed, f"translation changes the meaning of {show(f)}", m)
                    return
        model, cond, body, state = counterexample()
        report.checks += 1
        if is_valid_on(model, law("a", parse(cond), parse(body))):
            report.fail(report.trials, seed, "stored counterexample no longer fails", model)
    return run


def _gt_law(agent: str, cond: Formula, body: Formula) -> Formula:
    return iff(CondBelief(agent, cond, body), translate_gt(CondBelief(agent, cond, body)))


def _safe_law(agent: str, cond: Formula, body: Formula) -> Formula:
    return iff(CondBelief(agent, cond, body), translate_safe(CondBelief(agent, cond, body)))



# ---------- dynamics ----------

def _reduction(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
    atoms = atom_names(budget.atoms) or ["p"]
    agents = agent_names(budget.agents)
    for trial in range(budget.trials):
        s = seed + trial
        report.trials += 1
        rng = random.Random(s)
        m = generate(_spec(budget), s)
        evaluator = Evaluator(m)
        wrap = rng.choice((Announce, Upgrade))
        depth = max(budget.depth, 1)
        f = wrap(
            sample_formula(rng, atoms, agents, EVERYTHING, depth - 1),
            sample_formula(rng, atoms, agents, EVERYTHING, depth - 1),
        )
        reduced, trace = reduce_dynamic(f)
        report.checks += 1
        if evaluator.truth_set(f) != evaluator.truth_set(reduced):
            report.fail(trial, s, f"reduction of {show(f)} changes its truth set", m)
            continue
        if replay(f, trace) != reduced:
            report.fail(trial, s, f"trace of {show(f)} does not replay", m)
            continue
        current, measure = f, rewrite_measure(f)
        for step in trace:
            current = replace_at(current, step.path, step.after)
            following = rewrite_measure(current)
            if not measure_decreased(measure, following):
                report.fail(trial, s, f"{step.rule} did not decrease the rewrite measure", m)
                break
            measure = following

        phi, alpha, psi = (sample_formula(rng, atoms, agents, STATIC, 1) for _ in range(3))
        for name, axiom in reduction_axioms(phi, alpha, psi, rng.choice(agents)).items():
            report.checks += 1
            if evaluator.truth_set(axiom) != m.state_set:
                report.fail(trial, s, f"axiom {name} invalid: {show(axiom)}", m)
                break


def _dynamic_futures(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
    """
    {K, Bplus}-bisimilar states of uniform, locally connected models stay
    {K, Bplus, Bc}-equivalent after an announcement, after an upgrade and
    after a sequence of three steps. Equivalence is decided exactly on the
    definable pair family, so it covers every formula of that language.
    """
    language = frozenset({K, BPLUS, BC})
    for trial in range(budget.trials):
        s = seed + trial
        rng = random.Random(s)
        left, right, z = _related_pair(
            trial, s, budget, frozenset({K, BPLUS}), uniform=True, locally_connected=True,
        )
        if not z.pairs:
            report.skipped += 1
            continue
        report.trials += 1
        phi = _formulas(rng, budget, language, depth=2)[0]
        keep_left, keep_right = truth_set(left, phi), truth_set(right, phi)
        split = sorted((w, v) for w, v in z.pairs if (w in keep_left) != (v in keep_right))
        if split:
            report.fail(trial, s, f"{show(phi)} separates related states {split[0]}", left, right)
            continue
        if not any(w in keep_left for w, _ in z.pairs):
            phi = Not(phi)
            keep_left, keep_right = left.state_set - keep_left, right.state_set - keep_right

        afterwards = [
            (f"upgrade by {show(phi)}", promote(left, keep_left), promote(right, keep_right), set(z.pairs)),
            (
                f"announcing {show(phi)}", restrict(left, keep_left), restrict(right, keep_right),
                {(w, v) for w, v in z.pairs if w in keep_left},
            ),
        ]

        now_left, now_right, pairs, steps = left, right, set(z.pairs), []
        for _ in range(3):
            step = _formulas(rng, budget, language, depth=1)[0]
            ext_left, ext_right = truth_set(now_left, step), truth_set(now_right, step)
            split = sorted((w, v) for w, v in pairs if (w in ext_left) != (v in ext_right))
            if split:
                break
            kept = {(w, v) for w, v in pairs if w in ext_left}
            # An announcement that would drop every related pair becomes an upgrade
            if kept and rng.random() < 0.5:
                now_left, now_right, pairs = restrict(now_left, ext_left), restrict(now_right, ext_right), kept
                steps.append(f"[! {show(step)}]")
            else:
                now_left, now_right = promote(now_left, ext_left), promote(now_right, ext_right)
                steps.append(f"[up {show(step)}]")
        if split:
            report.fail(trial, s, f"after {' '.join(steps) or 'no steps'}: {show(step)} separates {split[0]}", left, right)
            continue
        afterwards.append((f"the sequence {' '.join(steps)}", now_left, now_right, pairs))

        for label, after_left, after_right, related in afterwards:
            report.checks += 1
            found = _inequivalent(after_left, after_right, related, language)
            if found:
                f, w, v = found
                report.fail(trial, s, f"after {label}: {show(f)} separates {w} and {v}", left, right)
                break


# ---------- definable pairs ----------

def _closure_oracle(left: Model, right: Model, ops: Fragment) -> set[tuple[frozenset, frozenset]]:
    """Truth-set pairs reached from the atoms by applying the fragment's operators until nothing new appears."""
    atoms = sorted(set(left.valuation) | set(right.valuation))
    known = {(left.state_set, right.state_set)} | {(left.extension(p), right.extension(p)) for p in atoms}
    scopes = {K: "eq_class", BPLUS: "down_set", GT: "strict_down_set"}

    def box(m: Model, op: Op, agent: str, target: frozenset) -> frozenset:
        scope = getattr(m, scopes[op])
        return frozenset(w for w in m.states if scope(agent, w) <= target)

    while True:
        items = list(known)
        found = {(left.state_set - a, right.state_set - b) for a, b in items}
        found |= {(a & c, b & d) for a, b in items for c, d in items}
        for op in (K, BPLUS, GT):
            if op in ops:
                found |= {
                    (box(left, op, i, a), box(right, op, i, b)) for i in left.agents for a, b in items
                }
        if BC in ops:
            for agent in left.agents:
                for cond_left, cond_right in items:
                    low_left = {w: min_set(left, agent, w, cond_left & left.eq_class(agent, w)) for w in left.states}
                    low_right = {v: min_set(right, agent, v, cond_right & right.eq_class(agent, v)) for v in right.states}
                    for a, b in items:
                        found.add((
                            frozenset(w for w, low in low_left.items() if low <= a),
                            frozenset(v for v, low in low_right.items() if low <= b),
                        ))
        if found <= known:
            return known
        known |= found


PAIR_FRAGMENTS = [
    frozenset({K}), frozenset({BPLUS}), frozenset({GT}), frozenset({BC}),
    frozenset({K, BC}), frozenset({K, BPLUS}), frozenset({K, GT}), frozenset({K, BPLUS, BC}),
]


def _pairs_exact(budget: SuiteBudget, seed: int, report: SuiteReport) -> None:
    for trial in range(budget.trials):
        s = seed + trial
        report.trials += 1
        fragment = PAIR_FRAGMENTS[trial % len(PAIR_FRAGMENTS)]
        spec = _spec(budget, min(budget.max_states, 3))
        left, right = generate(spec, s), generate(spec, s + 7919)
        family = definable_pairs(left, right, fragment)
        oracle = _closure_oracle(left, right, fragment)
        report.checks += 1
        members = set(family.members())
        if members != oracle:
            extra = len(members - oracle)
            missing = len(oracle - members)
            report.fail(trial, s, f"{fragment_text(fragment)}: {extra} pairs not definable, {missing} missed", left, right)
            continue
        here, there = Evaluator(left), Evaluator(right)
        for index, block in enumerate(family.blocks):
            report.checks += 1
            if here.truth_set(block.formula) != block.left or there.truth_set(block.formula) != block.right:
                report.fail(trial, s, f"block {index} formula does not define it", left, right)
                break


# ---------- registry ----------

SUITES: dict[str, tuple[SuiteRunner, SuiteBudget]] = {
    "thm9-K": (_bisimulation_preserves(frozenset({K}), frozenset({K})), SuiteBudget()),
    "thm9-Bplus": (_bisimulation_preserves(frozenset({BPLUS}), frozenset({BPLUS})), SuiteBudget()),
    "thm9-Bc": (_bisimulation_preserves(frozenset({BC}), frozenset({BC})), SuiteBudget()),
    "thm11-KBc": (_bisimulation_preserves(frozenset({K, BC}), frozenset({K, BC})), SuiteBudget()),
    "thm11-KBplus": (_bisimulation_preserves(frozenset({K, BPLUS}), frozenset({K, BPLUS})), SuiteBudget()),
    "thm13": (_hennessy_milner, SuiteBudget(trials=200, max_states=4)),
    "thm17": (_introspection, SuiteBudget(depth=2, formulas_per_trial=10)),
    "thm18": (_robustness("uniform", is_uniform, uniform=True), SuiteBudget(formulas_per_trial=5)),
    "thm22": (_translation_suite(translate_gt, frozenset({K, BC}), _gt_law, gt_translation_counterexample), SuiteBudget(max_states=3)),
    "thm24-1": (_bisimulation_preserves(frozenset({GT}), frozenset({GT})), SuiteBudget()),
    "thm24-2": (_bisimulation_preserves(frozenset({K, GT}), frozenset({K, GT})), SuiteBudget()),
    "thm24-3": (_bisimulation_preserves(frozenset({K, GT}), frozenset({K, BC}), uniform=True), SuiteBudget()),
    "thm24-4": (_structural_inside_bc(frozenset({K, GT}), uniform=True), SuiteBudget(trials=200, max_states=4)),
    "thm26": (
        _robustness("locally connected", is_locally_connected, locally_connected=True),
        SuiteBudget(formulas_per_trial=5),
    ),
    "thm27": (
        _translation_suite(translate_safe, frozenset({K, BC, BPLUS}), _safe_law, safe_translation_counterexample, locally_connected=True),
        SuiteBudget(max_states=3),
    ),
    "thm28-1": (
        _bisimulation_preserves(frozenset({K, BPLUS}), frozenset({K, BPLUS, BC}), uniform=True, locally_connected=True),
        SuiteBudget(),
    ),
    "thm28-2": (
        _structural_inside_bc(frozenset({K, BPLUS}), uniform=True, locally_connected=True),
        SuiteBudget(trials=200, max_states=4),
    ),
    "thm29": (_dynamic_futures, SuiteBudget(trials=200, max_states=4, depth=2, formulas_per_trial=10)),
    "reduction": (_reduction, SuiteBudget()),
    "pairs": (_pairs_exact, SuiteBudget(trials=100, max_states=3, agents=1)),
}


def default_budget(name: str) -> SuiteBudget:
    if name not in SUITES:
        raise ModelInputError(f"unknown suite {name!r}; known suites: {', '.join(SUITES)}")
    return SUITES[name][1].model_copy()


def run_suite(name: str, budget: SuiteBudget | None = None, seed: int | None = None) -> SuiteReport:
    """
    Run one named suite. Trial k uses seed ``seed + k``; the base seed comes
    from PLAUSIKIT_SEED unless given.
    """
    budget = budget or default_budget(name)
    if name not in SUITES:
        raise ModelInputError(f"unknown suite {name!r}; known suites: {', '.join(SUITES)}")
    runner = SUITES[name][0]
    seed = load_config().seed if seed is None else seed
    report = SuiteReport(name=name)
    logger.info(f"Running {name}: {budget.trials} trials from seed {seed}")
    runner(budget, seed, report)
    logger.info(report.summary())
    return report
