"""
Command-line entry point: ``plausikit <command> ...`` or ``python -m src.main <command> ...``.

Verdicts go to stdout, logs to stderr. Exit codes: 0 true verdict or
success, 1 false verdict (or corpus mismatch, failed suite), 2 input error,
3 definable pair cap exceeded.
"""

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from src.bisim import (
    BisimCheck, Violation, check_bc, check_structural, distinguishing_formula, greatest_bisimulation,
    load_relation,
)
from src.config import configure_logging, load_config
from src.corpus import corpus_entries, export_corpus, load_corpus
from src.dynamics import announce, upgrade
from src.errors import CorpusMismatchError, EmptyAnnouncementError, ModelInputError, PairCapExceeded
from src.generate import GenSpec, generate
from src.model import is_locally_connected, is_uniform, load_model, save_model, validate
from src.semantics import holds, is_valid_on
from src.suites import SUITES, default_budget, run_suite
from src.syntax import Op, fragment_text, parse, parse_fragment, show
from src.translate import reduce_dynamic, static_fragment_for, translate_gt, translate_safe

logger = logging.getLogger("plausikit.cli")

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


def _emit(line: str = "") -> None:
    print(line)


def _verdict(value: bool) -> int:
    _emit("true" if value else "false")
    return EXIT_TRUE if value else EXIT_FALSE


def describe_violation(violation: Violation) -> str:
    w, v = violation.pair
    who = f" for agent {violation.agent}" if violation.agent else ""
    text = f"{violation.clause} fails at ({w}, {v}){who}: {violation.state} is unmatched"
    if violation.condition is not None:
        text += f" under condition {show(violation.condition)}"
    return text


def _bisim_fragment(text: str):
    fragment = parse_fragment(text)
    dynamic = fragment & {Op.Ann, Op.Up}
    if dynamic:
        static = static_fragment_for(fragment)
        logger.warning(
            f"Bisimulation fragments are static: dropping {fragment_text(dynamic)}, "
            f"using {fragment_text(static)} (reduce dynamic formulas first)"
        )
        _emit(f"notice: using fragment {fragment_text(static)}")
        fragment = static
    return fragment


# ---------- commands ----------

def cmd_check(args) -> int:
    model = load_model(args.model)
    return _verdict(holds(model, args.state, parse(args.formula)))


def cmd_validity(args) -> int:
    result = is_valid_on(load_model(args.model), parse(args.formula))
    if result:
        _emit("valid")
        return EXIT_TRUE
    _emit(f"invalid: fails at {result.witness[0]}")
    return EXIT_FALSE


def cmd_transform(args) -> int:
    model = load_model(args.model)
    formula = parse(args.formula)
    changed = announce(model, formula) if args.kind == "announce" else upgrade(model, formula)
    if args.output:
        save_model(changed, args.output)
        _emit(f"wrote {args.output}")
    else:
        sys.stdout.write(changed.to_json())
    return EXIT_TRUE


def cmd_rewrite(args) -> int:
    result, trace = reduce_dynamic(parse(args.formula))
    if args.trace:
        for number, step in enumerate(trace, start=1):
            _emit(f"{number}. {step.describe()}")
    _emit(show(result))
    return EXIT_TRUE


def cmd_translate(args) -> int:
    translation = translate_gt if args.target == "gt" else translate_safe
    _emit(show(translation(parse(args.formula))))
    return EXIT_TRUE


def cmd_bisim(args) -> int:
    left, right = load_model(args.left), load_model(args.right)
    fragment = _bisim_fragment(args.fragment)
    if args.relation:
        z = load_relation(args.relation, left, right, args.left, args.right)
        verdict: BisimCheck = check_bc(z, fragment) if Op.Bc in fragment else check_structural(z, fragment)
        if verdict:
            _emit(f"{fragment_text(fragment)} bisimulation: true")
            return EXIT_TRUE
        _emit(f"{fragment_text(fragment)} bisimulation: false")
        _emit(describe_violation(verdict.violation))
        return EXIT_FALSE
    z = greatest_bisimulation(left, right, fragment)
    _emit(f"greatest {fragment_text(fragment)} bisimulation: {len(z.pairs)} pairs")
    for w, v in z.sorted_pairs():
        _emit(f"{w} {v}")
    return EXIT_TRUE


def cmd_equiv(args) -> int:
    left, right = load_model(args.left), load_model(args.right)
    fragment = _bisim_fragment(args.fragment)
    witness = distinguishing_formula(left, args.state_left, right, args.state_right, fragment)
    if witness is None:
        _emit(f"{fragment_text(fragment)} equivalent: true")
        return EXIT_TRUE
    _emit(f"{fragment_text(fragment)} equivalent: false")
    _emit(f"distinguished by {show(witness)}")
    return EXIT_FALSE


def _witness_text(witness: tuple) -> str:
    return ", ".join(f"({', '.join(item)})" if isinstance(item, tuple) else str(item) for item in witness)


def cmd_props(args) -> int:
    model = load_model(args.model)
    problems = validate(model)
    _emit(f"valid: {'true' if not problems else 'false'}")
    for problem in problems:
        _emit(f"  {problem}")
    if problems:
        return EXIT_FALSE
    for label, check in (("uniform", is_uniform), ("locally connected", is_locally_connected)):
        result = check(model)
        suffix = "" if result else f" (witness {_witness_text(result.witness)})"
        _emit(f"{label}: {'true' if result else 'false'}{suffix}")
    return EXIT_TRUE


def cmd_gen(args) -> int:
    try:
        spec = GenSpec.model_validate_json(Path(args.specfile).read_text(encoding="utf-8"))
    except OSError as e:
        raise ModelInputError(f"cannot read spec file {args.specfile}: {e}") from e
    except ValidationError as e:
        raise ModelInputError(f"malformed spec file {args.specfile}: {e}") from e
    model = generate(spec)
    save_model(model, args.output)
    _emit(f"wrote {args.output}: {len(model.states)} states")
    return EXIT_TRUE


def cmd_suite(args) -> int:
    if args.name not in SUITES:
        raise ModelInputError(f"unknown suite {args.name!r}; known suites: {', '.join(SUITES)}")
    budget = default_budget(args.name)
    if args.trials:
        budget.trials = args.trials
    report = run_suite(args.name, budget, args.seed)
    _emit(report.summary())
    for failure in report.failures:
        _emit(f"  trial {failure.trial} seed {failure.seed}: {failure.detail}")
        for model in failure.models:
            _emit(f"    {model}")
    return EXIT_TRUE if report.ok else EXIT_FALSE


def cmd_corpus(args) -> int:
    if args.export:
        for path in export_corpus(args.export):
            _emit(f"wrote {path}")
        return EXIT_TRUE
    if args.list and not args.verify:
        for entry in corpus_entries():
            _emit(f"{entry.name}: {entry.description}")
        return EXIT_TRUE
    entries = load_corpus(verify=True)
    verdicts = sum(len(entry.verdicts) for entry in entries)
    _emit(f"corpus verified: {len(entries)} entries, {verdicts} verdicts")
    return EXIT_TRUE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plausikit", description="Epistemic plausibility model toolkit")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("check", help="evaluate a formula at a state")
    p.add_argument("model")
    p.add_argument("state")
    p.add_argument("formula")
    p.set_defaults(handler=cmd_check)

    p = commands.add_parser("validity", help="check a formula at every state")
    p.add_argument("model")
    p.add_argument("formula")
    p.set_defaults(handler=cmd_validity)

    p = commands.add_parser("transform", help="announce or upgrade a formula")
    p.add_argument("model")
    p.add_argument("kind", choices=["announce", "upgrade"])
    p.add_argument("formula")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_transform)

    p = commands.add_parser("rewrite", help="remove dynamic operators")
    p.add_argument("formula")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(handler=cmd_rewrite)

    p = commands.add_parser("translate", help="replace conditional belief")
    p.add_argument("target", choices=["gt", "safe"])
    p.add_argument("formula")
    p.set_defaults(handler=cmd_translate)

    p = commands.add_parser("bisim", help="check or compute a bisimulation")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--fragment", default="K")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--relation")
    group.add_argument("--greatest", action="store_true")
    p.set_defaults(handler=cmd_bisim)

    p = commands.add_parser("equiv", help="compare two states for a fragment")
    p.add_argument("left")
    p.add_argument("state_left")
    p.add_argument("right")
    p.add_argument("state_right")
    p.add_argument("--fragment", required=True)
    p.set_defaults(handler=cmd_equiv)

    p = commands.add_parser("props", help="validate a model and report its shape")
    p.add_argument("model")
    p.set_defaults(handler=cmd_props)

    p = commands.add_parser("gen", help="generate a random model from a JSON spec")
    p.add_argument("specfile")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_gen)

    p = commands.add_parser("suite", help="run a property suite")
    p.add_argument("name")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_suite)

    p = commands.add_parser("corpus", help="list, verify or export the counterexample corpus")
    p.add_argument("--list", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--export", metavar="DIR")
    p.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level or load_config().log_level)
        logger.debug(f"Running {args.command}")
        return args.handler(args)
    except PairCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ModelInputError, EmptyAnnouncementError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CorpusMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FALSE


if __name__ == "__main__":
    sys.exit(main())
