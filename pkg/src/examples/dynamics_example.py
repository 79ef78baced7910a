#!/usr/bin/env python
"""
Walk the safe belief counterexample pair through an announcement and an upgrade.
"""

import os
import sys
import argparse

# Add the parent directory to the path so we can import from src
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.bisim import greatest_bisimulation
from src.corpus import load_corpus
from src.dynamics import announce, upgrade
from src.semantics import truth_set
from src.syntax import parse, parse_fragment

QUESTIONS = ["Bplus[a] p", "B[a | true] p", "K[a] p", "B[a | ~p] ~p"]


def describe(label, model):
    print(f"{label}: states {', '.join(model.states)}")
    for question in QUESTIONS:
        holds_at = sorted(truth_set(model, parse(question)))
        print(f"  {question:<14} holds at {', '.join(holds_at) or 'no state'}")


def main(argv=None):
    """
    Main function for the dynamics example script.
    """
    parser = argparse.ArgumentParser(description="Announce and upgrade on a corpus pair")
    parser.add_argument("--formula", type=str, default="p",
                        help="The formula to announce and upgrade with")
    parser.add_argument("--fragment", type=str, default="K,Bc",
                        help="Fragment used to compare the two models afterwards")
    args = parser.parse_args(argv)

    entry = next(e for e in load_corpus() if e.name == "thm15")
    formula = parse(args.formula)
    fragment = parse_fragment(args.fragment)

    for side, model in (("left", entry.left), ("right", entry.right)):
        describe(f"{side} model", model)
        if truth_set(model, formula):
            describe(f"{side} model after announcing {args.formula}", announce(model, formula))
        else:
            print(f"{side} model: {args.formula} is true nowhere, nothing to announce")
        describe(f"{side} model after upgrading with {args.formula}", upgrade(model, formula))

    before = greatest_bisimulation(entry.left, entry.right, fragment)
    after = greatest_bisimulation(upgrade(entry.left, formula), upgrade(entry.right, formula), fragment)
    print(f"greatest {args.fragment} bisimulation before: {before.sorted_pairs()}")
    print(f"greatest {args.fragment} bisimulation after upgrade: {after.sorted_pairs()}")


if __name__ == "__main__":
    main()
