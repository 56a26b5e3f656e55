#!/usr/bin/env python3
"""Regenerate the gold snapshots under tests/gold/.

Run this only after deliberately changing fixtures, the lexicon, or the
realizer, and review the diff by hand before committing: the snapshots
are the regression oracle for surface output.
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from maintgen.pipeline import Pipeline  # noqa: E402
from maintgen.plans import refinement_ids  # noqa: E402

LANGUAGES = ("en", "de", "fr")
ANNOTATED_PLAN = "check-oil-level"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default="fixtures")
    parser.add_argument("--out", default=os.path.join("tests", "gold"))
    args = parser.parse_args()

    pipeline = Pipeline.from_fixture_dir(args.fixtures)
    os.makedirs(args.out, exist_ok=True)
    procedures = refinement_ids(pipeline.kb)
    written = []
    for plan_id in sorted(pipeline.kb.plans):
        if plan_id in procedures:
            continue
        result = pipeline.generate(plan_id, languages=LANGUAGES, format="plain")
        for lang in LANGUAGES:
            path = os.path.join(args.out, f"{plan_id}.{lang}.txt")
            with open(path, "wb") as handle:
                handle.write(result.documents[lang].body)
            written.append(path)
        if plan_id == ANNOTATED_PLAN:
            for lang in LANGUAGES:
                path = os.path.join(args.out, f"{plan_id}.{lang}.json")
                with open(path, "wb") as handle:
                    handle.write(result.annotated[lang].body)
                written.append(path)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
