#!/usr/bin/env python3
"""Write a large synthetic KB fixture for scale testing."""
import argparse
import json

from maintgen.scalegen import ScaleConfig, build_scale_document


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="scale-fixture.json")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--concepts", type=int, default=520)
    parser.add_argument("--instances", type=int, default=520)
    args = parser.parse_args()

    config = ScaleConfig(primitive_concepts=args.concepts,
                         instances=args.instances, seed=args.seed)
    doc = build_scale_document(config)
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
    total = config.total_objects
    print(f"{args.out}: {total} concepts+instances "
          f"({len(doc['concepts'])} concepts, {len(doc['instances'])} instances)")


if __name__ == "__main__":
    main()
