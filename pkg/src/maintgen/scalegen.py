"""Deterministic generator for large synthetic KB fixtures.

Builds a fixture document (same JSON shape as the hand-written ones)
with a primitive-concept tree, enum attribute roles, an object link
role, defined concepts over both, and instances carrying random types
and fillers.  Everything is driven by one seed, so a given call always
yields the same document.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .kb.core import KnowledgeBase
from .kb.model import FillerAtom, Query, TypeAtom

ENUM_VALUES = ("v0", "v1", "v2", "v3")


@dataclass(frozen=True)
class ScaleConfig:
    primitive_concepts: int = 520
    filler_defined: int = 36
    link_defined: int = 12
    instances: int = 520
    enum_roles: int = 6
    seed: int = 7

    @property
    def total_objects(self) -> int:
        return (self.primitive_concepts + self.filler_defined
                + self.link_defined + self.instances)


def build_scale_document(config: ScaleConfig = ScaleConfig()) -> dict:
    rng = random.Random(config.seed)
    roles = [{"id": "scale-link", "domain": "THING", "range": "THING"}]
    for j in range(config.enum_roles):
        roles.append({"id": f"scale-attr{j}", "domain": "THING",
                      "range": {"type": "enum", "values": list(ENUM_VALUES)},
                      "functional": True})

    concepts = [{"id": "scale-c0"}]
    for i in range(1, config.primitive_concepts):
        parent = f"scale-c{rng.randrange(i)}"
        concepts.append({"id": f"scale-c{i}", "parents": [parent]})

    def random_primitive() -> str:
        return f"scale-c{rng.randrange(config.primitive_concepts)}"

    for d in range(config.filler_defined):
        attr = f"scale-attr{rng.randrange(config.enum_roles)}"
        value = ENUM_VALUES[rng.randrange(len(ENUM_VALUES))]
        concepts.append({
            "id": f"scale-d{d}", "parents": [random_primitive()],
            "primitive": False,
            "restrictions": [{"kind": "filler", "role": attr, "value": value}]})

    for d in range(config.link_defined):
        concepts.append({
            "id": f"scale-l{d}", "parents": [random_primitive()],
            "primitive": False,
            "restrictions": [
                {"kind": "all", "role": "scale-link", "target": random_primitive()},
                {"kind": "card", "role": "scale-link", "min": 1}]})

    instances = []
    for k in range(config.instances):
        fillers: dict = {}
        for j in range(config.enum_roles):
            if rng.random() < 0.7:
                fillers[f"scale-attr{j}"] = [
                    ENUM_VALUES[rng.randrange(len(ENUM_VALUES))]]
        if k > 0 and rng.random() < 0.5:
            fillers["scale-link"] = [f"scale-i{rng.randrange(k)}"]
        instances.append({"id": f"scale-i{k}",
                          "types": [random_primitive()],
                          "fillers": fillers})

    return {"roles": roles, "concepts": concepts, "instances": instances}


def sample_queries(kb: KnowledgeBase, n: int = 100, seed: int = 11) -> list[Query]:
    """Deterministic mixed workload: open type queries, ground type
    checks, attribute lookups, and filler-value scans."""
    rng = random.Random(seed)
    concept_ids = sorted(kb.concepts)
    instance_ids = sorted(kb.instances)
    enum_roles = sorted(r.id for r in kb.roles.values()
                        if r.is_literal and r.range.type == "enum")
    queries = []
    for i in range(n):
        kind = i % 4
        if kind == 0:
            queries.append(Query(atoms=(
                TypeAtom("?x", rng.choice(concept_ids)),)))
        elif kind == 1:
            queries.append(Query(atoms=(
                TypeAtom(rng.choice(instance_ids), rng.choice(concept_ids)),)))
        elif kind == 2 and enum_roles:
            queries.append(Query(atoms=(
                FillerAtom(rng.choice(instance_ids), rng.choice(enum_roles), "?v"),)))
        else:
            role = rng.choice(enum_roles) if enum_roles else "scale-link"
            queries.append(Query(atoms=(
                FillerAtom("?x", role, rng.choice(ENUM_VALUES)),)))
    return queries
