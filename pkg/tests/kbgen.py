"""Test-side oracles: a brute-force instance classifier and small random
KB documents. Deliberately independent of KnowledgeBase internals --
restriction satisfaction is re-implemented from the definitions.
"""
from __future__ import annotations

import random

from maintgen.kb.core import KnowledgeBase
from maintgen.kb.model import LiteralRange

ENUM_VALUES = ("v0", "v1", "v2", "v3")


def ancestors_closure(kb: KnowledgeBase, concept_id: str) -> set[str]:
    out: set[str] = set()
    stack = [concept_id]
    while stack:
        c = stack.pop()
        if c in out:
            continue
        out.add(c)
        stack.extend(kb.concepts[c].parents)
    out.add("THING")
    return out


def brute_force_derived(kb: KnowledgeBase) -> dict[str, set[str]]:
    """Least fixpoint over all instances: upward closure of asserted types
    plus every defined concept whose parents hold and whose restrictions
    are satisfied against the current iterate."""
    derived = {iid: set().union(*(ancestors_closure(kb, t)
                                  for t in inst.asserted_types))
               if inst.asserted_types else {"THING"}
               for iid, inst in kb.instances.items()}
    defined = [c for c in kb.concepts.values() if not c.primitive]
    changed = True
    while changed:
        changed = False
        for iid, inst in kb.instances.items():
            have = derived[iid]
            for concept in defined:
                if concept.id in have:
                    continue
                if not all(p in have for p in concept.parents):
                    continue
                if all(_satisfied(r, inst, derived, kb)
                       for r in concept.restrictions):
                    have.update(ancestors_closure(kb, concept.id))
                    changed = True
    return derived


def _satisfied(restriction, inst, derived: dict, kb: KnowledgeBase) -> bool:
    values = inst.fillers.get(restriction.role, [])
    if restriction.kind == "filler":
        return restriction.value in values
    if restriction.kind == "card":
        n = len(values)
        if n < restriction.min:
            return False
        return restriction.max is None or n <= restriction.max
    # all: every filler must be an instance deriving the target
    for value in values:
        if not isinstance(value, str) or value not in derived:
            return False
        if restriction.target not in derived[value]:
            return False
    return True


def random_small_doc(seed: int, concepts: int = 30, instances: int = 18) -> dict:
    """Fixture document with <= 50 concepts: a primitive tree, one enum
    attribute, one object link, and defined concepts over both."""
    rng = random.Random(seed)
    roles = [
        {"id": "r-attr", "domain": "THING", "functional": True,
         "range": {"type": "enum", "values": list(ENUM_VALUES)}},
        {"id": "r-link", "domain": "THING", "range": "THING"},
    ]
    doc_concepts = [{"id": "k0"}]
    for i in range(1, concepts):
        doc_concepts.append({"id": f"k{i}",
                             "parents": [f"k{rng.randrange(i)}"]})

    def prim() -> str:
        return f"k{rng.randrange(concepts)}"

    for d in range(6):
        doc_concepts.append({
            "id": f"kd{d}", "parents": [prim()], "primitive": False,
            "restrictions": [{"kind": "filler", "role": "r-attr",
                              "value": rng.choice(ENUM_VALUES)}]})
    for d in range(3):
        doc_concepts.append({
            "id": f"kl{d}", "parents": [prim()], "primitive": False,
            "restrictions": [
                {"kind": "all", "role": "r-link", "target": prim()},
                {"kind": "card", "role": "r-link", "min": 1}]})

    doc_instances = []
    for k in range(instances):
        fillers: dict = {}
        if rng.random() < 0.8:
            fillers["r-attr"] = [rng.choice(ENUM_VALUES)]
        if k > 0 and rng.random() < 0.6:
            fillers["r-link"] = [f"x{rng.randrange(k)}"]
        doc_instances.append({"id": f"x{k}", "types": [prim()],
                              "fillers": fillers})
    return {"roles": roles, "concepts": doc_concepts,
            "instances": doc_instances}


def enum_roles(kb: KnowledgeBase) -> list:
    return sorted((r for r in kb.roles.values()
                   if isinstance(r.range, LiteralRange)
                   and r.range.type == "enum"), key=lambda r: r.id)
