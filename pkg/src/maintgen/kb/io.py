"""KB document format: canonical JSON snapshots and two-phase loading.

Top-level arrays `roles`, `concepts`, `instances`, `rules`, `plans`.
The canonical form sorts every array by id, sorts object keys, indents
by two spaces, keeps non-ASCII characters raw, and ends with a newline,
so a snapshot of a loaded snapshot is byte-identical.

Loading is two-phase: all objects are inserted raw first, then the whole
graph is validated and every instance classified.  That frees fixture
authors from forward-reference ordering inside and across files.
"""
from __future__ import annotations

import json
from pathlib import Path

from .core import KbConfig, KnowledgeBase
from .model import (
    THING,
    Assertion,
    AssertFillerAction,
    AssertTypeAction,
    CompareAtom,
    Concept,
    CycleError,
    DuplicateIdError,
    EmitEventAction,
    FillerAssertion,
    FillerAtom,
    Instance,
    KbError,
    LiteralRange,
    Query,
    RangeViolationError,
    Restriction,
    RetractFiller,
    RetractFillerAction,
    RetractType,
    Role,
    Rule,
    RuleLoopError,
    TypeAssertion,
    TypeAtom,
    UnknownIdError,
)


class ParseError(KbError):
    """Malformed document; message carries source and position or path."""


# --- JSON codecs for shared sub-structures -----------------------------------

def range_to_json(r):
    if isinstance(r, LiteralRange):
        out = {"type": r.type}
        if r.type == "enum":
            out["values"] = sorted(r.values)
        return out
    return r


def range_from_json(data, where: str):
    if isinstance(data, str):
        return data
    if isinstance(data, dict) and "type" in data:
        try:
            return LiteralRange(type=data["type"], values=tuple(data.get("values", ())))
        except KbError as e:
            raise ParseError(f"{where}: {e}") from e
    raise ParseError(f"{where}: range must be a concept id or a literal type object")


def atom_to_json(atom):
    if isinstance(atom, TypeAtom):
        return {"atom": "type", "x": atom.x, "concept": atom.concept}
    if isinstance(atom, FillerAtom):
        return {"atom": "filler", "x": atom.x, "role": atom.role, "y": atom.y}
    return {"atom": "compare", "x": atom.x, "role": atom.role, "op": atom.op,
            "value": atom.value}


def atom_from_json(data, where: str):
    if not isinstance(data, dict):
        raise ParseError(f"{where}: atom must be an object")
    kind = data.get("atom")
    try:
        if kind == "type":
            return TypeAtom(x=data["x"], concept=data["concept"])
        if kind == "filler":
            return FillerAtom(x=data["x"], role=data["role"], y=data["y"])
        if kind == "compare":
            return CompareAtom(x=data["x"], role=data["role"], op=data["op"],
                               value=data["value"])
    except KeyError as e:
        raise ParseError(f"{where}: atom missing field {e.args[0]}") from e
    raise ParseError(f"{where}: unknown atom kind {kind!r}")


def query_to_json(q: Query) -> list:
    return [atom_to_json(a) for a in q.atoms]


def query_from_json(data, where: str) -> Query:
    if not isinstance(data, list) or not data:
        raise ParseError(f"{where}: query must be a non-empty atom array")
    return Query(atoms=tuple(atom_from_json(a, f"{where}[{i}]") for i, a in enumerate(data)))


def assertion_to_json(a: Assertion) -> dict:
    if isinstance(a, TypeAssertion):
        return {"assert": "type", "instance": a.instance, "concept": a.concept}
    if isinstance(a, FillerAssertion):
        return {"assert": "filler", "instance": a.instance, "role": a.role, "value": a.value}
    if isinstance(a, RetractType):
        return {"retract": "type", "instance": a.instance, "concept": a.concept}
    return {"retract": "filler", "instance": a.instance, "role": a.role, "value": a.value}


def assertion_from_json(data, where: str) -> Assertion:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: assertion must be an object")
    try:
        if data.get("assert") == "type":
            return TypeAssertion(data["instance"], data["concept"])
        if data.get("assert") == "filler":
            return FillerAssertion(data["instance"], data["role"], data["value"])
        if data.get("retract") == "type":
            return RetractType(data["instance"], data["concept"])
        if data.get("retract") == "filler":
            return RetractFiller(data["instance"], data["role"], data["value"])
    except KeyError as e:
        raise ParseError(f"{where}: assertion missing field {e.args[0]}") from e
    raise ParseError(f"{where}: assertion needs assert/retract of type/filler")


def _action_to_json(action):
    if isinstance(action, AssertTypeAction):
        return {"action": "assert-type", "x": action.x, "concept": action.concept}
    if isinstance(action, AssertFillerAction):
        return {"action": "assert-filler", "x": action.x, "role": action.role,
                "value": action.value}
    if isinstance(action, RetractFillerAction):
        return {"action": "retract-filler", "x": action.x, "role": action.role,
                "value": action.value}
    return {"action": "emit", "event": action.event,
            "args": [[k, v] for k, v in action.args]}


def _action_from_json(data, where: str):
    if not isinstance(data, dict):
        raise ParseError(f"{where}: action must be an object")
    kind = data.get("action")
    try:
        if kind == "assert-type":
            return AssertTypeAction(x=data["x"], concept=data["concept"])
        if kind == "assert-filler":
            return AssertFillerAction(x=data["x"], role=data["role"], value=data["value"])
        if kind == "retract-filler":
            return RetractFillerAction(x=data["x"], role=data["role"], value=data["value"])
        if kind == "emit":
            args = tuple((k, v) for k, v in data.get("args", []))
            return EmitEventAction(event=data["event"], args=args)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{where}: malformed action: {e}") from e
    raise ParseError(f"{where}: unknown action kind {kind!r}")


def _restriction_to_json(r: Restriction) -> dict:
    if r.kind == "all":
        return {"kind": "all", "role": r.role, "target": r.target}
    if r.kind == "filler":
        return {"kind": "filler", "role": r.role, "value": r.value}
    return {"kind": "card", "role": r.role, "min": r.min, "max": r.max}


def _restriction_from_json(data, where: str) -> Restriction:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: restriction must be an object")
    kind = data.get("kind")
    try:
        if kind == "all":
            return Restriction(role=data["role"], kind="all", target=data["target"])
        if kind == "filler":
            return Restriction(role=data["role"], kind="filler", value=data["value"])
        if kind == "card":
            return Restriction(role=data["role"], kind="card",
                               min=data.get("min", 0), max=data.get("max"))
    except (KeyError, KbError) as e:
        raise ParseError(f"{where}: malformed restriction: {e}") from e
    raise ParseError(f"{where}: unknown restriction kind {kind!r}")


# --- snapshot ------------------------------------------------------------------

def snapshot(kb: KnowledgeBase) -> str:
    """Canonical JSON text of the KB.  Derived types are recomputed on
    load, never stored, which is what makes round trips byte-stable."""
    from .. import plans as plan_codec

    doc = {
        "roles": [
            {"id": r.id, "domain": r.domain, "range": range_to_json(r.range),
             "functional": r.functional}
            for r in sorted(kb.roles.values(), key=lambda r: r.id)
        ],
        "concepts": [
            {"id": c.id, "parents": sorted(c.parents), "primitive": c.primitive,
             "restrictions": sorted(
                 (_restriction_to_json(r) for r in c.restrictions),
                 key=lambda d: json.dumps(d, sort_keys=True))}
            for c in sorted(kb.concepts.values(), key=lambda c: c.id)
            if c.id != THING
        ],
        "instances": [
            {"id": i.id, "types": sorted(i.asserted_types),
             "fillers": {role: sorted(values, key=str)
                         for role, values in sorted(i.fillers.items())}}
            for i in sorted(kb.instances.values(), key=lambda i: i.id)
        ],
        "rules": [
            {"id": r.id, "condition": query_to_json(r.condition),
             "actions": [_action_to_json(a) for a in r.actions]}
            for r in sorted(kb.rules.values(), key=lambda r: r.id)
        ],
        "plans": [plan_codec.plan_to_json(p)
                  for p in sorted(kb.plans.values(), key=lambda p: p.id)],
    }
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_kb(kb: KnowledgeBase, path: str | Path):
    Path(path).write_text(snapshot(kb), encoding="utf-8")


# --- load ------------------------------------------------------------------------

def _parse_document(text: str, source: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("roles", "concepts", "instances", "rules", "plans"):
        if key in doc and not isinstance(doc[key], list):
            raise ParseError(f"{source}: {key} must be an array")
    return doc


def load_kb(text: str, source: str = "<string>",
            config: KbConfig | None = None) -> KnowledgeBase:
    return merge_documents([(_parse_document(text, source), source)], config)


def load_kb_files(paths, config: KbConfig | None = None) -> KnowledgeBase:
    docs = []
    for path in paths:
        p = Path(path)
        docs.append((_parse_document(p.read_text(encoding="utf-8"), str(p)), str(p)))
    return merge_documents(docs, config)


def merge_documents(docs, config: KbConfig | None = None) -> KnowledgeBase:
    from .. import plans as plan_codec

    kb = KnowledgeBase(config=config)
    raw_plans = []
    for doc, source in docs:
        for data in doc.get("roles", ()):
            role = _role_from_json(data, source)
            if role.id in kb.roles:
                raise DuplicateIdError(f"{source}: role {role.id} already defined")
            kb.roles[role.id] = role
        for data in doc.get("concepts", ()):
            concept = _concept_from_json(data, source)
            if concept.id == THING:
                if concept.parents not in ((), (THING,)) or concept.restrictions:
                    raise ParseError(f"{source}: THING cannot be redefined")
                continue
            if concept.id in kb.concepts:
                raise DuplicateIdError(f"{source}: concept {concept.id} already defined")
            kb.concepts[concept.id] = concept
        for data in doc.get("instances", ()):
            inst = _instance_from_json(data, source)
            if inst.id in kb.instances:
                raise DuplicateIdError(f"{source}: instance {inst.id} already defined")
            kb.instances[inst.id] = inst
        for data in doc.get("rules", ()):
            rule = _rule_from_json(data, source)
            if rule.id in kb.rules:
                raise DuplicateIdError(f"{source}: rule {rule.id} already defined")
            kb.rules[rule.id] = rule
        raw_plans.extend((data, source) for data in doc.get("plans", ()))
    _validate_graph(kb)
    kb.reclassify_all()
    _validate_fillers(kb)
    kb.run_rules()
    for data, source in raw_plans:
        plan = plan_codec.plan_from_json(data, source)
        if plan.id in kb.plans:
            raise DuplicateIdError(f"{source}: plan {plan.id} already defined")
        kb.plans[plan.id] = plan
    for plan in kb.plans.values():
        plan_codec.check_references(plan, kb)
    return kb


def _role_from_json(data, source: str) -> Role:
    _need(data, ("id", "domain", "range"), source, "role")
    return Role(id=data["id"], domain=data["domain"],
                range=range_from_json(data["range"], f"{source}: role {data['id']}"),
                functional=bool(data.get("functional", False)))


def _concept_from_json(data, source: str) -> Concept:
    _need(data, ("id",), source, "concept")
    where = f"{source}: concept {data['id']}"
    parents = tuple(data.get("parents") or (THING,))
    restrictions = tuple(_restriction_from_json(r, where)
                         for r in data.get("restrictions", ()))
    return Concept(id=data["id"], parents=parents, restrictions=restrictions,
                   primitive=bool(data.get("primitive", True)))


def _instance_from_json(data, source: str) -> Instance:
    _need(data, ("id",), source, "instance")
    where = f"{source}: instance {data['id']}"
    fillers = {}
    raw = data.get("fillers", {})
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: fillers must be an object")
    for role, values in raw.items():
        fillers[role] = list(values) if isinstance(values, list) else [values]
    return Instance(id=data["id"], asserted_types=set(data.get("types", ())),
                    fillers=fillers)


def _rule_from_json(data, source: str) -> Rule:
    _need(data, ("id", "condition", "actions"), source, "rule")
    where = f"{source}: rule {data['id']}"
    return Rule(id=data["id"],
                condition=query_from_json(data["condition"], where),
                actions=tuple(_action_from_json(a, where) for a in data["actions"]))


def _need(data, keys, source: str, what: str):
    if not isinstance(data, dict):
        raise ParseError(f"{source}: {what} must be an object")
    for key in keys:
        if key not in data:
            raise ParseError(f"{source}: {what} {data.get('id', '?')} missing field {key}")


def _validate_graph(kb: KnowledgeBase):
    for concept in kb.concepts.values():
        for p in concept.parents:
            if p not in kb.concepts:
                raise UnknownIdError(f"concept {concept.id}: unknown parent {p}")
        for r in concept.restrictions:
            role = kb.roles.get(r.role)
            if role is None:
                raise UnknownIdError(f"concept {concept.id}: unknown role {r.role}")
            if r.kind == "all":
                if role.is_literal:
                    raise KbError(
                        f"concept {concept.id}: value restriction on literal role {r.role}")
                if r.target not in kb.concepts:
                    raise UnknownIdError(
                        f"concept {concept.id}: unknown restriction target {r.target}")
    for role in kb.roles.values():
        if role.domain not in kb.concepts:
            raise UnknownIdError(f"role {role.id}: unknown domain concept {role.domain}")
        if not role.is_literal and role.range not in kb.concepts:
            raise UnknownIdError(f"role {role.id}: unknown range concept {role.range}")
    _check_taxonomy_acyclic(kb)
    for inst in kb.instances.values():
        for t in inst.asserted_types:
            if t not in kb.concepts:
                raise UnknownIdError(f"instance {inst.id}: unknown concept {t}")
    for rule in kb.rules.values():
        kb._check_query(rule.condition)


def _check_taxonomy_acyclic(kb: KnowledgeBase):
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {c: WHITE for c in kb.concepts}
    for start in kb.concepts:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(kb.concepts[start].parents))]
        color[start] = GRAY
        while stack:
            node, parents = stack[-1]
            advanced = False
            for p in parents:
                if color[p] == GRAY:
                    raise CycleError(f"concept {p} participates in a parent cycle")
                if color[p] == WHITE:
                    color[p] = GRAY
                    stack.append((p, iter(kb.concepts[p].parents)))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()


def _validate_fillers(kb: KnowledgeBase):
    for inst in kb.instances.values():
        for role_id, values in inst.fillers.items():
            for v in values:
                kb._check_range(role_id, v, where=f"instance {inst.id}")
