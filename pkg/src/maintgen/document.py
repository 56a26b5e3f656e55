"""Language-independent document representation.

A section schema orders three content blocks: where the work happens,
what replacement parts or substances are needed, and the activity steps.
Each block is a rhetorical-structure tree over leaf propositions whose
participants are KB instances.  The same tree feeds every language, and
a digest over the structure certifies that cross-language identity.
"""
from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field

from .kb.core import KnowledgeBase
from .kb.model import (
    FillerAtom,
    KbError,
    Query,
    TypeAtom,
    UnknownIdError,
)
from .plans import (
    Diagnostic,
    ExpandedConditional,
    ExpandedPlan,
    ExpandedRefined,
    ExpandedStep,
    Plan,
    expand_plan,
)
from .simulate import ResolvedConditional, Trace

RELATIONS = ("SEQUENCE", "PURPOSE", "CONDITION", "ELABORATION", "MEANS",
             "MOTIVATION", "PRECONDITION", "RESULT", "UNTIL", "JOINT",
             "CONTRAST")
MULTINUCLEAR = ("SEQUENCE", "JOINT", "CONTRAST")
SPEECH_ACTS = ("instruction", "description", "warning")

# Condition-like satellites carry a proposition derived from a state query.
QUERY_RELATIONS = ("CONDITION", "PRECONDITION", "UNTIL")

# plan participant key -> semantic role used in propositions and sentences
SEMANTIC_ROLES = {"patient": "actee", "instrument": "instrument",
                  "source": "source", "destination": "destination",
                  "location": "location"}

LOCATE_PROCESS = "be-located"
NEED_PROCESS = "need"


@dataclass(frozen=True)
class Annotation:
    speech_act: str = "instruction"
    prominence: str = "main"
    hints: frozenset = frozenset()


@dataclass(frozen=True)
class Proposition:
    predicate: str
    participants: dict
    annotation: Annotation
    polarity: str = "positive"
    source_action: str | None = None


@dataclass(frozen=True)
class NucSat:
    nucleus: object
    satellites: tuple  # of (relation, node)

    @property
    def relation(self) -> str:
        return self.satellites[0][0]


@dataclass(frozen=True)
class Multinuclear:
    relation: str
    nuclei: tuple


@dataclass(frozen=True)
class SectionSchema:
    title_key: str
    activity_blocks: tuple
    location_block: object = None
    replacement_block: object = None

    def blocks(self) -> list:
        out = []
        if self.location_block is not None:
            out.append(("location", self.location_block))
        if self.replacement_block is not None:
            out.append(("replacement", self.replacement_block))
        out.extend(("activity", b) for b in self.activity_blocks)
        return out


# --- construction -----------------------------------------------------------

def build_document(source, kb: KnowledgeBase) -> SectionSchema:
    """Build the section schema from a plan (static), a state-filtered
    ExpandedPlan, or a simulation Trace."""
    if isinstance(source, Trace):
        expanded = expand_plan(source.plan, kb)
        steps = source.resolved_steps
        plan_id = source.plan
        meta = expanded
    else:
        expanded = source if isinstance(source, ExpandedPlan) else expand_plan(source, kb)
        steps = expanded.steps
        plan_id = expanded.plan
        meta = expanded
    activity_nodes = _steps_to_nodes(steps, kb)
    if not activity_nodes:
        raise KbError(f"plan {plan_id}: no steps left to document")
    schema = SectionSchema(
        title_key=plan_id,
        activity_blocks=(_seq(activity_nodes),),
        location_block=_location_block(meta, steps, kb),
        replacement_block=_replacement_block(meta, kb),
    )
    return schema


def _seq(nodes: list):
    if len(nodes) == 1:
        return nodes[0]
    return Multinuclear(relation="SEQUENCE", nuclei=tuple(nodes))


def _steps_to_nodes(steps, kb: KnowledgeBase) -> list:
    nodes = []
    for step in steps:
        if isinstance(step, ExpandedStep):
            nodes.append(_action_proposition(step.action, kb))
        elif isinstance(step, ExpandedRefined):
            children = _steps_to_nodes(step.children, kb)
            if step.action.postconditions:
                # the parent instruction stays in the text; the refinement
                # tells the reader how to carry it out
                nodes.append(NucSat(
                    nucleus=_action_proposition(step.action, kb),
                    satellites=(("MEANS", _seq(children)),)))
            else:
                nodes.extend(children)
        elif isinstance(step, ExpandedConditional):
            nodes.extend(_conditional_nodes(step.condition, step.then_steps,
                                            step.else_steps, kb))
        elif isinstance(step, ResolvedConditional):
            if not step.steps:
                continue
            branch = _steps_to_nodes(step.steps, kb)
            if not branch:
                continue
            polarity = "positive" if step.result else "negative"
            nodes.append(NucSat(
                nucleus=_seq(branch),
                satellites=(("CONDITION",
                             _condition_proposition(step.condition, kb, polarity)),)))
        else:
            raise KbError(f"cannot document step {step!r}")
    return nodes


def _conditional_nodes(condition: Query, then_steps, else_steps,
                       kb: KnowledgeBase) -> list:
    nodes = []
    then_nodes = _steps_to_nodes(then_steps, kb)
    if then_nodes:
        nodes.append(NucSat(
            nucleus=_seq(then_nodes),
            satellites=(("CONDITION",
                         _condition_proposition(condition, kb, "positive")),)))
    else_nodes = _steps_to_nodes(else_steps, kb)
    if else_nodes:
        nodes.append(NucSat(
            nucleus=_seq(else_nodes),
            satellites=(("CONDITION",
                         _condition_proposition(condition, kb, "negative")),)))
    return nodes


def _action_proposition(action, kb: KnowledgeBase) -> Proposition:
    participants = {}
    for key, value in action.participants.items():
        if key == "attribute":
            continue
        role = SEMANTIC_ROLES.get(key)
        if role is None:
            raise KbError(f"action {action.id}: unmapped participant key {key}")
        if value not in kb.instances:
            raise UnknownIdError(f"action {action.id}: participant {value} unresolved")
        participants[role] = value
    return Proposition(predicate=action.process, participants=participants,
                       annotation=Annotation(speech_act="instruction"),
                       source_action=action.id)


def _condition_proposition(condition: Query, kb: KnowledgeBase,
                           polarity: str) -> Proposition:
    """A single-atom state query becomes a declarative proposition whose
    predicate is a state concept, so the realizer can lexicalize it."""
    if len(condition.atoms) != 1:
        raise KbError("only single-atom conditions can be documented")
    atom = condition.atoms[0]
    if isinstance(atom, TypeAtom):
        concept, actee = atom.concept, atom.x
    elif isinstance(atom, FillerAtom):
        concept = _state_concept_for(atom.role, atom.y, kb)
        actee = atom.x
    else:
        raise KbError("comparison conditions cannot be documented")
    if actee not in kb.instances:
        raise UnknownIdError(f"condition subject {actee} is not a known instance")
    return Proposition(predicate=concept, participants={"actee": actee},
                       annotation=Annotation(speech_act="description"),
                       polarity=polarity)


def _state_concept_for(role: str, value, kb: KnowledgeBase) -> str:
    """The defined concept whose whole definition is exactly this one
    filler restriction, e.g. level-state=low maps to low-level."""
    for concept in sorted(kb.concepts):
        c = kb.concepts[concept]
        if c.primitive or len(c.restrictions) != 1:
            continue
        r = c.restrictions[0]
        if r.kind == "filler" and r.role == role and r.value == value:
            return concept
    raise KbError(f"no state concept covers filler {role}={value!r}")


def _location_block(expanded: ExpandedPlan, steps, kb: KnowledgeBase):
    if expanded.location_info is None:
        return None
    if expanded.location_info not in kb.instances:
        raise UnknownIdError(f"unknown location {expanded.location_info}")
    actee = _main_patient(steps)
    if actee is None:
        return None
    return Proposition(predicate=LOCATE_PROCESS,
                       participants={"actee": actee,
                                     "location": expanded.location_info},
                       annotation=Annotation(speech_act="description"))


def _main_patient(steps):
    """The instance the section is mostly about: the most frequent patient
    across leaf actions, ties broken by id."""
    counts = Counter()
    _count_patients(steps, counts)
    if not counts:
        return None
    return min(counts, key=lambda iid: (-counts[iid], iid))


def _count_patients(steps, counts: Counter):
    for step in steps:
        if isinstance(step, ExpandedStep):
            patient = step.action.participants.get("patient")
            if patient is not None:
                counts[patient] += 1
        elif isinstance(step, ExpandedRefined):
            _count_patients(step.children, counts)
        elif isinstance(step, ExpandedConditional):
            _count_patients(step.then_steps, counts)
            _count_patients(step.else_steps, counts)
        elif isinstance(step, ResolvedConditional):
            _count_patients(step.steps, counts)


def _replacement_block(expanded: ExpandedPlan, kb: KnowledgeBase):
    if not expanded.replacement_items:
        return None
    props = []
    for item in expanded.replacement_items:
        if item not in kb.instances:
            raise UnknownIdError(
                f"replacement item {item} must be an instance to be documented")
        props.append(Proposition(predicate=NEED_PROCESS,
                                 participants={"actee": item},
                                 annotation=Annotation(speech_act="description")))
    if len(props) == 1:
        return props[0]
    return Multinuclear(relation="JOINT", nuclei=tuple(props))


# --- validation ----------------------------------------------------------------

def check_tree(root, kb: KnowledgeBase | None = None) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[int] = set()
    _check_node(root, diags, seen, kb)
    return diags


def _check_node(node, diags: list, seen: set, kb):
    if id(node) in seen:
        diags.append(Diagnostic("error", "shared-node",
                                "node is reachable from two parents"))
        return
    seen.add(id(node))
    if isinstance(node, Proposition):
        _check_leaf(node, diags, kb)
        return
    if isinstance(node, Multinuclear):
        if node.relation not in MULTINUCLEAR:
            diags.append(Diagnostic("error", "bad-relation",
                                    f"{node.relation} is not multinuclear"))
        if len(node.nuclei) < 2:
            diags.append(Diagnostic("error", "arity",
                                    f"{node.relation} needs at least 2 nuclei"))
        for child in node.nuclei:
            _check_node(child, diags, seen, kb)
        return
    if isinstance(node, NucSat):
        if not node.satellites:
            diags.append(Diagnostic("error", "arity",
                                    "nucleus-satellite node without satellites"))
        for relation, sat in node.satellites:
            if relation not in RELATIONS or relation in MULTINUCLEAR:
                diags.append(Diagnostic("error", "bad-relation",
                                        f"{relation} cannot link a satellite"))
            if relation in QUERY_RELATIONS:
                if not (isinstance(sat, Proposition)
                        and sat.annotation.speech_act == "description"):
                    diags.append(Diagnostic(
                        "error", "bad-satellite",
                        f"{relation} satellite must be a state proposition"))
            _check_node(sat, diags, seen, kb)
        _check_node(node.nucleus, diags, seen, kb)
        return
    diags.append(Diagnostic("error", "bad-node", f"unknown node {node!r}"))


def _check_leaf(prop: Proposition, diags: list, kb):
    if prop.annotation.speech_act not in SPEECH_ACTS:
        diags.append(Diagnostic("error", "bad-annotation",
                                f"unknown speech act {prop.annotation.speech_act}"))
    if prop.annotation.speech_act == "instruction" and prop.source_action is None:
        diags.append(Diagnostic("error", "bad-annotation",
                                "instruction annotation on a non-action proposition"))
    if prop.annotation.prominence not in ("main", "aside"):
        diags.append(Diagnostic("error", "bad-annotation",
                                f"unknown prominence {prop.annotation.prominence}"))
    if prop.polarity not in ("positive", "negative"):
        diags.append(Diagnostic("error", "bad-annotation",
                                f"unknown polarity {prop.polarity}"))
    if kb is not None:
        for role, value in prop.participants.items():
            if value not in kb.instances:
                diags.append(Diagnostic(
                    "error", "unresolved-participant",
                    f"participant {role}={value} is not a KB instance"))


def check_schema(schema: SectionSchema, kb: KnowledgeBase | None = None) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if not schema.activity_blocks:
        diags.append(Diagnostic("error", "missing-block",
                                "schema has no activity block"))
    seen: set[int] = set()
    for _, block in schema.blocks():
        _check_node(block, diags, seen, kb)
    return diags


# --- serialization and digest -----------------------------------------------------

def node_to_json(node) -> dict:
    if isinstance(node, Proposition):
        return {
            "node": "proposition",
            "predicate": node.predicate,
            "participants": dict(sorted(node.participants.items())),
            "speech-act": node.annotation.speech_act,
            "prominence": node.annotation.prominence,
            "hints": sorted(node.annotation.hints),
            "polarity": node.polarity,
            "action": node.source_action,
        }
    if isinstance(node, Multinuclear):
        return {"node": "multinuclear", "relation": node.relation,
                "nuclei": [node_to_json(n) for n in node.nuclei]}
    return {"node": "nucsat",
            "nucleus": node_to_json(node.nucleus),
            "satellites": [[rel, node_to_json(sat)]
                           for rel, sat in node.satellites]}


def schema_to_json(schema: SectionSchema) -> dict:
    return {
        "title-key": schema.title_key,
        "location-block": (node_to_json(schema.location_block)
                           if schema.location_block is not None else None),
        "replacement-block": (node_to_json(schema.replacement_block)
                              if schema.replacement_block is not None else None),
        "activity-blocks": [node_to_json(b) for b in schema.activity_blocks],
    }


def language_independence_certificate(schema: SectionSchema) -> str:
    """Digest over structure, relations and KB ids only.  Nothing language-
    specific ever enters, so equal digests certify one shared plan tree."""
    canonical = json.dumps(schema_to_json(schema), sort_keys=True,
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
