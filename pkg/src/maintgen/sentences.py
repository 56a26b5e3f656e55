"""Sentence planning: linearize the document tree into an ordered list of
language-neutral sentence plans plus formatting instructions, then assign
referring-expression forms (first mention vs. pronoun) with antecedent
links.

Reference policy, deliberately conservative so every pronoun has a
mechanically recoverable antecedent:
  * substances (KB type `substance`) are bare mass NPs;
  * first mentions are definite when the referent is the unique filler of
    some role on some instance (the device "owns" exactly one), otherwise
    indefinite;
  * a repeat mention becomes a pronoun only when the previous mention is
    in the same or the adjacent sentence, fills the same semantic role,
    and no other referent of the same most-specific concept intervened;
  * all other repeat mentions are definite;
  * condition clauses neither contain pronouns nor serve as antecedents.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count

from .document import (
    Multinuclear,
    NucSat,
    Proposition,
    SectionSchema,
    check_schema,
)
from .kb.core import KnowledgeBase
from .kb.model import KbError

FORMS = ("indefinite", "definite", "pronoun", "bare")
MASS_CONCEPT = "substance"

# realization order of semantic roles inside a clause; also the mention
# order used by reference planning
ROLE_ORDER = ("actee", "instrument", "source", "destination", "location")


@dataclass
class ReferringExpression:
    referent: str
    form: str = "definite"
    antecedent: tuple | None = None  # (sentence plan id, role)


@dataclass
class SentencePlan:
    id: int
    process: str
    participants: dict
    mood: str  # imperative | declarative
    polarity: str = "positive"
    condition: "SentencePlan | None" = None
    list_context: tuple | None = None  # (list id, 1-based position)
    source_action: str | None = None


@dataclass(frozen=True)
class FormatInstruction:
    kind: str  # heading | paragraph-break | list-begin | list-item | list-end | emphasis
    payload: str | None = None


def linearize(schema: SectionSchema, kb: KnowledgeBase) -> list:
    """Depth-first, nucleus-first linearization.  A SEQUENCE of three or
    more instructions becomes an enumerated list; CONDITION satellites
    embed as the condition field of their nucleus's first plan."""
    diags = [d for d in check_schema(schema, kb) if d.severity == "error"]
    if diags:
        raise KbError(f"document tree invalid: {diags[0].message}")
    out: list = [FormatInstruction("heading", schema.title_key)]
    ids = count(1)
    lists = count(1)
    for i, (_, block) in enumerate(schema.blocks()):
        if i > 0:
            out.append(FormatInstruction("paragraph-break"))
        _emit(block, out, ids, lists, None)
    return out


def _emit(node, out: list, ids, lists, list_ctx) -> SentencePlan:
    """Emits node's plans and instructions; returns the first plan emitted
    (the condition attachment point)."""
    if isinstance(node, Proposition):
        plan = _plan_from(node, ids, list_ctx)
        out.append(plan)
        return plan
    if isinstance(node, Multinuclear):
        if node.relation == "SEQUENCE" and _instruction_count(node) >= 3:
            list_id = f"L{next(lists)}"
            out.append(FormatInstruction("list-begin", list_id))
            first = None
            for pos, nucleus in enumerate(node.nuclei, start=1):
                out.append(FormatInstruction("list-item"))
                plan = _emit(nucleus, out, ids, lists, (list_id, pos))
                first = first or plan
            out.append(FormatInstruction("list-end", list_id))
            return first
        first = None
        for nucleus in node.nuclei:
            plan = _emit(nucleus, out, ids, lists, list_ctx)
            first = first or plan
        return first
    if isinstance(node, NucSat):
        conditions = [sat for rel, sat in node.satellites if rel == "CONDITION"]
        others = [(rel, sat) for rel, sat in node.satellites if rel != "CONDITION"]
        condition_plans = [_plan_from(sat, ids, None) for sat in conditions]
        first = _emit(node.nucleus, out, ids, lists, list_ctx)
        if condition_plans:
            first.condition = condition_plans[0]
        for _, sat in others:
            _emit(sat, out, ids, lists, list_ctx)
        return first
    raise KbError(f"cannot linearize node {node!r}")


def _plan_from(prop: Proposition, ids, list_ctx) -> SentencePlan:
    mood = "imperative" if prop.annotation.speech_act == "instruction" else "declarative"
    participants = {role: ReferringExpression(referent=prop.participants[role])
                    for role in ROLE_ORDER if role in prop.participants}
    return SentencePlan(id=next(ids), process=prop.predicate,
                        participants=participants, mood=mood,
                        polarity=prop.polarity, list_context=list_ctx,
                        source_action=prop.source_action)


def _instruction_count(node: Multinuclear) -> int:
    return sum(1 for n in node.nuclei if _is_instruction(n))


def _is_instruction(node) -> bool:
    if isinstance(node, Proposition):
        return node.annotation.speech_act == "instruction"
    if isinstance(node, NucSat):
        return _is_instruction(node.nucleus)
    if isinstance(node, Multinuclear):
        return any(_is_instruction(n) for n in node.nuclei)
    return False


# --- referring expressions ------------------------------------------------------

@dataclass
class _Mention:
    plan_id: int
    sentence: int  # index among top-level plans, shared by their conditions
    role: str
    referent: str
    in_condition: bool
    expr: ReferringExpression


def plan_references(sequence: list, kb: KnowledgeBase) -> list:
    """Assign referring-expression forms in place and return the sequence.
    Deterministic and idempotent: forms depend only on mention order and
    the KB, never on previously assigned forms."""
    mentions: list[_Mention] = []
    sentence_no = 0
    for item in sequence:
        if not isinstance(item, SentencePlan):
            continue
        sentence_no += 1
        if item.condition is not None:
            _collect_mentions(item.condition, sentence_no, True, mentions)
        _collect_mentions(item, sentence_no, False, mentions)
    for i, m in enumerate(mentions):
        _assign_form(m, mentions[:i], kb)
    return sequence


def _collect_mentions(plan: SentencePlan, sentence: int, in_condition: bool,
                      mentions: list):
    for role in ROLE_ORDER:
        expr = plan.participants.get(role)
        if expr is not None:
            mentions.append(_Mention(plan.id, sentence, role, expr.referent,
                                     in_condition, expr))


def _assign_form(m: _Mention, earlier: list, kb: KnowledgeBase):
    m.expr.antecedent = None
    previous = [e for e in earlier if e.referent == m.referent]
    antecedent = previous[-1] if previous else None
    if antecedent is not None and not m.in_condition and not antecedent.in_condition:
        close = m.sentence - antecedent.sentence <= 1
        same_role = antecedent.role == m.role
        if close and same_role and not _blocked(m, antecedent, earlier, kb):
            m.expr.form = "pronoun"
            m.expr.antecedent = (antecedent.plan_id, antecedent.role)
            return
    if _is_mass(m.referent, kb):
        m.expr.form = "bare"
        return
    if antecedent is None and not _uniquely_possessed(m.referent, kb):
        m.expr.form = "indefinite"
        return
    m.expr.form = "definite"


def _blocked(m: _Mention, antecedent: _Mention, earlier: list,
             kb: KnowledgeBase) -> bool:
    """A distinct referent of the same most-specific concept mentioned
    since the antecedent makes a pronoun ambiguous."""
    kinds = _kinds(m.referent, kb)
    start = earlier.index(antecedent) + 1
    return any(e.referent != m.referent and kinds & _kinds(e.referent, kb)
               for e in earlier[start:])


def _kinds(referent: str, kb: KnowledgeBase) -> set:
    inst = kb.instances.get(referent)
    if inst is None:
        return set()
    return kb.most_specific(inst.derived_types)


def _is_mass(referent: str, kb: KnowledgeBase) -> bool:
    inst = kb.instances.get(referent)
    return inst is not None and MASS_CONCEPT in inst.derived_types


def _uniquely_possessed(referent: str, kb: KnowledgeBase) -> bool:
    """True when some instance holds the referent as the only filler of
    one of its roles: "the" hood of the car, "the" dipstick of the tank."""
    for inst in kb.instances.values():
        for values in inst.fillers.values():
            if len(values) == 1 and values[0] == referent:
                return True
    return False
