"""Maintenance plans: actions with pre/postconditions, recursive refinement,
conditional steps, applicability for authoring menus, and validation.

A plan targets an exemplar device instance; it applies to any instance
sharing that exemplar's most specific types.  Steps may refine into whole
sub-plans; the parent step's participants substitute into "$role"
placeholders in the refinement body, so refinement plans are reusable
procedures (pull/wipe/reinsert works for any level indicator).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .kb.core import KnowledgeBase
from .kb.io import (
    ParseError,
    assertion_from_json,
    assertion_to_json,
    atom_from_json,
    atom_to_json,
    query_from_json,
    query_to_json,
)
from .kb.model import (
    Assertion,
    CompareAtom,
    CycleError,
    FillerAssertion,
    FillerAtom,
    KbError,
    Query,
    QueryError,
    RetractFiller,
    RetractType,
    TypeAssertion,
    TypeAtom,
    UnknownIdError,
    is_placeholder,
    is_var,
)

CATEGORIES = ("check-attribute", "add-substance", "replace-part",
              "primitive-motor-action")

# Participant keys carry instance ids, except the reserved "attribute" key,
# which names the role a check-attribute action reads.
PARTICIPANT_KEYS = ("patient", "instrument", "source", "destination",
                    "location", "attribute")

DEFAULT_ACTOR = "reader"


@dataclass(frozen=True)
class PlanAction:
    id: str
    category: str
    process: str
    participants: dict = field(default_factory=dict)
    actor: str = DEFAULT_ACTOR
    preconditions: tuple = ()
    postconditions: tuple = ()
    refinement: str | None = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise KbError(f"action {self.id}: unknown category {self.category}")


@dataclass(frozen=True)
class ConditionalStep:
    condition: Query
    then_steps: tuple
    else_steps: tuple = ()


@dataclass(frozen=True)
class Plan:
    id: str
    target_device: str
    steps: tuple
    goal: Query | None = None
    preconditions: tuple = ()
    replacement_items: tuple = ()
    location_info: str | None = None

    def __post_init__(self):
        if not self.steps:
            raise KbError(f"plan {self.id}: step list is empty")


@dataclass(frozen=True)
class ExpandedStep:
    action: PlanAction


@dataclass(frozen=True)
class ExpandedRefined:
    action: PlanAction
    plan: str
    children: tuple


@dataclass(frozen=True)
class ExpandedConditional:
    condition: Query
    then_steps: tuple
    else_steps: tuple


@dataclass(frozen=True)
class ExpandedPlan:
    plan: str
    target_device: str
    steps: tuple
    goal: Query | None = None
    replacement_items: tuple = ()
    location_info: str | None = None

    def leaves(self) -> list[PlanAction]:
        out: list[PlanAction] = []
        _collect_leaves(self.steps, out)
        return out


def _collect_leaves(steps, out: list):
    for step in steps:
        if isinstance(step, ExpandedStep):
            out.append(step.action)
        elif isinstance(step, ExpandedRefined):
            _collect_leaves(step.children, out)
        else:
            _collect_leaves(step.then_steps, out)
            _collect_leaves(step.else_steps, out)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning
    code: str
    message: str


# --- expansion -----------------------------------------------------------------

def expand_plan(plan: Plan | str, kb: KnowledgeBase) -> ExpandedPlan:
    plan = _resolve(plan, kb)
    steps = _expand_steps(plan.steps, kb, {}, [plan.id])
    return ExpandedPlan(plan=plan.id, target_device=plan.target_device,
                        steps=tuple(steps), goal=plan.goal,
                        replacement_items=tuple(plan.replacement_items),
                        location_info=plan.location_info)


def _resolve(plan: Plan | str, kb: KnowledgeBase) -> Plan:
    if isinstance(plan, Plan):
        return plan
    found = kb.plans.get(plan)
    if found is None:
        raise UnknownIdError(f"unknown plan {plan}")
    return found


def _expand_steps(steps, kb: KnowledgeBase, binding: dict, path: list) -> list:
    out = []
    for step in steps:
        if isinstance(step, ConditionalStep):
            out.append(ExpandedConditional(
                condition=_subst_query(step.condition, binding, path[-1]),
                then_steps=tuple(_expand_steps(step.then_steps, kb, binding, path)),
                else_steps=tuple(_expand_steps(step.else_steps, kb, binding, path))))
            continue
        action = _subst_action(step, binding, path[-1])
        if action.refinement is None:
            out.append(ExpandedStep(action=action))
            continue
        sub_id = action.refinement
        if sub_id in path:
            cycle = path[path.index(sub_id):] + [sub_id]
            raise CycleError(f"refinement cycle {cycle}")
        sub = kb.plans.get(sub_id)
        if sub is None:
            raise UnknownIdError(f"plan {path[-1]}: unknown refinement {sub_id}")
        children = _expand_steps(sub.steps, kb, dict(action.participants),
                                 path + [sub_id])
        out.append(ExpandedRefined(action=replace(action, refinement=None),
                                   plan=sub_id, children=tuple(children)))
    return out


def _subst_term(term, binding: dict, where: str):
    if isinstance(term, str) and is_placeholder(term):
        key = term[1:]
        if key not in binding:
            raise KbError(f"plan {where}: unresolved participant placeholder {term}")
        return binding[key]
    return term


def _subst_query(query: Query, binding: dict, where: str) -> Query:
    atoms = []
    for atom in query.atoms:
        x = _subst_term(atom.x, binding, where)
        if isinstance(atom, TypeAtom):
            atoms.append(TypeAtom(x=x, concept=atom.concept))
        elif isinstance(atom, FillerAtom):
            atoms.append(FillerAtom(x=x, role=atom.role,
                                    y=_subst_term(atom.y, binding, where)))
        else:
            atoms.append(CompareAtom(x=x, role=atom.role, op=atom.op,
                                     value=atom.value))
    return Query(atoms=tuple(atoms))


def _subst_assertion(a: Assertion, binding: dict, where: str) -> Assertion:
    inst = _subst_term(a.instance, binding, where)
    if isinstance(a, TypeAssertion):
        return TypeAssertion(inst, a.concept)
    if isinstance(a, RetractType):
        return RetractType(inst, a.concept)
    value = _subst_term(a.value, binding, where)
    if isinstance(a, FillerAssertion):
        return FillerAssertion(inst, a.role, value)
    return RetractFiller(inst, a.role, value)


def _subst_action(action: PlanAction, binding: dict, where: str) -> PlanAction:
    participants = {k: _subst_term(v, binding, where)
                    for k, v in action.participants.items()}
    return replace(
        action,
        participants=participants,
        preconditions=tuple(_subst_query(q, binding, where)
                            for q in action.preconditions),
        postconditions=tuple(_subst_assertion(a, binding, where)
                             for a in action.postconditions))


# --- applicability ----------------------------------------------------------------

def refinement_ids(kb: KnowledgeBase) -> set[str]:
    """Plans referenced as a refinement anywhere; these are procedures,
    not stand-alone offerings."""
    out: set[str] = set()
    for plan in kb.plans.values():
        _collect_refinements(plan.steps, out)
    return out


def _collect_refinements(steps, out: set):
    for step in steps:
        if isinstance(step, ConditionalStep):
            _collect_refinements(step.then_steps, out)
            _collect_refinements(step.else_steps, out)
        elif step.refinement is not None:
            out.add(step.refinement)


def applicable_plans(device: str, kb: KnowledgeBase) -> list[str]:
    inst = kb.instances.get(device)
    if inst is None:
        raise UnknownIdError(f"unknown instance {device}")
    procedures = refinement_ids(kb)
    out = []
    for plan_id in sorted(kb.plans):
        if plan_id in procedures:
            continue
        plan = kb.plans[plan_id]
        target = kb.instances.get(plan.target_device)
        if target is None:
            continue
        if not kb.most_specific(target.derived_types) & inst.derived_types:
            continue
        if all(kb.ask(q) for q in plan.preconditions):
            out.append(plan_id)
    return out


# --- validation ------------------------------------------------------------------

def validate_plan(plan: Plan | str, kb: KnowledgeBase) -> list[Diagnostic]:
    try:
        plan = _resolve(plan, kb)
    except UnknownIdError as e:
        return [Diagnostic("error", "unknown-plan", str(e))]
    diags: list[Diagnostic] = []
    if plan.target_device not in kb.instances:
        diags.append(Diagnostic("error", "unknown-target",
                                f"target device {plan.target_device} is not a known instance"))
    if plan.location_info is not None and plan.location_info not in kb.instances:
        diags.append(Diagnostic("error", "unknown-location",
                                f"location {plan.location_info} is not a known instance"))
    for item in plan.replacement_items:
        if item not in kb.instances and item not in kb.concepts:
            diags.append(Diagnostic("error", "unknown-replacement",
                                    f"replacement item {item} is unknown"))
    for q in plan.preconditions:
        _check_query_diag(q, kb, plan.id, diags)
    if plan.goal is not None:
        _check_query_diag(plan.goal, kb, plan.id, diags)
    seen_cycle = _check_refinement_cycle(plan, kb, diags)
    if not seen_cycle:
        _validate_steps(plan.steps, plan.id, kb, diags)
    return diags


def _check_refinement_cycle(plan: Plan, kb: KnowledgeBase, diags: list) -> bool:
    try:
        expand_plan(plan, kb)
    except CycleError as e:
        diags.append(Diagnostic("error", "refinement-cycle", str(e)))
        return True
    except (UnknownIdError, KbError):
        pass  # reported per step below
    return False


def _validate_steps(steps, plan_id: str, kb: KnowledgeBase, diags: list):
    for step in steps:
        if isinstance(step, ConditionalStep):
            _check_query_diag(step.condition, kb, plan_id, diags)
            _check_condition_satisfiable(step.condition, kb, plan_id, diags)
            _validate_steps(step.then_steps, plan_id, kb, diags)
            _validate_steps(step.else_steps, plan_id, kb, diags)
            continue
        _validate_action(step, plan_id, kb, diags)


def _validate_action(action: PlanAction, plan_id: str, kb: KnowledgeBase, diags: list):
    where = f"plan {plan_id}, action {action.id}"
    for key, value in action.participants.items():
        if key == "attribute":
            role = kb.roles.get(value)
            if role is None:
                diags.append(Diagnostic("error", "unknown-role",
                                        f"{where}: attribute role {value} is unknown"))
            elif not (role.is_number or
                      (role.is_literal and role.range.type == "enum")):
                diags.append(Diagnostic("error", "bad-attribute-role",
                                        f"{where}: attribute role {value} must be number- or enum-ranged"))
            continue
        if isinstance(value, str) and is_placeholder(value):
            continue
        if value not in kb.instances:
            diags.append(Diagnostic("error", "unknown-participant",
                                    f"{where}: participant {key}={value} is not a known instance"))
    if action.category == "check-attribute" and "attribute" not in action.participants:
        diags.append(Diagnostic("error", "missing-attribute",
                                f"{where}: check-attribute requires an attribute participant"))
    for q in action.preconditions:
        _check_query_diag(q, kb, plan_id, diags)
    for post in action.postconditions:
        _validate_postcondition(post, where, kb, diags)
    if action.refinement is not None and action.refinement not in kb.plans:
        diags.append(Diagnostic("error", "unknown-refinement",
                                f"{where}: refinement {action.refinement} is unknown"))


def _validate_postcondition(post: Assertion, where: str, kb: KnowledgeBase, diags: list):
    if is_var(post.instance):
        diags.append(Diagnostic("error", "unground-postcondition",
                                f"{where}: postcondition instance {post.instance} is a variable"))
        return
    if isinstance(post, (TypeAssertion, RetractType)):
        if post.concept not in kb.concepts:
            diags.append(Diagnostic("error", "unknown-concept",
                                    f"{where}: postcondition concept {post.concept} is unknown"))
        return
    role = kb.roles.get(post.role)
    if role is None:
        diags.append(Diagnostic("error", "unknown-role",
                                f"{where}: postcondition role {post.role} is unknown"))
        return
    if is_var(post.value):
        diags.append(Diagnostic("error", "unground-postcondition",
                                f"{where}: postcondition value {post.value} is a variable"))
        return
    if isinstance(post.value, str) and is_placeholder(post.value):
        return  # resolved at expansion; range checked then
    if isinstance(post.instance, str) and is_placeholder(post.instance):
        return
    if role.is_literal:
        if not role.range.accepts(post.value):
            diags.append(Diagnostic("error", "range-violation",
                                    f"{where}: {post.value!r} outside the {role.range.type} range of {post.role}"))
    else:
        target = kb.instances.get(post.value)
        if target is None:
            diags.append(Diagnostic("error", "unknown-participant",
                                    f"{where}: postcondition filler {post.value} is not a known instance"))
        elif role.range not in target.derived_types:
            diags.append(Diagnostic("error", "range-violation",
                                    f"{where}: postcondition filler {post.value} is not a {role.range}"))


def _check_query_diag(query: Query, kb: KnowledgeBase, plan_id: str, diags: list):
    try:
        kb._check_query(query)
    except QueryError as e:
        diags.append(Diagnostic("error", "malformed-query", f"plan {plan_id}: {e}"))


def _check_condition_satisfiable(query: Query, kb: KnowledgeBase, plan_id: str,
                                 diags: list):
    """Primitive types are never derived, only asserted, so a ground type
    condition whose unfolded primitives the instance lacks cannot become
    true through ordinary state change.  Flag it."""
    for atom in query.atoms:
        if not isinstance(atom, TypeAtom) or is_var(atom.x) or is_placeholder(atom.x):
            continue
        inst = kb.instances.get(atom.x)
        if inst is None or atom.concept not in kb.concepts:
            continue
        prims, _ = kb._unfold(atom.concept)
        missing = prims - inst.derived_types
        if missing:
            diags.append(Diagnostic(
                "warning", "condition-unsatisfiable",
                f"plan {plan_id}: condition type {atom.concept} needs primitive "
                f"types {sorted(missing)} that {atom.x} cannot acquire by state change"))


# --- JSON codec --------------------------------------------------------------------

def plan_to_json(plan: Plan) -> dict:
    return {
        "id": plan.id,
        "target-device": plan.target_device,
        "goal": query_to_json(plan.goal) if plan.goal is not None else None,
        "preconditions": [query_to_json(q) for q in plan.preconditions],
        "replacement-items": list(plan.replacement_items),
        "location-info": plan.location_info,
        "steps": [_step_to_json(s) for s in plan.steps],
    }


def _step_to_json(step) -> dict:
    if isinstance(step, ConditionalStep):
        return {"step": "conditional",
                "condition": query_to_json(step.condition),
                "then": [_step_to_json(s) for s in step.then_steps],
                "else": [_step_to_json(s) for s in step.else_steps]}
    return {"step": "action", "id": step.id, "category": step.category,
            "process": step.process, "actor": step.actor,
            "participants": dict(step.participants),
            "preconditions": [query_to_json(q) for q in step.preconditions],
            "postconditions": [assertion_to_json(a) for a in step.postconditions],
            "refinement": step.refinement}


def plan_from_json(data, source: str = "<plan>") -> Plan:
    if not isinstance(data, dict) or "id" not in data:
        raise ParseError(f"{source}: plan must be an object with an id")
    where = f"{source}: plan {data['id']}"
    if "target-device" not in data:
        raise ParseError(f"{where}: missing field target-device")
    steps = data.get("steps")
    if not isinstance(steps, list) or not steps:
        raise ParseError(f"{where}: steps must be a non-empty array")
    goal = data.get("goal")
    try:
        return Plan(
            id=data["id"],
            target_device=data["target-device"],
            goal=query_from_json(goal, where) if goal else None,
            preconditions=tuple(query_from_json(q, where)
                                for q in data.get("preconditions", ())),
            replacement_items=tuple(data.get("replacement-items", ())),
            location_info=data.get("location-info"),
            steps=tuple(_step_from_json(s, where) for s in steps))
    except KbError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"{where}: {e}") from e


def _step_from_json(data, where: str):
    if not isinstance(data, dict):
        raise ParseError(f"{where}: step must be an object")
    kind = data.get("step")
    if kind == "conditional":
        then_steps = data.get("then", [])
        if not then_steps:
            raise ParseError(f"{where}: conditional step needs a non-empty then branch")
        return ConditionalStep(
            condition=query_from_json(data.get("condition"), where),
            then_steps=tuple(_step_from_json(s, where) for s in then_steps),
            else_steps=tuple(_step_from_json(s, where) for s in data.get("else", [])))
    if kind != "action":
        raise ParseError(f"{where}: unknown step kind {kind!r}")
    for key in ("id", "category", "process"):
        if key not in data:
            raise ParseError(f"{where}: action step missing field {key}")
    participants = data.get("participants", {})
    if not isinstance(participants, dict):
        raise ParseError(f"{where}: participants must be an object")
    return PlanAction(
        id=data["id"], category=data["category"], process=data["process"],
        actor=data.get("actor", DEFAULT_ACTOR),
        participants=dict(participants),
        preconditions=tuple(query_from_json(q, where)
                            for q in data.get("preconditions", ())),
        postconditions=tuple(assertion_from_json(a, where)
                             for a in data.get("postconditions", ())),
        refinement=data.get("refinement"))


def check_references(plan: Plan, kb: KnowledgeBase):
    """Load-time referential integrity; raises on dangling ids.
    Placeholder terms are exempt (resolved at expansion)."""
    if plan.target_device not in kb.instances:
        raise UnknownIdError(f"plan {plan.id}: unknown target device {plan.target_device}")
    if plan.location_info is not None and plan.location_info not in kb.instances:
        raise UnknownIdError(f"plan {plan.id}: unknown location {plan.location_info}")
    for item in plan.replacement_items:
        if item not in kb.instances and item not in kb.concepts:
            raise UnknownIdError(f"plan {plan.id}: unknown replacement item {item}")
    _check_step_references(plan.steps, plan, kb)


def _check_step_references(steps, plan: Plan, kb: KnowledgeBase):
    for step in steps:
        if isinstance(step, ConditionalStep):
            _check_step_references(step.then_steps, plan, kb)
            _check_step_references(step.else_steps, plan, kb)
            continue
        for key, value in step.participants.items():
            if key == "attribute":
                if value not in kb.roles:
                    raise UnknownIdError(
                        f"plan {plan.id}, action {step.id}: unknown attribute role {value}")
                continue
            if isinstance(value, str) and is_placeholder(value):
                continue
            if value not in kb.instances:
                raise UnknownIdError(
                    f"plan {plan.id}, action {step.id}: unknown participant {value}")
        if step.refinement is not None and step.refinement not in kb.plans:
            raise UnknownIdError(
                f"plan {plan.id}, action {step.id}: unknown refinement {step.refinement}")
        if step.process not in kb.concepts:
            raise UnknownIdError(
                f"plan {plan.id}, action {step.id}: unknown process concept {step.process}")
