"""Plan simulation: check preconditions with ASK, apply postconditions with
TELL, and record a trace of deltas, rule firings and skipped branches.

Simulation works on a copy of the KB unless live=True.  The walk stops at
the first blocked action.  A refined step gates its whole subtree on its
own preconditions; its postconditions, if any, are told after its children
complete and appear as one trace entry under the parent action's id.

The trace keeps a resolved copy of the expanded step tree in which each
conditional carries its evaluation result and the branch that was taken;
the document planner builds the trace-driven document from that tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .kb.core import KnowledgeBase, _compare
from .kb.io import query_to_json
from .kb.model import (
    CompareAtom,
    FillerAtom,
    Query,
    RangeViolationError,
    StateDelta,
    is_var,
)
from .plans import (
    ExpandedConditional,
    ExpandedPlan,
    ExpandedRefined,
    ExpandedStep,
    PlanAction,
    Plan,
    _collect_leaves,
    expand_plan,
)

EXECUTED = "executed"
SKIPPED = "skipped-by-condition"
BLOCKED = "blocked"


@dataclass(frozen=True)
class TraceEntry:
    action: str
    precondition_results: tuple
    delta: StateDelta
    status: str

    @property
    def fired_rules(self) -> list[str]:
        return list(self.delta.fired_rules)


@dataclass(frozen=True)
class ResolvedConditional:
    condition: Query
    result: bool
    steps: tuple  # the taken branch, already resolved


@dataclass
class Trace:
    plan: str
    entries: list[TraceEntry] = field(default_factory=list)
    resolved_steps: tuple = ()
    blocked: bool = False


def check_preconditions(action: PlanAction, kb: KnowledgeBase) -> list:
    """One (query, truth) pair per precondition; open queries count as true
    when they have at least one binding.  No mutation."""
    return [(q, bool(kb.ask(q))) for q in action.preconditions]


def execute_action(action: PlanAction, kb: KnowledgeBase) -> TraceEntry:
    results = check_preconditions(action, kb)
    if not all(ok for _, ok in results):
        return TraceEntry(action.id, tuple(results), StateDelta(), BLOCKED)
    delta = _tell_all(action.postconditions, kb)
    return TraceEntry(action.id, tuple(results), delta, EXECUTED)


def _tell_all(postconditions, kb: KnowledgeBase) -> StateDelta:
    """Tell each postcondition; on a range violation undo the ones already
    applied so the action is all-or-nothing."""
    applied: list[StateDelta] = []
    try:
        for post in postconditions:
            applied.append(kb.tell(post))
    except RangeViolationError:
        for d in reversed(applied):
            kb.undo_delta(d)
        raise
    return merge_deltas(applied)


def merge_deltas(deltas) -> StateDelta:
    out = StateDelta()
    for d in deltas:
        out.type_gains.extend(d.type_gains)
        out.type_losses.extend(d.type_losses)
        out.filler_changes.extend(d.filler_changes)
        out.fired_rules.extend(d.fired_rules)
        out.events.extend(d.events)
    return out


def simulate(plan: Plan | str, kb: KnowledgeBase, live: bool = False) -> Trace:
    expanded = expand_plan(plan, kb)
    work = kb if live else kb.copy()
    trace = Trace(plan=expanded.plan)
    resolved, blocked = _walk(expanded.steps, work, trace.entries)
    trace.resolved_steps = tuple(resolved)
    trace.blocked = blocked
    return trace


def _walk(steps, kb: KnowledgeBase, entries: list) -> tuple[list, bool]:
    resolved = []
    for step in steps:
        if isinstance(step, ExpandedStep):
            entry = execute_action(step.action, kb)
            entries.append(entry)
            if entry.status == BLOCKED:
                return resolved, True
            resolved.append(step)
            continue
        if isinstance(step, ExpandedRefined):
            results = check_preconditions(step.action, kb)
            if not all(ok for _, ok in results):
                entries.append(TraceEntry(step.action.id, tuple(results),
                                          StateDelta(), BLOCKED))
                return resolved, True
            children, blocked = _walk(step.children, kb, entries)
            if blocked:
                return resolved, True
            node = ExpandedRefined(action=step.action, plan=step.plan,
                                   children=tuple(children))
            if step.action.postconditions:
                delta = _tell_all(step.action.postconditions, kb)
                entries.append(TraceEntry(step.action.id, tuple(results),
                                          delta, EXECUTED))
            resolved.append(node)
            continue
        # conditional: evaluated against the state reached so far
        result = bool(kb.ask(step.condition))
        taken = step.then_steps if result else step.else_steps
        skipped = step.else_steps if result else step.then_steps
        _mark_skipped(skipped, entries)
        branch, blocked = _walk(taken, kb, entries)
        resolved.append(ResolvedConditional(condition=step.condition,
                                            result=result,
                                            steps=tuple(branch)))
        if blocked:
            return resolved, True
    return resolved, False


def _mark_skipped(steps, entries: list):
    leaves: list[PlanAction] = []
    _collect_leaves(steps, leaves)
    for action in leaves:
        entries.append(TraceEntry(action.id, (), StateDelta(), SKIPPED))


# --- state-filtered expansion ---------------------------------------------------

def filter_relevant_steps(plan: Plan | str, kb: KnowledgeBase) -> ExpandedPlan:
    """Prune conditionals that current data decides.  A condition is pruned
    as false only when the relevant roles hold fillers that falsify it;
    with no data the conditional stays in the document as an "if" step.  A
    condition already true inlines its branch unconditionally."""
    expanded = expand_plan(plan, kb)
    return ExpandedPlan(plan=expanded.plan, target_device=expanded.target_device,
                        steps=tuple(_filter_steps(expanded.steps, kb)),
                        goal=expanded.goal,
                        replacement_items=expanded.replacement_items,
                        location_info=expanded.location_info)


def _filter_steps(steps, kb: KnowledgeBase) -> list:
    out = []
    for step in steps:
        if isinstance(step, ExpandedStep):
            out.append(step)
        elif isinstance(step, ExpandedRefined):
            out.append(ExpandedRefined(action=step.action, plan=step.plan,
                                       children=tuple(_filter_steps(step.children, kb))))
        else:
            status = condition_status(step.condition, kb)
            if status == "true":
                out.extend(_filter_steps(step.then_steps, kb))
            elif status == "false":
                out.extend(_filter_steps(step.else_steps, kb))
            else:
                out.append(ExpandedConditional(
                    condition=step.condition,
                    then_steps=tuple(_filter_steps(step.then_steps, kb)),
                    else_steps=tuple(_filter_steps(step.else_steps, kb))))
    return out


def condition_status(query: Query, kb: KnowledgeBase) -> str:
    """'true', 'false', or 'unknown'.  False requires falsifying data, not
    mere closed-world absence."""
    if bool(kb.ask(query)):
        return "true"
    for atom in query.atoms:
        if _atom_false_with_data(atom, kb):
            return "false"
    return "unknown"


def _atom_false_with_data(atom, kb: KnowledgeBase) -> bool:
    if is_var(atom.x):
        return False
    inst = kb.instances.get(atom.x)
    if inst is None:
        return False
    if isinstance(atom, FillerAtom):
        if is_var(atom.y):
            return False
        values = inst.fillers_of(atom.role)
        return bool(values) and atom.y not in values
    if isinstance(atom, CompareAtom):
        values = [v for v in inst.fillers_of(atom.role)
                  if isinstance(v, (int, float)) and not isinstance(v, bool)]
        if not values:
            return False
        return not any(_compare(v, atom.op, atom.value) for v in values)
    # type atom: false-with-data when the concept is not derived although
    # every role its definition mentions has at least one filler
    if atom.concept in inst.derived_types:
        return False
    concept = kb.concepts.get(atom.concept)
    if concept is None:
        return False
    _, restrictions = kb._unfold(atom.concept)
    roles = {r.role for r in restrictions}
    if not roles:
        return False
    return all(inst.fillers_of(role) for role in roles)


# --- serialization -----------------------------------------------------------------

def trace_to_json(trace: Trace) -> dict:
    return {
        "plan": trace.plan,
        "blocked": trace.blocked,
        "entries": [
            {
                "action": e.action,
                "status": e.status,
                "preconditions": [
                    {"query": query_to_json(q), "holds": ok}
                    for q, ok in e.precondition_results
                ],
                "fired-rules": e.fired_rules,
                "delta": delta_to_json(e.delta),
            }
            for e in trace.entries
        ],
    }


def delta_to_json(delta: StateDelta) -> dict:
    return {
        "type-gains": [{"instance": t.instance, "concept": t.concept,
                        "asserted": t.asserted} for t in delta.type_gains],
        "type-losses": [{"instance": t.instance, "concept": t.concept,
                         "asserted": t.asserted} for t in delta.type_losses],
        "filler-changes": [{"instance": f.instance, "role": f.role,
                            "old": f.old, "new": f.new}
                           for f in delta.filler_changes],
        "events": [{"rule": e.rule, "event": e.event, "args": dict(e.args)}
                   for e in delta.events],
    }
