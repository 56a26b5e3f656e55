"""Knowledge base engine: taxonomy, classification, ASK/TELL, rules.

The logic is a deliberately small subset of a KL-ONE-style language:
conjunctions of atomic concepts plus value/filler/cardinality restrictions.
No negation, no disjunction, no role composition.  That keeps subsumption
structural and polynomial, which is all the maintenance domain needs.

Writes (define/create/tell) are single-writer; reads work on the current
state and are safe to run concurrently between writes.  The service layer
serializes writes with a lock.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

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
    EmittedEvent,
    FillerAssertion,
    FillerAtom,
    FillerChange,
    Instance,
    KbError,
    LiteralRange,
    Query,
    QueryError,
    RangeViolationError,
    RetractFiller,
    RetractFillerAction,
    RetractType,
    Role,
    Rule,
    RuleLoopError,
    StateDelta,
    TypeAssertion,
    TypeAtom,
    TypeChange,
    UnknownIdError,
    is_var,
)


@dataclass
class KbConfig:
    rule_round_cap: int = 1000


class KnowledgeBase:
    def __init__(self, config: KbConfig | None = None):
        self.config = config or KbConfig()
        self.concepts: dict[str, Concept] = {}
        self.roles: dict[str, Role] = {}
        self.instances: dict[str, Instance] = {}
        self.rules: dict[str, Rule] = {}
        self.plans: dict = {}  # populated by maintgen.plans via kb_io
        self._ancestor_cache: dict[str, frozenset[str]] = {}
        self._subsume_cache: dict[tuple[str, str], bool] = {}
        self.concepts[THING] = Concept(id=THING, parents=(), primitive=True)

    def copy(self) -> "KnowledgeBase":
        """Independent assertional state; terminology, rules and plans are
        immutable and shared."""
        out = KnowledgeBase(config=self.config)
        out.concepts = dict(self.concepts)
        out.roles = dict(self.roles)
        out.rules = dict(self.rules)
        out.plans = dict(self.plans)
        for iid, inst in self.instances.items():
            out.instances[iid] = Instance(
                id=inst.id,
                asserted_types=set(inst.asserted_types),
                fillers={role: list(values) for role, values in inst.fillers.items()},
                derived_types=set(inst.derived_types))
        return out

    # --- terminology ----------------------------------------------------

    def define_role(self, role: Role) -> str:
        if role.id in self.roles:
            raise DuplicateIdError(f"role {role.id} already defined")
        if role.domain not in self.concepts:
            raise UnknownIdError(f"role {role.id}: unknown domain concept {role.domain}")
        if not isinstance(role.range, LiteralRange) and role.range not in self.concepts:
            raise UnknownIdError(f"role {role.id}: unknown range concept {role.range}")
        self.roles[role.id] = role
        return role.id

    def define_concept(self, concept: Concept) -> str:
        if concept.id in self.concepts:
            raise DuplicateIdError(f"concept {concept.id} already defined")
        parents = concept.parents or (THING,)
        for p in parents:
            if p not in self.concepts:
                raise UnknownIdError(f"concept {concept.id}: unknown parent {p}")
        for r in concept.restrictions:
            role = self.roles.get(r.role)
            if role is None:
                raise UnknownIdError(f"concept {concept.id}: unknown role {r.role}")
            if r.kind == "all":
                if role.is_literal:
                    raise KbError(f"concept {concept.id}: value restriction on literal role {r.role}")
                if r.target not in self.concepts:
                    raise UnknownIdError(f"concept {concept.id}: unknown restriction target {r.target}")
        concept = replace(concept, parents=tuple(parents))
        # parents already exist and cannot point forward, so no cycle can
        # arise here; the check guards hand-built Concept graphs fed to
        # _install below.
        self.concepts[concept.id] = concept
        self._invalidate_taxonomy_caches()
        self._check_acyclic(concept.id)
        return concept.id

    def _check_acyclic(self, start: str):
        seen: set[str] = set()
        stack = [start]
        path = []
        while stack:
            c = stack.pop()
            if c == start and path:
                del self.concepts[start]
                self._invalidate_taxonomy_caches()
                raise CycleError(f"concept {start} introduces a parent cycle")
            if c in seen:
                continue
            seen.add(c)
            path.append(c)
            stack.extend(self.concepts[c].parents)

    def define_rule(self, rule: Rule) -> str:
        if rule.id in self.rules:
            raise DuplicateIdError(f"rule {rule.id} already defined")
        self._check_query(rule.condition)
        bound = rule.condition.variables()
        for action in rule.actions:
            for term in _action_terms(action):
                if is_var(term) and term not in bound:
                    raise KbError(f"rule {rule.id}: unbound variable {term} in action")
        self.rules[rule.id] = rule
        return rule.id

    def _invalidate_taxonomy_caches(self):
        self._ancestor_cache.clear()
        self._subsume_cache.clear()

    def ancestors(self, concept_id: str) -> frozenset[str]:
        """All concepts above concept_id, inclusive."""
        cached = self._ancestor_cache.get(concept_id)
        if cached is not None:
            return cached
        if concept_id not in self.concepts:
            raise UnknownIdError(f"unknown concept {concept_id}")
        out = {concept_id}
        for p in self.concepts[concept_id].parents:
            out |= self.ancestors(p)
        result = frozenset(out)
        self._ancestor_cache[concept_id] = result
        return result

    def _closure(self, concept_ids) -> set[str]:
        out: set[str] = set()
        for c in concept_ids:
            out |= self.ancestors(c)
        out.add(THING)
        return out

    # --- subsumption ------------------------------------------------------

    def subsumes(self, general: str, specific: str) -> bool:
        """True iff every instance of `specific` necessarily satisfies
        `general`: parent reachability plus restriction entailment."""
        if general not in self.concepts:
            raise UnknownIdError(f"unknown concept {general}")
        if specific not in self.concepts:
            raise UnknownIdError(f"unknown concept {specific}")
        return self._subsumes(general, specific)

    def _subsumes(self, general: str, specific: str) -> bool:
        if general == specific or general == THING:
            return True
        key = (general, specific)
        cached = self._subsume_cache.get(key)
        if cached is not None:
            return cached
        self._subsume_cache[key] = False  # guards restriction-target recursion
        g_prims, g_restr = self._unfold(general)
        s_prims, s_restr = self._unfold(specific)
        ok = g_prims <= s_prims and all(self._entails(r, s_restr) for r in g_restr)
        self._subsume_cache[key] = ok
        return ok

    def _unfold(self, concept_id: str):
        """Normal form of a definition: the primitive atoms above it and
        every restriction inherited along the parent graph."""
        prims = set()
        restrictions = []
        for c in sorted(self.ancestors(concept_id)):
            concept = self.concepts[c]
            if concept.primitive and c != THING:
                prims.add(c)
            restrictions.extend(concept.restrictions)
        return prims, restrictions

    def _entails(self, wanted, have: list) -> bool:
        if wanted.kind == "all":
            return any(h.kind == "all" and h.role == wanted.role
                       and self._subsumes(wanted.target, h.target)
                       for h in have)
        if wanted.kind == "filler":
            return any(h.kind == "filler" and h.role == wanted.role and h.value == wanted.value
                       for h in have)
        # cardinality: the specific side's merged interval must nest inside
        # the wanted one; required fillers also push the minimum up.
        mins = [h.min for h in have if h.kind == "card" and h.role == wanted.role]
        maxes = [h.max for h in have if h.kind == "card" and h.role == wanted.role
                 and h.max is not None]
        filler_count = len({h.value for h in have if h.kind == "filler" and h.role == wanted.role})
        eff_min = max(mins + [filler_count] + [0])
        if eff_min < wanted.min:
            return False
        if wanted.max is not None:
            if not maxes or min(maxes) > wanted.max:
                return False
        return True

    def most_specific(self, concept_ids) -> set[str]:
        """Minimal elements of a concept set under subsumption."""
        ids = set(concept_ids)
        out = set()
        for c in ids:
            strictly_below = any(
                d != c and self._subsumes(c, d) and not self._subsumes(d, c)
                for d in ids)
            if not strictly_below:
                out.add(c)
        return out

    # --- assertions -------------------------------------------------------

    def create_instance(self, instance_id: str, types, fillers: dict | None = None) -> str:
        if instance_id in self.instances:
            raise DuplicateIdError(f"instance {instance_id} already defined")
        types = list(types)
        for t in types:
            if t not in self.concepts:
                raise UnknownIdError(f"instance {instance_id}: unknown concept {t}")
        inst = Instance(id=instance_id, asserted_types=set(types))
        for role_id, values in (fillers or {}).items():
            if not isinstance(values, list):
                values = [values]
            for v in values:
                self._check_range(role_id, v, where=instance_id)
                inst.fillers.setdefault(role_id, []).append(v)
        self.instances[instance_id] = inst
        self._classify_into(inst)
        return instance_id

    def _check_range(self, role_id: str, value, where: str):
        role = self.roles.get(role_id)
        if role is None:
            raise UnknownIdError(f"{where}: unknown role {role_id}")
        if role.is_literal:
            if not role.range.accepts(value):
                raise RangeViolationError(
                    f"{where}: value {value!r} outside {role.range.type} range of {role_id}")
        else:
            target = self.instances.get(value)
            if target is None:
                raise UnknownIdError(f"{where}: filler {value} of {role_id} is not a known instance")
            if role.range not in target.derived_types:
                raise RangeViolationError(
                    f"{where}: filler {value} of {role_id} is not a {role.range}")

    # --- classification ---------------------------------------------------

    def _satisfies(self, inst: Instance, concept: Concept) -> bool:
        for p in concept.parents:
            if p not in inst.derived_types:
                return False
        for r in concept.restrictions:
            values = inst.fillers_of(r.role)
            if r.kind == "all":
                for v in values:
                    target = self.instances.get(v)
                    if target is None or r.target not in target.derived_types:
                        return False
            elif r.kind == "filler":
                if r.value not in values:
                    return False
            else:
                n = len(values)
                if n < r.min or (r.max is not None and n > r.max):
                    return False
        return True

    def _defined_concepts(self):
        return [c for c in self.concepts.values() if not c.primitive]

    def _classify_into(self, inst: Instance):
        """Recompute one instance's derived types against the current state
        of every other instance (enough at creation time, when nothing can
        refer to the new instance yet)."""
        inst.derived_types = self._closure(inst.asserted_types)
        defined = self._defined_concepts()
        changed = True
        while changed:
            changed = False
            for c in defined:
                if c.id not in inst.derived_types and self._satisfies(inst, c):
                    inst.derived_types |= self.ancestors(c.id)
                    changed = True

    def reclassify_all(self):
        """From-scratch classification of every instance, to fixpoint.
        Monotone (no negation), so order cannot change the result."""
        for inst in self.instances.values():
            inst.derived_types = self._closure(inst.asserted_types)
        defined = self._defined_concepts()
        changed = True
        while changed:
            changed = False
            for inst in self.instances.values():
                for c in defined:
                    if c.id not in inst.derived_types and self._satisfies(inst, c):
                        inst.derived_types |= self.ancestors(c.id)
                        changed = True

    def classify(self, instance_id: str) -> set[str]:
        """Recompute derived types from scratch; returns the most-specific
        concepts the instance falls under."""
        inst = self.instances.get(instance_id)
        if inst is None:
            raise UnknownIdError(f"unknown instance {instance_id}")
        self.reclassify_all()
        return self.most_specific(inst.derived_types)

    # --- ASK ----------------------------------------------------------------

    def _check_query(self, query: Query):
        for atom in query.atoms:
            if isinstance(atom, TypeAtom):
                if atom.concept not in self.concepts:
                    raise QueryError(f"unknown concept {atom.concept} in query")
            else:
                role = self.roles.get(atom.role)
                if role is None:
                    raise QueryError(f"unknown role {atom.role} in query")
                if isinstance(atom, CompareAtom):
                    if atom.op not in CompareAtom.OPS:
                        raise QueryError(f"unknown comparison {atom.op}")
                    if not role.is_number:
                        raise QueryError(
                            f"comparison on {atom.role} needs a number-ranged role")

    def ask(self, query: Query, bindings: dict | None = None):
        """Closed-world evaluation.  Ground query: boolean.  Open query:
        list of variable bindings, sorted by the bound values."""
        self._check_query(query)
        solutions = self._solve(list(query.atoms), dict(bindings or {}))
        if not query.variables() - set(bindings or {}):
            return bool(solutions)
        names = sorted(query.variables())
        unique = {tuple(str(s[n]) for n in names): s for s in solutions}
        return [unique[k] for k in sorted(unique)]

    def _solve(self, atoms, bindings: dict) -> list[dict]:
        if not atoms:
            return [bindings]
        atom, rest = atoms[0], atoms[1:]
        out = []
        for extended in self._match_atom(atom, bindings):
            out.extend(self._solve(rest, extended))
        return out

    def _match_atom(self, atom, bindings: dict):
        x = bindings.get(atom.x, atom.x) if is_var(atom.x) else atom.x
        if isinstance(atom, TypeAtom):
            if is_var(x):
                for iid in sorted(self.instances):
                    if atom.concept in self.instances[iid].derived_types:
                        yield {**bindings, x: iid}
            else:
                inst = self.instances.get(x)
                if inst and atom.concept in inst.derived_types:
                    yield bindings
            return
        if isinstance(atom, CompareAtom):
            candidates = sorted(self.instances) if is_var(x) else [x]
            for iid in candidates:
                inst = self.instances.get(iid)
                if inst is None:
                    continue
                if any(_compare(v, atom.op, atom.value) for v in inst.fillers_of(atom.role)
                       if isinstance(v, (int, float)) and not isinstance(v, bool)):
                    yield ({**bindings, x: iid} if is_var(x) else bindings)
            return
        # filler atom
        y = bindings.get(atom.y, atom.y) if is_var(atom.y) else atom.y
        candidates = sorted(self.instances) if is_var(x) else [x]
        for iid in candidates:
            inst = self.instances.get(iid)
            if inst is None:
                continue
            values = inst.fillers_of(atom.role)
            if is_var(y):
                for v in values:
                    key = v if isinstance(v, str) else v
                    yield {**bindings, x: iid, y: key} if is_var(x) else {**bindings, y: key}
            elif y in values:
                yield ({**bindings, x: iid} if is_var(x) else bindings)

    # --- TELL -----------------------------------------------------------------

    def tell(self, assertion: Assertion) -> StateDelta:
        """Apply one assertion, reclassify, and run rules to fixpoint.
        Returns the full delta; empty delta means the tell was a no-op."""
        delta = StateDelta()
        before = {iid: set(inst.derived_types) for iid, inst in self.instances.items()}
        changed = self._apply_assertion(assertion, delta)
        if changed:
            self.reclassify_all()
            self._run_rules(delta)
        self._record_derived_diff(before, delta)
        return delta

    def _apply_assertion(self, assertion: Assertion, delta: StateDelta) -> bool:
        if isinstance(assertion, TypeAssertion):
            inst = self._need_instance(assertion.instance)
            if assertion.concept not in self.concepts:
                raise UnknownIdError(f"unknown concept {assertion.concept}")
            if assertion.concept in inst.asserted_types:
                return False
            inst.asserted_types.add(assertion.concept)
            delta.type_gains.append(TypeChange(inst.id, assertion.concept, asserted=True))
            return True
        if isinstance(assertion, RetractType):
            inst = self._need_instance(assertion.instance)
            if assertion.concept not in inst.asserted_types:
                return False
            inst.asserted_types.discard(assertion.concept)
            delta.type_losses.append(TypeChange(inst.id, assertion.concept, asserted=True))
            return True
        if isinstance(assertion, FillerAssertion):
            inst = self._need_instance(assertion.instance)
            self._check_range(assertion.role, assertion.value, where=inst.id)
            values = inst.fillers.setdefault(assertion.role, [])
            if assertion.value in values:
                return False
            role = self.roles[assertion.role]
            old = None
            if role.functional and values:
                old = values[0]
                values.clear()
            values.append(assertion.value)
            delta.filler_changes.append(FillerChange(inst.id, assertion.role, old, assertion.value))
            return True
        if isinstance(assertion, RetractFiller):
            inst = self._need_instance(assertion.instance)
            values = inst.fillers.get(assertion.role, [])
            if assertion.value not in values:
                return False
            values.remove(assertion.value)
            if not values:
                inst.fillers.pop(assertion.role, None)
            delta.filler_changes.append(FillerChange(inst.id, assertion.role, assertion.value, None))
            return True
        raise KbError(f"unknown assertion {assertion!r}")

    def _need_instance(self, instance_id: str) -> Instance:
        inst = self.instances.get(instance_id)
        if inst is None:
            raise UnknownIdError(f"unknown instance {instance_id}")
        return inst

    def run_rules(self) -> StateDelta:
        """Run the rule engine to fixpoint against the current state, as
        a tell would, and return the delta.  Loading calls this so fixture
        states that already satisfy rule bodies start at the fixpoint."""
        delta = StateDelta()
        before = {iid: set(inst.derived_types) for iid, inst in self.instances.items()}
        self._run_rules(delta)
        self._record_derived_diff(before, delta)
        return delta

    def _run_rules(self, delta: StateDelta):
        """Forward chaining in definition order; every round re-scans all
        rules; stops when a full round fires nothing.  A round cap turns
        rule loops into an error instead of a hang."""
        emitted: set = set()
        rounds = 0
        while True:
            fired = False
            for rule in self.rules.values():
                for binding in self._solve(list(rule.condition.atoms), {}):
                    key = tuple(sorted((k, str(v)) for k, v in binding.items()))
                    if self._apply_rule_actions(rule, binding, delta, emitted, key):
                        delta.fired_rules.append(rule.id)
                        fired = True
            rounds += 1
            if not fired:
                return
            if rounds >= self.config.rule_round_cap:
                raise RuleLoopError(
                    f"rules did not reach a fixpoint within {self.config.rule_round_cap} rounds")

    def _apply_rule_actions(self, rule: Rule, binding, delta, emitted, binding_key) -> bool:
        changed = False
        for action in rule.actions:
            if isinstance(action, EmitEventAction):
                key = (rule.id, action.event, binding_key)
                if key not in emitted:
                    emitted.add(key)
                    args = tuple((k, binding.get(v, v) if is_var(v) else v)
                                 for k, v in action.args)
                    delta.events.append(EmittedEvent(rule.id, action.event, args))
                    changed = True
                continue
            x = binding.get(action.x, action.x)
            if isinstance(action, AssertTypeAction):
                sub = TypeAssertion(x, action.concept)
            elif isinstance(action, AssertFillerAction):
                value = binding.get(action.value, action.value) if is_var(action.value) else action.value
                sub = FillerAssertion(x, action.role, value)
            elif isinstance(action, RetractFillerAction):
                value = binding.get(action.value, action.value) if is_var(action.value) else action.value
                sub = RetractFiller(x, action.role, value)
            else:
                raise KbError(f"unknown rule action {action!r}")
            if self._apply_assertion(sub, delta):
                changed = True
        if changed:
            self.reclassify_all()
        return changed

    def _record_derived_diff(self, before: dict[str, set[str]], delta: StateDelta):
        asserted_gains = {(t.instance, t.concept) for t in delta.type_gains}
        asserted_losses = {(t.instance, t.concept) for t in delta.type_losses}
        for iid, inst in self.instances.items():
            prev = before.get(iid, set())
            for c in sorted(inst.derived_types - prev):
                if (iid, c) not in asserted_gains:
                    delta.type_gains.append(TypeChange(iid, c))
            for c in sorted(prev - inst.derived_types):
                if (iid, c) not in asserted_losses:
                    delta.type_losses.append(TypeChange(iid, c))

    # --- delta replay -------------------------------------------------------

    def apply_delta(self, delta: StateDelta):
        """Replay a delta's direct effects (fillers plus asserted types) and
        reclassify; yields the post-state the delta was recorded from."""
        for fc in delta.filler_changes:
            inst = self._need_instance(fc.instance)
            values = inst.fillers.setdefault(fc.role, [])
            if fc.old is not None and fc.old in values:
                values.remove(fc.old)
            if fc.new is not None and fc.new not in values:
                values.append(fc.new)
            if not values:
                inst.fillers.pop(fc.role, None)
        for tc in delta.type_gains:
            if tc.asserted:
                self._need_instance(tc.instance).asserted_types.add(tc.concept)
        for tc in delta.type_losses:
            if tc.asserted:
                self._need_instance(tc.instance).asserted_types.discard(tc.concept)
        self.reclassify_all()

    def undo_delta(self, delta: StateDelta):
        """Inverse replay, restoring the pre-tell snapshot."""
        for fc in reversed(delta.filler_changes):
            inst = self._need_instance(fc.instance)
            values = inst.fillers.setdefault(fc.role, [])
            if fc.new is not None and fc.new in values:
                values.remove(fc.new)
            if fc.old is not None and fc.old not in values:
                values.append(fc.old)
            if not values:
                inst.fillers.pop(fc.role, None)
        for tc in delta.type_gains:
            if tc.asserted:
                self._need_instance(tc.instance).asserted_types.discard(tc.concept)
        for tc in delta.type_losses:
            if tc.asserted:
                self._need_instance(tc.instance).asserted_types.add(tc.concept)
        self.reclassify_all()


def _compare(value, op: str, rhs) -> bool:
    if op == "=":
        return value == rhs
    if op == "!=":
        return value != rhs
    if op == "<":
        return value < rhs
    if op == "<=":
        return value <= rhs
    if op == ">":
        return value > rhs
    return value >= rhs


def _action_terms(action):
    if isinstance(action, EmitEventAction):
        return [v for _, v in action.args]
    terms = [action.x]
    if isinstance(action, (AssertFillerAction, RetractFillerAction)):
        terms.append(action.value)
    return terms
