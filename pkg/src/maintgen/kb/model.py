"""Data model for the frame-based knowledge base.

Terminological side: concepts arranged in an acyclic parent graph, each
optionally constrained by role restrictions.  Assertional side: instances
with asserted types and role fillers; derived types are maintained by the
classifier in core.py.
"""
from __future__ import annotations

from dataclasses import dataclass, field

THING = "THING"

LITERAL_TYPES = ("number", "string", "boolean", "enum")

RESTRICTION_KINDS = ("all", "filler", "card")


class KbError(Exception):
    """Base class for knowledge-base errors."""


class DuplicateIdError(KbError):
    pass


class UnknownIdError(KbError):
    pass


class CycleError(KbError):
    pass


class RangeViolationError(KbError):
    pass


class QueryError(KbError):
    pass


class RuleLoopError(KbError):
    pass


@dataclass(frozen=True)
class LiteralRange:
    """Literal-valued role range: number, string, boolean, or a closed enum."""

    type: str
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.type not in LITERAL_TYPES:
            raise KbError(f"unknown literal type {self.type!r}")
        if self.type == "enum" and not self.values:
            raise KbError("enum range needs at least one value")

    def accepts(self, value) -> bool:
        if self.type == "number":
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        if self.type == "string":
            return isinstance(value, str)
        if self.type == "boolean":
            return isinstance(value, bool)
        return isinstance(value, str) and value in self.values


@dataclass(frozen=True)
class Role:
    id: str
    domain: str
    range: str | LiteralRange
    functional: bool = False

    @property
    def is_literal(self) -> bool:
        return isinstance(self.range, LiteralRange)

    @property
    def is_number(self) -> bool:
        return self.is_literal and self.range.type == "number"


@dataclass(frozen=True)
class Restriction:
    """One role restriction: a value restriction ("all"), a required filler,
    or a cardinality interval (max=None means unbounded)."""

    role: str
    kind: str
    target: str | None = None
    value: object = None
    min: int = 0
    max: int | None = None

    def __post_init__(self):
        if self.kind not in RESTRICTION_KINDS:
            raise KbError(f"unknown restriction kind {self.kind!r}")
        if self.kind == "card":
            if self.min < 0 or (self.max is not None and self.max < self.min):
                raise KbError(f"bad cardinality [{self.min}, {self.max}] on {self.role}")
        if self.kind == "all" and not self.target:
            raise KbError(f"value restriction on {self.role} needs a target concept")


@dataclass(frozen=True)
class Concept:
    """Primitive concepts are only entered by assertion; defined concepts are
    recognized automatically whenever parents and restrictions hold."""

    id: str
    parents: tuple[str, ...] = ()
    restrictions: tuple[Restriction, ...] = ()
    primitive: bool = True


@dataclass
class Instance:
    id: str
    asserted_types: set[str] = field(default_factory=set)
    fillers: dict[str, list] = field(default_factory=dict)
    derived_types: set[str] = field(default_factory=set)

    def fillers_of(self, role: str) -> list:
        return self.fillers.get(role, [])


# --- queries -----------------------------------------------------------

def is_var(term) -> bool:
    return isinstance(term, str) and term.startswith("?")


def is_placeholder(term) -> bool:
    return isinstance(term, str) and term.startswith("$")


@dataclass(frozen=True)
class TypeAtom:
    x: str
    concept: str


@dataclass(frozen=True)
class FillerAtom:
    x: str
    role: str
    y: object


@dataclass(frozen=True)
class CompareAtom:
    x: str
    role: str
    op: str
    value: float

    OPS = ("=", "!=", "<", "<=", ">", ">=")


Atom = TypeAtom | FillerAtom | CompareAtom


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise QueryError("query must have at least one atom")

    def variables(self) -> set[str]:
        out = set()
        for a in self.atoms:
            if is_var(a.x):
                out.add(a.x)
            if isinstance(a, FillerAtom) and is_var(a.y):
                out.add(a.y)
        return out


# --- assertions (the TELL vocabulary) ----------------------------------

@dataclass(frozen=True)
class TypeAssertion:
    instance: str
    concept: str


@dataclass(frozen=True)
class FillerAssertion:
    instance: str
    role: str
    value: object


@dataclass(frozen=True)
class RetractType:
    instance: str
    concept: str


@dataclass(frozen=True)
class RetractFiller:
    instance: str
    role: str
    value: object


Assertion = TypeAssertion | FillerAssertion | RetractType | RetractFiller


# --- rules --------------------------------------------------------------

@dataclass(frozen=True)
class AssertFillerAction:
    x: str
    role: str
    value: object


@dataclass(frozen=True)
class AssertTypeAction:
    x: str
    concept: str


@dataclass(frozen=True)
class RetractFillerAction:
    x: str
    role: str
    value: object


@dataclass(frozen=True)
class EmitEventAction:
    event: str
    args: tuple[tuple[str, object], ...] = ()


RuleAction = AssertFillerAction | AssertTypeAction | RetractFillerAction | EmitEventAction


@dataclass(frozen=True)
class Rule:
    id: str
    condition: Query
    actions: tuple[RuleAction, ...]


# --- state deltas -------------------------------------------------------

@dataclass(frozen=True)
class TypeChange:
    instance: str
    concept: str
    asserted: bool = False


@dataclass(frozen=True)
class FillerChange:
    instance: str
    role: str
    old: object
    new: object


@dataclass(frozen=True)
class EmittedEvent:
    rule: str
    event: str
    args: tuple[tuple[str, object], ...] = ()


@dataclass
class StateDelta:
    """Everything one tell changed: direct effects, rule effects, and the
    resulting derived-type differences."""

    type_gains: list[TypeChange] = field(default_factory=list)
    type_losses: list[TypeChange] = field(default_factory=list)
    filler_changes: list[FillerChange] = field(default_factory=list)
    fired_rules: list[str] = field(default_factory=list)
    events: list[EmittedEvent] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.type_gains or self.type_losses or self.filler_changes
                    or self.fired_rules or self.events)
