"""Frame-based knowledge base: taxonomy, instances, ASK/TELL, rules."""
from .core import KbConfig, KnowledgeBase
from .io import (
    ParseError,
    assertion_from_json,
    assertion_to_json,
    atom_from_json,
    atom_to_json,
    load_kb,
    load_kb_files,
    merge_documents,
    query_from_json,
    query_to_json,
    save_kb,
    snapshot,
)
from .model import (
    THING,
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
    Restriction,
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
    is_placeholder,
    is_var,
)

__all__ = [
    "THING",
    "AssertFillerAction",
    "AssertTypeAction",
    "CompareAtom",
    "Concept",
    "CycleError",
    "DuplicateIdError",
    "EmitEventAction",
    "EmittedEvent",
    "FillerAssertion",
    "FillerAtom",
    "FillerChange",
    "Instance",
    "KbConfig",
    "KbError",
    "KnowledgeBase",
    "LiteralRange",
    "ParseError",
    "Query",
    "QueryError",
    "RangeViolationError",
    "Restriction",
    "RetractFiller",
    "RetractFillerAction",
    "RetractType",
    "Role",
    "Rule",
    "RuleLoopError",
    "StateDelta",
    "TypeAssertion",
    "TypeAtom",
    "TypeChange",
    "UnknownIdError",
    "assertion_from_json",
    "assertion_to_json",
    "atom_from_json",
    "atom_to_json",
    "is_placeholder",
    "is_var",
    "load_kb",
    "load_kb_files",
    "merge_documents",
    "query_from_json",
    "query_to_json",
    "save_kb",
    "snapshot",
]
