"""Concept-keyed trilingual lexicon, loaded from JSON data.

Entries are keyed by KB concept id, with instance-id entries as overrides
(a specific spark plug can carry the modifier "new" while the concept
entry stays plain).  Every entry bundles one LanguageEntry per language:
lemma, inflection class, gender where the language needs it, separable
particle, subcategorized prepositions per semantic role, and for state
concepts a fixed value phrase.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..kb.core import KnowledgeBase
from ..kb.model import KbError

LANGUAGES = ("en", "de", "fr")
TEMPLATES = ("action", "need", "locate", "be-value")


class LexicalGapError(KbError):
    def __init__(self, key: str, language: str):
        super().__init__(f"no {language} lexicon entry covers {key}")
        self.key = key
        self.language = language


@dataclass(frozen=True)
class LanguageEntry:
    lemma: str
    pos: str  # noun | verb | value
    cls: str | None = None
    gender: str | None = None  # m | f | n (de, fr)
    particle: str | None = None
    phrase: str | None = None  # fixed surface for pos=value
    modifier: str | None = None
    modifier_position: str = "pre"  # pre | post
    reflexive: bool = False
    preps: dict = field(default_factory=dict)  # semantic role -> {prep, case}


@dataclass(frozen=True)
class LexiconEntry:
    key: str
    template: str | None  # action | need | locate | be-value (processes only)
    languages: dict


class Lexicon:
    def __init__(self, entries: dict, headings: dict):
        self.entries = entries
        self.headings = headings

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = {}
        for key, raw in data.get("entries", {}).items():
            languages = {}
            for lang in LANGUAGES:
                if lang not in raw:
                    continue
                e = raw[lang]
                languages[lang] = LanguageEntry(
                    lemma=e["lemma"] if "lemma" in e else e.get("phrase", ""),
                    pos=e.get("pos", "noun"),
                    cls=e.get("class"),
                    gender=e.get("gender"),
                    particle=e.get("particle"),
                    phrase=e.get("phrase"),
                    modifier=e.get("modifier"),
                    modifier_position=e.get("modifier_position", "pre"),
                    reflexive=bool(e.get("reflexive", False)),
                    preps=e.get("preps", {}))
            template = raw.get("template")
            if template is not None and template not in TEMPLATES:
                raise KbError(f"lexicon entry {key}: unknown template {template}")
            entries[key] = LexiconEntry(key=key, template=template,
                                        languages=languages)
        return cls(entries=entries, headings=data.get("headings", {}))

    def entry(self, key: str, language: str) -> LanguageEntry:
        e = self.entries.get(key)
        if e is None or language not in e.languages:
            raise LexicalGapError(key, language)
        return e.languages[language]

    def template(self, key: str) -> str:
        e = self.entries.get(key)
        if e is None or e.template is None:
            raise KbError(f"lexicon entry {key} names no template")
        return e.template

    def has(self, key: str, language: str, pos: str | None = None) -> bool:
        e = self.entries.get(key)
        if e is None or language not in e.languages:
            return False
        return pos is None or e.languages[language].pos == pos

    def key_for_referent(self, referent: str, kb: KnowledgeBase,
                         language: str, pos: str | None = "noun") -> str:
        """Instance-id override first, then the taxonomy upward from the
        instance's most specific concepts, breadth-first.  Only entries
        of the requested part of speech count: an instance whose derived
        types include a state concept (its entry is a value phrase) must
        still lexicalize as a noun."""
        for key in self.candidate_keys(referent, kb):
            if self.has(key, language, pos):
                return key
        raise LexicalGapError(referent, language)

    def candidate_keys(self, referent: str, kb: KnowledgeBase) -> list[str]:
        keys = [referent]
        inst = kb.instances.get(referent)
        if inst is None:
            return keys
        layer = sorted(kb.most_specific(inst.derived_types))
        seen = set(layer)
        while layer:
            keys.extend(layer)
            parents = []
            for c in layer:
                for p in kb.concepts[c].parents:
                    if p not in seen:
                        seen.add(p)
                        parents.append(p)
            layer = sorted(parents)
        return keys

    def heading(self, key: str, language: str) -> str:
        """Heading text for a plan id.  Falls back to the raw id so draft
        plans preview before anyone writes lexicon entries for them; the
        coverage report still lists the gap."""
        texts = self.headings.get(key)
        if not texts or language not in texts:
            return key
        return texts[language]


def coverage_report(lexicon: Lexicon, kb: KnowledgeBase,
                    languages=LANGUAGES) -> list[tuple[str, list[str]]]:
    """(key, missing languages) for everything the KB's plans need;
    empty iff all plans realize in all requested languages."""
    from .. import plans as plan_mod
    from ..document import LOCATE_PROCESS, NEED_PROCESS

    needed_concepts: set[str] = set()
    needed_referents: set[str] = set()
    needed_headings: set[str] = set()
    procedures = plan_mod.refinement_ids(kb)
    for plan_id, plan in kb.plans.items():
        if plan_id not in procedures:
            needed_headings.add(plan_id)
        if plan.location_info is not None:
            needed_concepts.add(LOCATE_PROCESS)
            needed_referents.add(plan.location_info)
        if plan.replacement_items:
            needed_concepts.add(NEED_PROCESS)
            needed_referents.update(plan.replacement_items)
        _collect_needs(plan.steps, kb, needed_concepts, needed_referents)

    out = []
    for key in sorted(needed_concepts):
        missing = [lang for lang in languages if not lexicon.has(key, lang)]
        if missing:
            out.append((key, missing))
    for referent in sorted(needed_referents):
        missing = []
        for lang in languages:
            try:
                lexicon.key_for_referent(referent, kb, lang)
            except LexicalGapError:
                missing.append(lang)
        if missing:
            out.append((referent, missing))
    for key in sorted(needed_headings):
        missing = [lang for lang in languages
                   if not (lexicon.headings.get(key) or {}).get(lang)]
        if missing:
            out.append((f"heading:{key}", missing))
    return out


def _collect_needs(steps, kb: KnowledgeBase, concepts: set, referents: set):
    from .. import plans as plan_mod
    from ..document import _state_concept_for
    from ..kb.model import FillerAtom, TypeAtom

    for step in steps:
        if isinstance(step, plan_mod.ConditionalStep):
            for atom in step.condition.atoms:
                if isinstance(atom, TypeAtom):
                    concepts.add(atom.concept)
                    referents.add(atom.x)
                elif isinstance(atom, FillerAtom):
                    try:
                        concepts.add(_state_concept_for(atom.role, atom.y, kb))
                    except KbError:
                        pass  # documented at build time instead
                    referents.add(atom.x)
            _collect_needs(step.then_steps, kb, concepts, referents)
            _collect_needs(step.else_steps, kb, concepts, referents)
            continue
        concepts.add(step.process)
        for key, value in step.participants.items():
            if key == "attribute" or (isinstance(value, str) and value.startswith("$")):
                continue
            referents.add(value)
        if step.refinement is not None and step.refinement in kb.plans:
            sub = kb.plans[step.refinement]
            bound = {k: v for k, v in step.participants.items()}
            _collect_refined_needs(sub.steps, bound, kb, concepts, referents)


def _collect_refined_needs(steps, binding: dict, kb, concepts: set, referents: set):
    from .. import plans as plan_mod

    for step in steps:
        if isinstance(step, plan_mod.ConditionalStep):
            _collect_refined_needs(step.then_steps, binding, kb, concepts, referents)
            _collect_refined_needs(step.else_steps, binding, kb, concepts, referents)
            continue
        concepts.add(step.process)
        for key, value in step.participants.items():
            if key == "attribute":
                continue
            if isinstance(value, str) and value.startswith("$"):
                value = binding.get(value[1:])
                if value is None or value.startswith("$"):
                    continue
            referents.add(value)
        if step.refinement is not None and step.refinement in kb.plans:
            sub = kb.plans[step.refinement]
            _collect_refined_needs(sub.steps, dict(step.participants), kb,
                                   concepts, referents)
