"""Inflection machinery: closed per-language class tables with explicit
exception lists, loaded from JSON data.

A class declares which features select a form ("key"), how many trailing
characters the suffix replaces ("strip"), the suffix per feature key, and
full-form exceptions per lemma.  Irregulars (sein, être, avoir besoin)
live entirely in the exception lists.  Grammar-level closed tables
(determiners, pronouns, adjective endings, contractions) sit beside the
classes under "tables".
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..kb.model import KbError


class MorphologyGapError(KbError):
    def __init__(self, cls: str, features: str):
        super().__init__(f"morphology class {cls} has no form for {features}")
        self.cls = cls
        self.features = features


@dataclass(frozen=True)
class InflectionClass:
    id: str
    key: tuple  # ordered feature names selecting a form
    strip: int = 0
    forms: dict = field(default_factory=dict)  # feature key -> suffix
    exceptions: dict = field(default_factory=dict)  # lemma -> {feature key -> form}


class Morphology:
    def __init__(self, language: str, classes: dict, tables: dict):
        self.language = language
        self.classes = classes
        self.tables = tables

    @classmethod
    def load(cls, path: str | Path) -> "Morphology":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        classes = {}
        for cid, raw in data.get("classes", {}).items():
            classes[cid] = InflectionClass(
                id=cid,
                key=tuple(raw.get("key", ("form",))),
                strip=int(raw.get("strip", 0)),
                forms=raw.get("forms", {}),
                exceptions=raw.get("exceptions", {}))
        return cls(language=data["language"], classes=classes,
                   tables=data.get("tables", {}))

    def inflect(self, lemma: str, cls: str, features: dict) -> str:
        c = self.classes.get(cls)
        if c is None:
            raise MorphologyGapError(cls, "any")
        parts = []
        for name in c.key:
            if name not in features:
                raise MorphologyGapError(cls, f"missing feature {name}")
            parts.append(str(features[name]))
        key = ".".join(parts)
        exception = c.exceptions.get(lemma, {})
        if key in exception:
            return exception[key]
        if key not in c.forms:
            raise MorphologyGapError(cls, key)
        suffix = c.forms[key]
        stem = lemma[:len(lemma) - c.strip] if c.strip else lemma
        return stem + suffix

    def table(self, *path):
        node = self.tables
        for step in path:
            if not isinstance(node, dict) or step not in node:
                raise MorphologyGapError("tables", ".".join(str(p) for p in path))
            node = node[step]
        return node


def load_morphologies(directory: str | Path,
                      languages=("en", "de", "fr")) -> dict[str, Morphology]:
    directory = Path(directory)
    return {lang: Morphology.load(directory / f"morph-{lang}.json")
            for lang in languages}
