from .lexicon import (
    LanguageEntry,
    LexicalGapError,
    Lexicon,
    LexiconEntry,
    LANGUAGES,
    coverage_report,
)
from .morphology import InflectionClass, Morphology, MorphologyGapError, load_morphologies
from .realizer import (
    AnnotatedSentence,
    Piece,
    Realizer,
    RenderedItem,
    Token,
    sentence_to_json,
)

__all__ = [
    "AnnotatedSentence",
    "InflectionClass",
    "LANGUAGES",
    "LanguageEntry",
    "LexicalGapError",
    "Lexicon",
    "LexiconEntry",
    "Morphology",
    "MorphologyGapError",
    "Piece",
    "Realizer",
    "RenderedItem",
    "Token",
    "coverage_report",
    "load_morphologies",
    "sentence_to_json",
]
