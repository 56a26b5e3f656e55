"""Multilingual maintenance-instruction generator.

Knowledge-based document generation: a frame KB describes devices and
maintenance plans; plan expansion or simulation yields a rhetorical
document structure that is realized in English, German, and French and
emitted as plain text, HTML, LaTeX, or annotated JSON.
"""
__version__ = "0.1.0"

from .pipeline import GenerationResult, Pipeline

__all__ = ["GenerationResult", "Pipeline", "__version__"]
