"""Document emission and cross-language alignment.

The annotated JSON document is the canonical artifact: it records every
rendered item together with token spans, KB links and sentence-plan
ids.  The plain, HTML and LaTeX formats are pure projections of the
same item stream, so re-rendering the plain projection from an
annotated document reproduces the plain emission byte for byte.
"""
from __future__ import annotations

import html as html_lib
import json
import textwrap
from dataclasses import dataclass

from .kb.model import KbError
from .realize.realizer import RenderedItem, sentence_to_json

FORMATS = ("plain", "html", "latex", "annotated-json")
FORMAT_VERSION = 1
WRAP_COLUMNS = 72

# latex characters that must not appear raw in body text
LATEX_ESCAPES = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}


class EmitError(KbError):
    pass


@dataclass(frozen=True)
class Document:
    language: str
    format: str
    body: bytes
    span_index: tuple = ()

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")


@dataclass(frozen=True)
class AlignmentMap:
    digest: str
    languages: tuple
    # plan id -> language -> list of (item, start, end)
    plans: dict
    # kb id -> language -> list of (item, start, end)
    referents: dict


def emit(items: list, format: str, language: str, plan: str = "",
         digest: str = "") -> Document:
    if format not in FORMATS:
        raise EmitError(f"unknown format {format!r}")
    if format == "annotated-json":
        return _emit_annotated(items, language, plan, digest)
    if format == "plain":
        body = _plain_text(_item_views(items))
        return Document(language=language, format=format,
                        body=body.encode("utf-8"))
    if format == "html":
        return _emit_html(items, language, plan)
    return _emit_latex(items, language)


# --- shared plain projection ------------------------------------------------

@dataclass(frozen=True)
class _ItemView:
    kind: str
    text: str = ""


def _item_views(items: list) -> list:
    views = []
    for item in items:
        if isinstance(item, RenderedItem):
            text = item.sentence.text if item.sentence else (item.text or "")
            views.append(_ItemView(item.kind, text))
        else:
            views.append(_ItemView(item["kind"], item.get("text", "")))
    return views


def _plain_text(views: list) -> str:
    blocks: list[str] = []
    para: list[str] = []
    list_lines: list[str] = []
    in_list = False
    counter = 0

    def flush_para():
        if para:
            blocks.append("\n".join(textwrap.wrap(" ".join(para),
                                                  width=WRAP_COLUMNS)))
            para.clear()

    for view in views:
        if view.kind == "heading":
            flush_para()
            blocks.append(f"{view.text}\n{'=' * len(view.text)}")
        elif view.kind == "paragraph-break":
            flush_para()
        elif view.kind == "list-begin":
            flush_para()
            in_list = True
            counter = 0
            list_lines = []
        elif view.kind == "list-item":
            counter += 1
        elif view.kind == "list-end":
            blocks.append("\n".join(list_lines))
            in_list = False
        elif view.kind == "sentence":
            if in_list:
                prefix = f"{counter}. "
                list_lines.extend(textwrap.wrap(
                    view.text, width=WRAP_COLUMNS, initial_indent=prefix,
                    subsequent_indent=" " * len(prefix)))
            else:
                para.append(view.text)
        else:
            raise EmitError(f"unknown item kind {view.kind!r}")
    flush_para()
    return "\n\n".join(blocks) + "\n"


# --- annotated json -----------------------------------------------------------

def _emit_annotated(items: list, language: str, plan: str,
                    digest: str) -> Document:
    doc_items = []
    span_index = []
    for i, item in enumerate(items):
        if item.kind == "sentence":
            entry = {"kind": "sentence"}
            entry.update(sentence_to_json(item.sentence))
            doc_items.append(entry)
            for tok in item.sentence.tokens:
                if tok.kb is None and tok.plan is None:
                    continue
                span_index.append({"item": i, "start": tok.start,
                                   "end": tok.end, "kb": tok.kb,
                                   "plan": tok.plan, "role": tok.role,
                                   "pronoun": tok.pronoun})
        elif item.kind == "heading":
            doc_items.append({"kind": "heading", "text": item.text,
                              "payload": item.payload})
        else:
            entry = {"kind": item.kind}
            if item.payload is not None:
                entry["payload"] = item.payload
            doc_items.append(entry)
    doc = {
        "format_version": FORMAT_VERSION,
        "language": language,
        "plan": plan,
        "digest": digest,
        "items": doc_items,
    }
    body = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return Document(language=language, format="annotated-json",
                    body=body.encode("utf-8"), span_index=tuple(span_index))


def parse_annotated(body: bytes) -> dict:
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise EmitError(f"not an annotated document: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise EmitError(f"unsupported format_version {doc.get('format_version')!r}")
    return doc


def plain_from_annotated(body: bytes) -> bytes:
    doc = parse_annotated(body)
    return _plain_text(_item_views(doc["items"])).encode("utf-8")


# --- html ----------------------------------------------------------------------

def _emit_html(items: list, language: str, plan: str) -> Document:
    out = [f'<!DOCTYPE html>\n<html lang="{language}">\n<head>\n'
           f'<meta charset="utf-8">\n<title>{html_lib.escape(plan)}</title>\n'
           f'</head>\n<body>\n<article>']
    span_index = []
    in_list = False
    para_open = False

    def close_para():
        nonlocal para_open
        if para_open:
            out.append("</p>")
        para_open = False

    for i, item in enumerate(items):
        if item.kind == "heading":
            close_para()
            out.append(f"<h1>{html_lib.escape(item.text or '')}</h1>")
        elif item.kind == "paragraph-break":
            close_para()
        elif item.kind == "list-begin":
            close_para()
            out.append("<ol>")
            in_list = True
        elif item.kind == "list-item":
            pass
        elif item.kind == "list-end":
            out.append("</ol>")
            in_list = False
        elif item.kind == "sentence":
            markup = _sentence_html(item.sentence)
            for tok in item.sentence.tokens:
                if tok.kb is not None:
                    span_index.append({"item": i, "start": tok.start,
                                       "end": tok.end, "kb": tok.kb,
                                       "plan": tok.plan, "role": tok.role,
                                       "pronoun": tok.pronoun})
            if in_list:
                out.append(f"<li>{markup}</li>")
            else:
                if not para_open:
                    out.append("<p>")
                    para_open = True
                out.append(markup)
        else:
            raise EmitError(f"unknown item kind {item.kind!r}")
    close_para()
    out.append("</article>\n</body>\n</html>\n")
    return Document(language=language, format="html",
                    body="\n".join(out).encode("utf-8"),
                    span_index=tuple(span_index))


def _sentence_html(sentence) -> str:
    parts = [f'<span class="sentence" data-plan="{sentence.plan_id}">']
    for tok in sentence.tokens:
        parts.append(html_lib.escape(tok.sep))
        attrs = []
        if tok.kb is not None:
            attrs.append(f' data-kb="{html_lib.escape(tok.kb, quote=True)}"')
        if tok.plan is not None:
            attrs.append(f' data-plan="{tok.plan}"')
        if tok.pronoun:
            attrs.append(' data-pronoun="true"')
        surface = html_lib.escape(tok.surface)
        if attrs:
            parts.append(f"<span{''.join(attrs)}>{surface}</span>")
        else:
            parts.append(surface)
    parts.append("</span>")
    return "".join(parts)


# --- latex -----------------------------------------------------------------------

def latex_escape(text: str) -> str:
    return "".join(LATEX_ESCAPES.get(ch, ch) for ch in text)


def _emit_latex(items: list, language: str) -> Document:
    out = ["\\documentclass{article}", "\\begin{document}"]
    in_list = False
    for item in items:
        if item.kind == "heading":
            out.append(f"\\section*{{{latex_escape(item.text or '')}}}")
        elif item.kind == "paragraph-break":
            out.append("")
        elif item.kind == "list-begin":
            out.append("\\begin{enumerate}")
            in_list = True
        elif item.kind == "list-item":
            pass
        elif item.kind == "list-end":
            out.append("\\end{enumerate}")
            in_list = False
        elif item.kind == "sentence":
            text = latex_escape(item.sentence.text)
            out.append(f"\\item {text}" if in_list else text)
        else:
            raise EmitError(f"unknown item kind {item.kind!r}")
    out.append("\\end{document}")
    return Document(language=language, format="latex",
                    body=("\n".join(out) + "\n").encode("utf-8"))


# --- alignment -------------------------------------------------------------------

def align(documents: list) -> AlignmentMap:
    """Build the cross-language span map from annotated documents.

    All documents must stem from the same section schema (equal digests).
    """
    if not documents:
        raise EmitError("no documents to align")
    parsed = []
    for doc in documents:
        if doc.format != "annotated-json":
            raise EmitError("alignment needs annotated-json documents")
        parsed.append((doc.language, parse_annotated(doc.body)))
    digests = {p["digest"] for _, p in parsed}
    if len(digests) != 1:
        raise EmitError(f"digest mismatch across documents: {sorted(digests)}")
    plans: dict = {}
    referents: dict = {}
    for language, doc in parsed:
        for i, item in enumerate(doc["items"]):
            if item["kind"] != "sentence":
                continue
            for tok in item["tokens"]:
                span = (i, tok["start"], tok["end"])
                if tok["plan"] is not None:
                    plans.setdefault(tok["plan"], {}) \
                         .setdefault(language, []).append(span)
                if tok["kb"] is not None:
                    referents.setdefault(tok["kb"], {}) \
                             .setdefault(language, []).append(span)
    return AlignmentMap(digest=digests.pop(),
                        languages=tuple(lang for lang, _ in parsed),
                        plans=plans, referents=referents)


def alignment_to_json(amap: AlignmentMap) -> dict:
    return {
        "digest": amap.digest,
        "languages": list(amap.languages),
        "plans": {str(pid): {lang: [list(s) for s in spans]
                             for lang, spans in by_lang.items()}
                  for pid, by_lang in amap.plans.items()},
        "referents": {kb: {lang: [list(s) for s in spans]
                           for lang, spans in by_lang.items()}
                      for kb, by_lang in amap.referents.items()},
    }
