"""Output formats: plain text, annotated JSON, HTML, LaTeX, alignment."""
import json
import re
from html.parser import HTMLParser
from pathlib import Path

import pytest

from maintgen.emit import (
    EmitError,
    align,
    emit,
    parse_annotated,
    plain_from_annotated,
)
from maintgen.realize.realizer import RenderedItem

LANGUAGES = ("en", "de", "fr")
TOP_PLANS = ("check-oil-level", "check-hydraulic-reservoir",
             "refill-washer-fluid", "replace-spark-plugs")

VOID_TAGS = {"meta", "br", "img", "link", "hr", "input"}


class TagBalanceChecker(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.stack = []
        self.errors = []

    def handle_starttag(self, tag, attrs):
        if tag not in VOID_TAGS:
            self.stack.append(tag)

    def handle_endtag(self, tag):
        if not self.stack:
            self.errors.append(f"orphan </{tag}>")
        elif self.stack[-1] != tag:
            self.errors.append(f"</{tag}> closes <{self.stack[-1]}>")
        else:
            self.stack.pop()


class TestPlain:
    @pytest.mark.parametrize("plan_id", TOP_PLANS)
    @pytest.mark.parametrize("lang", LANGUAGES)
    def test_matches_gold(self, base_pipeline, gold_dir, plan_id, lang):
        result = base_pipeline.generate(plan_id, languages=[lang],
                                        format="plain")
        gold = (Path(gold_dir) / f"{plan_id}.{lang}.txt").read_bytes()
        assert result.documents[lang].body == gold

    def test_wrapping(self, gold_dir):
        for path in Path(gold_dir).glob("*.txt"):
            for line in path.read_text(encoding="utf-8").splitlines():
                assert len(line) <= 72, f"{path.name}: overlong line {line!r}"

    def test_wrapped_list_items_indent(self, base_pipeline):
        body = base_pipeline.generate(
            "check-hydraulic-reservoir", languages=["de"],
            format="plain").documents["de"].text
        lines = body.splitlines()
        starts = [i for i, l in enumerate(lines) if re.match(r"^\d\. ", l)]
        assert starts
        for i in starts:
            j = i + 1
            while j < len(lines) and lines[j].startswith("   "):
                j += 1
        # at least one item actually wrapped in this document
        assert any(lines[i + 1].startswith("   ") for i in starts
                   if i + 1 < len(lines))

    def test_heading_underline(self, base_pipeline):
        text = base_pipeline.generate(
            "refill-washer-fluid", languages=["en"],
            format="plain").documents["en"].text
        lines = text.splitlines()
        assert lines[1] == "=" * len(lines[0])

    def test_round_trip_from_annotated(self, base_pipeline):
        for plan_id in TOP_PLANS:
            result = base_pipeline.generate(plan_id, languages=list(LANGUAGES),
                                            format="plain")
            for lang in LANGUAGES:
                rebuilt = plain_from_annotated(result.annotated[lang].body)
                assert rebuilt == result.documents[lang].body


class TestAnnotated:
    @pytest.mark.parametrize("lang", LANGUAGES)
    def test_matches_gold(self, base_pipeline, gold_dir, lang):
        result = base_pipeline.generate("check-oil-level", languages=[lang],
                                        format="annotated-json")
        gold = (Path(gold_dir) / f"check-oil-level.{lang}.json").read_bytes()
        assert result.documents[lang].body == gold

    def test_format_version(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level", languages=["en"])
        doc = parse_annotated(result.annotated["en"].body)
        assert doc["format_version"] == 1
        assert doc["plan"] == "check-oil-level"
        assert doc["digest"] == result.digest

    def test_rejects_other_versions(self):
        with pytest.raises(EmitError):
            parse_annotated(b'{"format_version": 2, "items": []}')
        with pytest.raises(EmitError):
            parse_annotated(b"not json at all")

    def test_span_index_consistent(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level", languages=["fr"])
        doc = result.annotated["fr"]
        items = parse_annotated(doc.body)["items"]
        assert doc.span_index
        for entry in doc.span_index:
            item = items[entry["item"]]
            assert item["kind"] == "sentence"
            surface = item["text"][entry["start"]:entry["end"]]
            token = next(t for t in item["tokens"]
                         if t["start"] == entry["start"]
                         and t["end"] == entry["end"])
            assert token["surface"] == surface


class TestHtml:
    @pytest.mark.parametrize("lang", LANGUAGES)
    def test_well_formed(self, base_pipeline, lang):
        for plan_id in TOP_PLANS:
            body = base_pipeline.generate(
                plan_id, languages=[lang],
                format="html").documents[lang].text
            checker = TagBalanceChecker()
            checker.feed(body)
            checker.close()
            assert checker.errors == []
            assert checker.stack == []

    def test_structure(self, base_pipeline):
        body = base_pipeline.generate(
            "check-oil-level", languages=["en"],
            format="html").documents["en"].text
        assert body.count("<ol>") == 1 and body.count("</ol>") == 1
        assert body.count("<li>") == 7
        assert '<html lang="en">' in body
        assert 'data-kb="dipstick-1"' in body
        assert 'data-pronoun="true"' in body

    def test_escaping(self, base_pipeline):
        items = [
            RenderedItem(kind="heading", text="a<b & c>d", payload="k"),
        ]
        body = emit(items, "html", "en", plan="p<&>", digest="d").text
        assert "a&lt;b &amp; c&gt;d" in body
        assert "<title>p&lt;&amp;&gt;</title>" in body


class TestLatex:
    @pytest.mark.parametrize("lang", LANGUAGES)
    def test_environments_balanced(self, base_pipeline, lang):
        for plan_id in TOP_PLANS:
            body = base_pipeline.generate(
                plan_id, languages=[lang],
                format="latex").documents[lang].text
            stack = []
            for kind, name in re.findall(r"\\(begin|end)\{([^}]*)\}", body):
                if kind == "begin":
                    stack.append(name)
                else:
                    assert stack and stack[-1] == name
                    stack.pop()
            assert stack == []
            assert body.count("{") == body.count("}")

    def test_reserved_characters_escaped(self):
        items = [RenderedItem(kind="heading", text="50% of #1 & x_y", payload="k")]
        body = emit(items, "latex", "en", digest="d").text
        assert "\\% of \\#1 \\& x\\_y" in body
        # nothing reserved survives unescaped
        for match in re.finditer(r"[&%#_]", body):
            assert body[match.start() - 1] == "\\"

    def test_enumerate_items(self, base_pipeline):
        body = base_pipeline.generate(
            "check-oil-level", languages=["de"],
            format="latex").documents["de"].text
        assert body.count("\\item ") == 7
        assert "\\begin{enumerate}" in body


class TestAlign:
    def test_totality(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level",
                                        languages=list(LANGUAGES))
        amap = base_pipeline.alignment(result)
        assert amap.languages == LANGUAGES
        assert amap.digest == result.digest
        assert amap.plans and amap.referents
        for pid, by_lang in amap.plans.items():
            assert set(by_lang) == set(LANGUAGES), f"plan {pid} incomplete"
        for kb_id, by_lang in amap.referents.items():
            assert set(by_lang) == set(LANGUAGES), f"referent {kb_id} incomplete"

    def test_spans_slice_correctly(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level",
                                        languages=list(LANGUAGES))
        amap = base_pipeline.alignment(result)
        items = {lang: parse_annotated(result.annotated[lang].body)["items"]
                 for lang in LANGUAGES}
        for by_lang in amap.referents.values():
            for lang, spans in by_lang.items():
                for i, start, end in spans:
                    assert items[lang][i]["text"][start:end]

    def test_digest_mismatch_rejected(self, base_pipeline):
        a = base_pipeline.generate("check-oil-level", languages=["en"])
        b = base_pipeline.generate("refill-washer-fluid", languages=["de"])
        with pytest.raises(EmitError, match="digest"):
            align([a.annotated["en"], b.annotated["de"]])

    def test_requires_annotated_documents(self, base_pipeline):
        result = base_pipeline.generate("check-oil-level", languages=["en"],
                                        format="plain")
        with pytest.raises(EmitError):
            align([result.documents["en"]])
        with pytest.raises(EmitError):
            align([])


class TestErrors:
    def test_unknown_format(self, base_pipeline):
        with pytest.raises(EmitError):
            emit([RenderedItem(kind="heading", text="t", payload="k")],
                 "rtf", "en", digest="d")

    def test_document_text_property(self, base_pipeline):
        doc = base_pipeline.generate("check-oil-level",
                                     languages=["de"]).documents["de"]
        assert doc.text == doc.body.decode("utf-8")
