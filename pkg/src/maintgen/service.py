"""HTTP API over the generation pipeline.

Exposes plan listing, KB-state-aware authoring menus, draft-plan
validation, generation, simulation, a TELL endpoint, and the document
queries (pronoun antecedent, cross-language alignment, object location).
Generated documents are kept in memory per batch; document ids are
"<batch>-<language>" and span parameters use "item:start:end" with the
coordinates from the annotated-json format.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from itertools import count

from fastapi import FastAPI, HTTPException, Query as QueryParam
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from .emit import AlignmentMap, align, alignment_to_json, parse_annotated
from .kb.io import ParseError, assertion_from_json
from .kb.model import KbError, UnknownIdError
from .pipeline import DEFAULT_LANGUAGES, MODES, Pipeline
from .plans import applicable_plans, plan_from_json, plan_to_json, validate_plan
from .simulate import merge_deltas, delta_to_json, simulate, trace_to_json

ILLUSTRATION_ROLE = "location-illustration"
DEVICE_CONCEPT = "device"


class GenerateRequest(BaseModel):
    plan: str
    languages: list[str] = Field(default=list(DEFAULT_LANGUAGES), min_length=1)
    format: str = "plain"
    mode: str = "static"
    session: str | None = None


class SimulateRequest(BaseModel):
    plan: str
    session: str | None = None


class DraftPlanRequest(BaseModel):
    session: str
    plan: dict
    save: bool = False


class TellRequest(BaseModel):
    assertions: list[dict] = Field(min_length=1)


@dataclass
class _Batch:
    id: str
    plan: str
    mode: str
    digest: str
    languages: tuple
    alignment: AlignmentMap


@dataclass
class _StoredDocument:
    id: str
    batch: str
    language: str
    parsed: dict  # annotated-json content


@dataclass
class _ServiceState:
    pipeline: Pipeline
    workspace_dir: str | None = None
    drafts: dict = field(default_factory=dict)  # session -> {plan id: Plan}
    batches: dict = field(default_factory=dict)
    documents: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _batch_ids: count = field(default_factory=lambda: count(1))

    def next_batch_id(self) -> str:
        return f"b{next(self._batch_ids):04d}"


def _error(status: int, message: str):
    raise HTTPException(status_code=status, detail=message)


def _most_specific_label(kb, instance) -> str:
    specific = kb.most_specific(instance.derived_types)
    return "/".join(sorted(specific)) if specific else "THING"


def _parse_span(raw: str) -> tuple[int, int, int]:
    parts = raw.split(":")
    if len(parts) != 3:
        _error(422, f"span must be item:start:end, got {raw!r}")
    try:
        item, start, end = (int(p) for p in parts)
    except ValueError:
        _error(422, f"span coordinates must be integers, got {raw!r}")
    if item < 0 or start < 0 or end < start:
        _error(422, f"span out of order: {raw!r}")
    return item, start, end


def _find_token(doc: _StoredDocument, span: tuple[int, int, int]):
    item_index, start, end = span
    items = doc.parsed["items"]
    if item_index >= len(items) or items[item_index]["kind"] != "sentence":
        return None
    for tok in items[item_index]["tokens"]:
        if tok["start"] == start and tok["end"] == end:
            return tok
    return None


def _iter_earlier_tokens(doc: _StoredDocument, span: tuple[int, int, int]):
    """Tokens strictly before the span, nearest first."""
    item_index, start, _ = span
    items = doc.parsed["items"]
    for i in range(item_index, -1, -1):
        if items[i]["kind"] != "sentence":
            continue
        for tok in reversed(items[i]["tokens"]):
            if i == item_index and tok["end"] > start:
                continue
            yield i, tok


def create_app(pipeline: Pipeline, workspace_dir: str | None = None) -> FastAPI:
    state = _ServiceState(pipeline=pipeline, workspace_dir=workspace_dir)
    app = FastAPI(title="maintgen", version="0.1.0")
    kb = pipeline.kb

    @app.get("/plans")
    def list_plans(device: str | None = None):
        if device is None:
            plan_ids = sorted(kb.plans)
        else:
            if device not in kb.instances:
                _error(404, f"unknown device instance {device!r}")
            plan_ids = applicable_plans(device, kb)
        return {"device": device,
                "plans": [{"id": pid,
                           "target_device": kb.plans[pid].target_device}
                          for pid in plan_ids]}

    @app.get("/menu")
    def menu(role: str | None = None, concept: str | None = None,
             context: str | None = None):
        if context == "device" and role is None and concept is None:
            concept = DEVICE_CONCEPT
        if (role is None) == (concept is None):
            _error(422, "pass exactly one of ?role= or ?concept= "
                        "(or ?context=device)")
        if concept is not None:
            if concept not in kb.concepts:
                _error(404, f"unknown concept {concept!r}")
            options = [
                {"id": iid, "concept": _most_specific_label(kb, inst)}
                for iid, inst in sorted(kb.instances.items())
                if concept in inst.derived_types
            ]
            return {"context": {"concept": concept}, "options": options}
        role_def = kb.roles.get(role)
        if role_def is None:
            _error(404, f"unknown role {role!r}")
        if role_def.is_literal:
            literal = role_def.range
            options = [{"id": value, "concept": literal.type}
                       for value in literal.values]
            return {"context": {"role": role, "range": literal.type},
                    "options": options, "freeform": literal.type != "enum"}
        options = [
            {"id": iid, "concept": _most_specific_label(kb, inst)}
            for iid, inst in sorted(kb.instances.items())
            if role_def.range in inst.derived_types
        ]
        return {"context": {"role": role, "range": role_def.range},
                "options": options}

    @app.post("/draft-plan")
    def draft_plan(request: DraftPlanRequest):
        try:
            plan = plan_from_json(request.plan, source=f"draft:{request.session}")
        except KbError as exc:
            _error(422, str(exc))
        diagnostics = validate_plan(plan, kb)
        errors = [d for d in diagnostics if d.severity == "error"]
        if errors:
            raise HTTPException(status_code=409, detail={
                "plan": plan.id,
                "diagnostics": [{"severity": d.severity, "code": d.code,
                                 "message": d.message} for d in errors]})
        with state.lock:
            # reject before registering so a failed save leaves no draft
            if request.save and state.workspace_dir is None:
                _error(422, "no workspace directory configured for save")
            state.drafts.setdefault(request.session, {})[plan.id] = plan
            if request.save:
                os.makedirs(state.workspace_dir, exist_ok=True)
                path = os.path.join(state.workspace_dir,
                                    f"{request.session}.json")
                drafts = state.drafts[request.session]
                payload = {"plans": [plan_to_json(p)
                                     for _, p in sorted(drafts.items())]}
                with open(path, "w", encoding="utf-8") as handle:
                    json.dump(payload, handle, indent=2, ensure_ascii=False)
        return {"session": request.session, "plan": plan.id,
                "diagnostics": [{"severity": d.severity, "code": d.code,
                                 "message": d.message} for d in diagnostics]}

    def _resolve_pipeline(plan_id: str, session: str | None) -> Pipeline:
        drafts = state.drafts.get(session or "", {})
        if plan_id in drafts:
            scratch = kb.copy()
            scratch.plans[plan_id] = drafts[plan_id]
            return Pipeline(kb=scratch, lexicon=pipeline.lexicon,
                            morphologies=pipeline.morphologies)
        if plan_id not in kb.plans:
            _error(404, f"unknown plan {plan_id!r}")
        return pipeline

    @app.post("/generate")
    def generate(request: GenerateRequest):
        if request.format not in ("plain", "html", "latex", "annotated-json"):
            _error(422, f"unknown format {request.format!r}")
        if request.mode not in MODES:
            _error(422, f"unknown mode {request.mode!r}")
        runner = _resolve_pipeline(request.plan, request.session)
        try:
            result = runner.generate(request.plan,
                                     languages=tuple(request.languages),
                                     format=request.format, mode=request.mode)
        except UnknownIdError as exc:
            _error(404, str(exc))
        except KbError as exc:
            _error(422, str(exc))
        with state.lock:
            batch_id = state.next_batch_id()
            amap = align([result.annotated[lang] for lang in request.languages])
            state.batches[batch_id] = _Batch(
                id=batch_id, plan=request.plan, mode=request.mode,
                digest=result.digest, languages=tuple(request.languages),
                alignment=amap)
            documents = {}
            for language in request.languages:
                doc_id = f"{batch_id}-{language}"
                state.documents[doc_id] = _StoredDocument(
                    id=doc_id, batch=batch_id, language=language,
                    parsed=parse_annotated(result.annotated[language].body))
                documents[language] = {
                    "id": doc_id,
                    "format": request.format,
                    "body": result.documents[language].text,
                }
        return {"batch": batch_id, "plan": request.plan, "mode": request.mode,
                "digest": result.digest, "documents": documents}

    @app.post("/simulate")
    def run_simulation(request: SimulateRequest):
        runner = _resolve_pipeline(request.plan, request.session)
        try:
            trace = simulate(request.plan, runner.kb)
        except UnknownIdError as exc:
            _error(404, str(exc))
        except KbError as exc:
            _error(422, str(exc))
        return trace_to_json(trace)

    @app.post("/tell")
    def tell(request: TellRequest):
        try:
            assertions = [assertion_from_json(raw, f"tell[{i}]")
                          for i, raw in enumerate(request.assertions)]
        except ParseError as exc:
            _error(422, str(exc))
        with state.lock:
            deltas = []
            try:
                for assertion in assertions:
                    deltas.append(kb.tell(assertion))
            except UnknownIdError as exc:
                for delta in reversed(deltas):
                    kb.undo_delta(delta)
                _error(404, str(exc))
            except KbError as exc:
                for delta in reversed(deltas):
                    kb.undo_delta(delta)
                _error(422, str(exc))
        return {"applied": len(deltas),
                "delta": delta_to_json(merge_deltas(deltas))}

    def _stored_document(doc_id: str) -> _StoredDocument:
        doc = state.documents.get(doc_id)
        if doc is None:
            _error(404, f"unknown document {doc_id!r}")
        return doc

    @app.get("/query/antecedent")
    def query_antecedent(doc: str, span: str):
        stored = _stored_document(doc)
        coords = _parse_span(span)
        token = _find_token(stored, coords)
        if token is None:
            _error(404, f"no token at span {span!r} in {doc!r}")
        if not token["pronoun"]:
            _error(422, f"token {token['surface']!r} is not a pronoun")
        referent = token["kb"]
        for item_index, candidate in _iter_earlier_tokens(stored, coords):
            if candidate["kb"] == referent and not candidate["pronoun"]:
                return {"referent": referent,
                        "pronoun": {"item": coords[0], "start": coords[1],
                                    "end": coords[2],
                                    "surface": token["surface"]},
                        "antecedent": {"item": item_index,
                                       "start": candidate["start"],
                                       "end": candidate["end"],
                                       "surface": candidate["surface"]}}
        _error(404, f"no antecedent found for {token['surface']!r}")

    @app.get("/query/align")
    def query_align(doc: str, span: str):
        stored = _stored_document(doc)
        coords = _parse_span(span)
        token = _find_token(stored, coords)
        if token is None:
            _error(404, f"no token at span {span!r} in {doc!r}")
        batch = state.batches[stored.batch]
        others = [lang for lang in batch.languages if lang != stored.language]
        if token["kb"] is not None:
            by_language = batch.alignment.referents.get(token["kb"], {})
            key = {"referent": token["kb"]}
        elif token["plan"] is not None:
            by_language = batch.alignment.plans.get(token["plan"], {})
            key = {"plan": token["plan"]}
        else:
            _error(422, f"token {token['surface']!r} carries no alignment key")
        return {**key, "language": stored.language,
                "spans": {lang: [list(s) for s in by_language.get(lang, [])]
                          for lang in others}}

    @app.get("/query/location")
    def query_location(instance: str):
        inst = kb.instances.get(instance)
        if inst is None:
            _error(404, f"unknown instance {instance!r}")
        illustrations = inst.fillers_of(ILLUSTRATION_ROLE)
        if not illustrations:
            _error(404, f"no location illustration for {instance!r}")
        illustration = kb.instances[illustrations[0]]

        def one(role):
            values = illustration.fillers_of(role)
            return values[0] if values else None

        image = one("image-path")
        return {"instance": instance,
                "illustration": illustration.id,
                "image": image,
                "url": f"/assets/{os.path.basename(image)}" if image else None,
                "rectangle": {"x": one("region-x"), "y": one("region-y"),
                              "w": one("region-w"), "h": one("region-h")},
                "caption": one("caption")}

    @app.get("/alignment/{batch_id}")
    def get_alignment(batch_id: str):
        batch = state.batches.get(batch_id)
        if batch is None:
            _error(404, f"unknown batch {batch_id!r}")
        return alignment_to_json(batch.alignment)

    @app.get("/assets/{name}")
    def asset(name: str):
        base = app.state.asset_dir
        if base is None:
            _error(404, "no asset directory configured")
        path = os.path.join(base, os.path.basename(name))
        if not os.path.isfile(path):
            _error(404, f"unknown asset {name!r}")
        return FileResponse(path)

    app.state.asset_dir = None
    app.state.service = state
    return app


def app_from_fixtures(fixtures: str | None = None,
                      workspace_dir: str | None = None) -> FastAPI:
    """Build the app from a fixture directory (argument or
    MAINTGEN_FIXTURES); the conventional assets subdirectory is served
    under /assets when present."""
    directory = fixtures or os.environ.get("MAINTGEN_FIXTURES")
    if not directory:
        raise KbError("no fixture directory: set MAINTGEN_FIXTURES")
    app = create_app(Pipeline.from_fixture_dir(directory),
                     workspace_dir=workspace_dir)
    asset_dir = os.path.join(directory, "assets")
    if os.path.isdir(asset_dir):
        app.state.asset_dir = asset_dir
    return app
