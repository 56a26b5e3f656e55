"""End-to-end gate over the shipped fixtures.

Each test exercises one published guarantee of the system and records a
verdict that the terminal summary prints as an ACCEPTANCE line, so a full
run always ends with one PASS/FAIL per guarantee.
"""
import json
import random
import re
import time
from pathlib import Path

from fastapi.testclient import TestClient

from kbgen import ENUM_VALUES, brute_force_derived, random_small_doc
from maintgen.emit import align, parse_annotated, plain_from_annotated
from maintgen.kb.io import load_kb, merge_documents, snapshot
from maintgen.kb.model import FillerAssertion, FillerAtom, Query
from maintgen.pipeline import Pipeline
from maintgen.plans import refinement_ids
from maintgen.scalegen import ScaleConfig, build_scale_document, sample_queries
from maintgen.service import app_from_fixtures
from maintgen.simulate import simulate
from test_emit import TagBalanceChecker

LANGUAGES = ("en", "de", "fr")


def documentable_plans(kb) -> list[str]:
    return sorted(set(kb.plans) - refinement_ids(kb))


def holds(kb, instance: str, role: str, value: str) -> bool:
    return bool(kb.ask(Query(atoms=(FillerAtom(instance, role, value),))))


def test_trilingual_output_matches_gold(base_pipeline, gold_dir, acceptance):
    started = time.perf_counter()
    result = base_pipeline.generate("check-oil-level", languages=LANGUAGES,
                                    format="plain")
    elapsed = time.perf_counter() - started

    problems = []
    digests = set()
    for lang in LANGUAGES:
        digests.add(parse_annotated(result.annotated[lang].body)["digest"])
        gold_plain = (Path(gold_dir) / f"check-oil-level.{lang}.txt").read_bytes()
        if result.documents[lang].body != gold_plain:
            problems.append(f"plain {lang} differs from gold")
        gold_json = (Path(gold_dir) / f"check-oil-level.{lang}.json").read_bytes()
        if result.annotated[lang].body != gold_json:
            problems.append(f"annotated {lang} differs from gold")
    if len(digests) != 1:
        problems.append(f"language-dependent digests: {sorted(digests)}")
    if elapsed >= 5.0:
        problems.append(f"generation took {elapsed:.2f}s")
    acceptance("trilingual-gold", not problems, "; ".join(problems))


def test_simulation_agrees_with_documents(base_pipeline, acceptance):
    problems = []

    # a low reading makes the conditional step run and leaves the level ok
    low_kb = base_pipeline.kb.copy()
    low_kb.tell(FillerAssertion("oil-level-1", "level-state", "low"))
    working = low_kb.copy()
    trace = simulate("check-oil-level", working, live=True)
    if [e.status for e in trace.entries] != ["executed"] * 7:
        problems.append("low-level trace did not execute every step")
    if not holds(working, "oil-level-1", "level-state", "ok"):
        problems.append("add-oil postcondition missing after simulation")

    # with the condition decided, a trace-driven document keeps every
    # sentence the static document has
    low_pipe = Pipeline(kb=low_kb, lexicon=base_pipeline.lexicon,
                        morphologies=base_pipeline.morphologies)
    static = low_pipe.generate("check-oil-level", languages=("en",))
    simulated = low_pipe.generate("check-oil-level", languages=("en",),
                                  mode="simulate")
    static_lines = {line for line in static.documents["en"].text.splitlines()
                    if line.strip()}
    simulated_lines = {line for line
                       in simulated.documents["en"].text.splitlines()
                       if line.strip()}
    if not static_lines <= simulated_lines:
        problems.append(
            f"trace document dropped {sorted(static_lines - simulated_lines)}")

    # a sensor reading of ok prunes the conditional instruction
    ok_kb = base_pipeline.kb.copy()
    ok_kb.tell(FillerAssertion("oil-level-1", "level-state", "ok"))
    ok_pipe = Pipeline(kb=ok_kb, lexicon=base_pipeline.lexicon,
                       morphologies=base_pipeline.morphologies)
    filtered = ok_pipe.generate("check-oil-level", languages=("en",),
                                mode="state-filtered")
    if "add engine oil" not in static.documents["en"].text:
        problems.append("static document lacks the conditional instruction")
    if "add engine oil" in filtered.documents["en"].text:
        problems.append("state-filtered document kept the pruned instruction")

    acceptance("simulation-coherence", not problems, "; ".join(problems))


def test_incremental_reclassification_matches_fresh(pipeline, acceptance):
    problems = []

    kb = pipeline.kb
    plug = kb.instances["spark-plug-2"]
    if "tightly-connected" in plug.derived_types:
        problems.append("spark-plug-2 already classified tightly-connected")
    kb.tell(FillerAssertion("spark-plug-2", "connection-state", "tight"))
    if "tightly-connected" not in plug.derived_types:
        problems.append("tell did not reclassify spark-plug-2")
    fresh = load_kb(snapshot(kb), "reload")
    if any(kb.instances[iid].derived_types != fresh.instances[iid].derived_types
           for iid in kb.instances):
        problems.append("reloaded fixture classifies differently")

    disagreeing = []
    for seed in range(24):
        small = merge_documents([(random_small_doc(seed), "gen")])
        rng = random.Random(seed * 31 + 7)
        ids = sorted(small.instances)
        for _ in range(5):
            small.tell(FillerAssertion(rng.choice(ids), "r-attr",
                                       rng.choice(ENUM_VALUES)))
        for _ in range(3):
            small.tell(FillerAssertion(rng.choice(ids), "r-link",
                                       rng.choice(ids)))
        oracle = brute_force_derived(small)
        if any(small.instances[iid].derived_types != oracle[iid]
               for iid in small.instances):
            disagreeing.append(seed)
    if disagreeing:
        problems.append(f"oracle disagreement on seeds {disagreeing}")

    acceptance("reclassification", not problems, "; ".join(problems))


def test_large_kb_loads_and_answers_quickly(acceptance):
    payload = json.dumps(build_scale_document(ScaleConfig()))

    started = time.perf_counter()
    kb = load_kb(payload, "scale")
    queries = sample_queries(kb, n=100, seed=3)
    answers = [kb.ask(query) for query in queries]
    elapsed = time.perf_counter() - started

    problems = []
    total = len(kb.concepts) + len(kb.instances)
    if total < 1000:
        problems.append(f"only {total} concepts+instances")
    unclassified = [iid for iid, inst in kb.instances.items()
                    if not inst.derived_types]
    if unclassified:
        problems.append(f"{len(unclassified)} instances left unclassified")
    if len(answers) != 100:
        problems.append(f"{len(answers)} queries answered")
    if elapsed >= 10.0:
        problems.append(f"load+query took {elapsed:.2f}s")
    acceptance("scale", not problems, "; ".join(problems))


def test_domains_share_middle_model(base_pipeline, fixture_dir, gold_dir,
                                    acceptance):
    problems = []
    fixtures = Path(fixture_dir)
    middle = json.loads((fixtures / "middle-model.json").read_text())
    car = json.loads((fixtures / "car.json").read_text())
    aircraft = json.loads((fixtures / "aircraft.json").read_text())

    middle_concepts = {c["id"] for c in middle.get("concepts", [])}
    middle_roles = {r["id"] for r in middle.get("roles", [])}
    for name, domain in (("car", car), ("aircraft", aircraft)):
        concept_overlap = middle_concepts & {
            c["id"] for c in domain.get("concepts", [])}
        role_overlap = middle_roles & {r["id"] for r in domain.get("roles", [])}
        if concept_overlap or role_overlap:
            problems.append(f"{name} redefines shared ids "
                            f"{sorted(concept_overlap | role_overlap)}")

    # the aircraft domain builds on the shared abstractions
    aircraft_parents = {p for c in aircraft.get("concepts", [])
                        for p in c.get("parents", [])}
    aircraft_types = {t for inst in aircraft.get("instances", [])
                      for t in inst.get("types", [])}
    if not (aircraft_parents | aircraft_types) & middle_concepts:
        problems.append("aircraft fixture never references shared concepts")

    # both domains see byte-identical shared definitions after loading
    kb_car = merge_documents([(middle, "middle"), (car, "car")])
    kb_aircraft = merge_documents([(middle, "middle"),
                                   (aircraft, "aircraft")])
    diverged = [cid for cid in sorted(middle_concepts)
                if kb_car.concepts[cid] != kb_aircraft.concepts[cid]]
    diverged += [rid for rid in sorted(middle_roles)
                 if kb_car.roles[rid] != kb_aircraft.roles[rid]]
    if diverged:
        problems.append(f"shared definitions diverge: {diverged}")

    # the aircraft document generates without the car domain loaded
    pipe = Pipeline(kb=kb_aircraft, lexicon=base_pipeline.lexicon,
                    morphologies=base_pipeline.morphologies)
    result = pipe.generate("check-hydraulic-reservoir", languages=LANGUAGES)
    for lang in LANGUAGES:
        gold = (Path(gold_dir) / f"check-hydraulic-reservoir.{lang}.txt")
        if result.documents[lang].body != gold.read_bytes():
            problems.append(f"aircraft-only {lang} document differs from gold")

    acceptance("middle-model-reuse", not problems, "; ".join(problems))


def test_span_queries_are_total(base_pipeline, fixture_dir, tmp_path,
                                acceptance):
    problems = []
    pronoun_failures = []
    align_failures = []
    pronouns = contents = 0

    app = app_from_fixtures(fixture_dir, workspace_dir=str(tmp_path))
    with TestClient(app) as client:
        for plan_id in documentable_plans(base_pipeline.kb):
            response = client.post("/generate", json={
                "plan": plan_id, "languages": list(LANGUAGES),
                "format": "annotated-json"})
            if response.status_code != 200:
                problems.append(f"generate {plan_id}: {response.status_code}")
                continue
            batch = response.json()
            for lang in LANGUAGES:
                doc = batch["documents"][lang]
                items = json.loads(doc["body"])["items"]
                others = [o for o in LANGUAGES if o != lang]
                for index, item in enumerate(items):
                    if item["kind"] != "sentence":
                        continue
                    for tok in item["tokens"]:
                        span = f"{index}:{tok['start']}:{tok['end']}"
                        where = (plan_id, lang, tok["surface"], span)
                        if tok["pronoun"]:
                            pronouns += 1
                            if not _antecedent_ok(client, doc["id"], span,
                                                  index, tok):
                                pronoun_failures.append(where)
                        if tok["kb"] is not None or tok["plan"] is not None:
                            contents += 1
                            if not _align_ok(client, doc["id"], span, others):
                                align_failures.append(where)

    if not pronouns:
        problems.append("no pronoun tokens found")
    if pronoun_failures:
        problems.append(f"{len(pronoun_failures)} of {pronouns} pronouns "
                        f"unresolved, e.g. {pronoun_failures[:3]}")
    if align_failures:
        problems.append(f"{len(align_failures)} of {contents} content tokens "
                        f"unaligned, e.g. {align_failures[:3]}")
    acceptance("query-correctness", not problems, "; ".join(problems))


def _antecedent_ok(client, doc_id, span, item_index, tok) -> bool:
    response = client.get("/query/antecedent",
                          params={"doc": doc_id, "span": span})
    if response.status_code != 200:
        return False
    data = response.json()
    antecedent = data["antecedent"]
    return (data["referent"] == tok["kb"]
            and (antecedent["item"], antecedent["start"])
            < (item_index, tok["start"]))


def _align_ok(client, doc_id, span, others) -> bool:
    response = client.get("/query/align",
                          params={"doc": doc_id, "span": span})
    if response.status_code != 200:
        return False
    spans = response.json()["spans"]
    return all(spans.get(other) for other in others)


LATEX_RESERVED = "&%#_"


def _latex_problems(body: str) -> list[str]:
    problems = []
    stack = []
    for kind, env in re.findall(r"\\(begin|end)\{([a-zA-Z*]+)\}", body):
        if kind == "begin":
            stack.append(env)
        elif not stack or stack.pop() != env:
            problems.append(f"unbalanced \\end{{{env}}}")
    if stack:
        problems.append(f"unclosed environments {stack}")
    for index, char in enumerate(body):
        if char in LATEX_RESERVED and (index == 0 or body[index - 1] != "\\"):
            problems.append(f"unescaped {char!r} at {index}")
    if body.count("{") != body.count("}"):
        problems.append("brace count mismatch")
    return problems


def test_every_format_is_well_formed(base_pipeline, gold_dir, acceptance):
    problems = []
    for plan_id in documentable_plans(base_pipeline.kb):
        html = base_pipeline.generate(plan_id, languages=LANGUAGES,
                                      format="html")
        latex = base_pipeline.generate(plan_id, languages=LANGUAGES,
                                       format="latex")
        for lang in LANGUAGES:
            checker = TagBalanceChecker()
            checker.feed(html.documents[lang].text)
            checker.close()
            if checker.stack or checker.errors:
                problems.append(f"html {plan_id} {lang}: "
                                f"{checker.errors or checker.stack}")
            for detail in _latex_problems(latex.documents[lang].text):
                problems.append(f"latex {plan_id} {lang}: {detail}")
            rebuilt = plain_from_annotated(html.annotated[lang].body)
            gold = (Path(gold_dir) / f"{plan_id}.{lang}.txt").read_bytes()
            if rebuilt != gold:
                problems.append(f"annotated {plan_id} {lang} does not "
                                "re-render to the plain snapshot")
    acceptance("format-validity", not problems, "; ".join(problems))


def test_menus_match_type_checking_oracle(base_pipeline, fixture_dir,
                                          tmp_path, acceptance):
    problems = []
    kb = base_pipeline.kb
    oracle = brute_force_derived(kb)

    app = app_from_fixtures(fixture_dir, workspace_dir=str(tmp_path))
    with TestClient(app) as client:
        for role_id, role in sorted(kb.roles.items()):
            response = client.get("/menu", params={"role": role_id})
            if response.status_code != 200:
                problems.append(f"{role_id}: HTTP {response.status_code}")
                continue
            payload = response.json()
            offered = {option["id"] for option in payload["options"]}
            if role.is_literal:
                expected = set(role.range.values)
                freeform = role.range.type != "enum"
                if payload["freeform"] != freeform:
                    problems.append(f"{role_id}: freeform flag wrong")
            else:
                expected = {iid for iid, types in oracle.items()
                            if role.range in types}
            if offered != expected:
                problems.append(
                    f"{role_id}: offered != type-checked, "
                    f"extra={sorted(offered - expected)} "
                    f"missing={sorted(expected - offered)}")
    acceptance("menu-soundness", not problems, "; ".join(problems))
