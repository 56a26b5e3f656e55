"""Command-line front end: generate, simulate, validate, list-plans, serve.

The fixture directory comes from --fixtures or the MAINTGEN_FIXTURES
environment variable.  Any pipeline error exits with status 2 and a
diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .kb.io import assertion_from_json
from .kb.model import KbError
from .pipeline import DEFAULT_LANGUAGES, MODES, Pipeline

FORMAT_EXTENSIONS = {
    "plain": "txt",
    "html": "html",
    "latex": "tex",
    "annotated-json": "json",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maintgen",
        description="Generate multilingual maintenance instructions from a "
                    "knowledge-base fixture.")
    parser.add_argument("--fixtures", default=os.environ.get("MAINTGEN_FIXTURES"),
                        help="fixture directory (default: $MAINTGEN_FIXTURES)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate documents for one plan")
    gen.add_argument("--plan", required=True)
    gen.add_argument("--lang", default=",".join(DEFAULT_LANGUAGES),
                     help="comma-separated language codes (default en,de,fr)")
    gen.add_argument("--format", default="plain", choices=sorted(FORMAT_EXTENSIONS))
    gen.add_argument("--mode", default="static", choices=MODES)
    gen.add_argument("--out", default=".", help="output directory")
    gen.add_argument("--tell", metavar="FILE",
                     help="JSON file with assertions applied before generation")

    sim = sub.add_parser("simulate", help="run a plan against the KB and print the trace")
    sim.add_argument("--plan", required=True)
    sim.add_argument("--tell", metavar="FILE",
                     help="JSON file with assertions applied before simulation")

    sub.add_parser("validate", help="run KB and plan diagnostics")

    lst = sub.add_parser("list-plans", help="list plans, optionally filtered by device")
    lst.add_argument("--device", help="instance id; list only applicable plans")

    srv = sub.add_parser("serve", help="start the HTTP API")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--workspace", help="directory for saved draft plans")
    return parser


def _load_pipeline(args) -> Pipeline:
    if not args.fixtures:
        raise KbError("no fixture directory: pass --fixtures or set MAINTGEN_FIXTURES")
    return Pipeline.from_fixture_dir(args.fixtures)


def _apply_tell_file(pipeline: Pipeline, path: str) -> None:
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    assertions = data["assertions"] if isinstance(data, dict) else data
    for i, raw in enumerate(assertions):
        pipeline.kb.tell(assertion_from_json(raw, f"{path}[{i}]"))


def _cmd_generate(args) -> int:
    pipeline = _load_pipeline(args)
    if args.tell:
        _apply_tell_file(pipeline, args.tell)
    languages = tuple(code.strip() for code in args.lang.split(",") if code.strip())
    result = pipeline.generate(args.plan, languages=languages,
                               format=args.format, mode=args.mode)
    os.makedirs(args.out, exist_ok=True)
    extension = FORMAT_EXTENSIONS[args.format]
    for language in languages:
        path = os.path.join(args.out, f"{args.plan}.{language}.{extension}")
        with open(path, "wb") as handle:
            handle.write(result.documents[language].body)
        print(path)
    return 0


def _cmd_simulate(args) -> int:
    pipeline = _load_pipeline(args)
    if args.tell:
        _apply_tell_file(pipeline, args.tell)
    from .simulate import simulate, trace_to_json
    trace = simulate(args.plan, pipeline.kb)
    json.dump(trace_to_json(trace), sys.stdout, indent=2, ensure_ascii=False)
    print()
    return 0


def _cmd_validate(args) -> int:
    pipeline = _load_pipeline(args)
    diagnostics = pipeline.validate()
    for diag in diagnostics:
        print(f"{diag.severity}: [{diag.code}] {diag.message}")
    if any(d.severity == "error" for d in diagnostics):
        return 2
    print(f"ok: {len(pipeline.kb.plans)} plans, "
          f"{len(pipeline.kb.instances)} instances")
    return 0


def _cmd_list_plans(args) -> int:
    pipeline = _load_pipeline(args)
    if args.device:
        from .plans import applicable_plans
        plan_ids = applicable_plans(args.device, pipeline.kb)
    else:
        plan_ids = sorted(pipeline.kb.plans)
    for plan_id in plan_ids:
        plan = pipeline.kb.plans[plan_id]
        print(f"{plan_id}\t{plan.target_device}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app_from_fixtures
    app = app_from_fixtures(args.fixtures, workspace_dir=args.workspace)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


COMMANDS = {
    "generate": _cmd_generate,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
    "list-plans": _cmd_list_plans,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except KbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
