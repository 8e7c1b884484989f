"""Command-line entry point: ``pathwise {analyze,paths,distill,generate,report}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pathwise import __version__
from pathwise.distill import distill
from pathwise.distill.context import render_obligations
from pathwise.errors import ConfigError, MalformedInput, NotFound, PathwiseError, ProjectError
from pathwise.harness.config import BACKENDS, FILTERS, SCOPES, RunConfig
from pathwise.harness.report import RunReport, render
from pathwise.harness.run import load_project, run
from pathwise.knowledge import build_kb, dumps_kb

EXIT_OK, EXIT_PROJECT, EXIT_CONFIG = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage mistakes are configuration errors; 2 is reserved for broken projects
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pathwise", description="Path-directed unit test generation for a small class language.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="build the knowledge base and print it as JSON")
    a.add_argument("project_dir")
    a.add_argument("--out", help="write to this file instead of standard output")
    a.add_argument("--path-cap", type=int, default=256)

    pa = sub.add_parser("paths", help="list the CFG paths of one method")
    pa.add_argument("project_dir")
    pa.add_argument("--method", required=True, help="method reference such as A#m(int), or an unambiguous m(int)")
    pa.add_argument("--path-cap", type=int, default=256)

    d = sub.add_parser("distill", help="print the distilled context for one path")
    d.add_argument("project_dir")
    d.add_argument("--method", required=True)
    d.add_argument("--path", type=int, required=True)
    d.add_argument("--depth", type=int, default=3)
    d.add_argument("--path-cap", type=int, default=256)

    g = sub.add_parser("generate", help="run the full pipeline")
    g.add_argument("project_dir", nargs="?")
    g.add_argument("--config", help="JSON run configuration; flags override it")
    g.add_argument("--out", dest="output_dir")
    g.add_argument("--backend", choices=BACKENDS)
    g.add_argument("--script", help="response script for the scripted backend")
    g.add_argument("--command", dest="backend_command", help="command line for the external backend")
    g.add_argument("--timeout", type=float)
    g.add_argument("--filter", dest="focal_filter", choices=FILTERS)
    g.add_argument("--focal", action="append", help="test only this method (repeatable)")
    g.add_argument("--max-rounds", type=int)
    g.add_argument("--path-cap", type=int)
    g.add_argument("--depth", dest="recursion_depth", type=int)
    g.add_argument("--parallelism", type=int)
    g.add_argument("--coverage-scope", choices=SCOPES)
    g.add_argument("--format", choices=("table", "json"), default="table")

    r = sub.add_parser("report", help="re-render a run directory's report")
    r.add_argument("run_dir")
    r.add_argument("--format", choices=("table", "json"), default="table")
    return p


def _config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key in ("project_dir", "output_dir", "max_rounds", "path_cap", "recursion_depth", "parallelism"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.coverage_scope:
        data["coverage_scope"] = args.coverage_scope
    if args.focal:
        data["focal_filter"] = args.focal
    elif args.focal_filter:
        data["focal_filter"] = args.focal_filter
    backend = dict(data.get("backend") or {})
    if args.backend and args.backend != backend.get("kind"):
        backend = {"kind": args.backend}
    for key, value in (("file", args.script), ("command", args.backend_command), ("timeout", args.timeout)):
        if value is not None:
            backend[key] = value
    if backend:
        data["backend"] = backend
    return RunConfig.from_json(data)


def _paths(args) -> str:
    kb = build_kb(load_project(args.project_dir), args.path_cap)
    ref = kb.method_of(args.method).ref
    cfg, paths = kb.cfg_of(ref), kb.paths_of(ref)
    out = {"method": ref, "truncated": paths.truncated,
           "paths": [{"index": p.index, "node_ids": list(p.node_ids),
                      "obligations": list(render_obligations(cfg, p)),
                      "statements": p.statement_count(cfg)} for p in paths]}
    return json.dumps(out, indent=2) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            text = dumps_kb(build_kb(load_project(args.project_dir), args.path_cap))
            if args.out:
                Path(args.out).write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
        elif args.command == "paths":
            sys.stdout.write(_paths(args))
        elif args.command == "distill":
            kb = build_kb(load_project(args.project_dir), args.path_cap)
            ref = kb.method_of(args.method).ref
            if not 0 <= args.path < len(kb.paths_of(ref)):
                raise ConfigError(f"{ref} has no path {args.path}")
            sys.stdout.write(distill(ref, args.path, kb, args.depth).dumps())
        elif args.command == "generate":
            result = run(_config(args))
            sys.stdout.write(render(result.report, args.format))
        elif args.command == "report":
            path = Path(args.run_dir) / "report.json"
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read {path}: {exc}") from exc
            sys.stdout.write(render(RunReport.from_json(data), args.format))
    except ProjectError as exc:
        print(f"pathwise: {exc}", file=sys.stderr)
        for d in exc.diagnostics:
            print(f"  {d}", file=sys.stderr)
        return EXIT_PROJECT
    except (ConfigError, NotFound, MalformedInput) as exc:
        print(f"pathwise: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PathwiseError as exc:
        print(f"pathwise: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
