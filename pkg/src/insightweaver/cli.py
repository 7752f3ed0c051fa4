"""Command-line access to extraction, graph dumps, descriptions, and offline
recommendation turns. Exit codes: 1 usage, 2 ingest, 3 provider, 4 internal."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, ServiceConfig, load_config
from .engine import build_session, canonical_json, query_turn
from .graph import build_graph, export_graph
from .insights import extract_all, export_catalog
from .narrator import export_descriptions
from .reasoner import ReasoningError
from .retrieval import ProviderError
from .story import StoryNode
from .tables import IngestError, LocatorError, enumerate_subspaces, load_schema_hints, load_table

__all__ = ["main"]

EXIT_USAGE = 1
EXIT_INGEST = 2
EXIT_PROVIDER = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to 2; the contract says 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="insightweaver", description="Insight extraction and story tooling.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="CSV file")
            p.add_argument("--schema-hints", help="schema hints JSON (default: <input>.hints.json if present)")
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--pretty", action="store_true", help="human-readable JSON")

    common(sub.add_parser("extract", help="write the insight catalog (iw-catalog/1 JSON lines)"))
    common(sub.add_parser("graph", help="write the subspace graph dump"))
    common(sub.add_parser("describe", help="write one-sentence descriptions (JSON lines)"))

    rec = sub.add_parser("recommend", help="run one offline query turn against a catalog")
    common(rec)
    rec.add_argument("--query", required=True, help="the user question")
    rec.add_argument("--focused", help="focused insight id (default: the top-scored insight)")
    rec.add_argument("--step", type=int, help="structural filter hops")
    rec.add_argument("--alpha", type=float, help="user-path weight in the merge")
    rec.add_argument("--k", type=int, help="retrieval depth")
    rec.add_argument("--K", type=int, help="final candidate count")
    rec.add_argument("--offline", action="store_true", help="force stub providers")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--config", help="TOML or JSON config file")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8040)
    srv.add_argument("--offline", action="store_true", help="force stub providers")
    return parser


def _read_input(args) -> tuple[str, str | None]:
    path = Path(args.input)
    try:
        csv_text = path.read_text("utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read input {args.input!r}: {exc}") from exc
    hints_text = None
    hints_path = Path(args.schema_hints) if args.schema_hints else path.with_suffix(".hints.json")
    if args.schema_hints or hints_path.exists():
        try:
            hints_text = hints_path.read_text("utf-8")
        except OSError as exc:
            raise IngestError(f"cannot read schema hints {str(hints_path)!r}: {exc}") from exc
    return csv_text, hints_text


def _load_config(args) -> ServiceConfig:
    config = load_config(args.config) if args.config else ServiceConfig()
    if getattr(args, "offline", False):
        config = dataclasses.replace(config, offline=True)
    return config


def _emit(args, text: str) -> None:
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _prettify(text: str, pretty: bool) -> str:
    """Single documents re-indent; JSON-lines render as an indented array."""
    if not pretty:
        return text
    lines = [ln for ln in text.split("\n") if ln]
    if len(lines) > 1:
        return json.dumps([json.loads(ln) for ln in lines], indent=2, ensure_ascii=False)
    return json.dumps(json.loads(text), indent=2, ensure_ascii=False)


def _cmd_extract(args) -> int:
    csv_text, hints_text = _read_input(args)
    config = _load_config(args)
    table = load_table(csv_text, load_schema_hints(hints_text) if hints_text else None)
    catalog = extract_all(table, config.extraction)
    _emit(args, _prettify(export_catalog(catalog), args.pretty))
    return 0


def _cmd_graph(args) -> int:
    csv_text, hints_text = _read_input(args)
    config = _load_config(args)
    table = load_table(csv_text, load_schema_hints(hints_text) if hints_text else None)
    graph = build_graph(enumerate_subspaces(table, config.extraction.max_locator_length))
    _emit(args, _prettify(export_graph(graph), args.pretty))
    return 0


def _cmd_describe(args) -> int:
    csv_text, hints_text = _read_input(args)
    config = _load_config(args)
    table = load_table(csv_text, load_schema_hints(hints_text) if hints_text else None)
    catalog = extract_all(table, config.extraction)
    _emit(args, _prettify(export_descriptions(catalog, table.schema), args.pretty))
    return 0


def _cmd_recommend(args) -> int:
    csv_text, hints_text = _read_input(args)
    config = _load_config(args)
    merge = config.merge
    overrides = {
        name: getattr(args, name)
        for name in ("alpha", "k", "K")
        if getattr(args, name) is not None
    }
    if overrides:
        merge = dataclasses.replace(merge, **overrides)
    if args.step is not None:
        config = dataclasses.replace(config, merge=merge, step=args.step)
    else:
        config = dataclasses.replace(config, merge=merge)

    session = build_session(csv_text, hints_text, config)
    if args.focused:
        if args.focused not in session.catalog.by_id:
            raise IngestError(f"no insight {args.focused!r} in the catalog")
        focused_insight = args.focused
    else:
        best = sorted(session.catalog.insights, key=lambda i: (-i.score, i.id))
        if not best:
            raise IngestError("catalog is empty; nothing to recommend from")
        focused_insight = best[0].id
    node_id = next(
        (nid for nid, n in sorted(session.story.nodes.items()) if n.insight_id == focused_insight),
        None,
    )
    if node_id is None:
        node_id = session.story._new_node_id()
        session.story.nodes[node_id] = StoryNode(
            node_id=node_id, insight_id=focused_insight, depth=0, added_by="user"
        )
    doc = query_turn(session, node_id, args.query, step=args.step)
    text = canonical_json(doc)
    _emit(args, json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) if args.pretty else text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config) if args.config else ServiceConfig()
    if args.offline:
        config = dataclasses.replace(config, offline=True)
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "extract": _cmd_extract,
        "graph": _cmd_graph,
        "describe": _cmd_describe,
        "recommend": _cmd_recommend,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (IngestError, LocatorError, ConfigError) as exc:
        print(f"insightweaver: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (ProviderError, ReasoningError) as exc:
        print(f"insightweaver: provider failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except json.JSONDecodeError as exc:
        print(f"insightweaver: bad JSON input: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except Exception as exc:  # the contract wants a distinct code, not a traceback
        logging.getLogger(__name__).exception("internal error")
        print(f"insightweaver: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
