"""Command-line surface for batch and CI use.

Exit codes: 0 success, 1 validation violations, 2 input error,
3 internal error. Human-readable output goes to stdout, diagnostics to
stderr; ``--json`` switches stdout to machine-readable payloads.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from sdsgraph.coversheet import (
    ProductSelection,
    UnknownSdsIdError,
    build_cover_sheet,
    load_hgen,
    render,
)
from sdsgraph.graph import term_to_ntriples
from sdsgraph.rdfio import RdfSyntaxError, guess_format, parse
from sdsgraph.rules import RuleFormatError, apply_rules, load_rules
from sdsgraph.sds import SdsError
from sdsgraph.service import ConfigError, load_config
from sdsgraph.service import run as run_service
from sdsgraph.shacl import MalformedShapeError, parse_shapes, validate
from sdsgraph.skos import check_integrity, load_taxonomy
from sdsgraph.sparql import QueryError, evaluate_query
from sdsgraph.store import Assets, Store, StoreCorruptError

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

INPUT_ERRORS = (
    SdsError,
    RdfSyntaxError,
    QueryError,
    RuleFormatError,
    MalformedShapeError,
    ConfigError,
    StoreCorruptError,
    UnknownSdsIdError,
    FileNotFoundError,
    OSError,
    ValueError,
)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_graph(path: str) -> "Graph":
    text = _read(path)
    return parse(text, guess_format(path) if path != "-" else "turtle")


def fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Knowledge-graph tooling for GHS safety data sheets."""


@main.command()
@click.argument("files", nargs=-1, required=True)
@click.option("--store", "store_dir", required=True, help="store directory")
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
def ingest(files: tuple[str, ...], store_dir: str, as_json: bool) -> None:
    """Ingest SDS files (JSON by extension, otherwise sectioned text)."""
    try:
        store = Store(Assets.bundled(), data_dir=store_dir)
    except StoreCorruptError as exc:
        fail(str(exc), EXIT_INPUT)
    results = []
    worst = EXIT_OK
    for path in files:
        try:
            text = _read(path)
            kind = "json" if path.endswith(".json") or text.lstrip().startswith("{") else "text"
            result = store.ingest(text, content_type=kind)
        except INPUT_ERRORS as exc:
            fail(f"{path}: {exc}", EXIT_INPUT)
        results.append(
            {
                "file": path,
                "sdsId": result.sds_id,
                "status": result.status,
                "annotationMisses": result.annotation_misses,
                "violations": [
                    r.message for r in (result.report.violations if result.report else [])
                ],
            }
        )
        if result.status == "quarantined":
            worst = max(worst, EXIT_VIOLATIONS)
    if as_json:
        click.echo(json.dumps({"results": results}, indent=2))
    else:
        for item in results:
            click.echo(f"{item['file']}: {item['status']} ({item['sdsId']})")
            for message in item["violations"]:
                click.echo(f"  violation: {message}")
    sys.exit(worst)


@main.command("validate")
@click.argument("file", required=True)
@click.option("--shapes", "shapes_file", required=True, help="shapes graph (turtle)")
@click.option("--json", "as_json", is_flag=True)
def validate_command(file: str, shapes_file: str, as_json: bool) -> None:
    """Validate a data graph against a shapes graph."""
    try:
        data = _load_graph(file)
        parsed = parse_shapes(_load_graph(shapes_file))
        report = validate(data, parsed.shapes)
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "conforms": report.conforms,
                    "results": [
                        {
                            "focusNode": term_to_ntriples(r.focus_node),
                            "path": r.path,
                            "constraintComponent": r.constraint_component,
                            "severity": r.severity,
                            "message": r.message,
                        }
                        for r in report.results
                    ],
                    "warnings": parsed.warnings,
                },
                indent=2,
            )
        )
    else:
        click.echo(f"conforms: {str(report.conforms).lower()}")
        for r in report.results:
            click.echo(
                f"{r.severity}: {term_to_ntriples(r.focus_node)} {r.path or ''} "
                f"[{r.constraint_component.rsplit('#', 1)[-1]}] {r.message}"
            )
        for warning in parsed.warnings:
            click.echo(f"warning: {warning}", err=True)
    sys.exit(EXIT_OK if report.conforms else EXIT_VIOLATIONS)


@main.command()
@click.argument("file", required=True)
@click.option("--rules", "rules_file", required=True, help="rules file")
@click.option("--max-iterations", default=100, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def infer(file: str, rules_file: str, max_iterations: int, as_json: bool) -> None:
    """Apply forward-chaining rules to a data graph; print new triples."""
    try:
        data = _load_graph(file)
        rules = load_rules(_read(rules_file))
        result = apply_rules(data, rules, max_iterations=max_iterations)
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    added = [
        f"{term_to_ntriples(t.subject)} {term_to_ntriples(t.predicate)} "
        f"{term_to_ntriples(t.object)} ."
        for t in result.added
    ]
    if as_json:
        click.echo(
            json.dumps(
                {
                    "added": added,
                    "iterations": result.iterations,
                    "capped": result.capped,
                    "trace": [
                        {"rule": e.rule, "binding": dict(e.binding)} for e in result.trace
                    ],
                },
                indent=2,
            )
        )
    else:
        for line in added:
            click.echo(line)
        click.echo(
            f"{len(added)} triple(s) inferred in {result.iterations} iteration(s)"
            + (" (iteration cap hit)" if result.capped else ""),
            err=True,
        )
    sys.exit(EXIT_OK)


@main.command()
@click.argument("store_dir", metavar="STORE")
@click.option("--sparql", "query_file", required=True, help="query file or '-'")
@click.option("--json", "as_json", is_flag=True)
def query(store_dir: str, query_file: str, as_json: bool) -> None:
    """Evaluate a query against a store's graph."""
    try:
        store = Store(Assets.bundled(), data_dir=store_dir)
        query_text = _read(query_file)
        rows = evaluate_query(store.snapshot().graph, query_text)
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "rows": [
                        {name: term_to_ntriples(term) for name, term in row.items()}
                        for row in rows
                    ]
                },
                indent=2,
            )
        )
    else:
        for row in rows:
            click.echo("\t".join(term_to_ntriples(row[name]) for name in row))
        click.echo(f"{len(rows)} row(s)", err=True)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--store", "store_dir", required=True)
@click.option("--select", "select_spec", required=True,
              help="comma-separated SDS ids, or @file / '-' with one id per line")
@click.option("--hgen", "hgen_file", required=True, help="general hazard list file")
@click.option("--format", "fmt", type=click.Choice(["md", "html", "json"]), default="md",
              show_default=True)
@click.option("--product", default="Unnamed Product", show_default=True)
@click.option("--latest-only", is_flag=True)
@click.option("--generated-at", default=None, help="timestamp override (for reproducible output)")
def coversheet(store_dir, select_spec, hgen_file, fmt, product, latest_only, generated_at):
    """Generate a composite shipping cover sheet."""
    try:
        store = Store(Assets.bundled(), data_dir=store_dir)
        if select_spec.startswith("@") or select_spec == "-":
            raw = _read(select_spec[1:] if select_spec.startswith("@") else "-")
            ids = tuple(line.strip() for line in raw.splitlines() if line.strip())
        else:
            ids = tuple(s.strip() for s in select_spec.split(",") if s.strip())
        hgen = load_hgen(_read(hgen_file), default_label=Path(hgen_file).stem)
        selection = ProductSelection(product, ids)
        sheet = build_cover_sheet(
            selection, store.snapshot(), hgen,
            latest_only=latest_only, generated_at=generated_at,
        )
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    click.echo(render(sheet, fmt), nl=False)
    sys.exit(EXIT_OK)


@main.group()
def taxonomy() -> None:
    """Taxonomy tooling."""


@taxonomy.command()
@click.argument("file", required=True)
@click.option("--json", "as_json", is_flag=True)
def check(file: str, as_json: bool) -> None:
    """Run SKOS integrity checks over a taxonomy file."""
    try:
        if file.endswith(".json"):
            from sdsgraph.skos import compile_taxonomy_json

            graph = compile_taxonomy_json(_read(file))
        else:
            graph = _load_graph(file)
        index = load_taxonomy(graph)
        violations = check_integrity(index)
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "concepts": len(index.by_iri),
                    "violations": [
                        {"kind": v.kind, "subject": v.subject, "message": v.message}
                        for v in violations
                    ],
                    "warnings": index.warnings,
                },
                indent=2,
            )
        )
    else:
        click.echo(f"{len(index.by_iri)} concept(s), {len(violations)} violation(s)")
        for violation in violations:
            click.echo(f"{violation.kind}: {violation.message}")
        for warning in index.warnings:
            click.echo(f"warning: {warning}", err=True)
    sys.exit(EXIT_OK if not violations else EXIT_VIOLATIONS)


@main.command()
@click.option("--config", "config_file", default=None, help="key=value config file")
def serve(config_file: str | None) -> None:
    """Run the HTTP service."""
    try:
        config = load_config(config_file)
    except INPUT_ERRORS as exc:
        fail(str(exc), EXIT_INPUT)
    run_service(config)


def entrypoint() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_INPUT)
    except click.Abort:
        sys.exit(EXIT_INPUT)
    except SystemExit:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    entrypoint()
