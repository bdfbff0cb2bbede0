#!/usr/bin/env python3
"""Regenerate the committed Turtle taxonomies from their JSON sources.

Run from the repo root after editing a taxonomy JSON file:

    python3 scripts/build_taxonomies.py
"""

from pathlib import Path

from sdsgraph.rdfio import FORMAT_TURTLE, serialize
from sdsgraph.skos import compile_taxonomy_json
from sdsgraph.vocab import COMMON_PREFIXES

TAXONOMY_DIR = Path(__file__).resolve().parent.parent / "src" / "sdsgraph" / "data" / "taxonomies"


def main() -> None:
    for source in sorted(TAXONOMY_DIR.glob("*.json")):
        graph = compile_taxonomy_json(source.read_text(encoding="utf-8"))
        graph = graph.with_prefixes(COMMON_PREFIXES)
        target = source.with_suffix(".ttl")
        target.write_text(serialize(graph, FORMAT_TURTLE), encoding="utf-8")
        print(f"{source.name} -> {target.name}: {len(graph)} triples")


if __name__ == "__main__":
    main()
