"""Access to bundled data files: taxonomies, shapes, rules, hgen lists."""

from __future__ import annotations

from importlib import resources


def read_text(relative: str) -> str:
    """Read a bundled data file, e.g. ``taxonomies/dpg-ghs.json``."""
    root = resources.files("sdsgraph") / "data"
    return (root / relative).read_text(encoding="utf-8")


def data_path(relative: str):
    """Filesystem path of a bundled data file (package installed from source)."""
    return resources.files("sdsgraph") / "data" / relative
