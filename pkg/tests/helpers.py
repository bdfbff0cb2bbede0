"""Shared test oracles, independent of the implementation paths they check."""

from __future__ import annotations

import itertools
from collections import defaultdict

from sdsgraph.graph import BlankNode, Graph, Triple, term_to_ntriples


def _blank_labels(graph: Graph) -> list[str]:
    labels = set()
    for t in graph.triples:
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode):
                labels.add(term.label)
    return sorted(labels)


def _refine_colors(graph: Graph, labels: list[str]) -> dict[str, str]:
    """Iteratively color blank nodes by their neighborhood signatures."""
    colors = {label: "" for label in labels}
    for _ in range(len(labels) + 1):
        nxt: dict[str, list[str]] = defaultdict(list)
        for t in graph.triples:
            s_blank = isinstance(t.subject, BlankNode)
            o_blank = isinstance(t.object, BlankNode)
            pred = term_to_ntriples(t.predicate)
            s_desc = colors[t.subject.label] if s_blank else term_to_ntriples(t.subject)
            o_desc = colors[t.object.label] if o_blank else term_to_ntriples(t.object)
            if s_blank:
                nxt[t.subject.label].append(f"+{pred} {o_desc}")
            if o_blank:
                nxt[t.object.label].append(f"-{pred} {s_desc}")
        new_colors = {
            label: colors[label] + "|" + ";".join(sorted(nxt.get(label, [])))
            for label in labels
        }
        if len(set(new_colors.values())) == len(set(colors.values())):
            colors = new_colors
            break
        colors = new_colors
    return colors


def _canonical_triples(graph: Graph, mapping: dict[str, str]) -> frozenset:
    def key(term):
        if isinstance(term, BlankNode):
            return "_:" + mapping[term.label]
        return term_to_ntriples(term)

    return frozenset((key(t.subject), key(t.predicate), key(t.object)) for t in graph.triples)


def isomorphic(a: Graph, b: Graph) -> bool:
    """Graph equality up to blank node relabeling.

    Color refinement distinguishes most blank nodes; any residual
    same-color groups are resolved by permutation search within the
    group, which stays tiny for test-sized graphs.
    """
    if len(a) != len(b):
        return False
    labels_a = _blank_labels(a)
    labels_b = _blank_labels(b)
    if len(labels_a) != len(labels_b):
        return False
    if not labels_a:
        return a.triples == b.triples

    colors_a = _refine_colors(a, labels_a)
    colors_b = _refine_colors(b, labels_b)
    groups_a: dict[str, list[str]] = defaultdict(list)
    groups_b: dict[str, list[str]] = defaultdict(list)
    for label, color in colors_a.items():
        groups_a[color].append(label)
    for label, color in colors_b.items():
        groups_b[color].append(label)
    if set(groups_a) != set(groups_b):
        return False
    if any(len(groups_a[c]) != len(groups_b[c]) for c in groups_a):
        return False

    # Fix b's mapping; enumerate assignments for a within each color group.
    mapping_b = {}
    for color in sorted(groups_b):
        for i, label in enumerate(sorted(groups_b[color])):
            mapping_b[label] = f"{color}#{i}"
    canon_b = _canonical_triples(b, mapping_b)

    group_list = sorted(groups_a)
    perm_sets = [
        list(itertools.permutations(range(len(groups_a[color]))))
        for color in group_list
    ]
    for combo in itertools.product(*perm_sets):
        mapping_a = {}
        for color, perm in zip(group_list, combo):
            members = sorted(groups_a[color])
            for i, label in enumerate(members):
                mapping_a[label] = f"{color}#{perm[i]}"
        if _canonical_triples(a, mapping_a) == canon_b:
            return True
    return False
