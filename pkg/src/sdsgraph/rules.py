"""Forward-chaining inference rules over graphs.

Rules bind a basic graph pattern, optionally check one numeric guard,
and assert an instantiated conclusion triple; application iterates to
fixpoint. This matches SHACL-AF triple-rule behavior while using a small
line-oriented rule format instead of embedded SPARQL:

    version 1
    prefix safed: <https://dpg.example/ns/safed#>

    rule mixture-eye-irritation-2a
      when ?m a safed:Mixture
      when ?m safed:ingredient ?i
      guard ?c >= 10.0
      then ?m safed:classification ghs:eye-irritation-2a

The ``version`` header is required. Comparators: >= > <= < = .
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from sdsgraph.graph import (
    Binding,
    Graph,
    Iri,
    Literal,
    PatternSlot,
    Term,
    TermError,
    Triple,
    TriplePattern,
    Variable,
    solve_bgp,
    term_to_ntriples,
)
from sdsgraph.vocab import NUMERIC_DATATYPES, RDF_TYPE

DEFAULT_MAX_ITERATIONS = 100

_COMPARATORS = {
    ">=": "ge",
    ">": "gt",
    "<=": "le",
    "<": "lt",
    "=": "eq",
}
_COMPARATOR_TOKENS = {v: k for k, v in _COMPARATORS.items()}


class RuleFormatError(ValueError):
    """Problem in a rules file, with the offending line number."""

    def __init__(self, message: str, line: int = 0) -> None:
        loc = f" (line {line})" if line else ""
        super().__init__(f"{message}{loc}")
        self.line = line


@dataclass(frozen=True)
class NumericGuard:
    variable: str
    comparator: str  # ge | gt | le | lt | eq
    threshold: Decimal

    def holds(self, term: Term | None) -> bool:
        """Non-numeric or unbound values fail the guard silently."""
        if not isinstance(term, Literal) or term.datatype not in NUMERIC_DATATYPES:
            return False
        try:
            value = Decimal(term.lexical)
        except InvalidOperation:
            return False
        if self.comparator == "ge":
            return value >= self.threshold
        if self.comparator == "gt":
            return value > self.threshold
        if self.comparator == "le":
            return value <= self.threshold
        if self.comparator == "lt":
            return value < self.threshold
        return value == self.threshold


@dataclass
class InferenceRule:
    name: str
    premises: list[TriplePattern]
    conclusion: TriplePattern
    guard: NumericGuard | None = None

    def validate(self) -> None:
        bound: set[str] = set()
        for premise in self.premises:
            bound |= premise.variables()
        unbound = self.conclusion.variables() - bound
        if unbound:
            raise RuleFormatError(
                f"rule {self.name!r}: conclusion variable(s) "
                f"{', '.join('?' + v for v in sorted(unbound))} not bound by premises"
            )
        if self.guard is not None and self.guard.variable not in bound:
            raise RuleFormatError(
                f"rule {self.name!r}: guard variable ?{self.guard.variable} "
                "not bound by premises"
            )


@dataclass(frozen=True)
class TraceEntry:
    rule: str
    binding: tuple[tuple[str, str], ...]  # (variable, N-Triples form) pairs
    triple: Triple


@dataclass
class InferenceResult:
    graph: Graph
    trace: list[TraceEntry]
    iterations: int
    capped: bool = False

    @property
    def added(self) -> list[Triple]:
        return [entry.triple for entry in self.trace]


# ---------------------------------------------------------------------------
# rule file parsing

_TERM_RE = re.compile(
    r"""
    (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]+>)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>[+-]?(?:\d+\.\d+|\d+))
  | (?P<a>\ba\b)
  | (?P<pname>[A-Za-z_][A-Za-z0-9_-]*:[A-Za-z0-9_.\-]*)
    """,
    re.VERBOSE,
)


def _parse_term(token: str, prefixes: dict[str, str], line_no: int) -> PatternSlot:
    m = _TERM_RE.fullmatch(token)
    if m is None:
        raise RuleFormatError(f"cannot parse term {token!r}", line_no)
    if m.lastgroup == "var":
        return Variable(token[1:])
    if m.lastgroup == "iri":
        return Iri(token[1:-1])
    if m.lastgroup == "string":
        return Literal(token[1:-1].replace('\\"', '"').replace("\\\\", "\\"))
    if m.lastgroup == "number":
        from sdsgraph.vocab import XSD_DECIMAL, XSD_INTEGER

        datatype = XSD_INTEGER if re.fullmatch(r"[+-]?\d+", token) else XSD_DECIMAL
        return Literal(token, datatype=datatype)
    if m.lastgroup == "a":
        return Iri(RDF_TYPE)
    prefix, _, local = token.partition(":")
    if prefix not in prefixes:
        raise RuleFormatError(f"undefined prefix {prefix!r}", line_no)
    return Iri(prefixes[prefix] + local)


def _split_terms(text: str, line_no: int) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == '"':
            end = pos + 1
            while end < len(text):
                if text[end] == "\\":
                    end += 2
                    continue
                if text[end] == '"':
                    break
                end += 1
            if end >= len(text):
                raise RuleFormatError("unterminated string", line_no)
            tokens.append(text[pos : end + 1])
            pos = end + 1
        else:
            end = pos
            while end < len(text) and not text[end].isspace():
                end += 1
            tokens.append(text[pos:end])
            pos = end
    return tokens


def _parse_pattern(rest: str, prefixes: dict[str, str], line_no: int) -> TriplePattern:
    tokens = _split_terms(rest, line_no)
    if len(tokens) != 3:
        raise RuleFormatError(
            f"expected 'subject predicate object', got {len(tokens)} terms", line_no
        )
    return TriplePattern(
        _parse_term(tokens[0], prefixes, line_no),
        _parse_term(tokens[1], prefixes, line_no),
        _parse_term(tokens[2], prefixes, line_no),
    )


def load_rules(text: str) -> list[InferenceRule]:
    """Parse a rules file; requires a ``version`` header line."""
    prefixes: dict[str, str] = {}
    rules: list[InferenceRule] = []
    current: InferenceRule | None = None
    version_seen = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if not version_seen:
            if keyword != "version":
                raise RuleFormatError(
                    "rules file must start with a 'version <n>' header", line_no
                )
            if rest.split()[:1] != ["1"]:
                raise RuleFormatError(f"unsupported rules version {rest!r}", line_no)
            version_seen = True
            continue
        if keyword == "prefix":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_-]*):\s*<([^<>\s]+)>", rest)
            if m is None:
                raise RuleFormatError("expected 'prefix name: <iri>'", line_no)
            prefixes[m.group(1)] = m.group(2)
        elif keyword == "rule":
            if current is not None:
                _finish_rule(current)
                rules.append(current)
            if not rest:
                raise RuleFormatError("rule needs a name", line_no)
            current = InferenceRule(name=rest, premises=[], conclusion=None)  # type: ignore[arg-type]
        elif keyword == "when":
            if current is None:
                raise RuleFormatError("'when' outside a rule", line_no)
            current.premises.append(_parse_pattern(rest, prefixes, line_no))
        elif keyword == "guard":
            if current is None:
                raise RuleFormatError("'guard' outside a rule", line_no)
            m = re.fullmatch(r"\?([A-Za-z_][A-Za-z0-9_]*)\s*(>=|<=|>|<|=)\s*(\S+)", rest)
            if m is None:
                raise RuleFormatError("expected 'guard ?var op number'", line_no)
            try:
                threshold = Decimal(m.group(3))
            except InvalidOperation:
                raise RuleFormatError(f"guard threshold {m.group(3)!r} is not numeric", line_no)
            if current.guard is not None:
                raise RuleFormatError("a rule may have at most one guard", line_no)
            current.guard = NumericGuard(m.group(1), _COMPARATORS[m.group(2)], threshold)
        elif keyword == "then":
            if current is None:
                raise RuleFormatError("'then' outside a rule", line_no)
            if current.conclusion is not None:
                raise RuleFormatError("a rule may have exactly one conclusion", line_no)
            current.conclusion = _parse_pattern(rest, prefixes, line_no)
        else:
            raise RuleFormatError(f"unknown keyword {keyword!r}", line_no)

    if current is not None:
        _finish_rule(current)
        rules.append(current)
    return rules


def _finish_rule(rule: InferenceRule) -> None:
    if rule.conclusion is None:
        raise RuleFormatError(f"rule {rule.name!r} has no 'then' conclusion")
    if not rule.premises:
        raise RuleFormatError(f"rule {rule.name!r} has no 'when' premises")
    rule.validate()


# ---------------------------------------------------------------------------
# forward chaining


def _instantiate(pattern: TriplePattern, binding: Binding) -> Triple | None:
    def resolve(slot: PatternSlot) -> Term | None:
        if isinstance(slot, Variable):
            return binding.get(slot.name)
        return slot

    s, p, o = resolve(pattern.subject), resolve(pattern.predicate), resolve(pattern.object)
    if s is None or p is None or o is None:
        return None
    try:
        return Triple(s, p, o)
    except TermError:
        # e.g. a premise variable bound to a literal landing in subject
        # position; such bindings simply produce nothing
        return None


def apply_rules(
    data: Graph,
    rules: list[InferenceRule],
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> InferenceResult:
    """Run all rules to fixpoint; monotone (output contains input).

    Stops when an iteration adds nothing. If ``max_iterations`` is hit
    first, the partial graph is returned with ``capped`` set.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    current = set(data.triples)
    trace: list[TraceEntry] = []
    iterations = 0
    capped = False
    while True:
        if iterations >= max_iterations:
            capped = True
            break
        iterations += 1
        working = Graph(current)
        new_triples: list[tuple[InferenceRule, Binding, Triple]] = []
        for rule in rules:
            for binding in solve_bgp(working, rule.premises):
                if rule.guard is not None and not rule.guard.holds(
                    binding.get(rule.guard.variable)
                ):
                    continue
                triple = _instantiate(rule.conclusion, binding)
                if triple is not None and triple not in current:
                    new_triples.append((rule, binding, triple))
        added_this_round = False
        for rule, binding, triple in new_triples:
            if triple in current:
                continue  # an earlier rule in this round already produced it
            current.add(triple)
            added_this_round = True
            trace.append(
                TraceEntry(
                    rule=rule.name,
                    binding=tuple(
                        (name, term_to_ntriples(binding[name]))
                        for name in sorted(binding)
                    ),
                    triple=triple,
                )
            )
        if not added_this_round:
            capped = False
            break
    # trace is already deterministic: rules run in order, bindings sorted
    result_graph = Graph(current, data.prefixes)
    return InferenceResult(
        graph=result_graph, trace=trace, iterations=iterations, capped=capped
    )
