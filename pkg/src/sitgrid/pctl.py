"""PCTL fragment: probability-bounded next / until / bounded-until queries.

Concrete syntax::

    query   := formula | "filter" "(" "state" "," formula "," atom ")"
    formula := "true" | "false" | atom | "!" formula | formula "&" formula
             | formula "|" formula | "P" bound "[" path "]" | "(" formula ")"
    bound   := "=?" | ("<" | "<=" | ">" | ">=") probability
    path    := "X" formula | formula "U" formula | formula "U<=" int formula
             | "F" formula | "F<=" int formula
    atom    := '"' chars '"'

Precedence ``!`` > ``&`` > ``|``. Derived forms are normalized away in the
AST: ``F g`` is stored as ``true U g`` (likewise its bounded form) and
``a | b`` as ``!(!a & !b)``. Atoms are quoted so situation codes and
failure labels need no escaping.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterator

from .errors import PctlError, PctlSyntaxError


# ---------------------------------------------------------------------------
# AST


class StateFormula:
    pass


class PathFormula:
    pass


@dataclass(frozen=True)
class TrueFormula(StateFormula):
    pass


@dataclass(frozen=True)
class FalseFormula(StateFormula):
    pass


TRUE = TrueFormula()
FALSE = FalseFormula()


@dataclass(frozen=True)
class Atom(StateFormula):
    label: str

    def __post_init__(self) -> None:
        if not self.label:
            raise PctlError("atom labels must be non-empty")


@dataclass(frozen=True)
class Not(StateFormula):
    operand: StateFormula


@dataclass(frozen=True)
class And(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class Bound:
    """``=?`` query, or a comparison against a probability threshold."""

    op: str  # "=?", "<", "<=", ">", ">="
    p: float | None = None

    def __post_init__(self) -> None:
        if self.op == "=?":
            if self.p is not None:
                raise PctlError("quantitative bound takes no threshold")
        elif self.op in ("<", "<=", ">", ">="):
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise PctlError(f"threshold {self.p!r} outside [0, 1]")
        else:
            raise PctlError(f"unknown bound operator {self.op!r}")

    @property
    def is_query(self) -> bool:
        return self.op == "=?"


@dataclass(frozen=True)
class ProbQuery(StateFormula):
    bound: Bound
    path: PathFormula


@dataclass(frozen=True)
class Next(PathFormula):
    operand: StateFormula


@dataclass(frozen=True)
class Until(PathFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class BoundedUntil(PathFormula):
    left: StateFormula
    right: StateFormula
    steps: int

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise PctlError(f"step bound must be non-negative, got {self.steps}")


def eventually(goal: StateFormula) -> Until:
    """``F g``, normalized to ``true U g``."""
    return Until(TRUE, goal)


def bounded_eventually(goal: StateFormula, steps: int) -> BoundedUntil:
    return BoundedUntil(TRUE, goal, steps)


def disjunction(left: StateFormula, right: StateFormula) -> Not:
    """``a | b``, normalized to ``!(!a & !b)``."""
    return Not(And(Not(left), Not(right)))


@dataclass(frozen=True)
class Query:
    formula: StateFormula
    filter_state: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.formula, ProbQuery):
            raise PctlError("top-level formula must be a probability query P...[...]")


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"]*")
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<op>=\?|<=|>=|<|>|!|&|\||\(|\)|\[|\]|,)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"true", "false", "filter", "state", "P", "X", "U", "F"}


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword or op literal, or "string" / "number" / "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PctlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        if m.lastgroup == "string":
            tokens.append(_Token("string", m.group()[1:-1], m.start()))
        elif m.lastgroup == "number":
            tokens.append(_Token("number", m.group(), m.start()))
        elif m.lastgroup == "op":
            tokens.append(_Token(m.group(), m.group(), m.start()))
        else:
            word = m.group()
            if word not in _KEYWORDS:
                raise PctlSyntaxError(
                    f"unknown word {word!r} (atoms are written in double quotes)", m.start()
                )
            tokens.append(_Token(word, word, m.start()))
    tokens.append(_Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_FORMULA_START = frozenset({"true", "false", "string", "!", "P", "("})


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind: str) -> _Token | None:
        if self.current.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds: str) -> _Token:
        if self.current.kind in kinds:
            return self.advance()
        found = self.current.text or "end of input"
        raise PctlSyntaxError(f"unexpected {found!r}", self.current.offset, frozenset(kinds))

    def parse_query(self) -> Query:
        if self.accept("filter"):
            self.expect("(")
            self.expect("state")
            self.expect(",")
            formula = self.parse_formula()
            self.expect(",")
            state = self.expect("string").text
            self.expect(")")
            self.expect("end")
            return Query(formula=formula, filter_state=state)
        formula = self.parse_formula()
        self.expect("end")
        return Query(formula=formula)

    def parse_formula(self) -> StateFormula:
        node = self.parse_conjunction()
        while self.accept("|"):
            node = disjunction(node, self.parse_conjunction())
        return node

    def parse_conjunction(self) -> StateFormula:
        node = self.parse_unary()
        while self.accept("&"):
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> StateFormula:
        if self.accept("!"):
            return Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> StateFormula:
        tok = self.expect(*_FORMULA_START)
        if tok.kind == "true":
            return TRUE
        if tok.kind == "false":
            return FALSE
        if tok.kind == "string":
            if not tok.text:
                raise PctlSyntaxError("empty atom", tok.offset)
            return Atom(tok.text)
        if tok.kind == "(":
            node = self.parse_formula()
            self.expect(")")
            return node
        # "P" bound "[" path "]"
        bound = self.parse_bound()
        self.expect("[")
        path = self.parse_path()
        self.expect("]")
        return ProbQuery(bound=bound, path=path)

    def parse_bound(self) -> Bound:
        if self.accept("=?"):
            return Bound("=?")
        op = self.expect("=?", "<", "<=", ">", ">=")
        num = self.expect("number")
        p = float(num.text)
        if not 0.0 <= p <= 1.0:
            raise PctlSyntaxError(f"probability {num.text} outside [0, 1]", num.offset)
        return Bound(op.kind, p)

    def parse_int_bound(self) -> int:
        num = self.expect("number")
        if not num.text.isdigit():
            raise PctlSyntaxError(f"step bound {num.text!r} is not a plain integer", num.offset)
        return int(num.text)

    def parse_path(self) -> PathFormula:
        if self.accept("X"):
            return Next(self.parse_formula())
        if self.accept("F"):
            if self.accept("<="):
                k = self.parse_int_bound()
                return bounded_eventually(self.parse_formula(), k)
            return eventually(self.parse_formula())
        left = self.parse_formula()
        self.expect("U")
        if self.accept("<="):
            k = self.parse_int_bound()
            return BoundedUntil(left, self.parse_formula(), k)
        return Until(left, self.parse_formula())


def parse(text: str) -> Query:
    """Parse the concrete syntax into a :class:`Query` AST."""
    return _Parser(text).parse_query()


# ---------------------------------------------------------------------------
# Formatter

_LEVEL_OR = 0   # reserved by the grammar; no Or nodes survive parsing
_LEVEL_AND = 1
_LEVEL_NOT = 2
_LEVEL_PRIMARY = 3


def _fmt_formula(f: StateFormula, min_level: int) -> str:
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, FalseFormula):
        return "false"
    if isinstance(f, Atom):
        return f'"{f.label}"'
    if isinstance(f, Not):
        text = "!" + _fmt_formula(f.operand, _LEVEL_NOT)
        return f"({text})" if min_level > _LEVEL_NOT else text
    if isinstance(f, And):
        # & is left-associative: the right operand must bind tighter
        text = _fmt_formula(f.left, _LEVEL_AND) + " & " + _fmt_formula(f.right, _LEVEL_NOT)
        return f"({text})" if min_level > _LEVEL_AND else text
    if isinstance(f, ProbQuery):
        return f"P{_fmt_bound(f.bound)}[{format_path(f.path)}]"
    raise PctlError(f"cannot format {type(f).__name__}")


def _fmt_bound(b: Bound) -> str:
    if b.is_query:
        return "=?"
    return f"{b.op}{b.p!r}"


def format_path(p: PathFormula) -> str:
    """Canonical text of a path formula (``F`` form for true-until)."""
    if isinstance(p, Next):
        return "X " + _fmt_formula(p.operand, _LEVEL_OR)
    if isinstance(p, Until):
        if p.left == TRUE:
            return "F " + _fmt_formula(p.right, _LEVEL_OR)
        return _fmt_formula(p.left, _LEVEL_OR) + " U " + _fmt_formula(p.right, _LEVEL_OR)
    if isinstance(p, BoundedUntil):
        if p.left == TRUE:
            return f"F<={p.steps} " + _fmt_formula(p.right, _LEVEL_OR)
        return _fmt_formula(p.left, _LEVEL_OR) + f" U<={p.steps} " + _fmt_formula(p.right, _LEVEL_OR)
    raise PctlError(f"cannot format {type(p).__name__}")


def format_query(q: Query) -> str:
    """Canonical text; ``parse(format_query(q))`` is structurally ``q``."""
    body = _fmt_formula(q.formula, _LEVEL_OR)
    if q.filter_state is None:
        return body
    return f'filter(state, {body}, "{q.filter_state}")'


# ---------------------------------------------------------------------------
# Model resolution and requirements files


def _atoms(f: StateFormula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from _atoms(f.operand)
    elif isinstance(f, And):
        yield from _atoms(f.left)
        yield from _atoms(f.right)
    elif isinstance(f, ProbQuery):
        p = f.path
        if isinstance(p, Next):
            yield from _atoms(p.operand)
        elif isinstance(p, (Until, BoundedUntil)):
            yield from _atoms(p.left)
            yield from _atoms(p.right)


def validate_formula(query: Query, dtmc) -> list[str]:
    """Resolve atoms against the model's propositions and the filter state
    against its state ids. Empty list means ok."""
    problems = []
    props = dtmc.propositions
    for atom in _atoms(query.formula):
        if atom.label not in props:
            problems.append(f"unknown proposition {atom.label!r}")
    if query.filter_state is not None and query.filter_state not in set(dtmc.states):
        problems.append(f"unknown filter state {query.filter_state!r}")
    return problems


@dataclass(frozen=True)
class SafetyRequirement:
    id: str
    description: str
    query: Query
    query_text: str


def load_requirements(stream: IO[str]) -> list[SafetyRequirement]:
    """Read a JSON requirements file: a list of {id, description, query}."""
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise PctlError(f"requirements file is not valid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise PctlError("requirements file must be a JSON list")
    out: list[SafetyRequirement] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "id" not in entry or "query" not in entry:
            raise PctlError(f"requirement #{i + 1}: must be an object with id and query")
        rid = entry["id"]
        if rid in seen:
            raise PctlError(f"requirement #{i + 1}: duplicate id {rid!r}")
        seen.add(rid)
        text = entry["query"]
        try:
            query = parse(text)
        except PctlError as exc:
            raise PctlError(f"requirement {rid!r}: {exc}") from None
        out.append(
            SafetyRequirement(
                id=rid,
                description=entry.get("description", ""),
                query=query,
                query_text=text,
            )
        )
    return out
