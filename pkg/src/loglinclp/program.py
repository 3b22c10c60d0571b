"""Definite clause programs with embedded type constraints, and their parsers.

Program files are line oriented::

    # comment
    subtype a c.
    s(Z) :- p(Z), q(Z).
    p(Z) :- Z = a.

Variables start with an uppercase letter, predicates and types with a
lowercase one.  Queries join their conjuncts with ``&``; corpus files hold
one ``<count><TAB><query>`` line per query type.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from loglinclp.hierarchy import HierarchyError, TypeHierarchy


class ProgramError(ValueError):
    """Syntax or validation error in a program, query, or corpus text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def rename(self, mapping) -> "Atom":
        return Atom(self.predicate, tuple(mapping.get(a, a) for a in self.args))

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(self.args)})"


@dataclass(frozen=True)
class Constraint:
    """Type membership ``variable = type``."""

    variable: str
    type: str

    def rename(self, mapping) -> "Constraint":
        return Constraint(mapping.get(self.variable, self.variable), self.type)

    def __str__(self):
        return f"{self.variable} = {self.type}"


Literal = Union[Atom, Constraint]


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple = ()

    def variables(self) -> list:
        seen = dict.fromkeys(self.head.args)
        for lit in self.body:
            if isinstance(lit, Atom):
                seen.update(dict.fromkeys(lit.args))
            else:
                seen[lit.variable] = None
        return list(seen)

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Goal:
    conjuncts: tuple = ()

    @property
    def atoms(self) -> tuple:
        return tuple(c for c in self.conjuncts if isinstance(c, Atom))

    @property
    def constraints(self) -> tuple:
        return tuple(c for c in self.conjuncts if isinstance(c, Constraint))

    def __str__(self):
        return " & ".join(map(str, self.conjuncts)) if self.conjuncts else "true"


@dataclass(frozen=True)
class Program:
    hierarchy: TypeHierarchy
    clauses: tuple = ()

    def __post_init__(self):
        arities = {}
        by_pred = {}
        for i, clause in enumerate(self.clauses):
            for lit in (clause.head,) + tuple(clause.body):
                if isinstance(lit, Atom):
                    _check_arity(arities, lit)
                elif lit.type not in self.hierarchy:
                    raise ProgramError(f"unknown type {lit.type!r} in clause {clause}")
            by_pred.setdefault(clause.head.predicate, []).append(i)
        object.__setattr__(self, "arities", arities)
        object.__setattr__(self, "_by_pred", {k: tuple(v) for k, v in by_pred.items()})

    def clauses_for(self, predicate: str) -> tuple:
        """Indices of the clauses whose head has ``predicate``, in program order."""
        return self._by_pred.get(predicate, ())

    def check_goal(self, goal: Goal) -> None:
        for lit in goal.conjuncts:
            if isinstance(lit, Atom):
                known = self.arities.get(lit.predicate)
                if known is not None and known != lit.arity:
                    raise ProgramError(
                        f"{lit.predicate}/{lit.arity} used but program defines {lit.predicate}/{known}")
            elif lit.type not in self.hierarchy:
                raise ProgramError(f"unknown type {lit.type!r} in query")


def _check_arity(arities, atom, line=None):
    known = arities.setdefault(atom.predicate, atom.arity)
    if known != atom.arity:
        raise ProgramError(
            f"arity mismatch for {atom.predicate!r}: {atom.arity} vs {known}", line)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<neck>:-)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[(),.=&])
""", re.VERBOSE)


def _tokenize(text: str, line: int = 1) -> Iterator[tuple]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ProgramError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
        elif kind in ("punct", "neck"):
            yield m.group(), m.group(), line
        elif kind not in ("ws", "comment"):
            yield kind, m.group(), line
        pos = m.end()
    yield "eof", "", line


class _Parser:
    def __init__(self, text, line=1):
        self.tokens = list(_tokenize(text, line))
        self.i = 0

    @property
    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            shown = tok[1] or "end of input"
            raise ProgramError(f"expected {kind!r}, found {shown!r}", tok[2])
        return tok

    def literal(self) -> Literal:
        kind, value, line = self.next()
        if kind == "var":
            self.expect("=")
            return Constraint(value, self.expect("name")[1])
        if kind != "name":
            raise ProgramError(f"expected an atom or a constraint, found {value or 'end of input'!r}", line)
        args = []
        if self.peek[0] == "(":
            self.next()
            if self.peek[0] != ")":
                args.append(self.expect("var")[1])
                while self.peek[0] == ",":
                    self.next()
                    args.append(self.expect("var")[1])
            self.expect(")")
        return Atom(value, tuple(args))

    def conjunction(self, separators) -> list:
        items = [self.literal()]
        while self.peek[0] in separators:
            self.next()
            items.append(self.literal())
        return items


def load_program(text: str) -> Program:
    """Parse and validate a program text."""
    p = _Parser(text)
    edges, declared, clauses = [], set(), []
    arities = {}
    typed = []
    while p.peek[0] != "eof":
        kind, value, line = p.peek
        if kind == "name" and value in ("subtype", "type") and p.tokens[p.i + 1][0] == "name":
            p.next()
            first = p.expect("name")[1]
            if value == "subtype":
                edges.append((first, p.expect("name")[1]))
            else:
                declared.add(first)
            p.expect(".")
            continue
        head = p.literal()
        if not isinstance(head, Atom):
            raise ProgramError("clause head must be an atom", line)
        body = []
        if p.peek[0] == ":-":
            p.next()
            body = p.conjunction((",", "&"))
        p.expect(".")
        for lit in [head] + body:
            if isinstance(lit, Atom):
                _check_arity(arities, lit, line)
            else:
                typed.append((lit.type, line))
        clauses.append(Clause(head, tuple(body)))
    try:
        hierarchy = TypeHierarchy.from_edges(edges, declared)
    except HierarchyError as exc:
        raise ProgramError(str(exc)) from exc
    for t, line in typed:
        if t not in hierarchy:
            raise ProgramError(f"unknown type {t!r}", line)
    return Program(hierarchy, tuple(clauses))


def parse_goal(text: str, program: Optional[Program] = None, line: Optional[int] = None) -> Goal:
    """Parse a query such as ``s(Z) & Z = a``; a trailing period is allowed."""
    p = _Parser(text, line or 1)
    try:
        if p.peek[0] == "eof":
            raise ProgramError("empty query", p.peek[2])
        items = p.conjunction(("&", ","))
        if p.peek[0] == ".":
            p.next()
        if p.peek[0] != "eof":
            raise ProgramError(f"unexpected {p.peek[1]!r} after query", p.peek[2])
        goal = Goal(tuple(items))
        if program is not None:
            program.check_goal(goal)
    except ProgramError as exc:
        if line is not None and exc.line is None:
            raise ProgramError(str(exc), line) from exc
        raise
    return goal


def load_corpus(text: str, program: Optional[Program] = None) -> list:
    """Parse a corpus into ``[(goal, count), ...]``; repeated queries are merged."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(None, 1)
        if len(parts) != 2 or not parts[0].isdigit():
            raise ProgramError("expected '<count><TAB><query>'", lineno)
        count = int(parts[0])
        if count < 1:
            raise ProgramError("query count must be at least 1", lineno)
        goal = parse_goal(parts[1], program, line=lineno)
        entries[goal] = entries.get(goal, 0) + count
    return list(entries.items())


def format_corpus(entries: Sequence[tuple]) -> str:
    return "".join(f"{count}\t{goal}\n" for goal, count in entries)
