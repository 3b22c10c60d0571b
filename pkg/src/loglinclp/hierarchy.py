"""Finite type hierarchies with greatest-lower-bound computation.

Types denote sets; ``sub <= super`` means the denotation of ``sub`` is
contained in that of ``super``.  Two types whose denotations are disjoint
have no common lower bound and their meet is :data:`BOTTOM`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional


#: Meet of two types that share no lower bound.
BOTTOM = None


class HierarchyError(ValueError):
    """Raised for cyclic hierarchies or pairs without a unique meet."""


@dataclass(frozen=True)
class TypeHierarchy:
    symbols: frozenset
    subtype_edges: frozenset
    _below: dict = field(init=False, repr=False, compare=False)
    _meet: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        unknown = {s for edge in self.subtype_edges for s in edge} - self.symbols
        if unknown:
            raise HierarchyError(f"edges mention undeclared types: {sorted(unknown)}")
        below = _reflexive_transitive_below(self.symbols, self.subtype_edges)
        for s in self.symbols:
            for t in below[s]:
                if t != s and s in below[t]:
                    raise HierarchyError(f"cycle in type hierarchy through {s!r} and {t!r}")
        object.__setattr__(self, "_below", below)
        object.__setattr__(self, "_meet", _meet_table(self.symbols, below))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], symbols: Iterable[str] = ()) -> "TypeHierarchy":
        edges = frozenset((str(a), str(b)) for a, b in edges)
        syms = frozenset(symbols) | {s for e in edges for s in e}
        return cls(syms, edges)

    def __contains__(self, symbol) -> bool:
        return symbol in self.symbols

    def leq(self, s: str, t: str) -> bool:
        """True when ``s`` is a (reflexive, transitive) subtype of ``t``."""
        return s in self._below[t]

    def glb(self, s: str, t: str) -> Optional[str]:
        """Greatest common lower bound of ``s`` and ``t``, or BOTTOM."""
        if s == t:
            return s
        key = (s, t) if s < t else (t, s)
        return self._meet[key]

    def top(self) -> Optional[str]:
        """The unique greatest type, if the hierarchy has one."""
        tops = [s for s in self.symbols if len(self._below[s]) == len(self.symbols)]
        return tops[0] if tops else None


def glb(s: str, t: str, h: TypeHierarchy) -> Optional[str]:
    return h.glb(s, t)


def _reflexive_transitive_below(symbols, edges):
    parents = {s: set() for s in symbols}
    for sub, sup in edges:
        parents[sub].add(sup)
    below = {s: {s} for s in symbols}
    for s in symbols:
        stack = list(parents[s])
        seen = set()
        while stack:
            sup = stack.pop()
            if sup in seen:
                continue
            seen.add(sup)
            below[sup].add(s)
            stack.extend(parents[sup])
    return {s: frozenset(b) for s, b in below.items()}


def _meet_table(symbols, below):
    table = {}
    for s, t in combinations(sorted(symbols), 2):
        common = below[s] & below[t]
        if not common:
            table[s, t] = BOTTOM
            continue
        greatest = [g for g in common if common <= below[g]]
        if len(greatest) != 1:
            maximal = sorted(g for g in common if not any(g != h and g in below[h] for h in common))
            raise HierarchyError(
                f"types {s!r} and {t!r} have no unique greatest lower bound "
                f"(maximal common subtypes: {', '.join(maximal)})")
        table[s, t] = greatest[0]
    return table
