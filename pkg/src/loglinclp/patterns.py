"""Properties of proof trees as connected, rooted subtree patterns.

A pattern node carries a derivation-node label (remaining atoms followed by
the solved store) whose variables are abstract.  A pattern occurs at a
tree node when its root label matches that node and its children embed,
order preserving, into the node's children, all under one consistent
one-to-one renaming of variables.  Patterns are kept in canonical form,
with variables named V0, V1, ... in preorder first-occurrence order, and
serialize to a bracketed prefix form such as ``[q(V0) & V0=a [V0=a]]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from loglinclp.derivation import ProofNode, ProofTree
from loglinclp.program import Atom, Constraint


@dataclass(frozen=True)
class PatternNode:
    label: tuple
    children: tuple = ()

    def walk(self, path=()):
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.walk(path + (i,))


def _literal_vars(lit):
    return lit.args if isinstance(lit, Atom) else (lit.variable,)


def _rename_node(node: PatternNode, mapping) -> PatternNode:
    return PatternNode(tuple(lit.rename(mapping) for lit in node.label),
                       tuple(_rename_node(c, mapping) for c in node.children))


def _canonical(node: PatternNode) -> PatternNode:
    mapping = {}
    for _, n in node.walk():
        for lit in n.label:
            for v in _literal_vars(lit):
                if v not in mapping:
                    mapping[v] = f"V{len(mapping)}"
    return _rename_node(node, mapping)


def _format_label(label) -> str:
    parts = []
    for lit in label:
        if isinstance(lit, Atom):
            parts.append(f"{lit.predicate}({','.join(lit.args)})" if lit.args else lit.predicate)
        else:
            parts.append(f"{lit.variable}={lit.type}")
    return " & ".join(parts) or "true"


def _format(node: PatternNode) -> str:
    inner = _format_label(node.label)
    if node.children:
        inner += " " + " ".join(_format(c) for c in node.children)
    return f"[{inner}]"


@dataclass(frozen=True)
class PropertyPattern:
    """A property function: counts anchors at which ``root`` occurs."""

    root: PatternNode

    def __post_init__(self):
        object.__setattr__(self, "root", _canonical(self.root))
        object.__setattr__(self, "_key", _format(self.root))

    @classmethod
    def from_node(cls, node) -> "PropertyPattern":
        """Single-node pattern with the label of a proof or pattern node."""
        return cls(PatternNode(tuple(node.label)))

    @property
    def key(self) -> str:
        """Canonical serialization; unique per pattern up to renaming."""
        return self._key

    id = key

    @property
    def size(self) -> int:
        return sum(1 for _ in self.root.walk())

    def __str__(self):
        return self._key

    def __lt__(self, other):
        return (self.size, self.key) < (other.size, other.key)


# --------------------------------------------------------------------------
# matching
# --------------------------------------------------------------------------

def _match_label(plabel, tlabel, vmap, used):
    """Extend ``vmap`` (pattern var -> tree var) so the labels coincide."""
    if len(plabel) != len(tlabel):
        return None
    vmap = dict(vmap)
    used = set(used)
    for p, t in zip(plabel, tlabel):
        if isinstance(p, Atom):
            if not isinstance(t, Atom) or p.predicate != t.predicate or p.arity != t.arity:
                return None
            pairs = zip(p.args, t.args)
        else:
            if not isinstance(t, Constraint) or p.type != t.type:
                return None
            pairs = ((p.variable, t.variable),)
        for pv, tv in pairs:
            bound = vmap.get(pv)
            if bound is None:
                if tv in used:
                    return None
                vmap[pv] = tv
                used.add(tv)
            elif bound != tv:
                return None
    return vmap, used


def _embeddings(pnode: PatternNode, tnode: ProofNode, vmap, used, path=()):
    """Yield (vmap, used, nodemap) for every embedding of pnode at tnode."""
    matched = _match_label(pnode.label, tnode.label, vmap, used)
    if matched is None:
        return
    vmap, used = matched
    yield from _embed_children(pnode.children, 0, tnode.children, 0, vmap, used,
                               {path: tnode}, path)


def _embed_children(pkids, i, tkids, j, vmap, used, nodemap, path):
    if i == len(pkids):
        yield vmap, used, nodemap
        return
    for jj in range(j, len(tkids) - (len(pkids) - i) + 1):
        for vm, us, nm in _embeddings(pkids[i], tkids[jj], vmap, used, path + (i,)):
            yield from _embed_children(pkids, i + 1, tkids, jj + 1, vm, us,
                                       {**nodemap, **nm}, path)


def occurs_at(pattern: PropertyPattern, node: ProofNode) -> bool:
    return next(_embeddings(pattern.root, node, {}, frozenset()), None) is not None


def count_occurrences(pattern: PropertyPattern, tree) -> int:
    """Number of nodes of ``tree`` at which ``pattern`` is anchored."""
    root = tree.root if isinstance(tree, ProofTree) else tree
    return sum(1 for node in root.walk() if occurs_at(pattern, node))


@dataclass(frozen=True)
class PropertyVector:
    counts: tuple = ()

    @property
    def total(self) -> int:
        """Sum of all property counts."""
        return sum(self.counts)

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    def __iter__(self):
        return iter(self.counts)


def property_vector(tree, patterns: Sequence[PropertyPattern]) -> PropertyVector:
    return PropertyVector(tuple(count_occurrences(p, tree) for p in patterns))


# --------------------------------------------------------------------------
# candidate generation
# --------------------------------------------------------------------------

def _relabel(node: ProofNode, inverse: dict) -> tuple:
    """Label of ``node`` with tree variables mapped back into the pattern."""
    fresh = {}
    for lit in node.label:
        for v in _literal_vars(lit):
            if v not in inverse and v not in fresh:
                fresh[v] = f"T{len(fresh)}"
    return tuple(lit.rename({**inverse, **fresh}) for lit in node.label)


def _extensions(pattern: PropertyPattern, tree: ProofTree) -> Iterator[PropertyPattern]:
    """One-step extensions of ``pattern`` observed in ``tree``.

    A leaf of the pattern grows by the resolution step taken at its image,
    and the root grows by the step that produced its image.
    """
    leaves = [path for path, n in pattern.root.walk() if not n.children]
    parent = {}
    for node in tree.root.walk():
        for child in node.children:
            parent[id(child)] = node
    for anchor in tree.root.walk():
        for vmap, _, nodemap in _embeddings(pattern.root, anchor, {}, frozenset()):
            inverse = {tv: pv for pv, tv in vmap.items()}
            for path in leaves:
                for child in nodemap[path].children:
                    yield PropertyPattern(_graft(pattern.root, path, PatternNode(_relabel(child, inverse))))
            above = parent.get(id(anchor))
            if above is not None:
                yield PropertyPattern(PatternNode(_relabel(above, inverse), (pattern.root,)))


def _graft(node: PatternNode, path, leaf: PatternNode) -> PatternNode:
    if not path:
        return PatternNode(node.label, node.children + (leaf,))
    kids = list(node.children)
    kids[path[0]] = _graft(kids[path[0]], path[1:], leaf)
    return PatternNode(node.label, tuple(kids))


def generate_candidates(selected: Iterable[PropertyPattern],
                        sample_trees: Sequence[ProofTree]) -> list:
    """Single-node patterns seen in the trees plus one-step extensions of ``selected``.

    Extensions grow a selected pattern by one derivation step, below one of
    its leaves or above its root, as observed at some occurrence in the
    trees.

    Patterns already in ``selected`` are left out.  The result is
    deduplicated and sorted by (size, key).
    """
    selected = list(selected)
    exclude = {p.key for p in selected}
    found = {}
    for tree in sample_trees:
        for node in tree.root.walk():
            cand = PropertyPattern.from_node(node)
            found.setdefault(cand.key, cand)
    for pattern in selected:
        for tree in sample_trees:
            for cand in _extensions(pattern, tree):
                found.setdefault(cand.key, cand)
    return sorted(c for k, c in found.items() if k not in exclude)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_PTOKEN = re.compile(r"\s*(?:([\[\]&(),=])|([A-Z][A-Za-z0-9_]*)|([a-z][A-Za-z0-9_]*))")


class PatternSyntaxError(ValueError):
    pass


def parse_pattern(text: str) -> PropertyPattern:
    """Inverse of ``PropertyPattern.key``; variable names may be arbitrary."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _PTOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise PatternSyntaxError(f"bad pattern syntax at {text[pos:]!r}")
        kind = "p" if m.group(1) else "var" if m.group(2) else "name"
        tokens.append((kind, m.group(m.lastindex)))
        pos = m.end()
    tokens.append(("eof", ""))
    i = 0

    def take(value=None, kind=None):
        nonlocal i
        k, v = tokens[i]
        if (value is not None and v != value) or (kind is not None and k != kind):
            raise PatternSyntaxError(f"expected {value or kind!r}, found {v or 'end'!r} in {text!r}")
        i += 1
        return v

    def literal():
        if tokens[i][0] == "var":
            var = take(kind="var")
            take("=")
            return Constraint(var, take(kind="name"))
        name = take(kind="name")
        args = []
        if tokens[i][1] == "(":
            take("(")
            if tokens[i][1] != ")":
                args.append(take(kind="var"))
                while tokens[i][1] == ",":
                    take(",")
                    args.append(take(kind="var"))
            take(")")
        return Atom(name, tuple(args))

    def node():
        take("[")
        label = []
        if tokens[i] == ("name", "true") and tokens[i + 1][1] in ("[", "]"):
            take("true")
        else:
            label.append(literal())
            while tokens[i][1] == "&":
                take("&")
                label.append(literal())
        kids = []
        while tokens[i][1] == "[":
            kids.append(node())
        take("]")
        return PatternNode(tuple(label), tuple(kids))

    root = node()
    take(kind="eof")
    return PropertyPattern(root)


def load_patterns(text: str) -> list:
    """One serialized pattern per line; blank lines and ``#`` comments skipped."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_pattern(line))
    return out
