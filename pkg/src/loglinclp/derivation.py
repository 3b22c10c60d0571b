"""Constraint solving and depth-first enumeration of proof trees.

Goal reduction is performed on the leftmost atom with clauses tried in
program order.  The constraints of a new goal are absorbed into the
solved store as soon as the goal is formed, so every derivation node
carries the remaining atoms plus a satisfiable store, and failure
derivations are cut the moment a meet hits bottom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from loglinclp.hierarchy import BOTTOM, TypeHierarchy
from loglinclp.program import Atom, Constraint, Goal, Program

DEFAULT_MAX_DEPTH = 20
DEFAULT_MAX_TREES = 10000


def solve(constraints: Iterable[Constraint], hierarchy: TypeHierarchy) -> Optional[tuple]:
    """Meet all type constraints per variable.

    Returns the solved store as a tuple of constraints, one per variable in
    order of first mention, or None when some variable's meet is bottom.
    """
    store = {}
    for c in constraints:
        prev = store.get(c.variable)
        if prev is None:
            store[c.variable] = c.type
            continue
        meet = hierarchy.glb(prev, c.type)
        if meet is BOTTOM:
            return None
        store[c.variable] = meet
    return tuple(Constraint(v, t) for v, t in store.items())


@dataclass(frozen=True)
class ProofNode:
    """One derivation step: remaining atoms and the solved store.

    ``clause`` is the index of the clause resolved against the leftmost
    atom to produce the children; it is None at the terminal node.
    """

    atoms: tuple
    store: tuple
    clause: Optional[int] = None
    children: tuple = ()

    @property
    def label(self) -> tuple:
        return self.atoms + self.store

    @property
    def is_terminal(self) -> bool:
        return not self.atoms

    def walk(self) -> Iterator["ProofNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def __str__(self):
        if self.is_terminal:
            return "[" + (" & ".join(map(str, self.store)) or "true") + "]"
        return " & ".join(map(str, self.label))


@dataclass(frozen=True)
class ProofTree:
    goal: Goal
    root: ProofNode

    @property
    def nodes(self) -> list:
        """Nodes in preorder."""
        return list(self.root.walk())

    @property
    def answer(self) -> tuple:
        node = self.root
        while node.children:
            node = node.children[0]
        return node.store

    def __len__(self):
        return sum(1 for _ in self.root.walk())

    def render(self, indent: str = "  ", prefix: str = "") -> str:
        """One node per line, ``indent`` per level, every line led by ``prefix``."""
        lines = []

        def visit(node, depth):
            note = f"    % clause {node.clause + 1}" if node.clause is not None else ""
            lines.append(f"{prefix}{indent * depth}{node}{note}")
            for child in node.children:
                visit(child, depth + 1)

        visit(self.root, 0)
        return "\n".join(lines)


def answer(tree: ProofTree) -> tuple:
    return tree.answer


@dataclass
class Enumeration(Sequence):
    """Proof trees of one query in discovery order.

    ``truncated`` is set when more than ``max_trees`` trees exist;
    ``depth_limited`` when some branch was cut by the depth bound.
    """

    trees: list = field(default_factory=list)
    truncated: bool = False
    depth_limited: bool = False

    def __getitem__(self, i):
        return self.trees[i]

    def __len__(self):
        return len(self.trees)


def _fresh(var: str, step: int) -> str:
    # A leading underscore cannot occur in source variables, so no clash.
    return f"_{var.lstrip('_')}_{step}"


def _resolve(atom: Atom, clause, step: int):
    """Rename ``clause`` apart and unify its head with ``atom``.

    Returns (substitution on goal variables, renamed body).
    """
    renaming = {v: _fresh(v, step) for v in clause.variables()}
    head = clause.head.rename(renaming)
    fresh = set(renaming.values())
    parent = {}

    def find(v):
        while v in parent:
            v = parent[v]
        return v

    for h, g in zip(head.args, atom.args):
        rh, rg = find(h), find(g)
        if rh == rg:
            continue
        if rh in fresh:
            parent[rh] = rg
        elif rg in fresh:
            parent[rg] = rh
        else:
            parent[rg] = rh
    subst = {v: find(v) for v in list(parent)}
    body = tuple(lit.rename(renaming).rename(subst) for lit in clause.body)
    return subst, body


def enumerate_proof_trees(program: Program, goal: Goal,
                          max_depth: int = DEFAULT_MAX_DEPTH,
                          max_trees: int = DEFAULT_MAX_TREES) -> Enumeration:
    """All proof trees of ``goal`` reachable within ``max_depth`` resolution steps."""
    program.check_goal(goal)
    h = program.hierarchy
    result = Enumeration()
    root_store = solve(goal.constraints, h)
    if root_store is None:
        return result

    # Each branch is a list of (atoms, store, clause) frames; a success
    # turns the current branch into a chain of ProofNodes.
    branch = []

    def emit():
        node = None
        for atoms, store, clause in reversed(branch):
            node = ProofNode(atoms, store, clause, (node,) if node is not None else ())
        result.trees.append(ProofTree(goal, node))

    def search(atoms, store, depth):
        if not atoms:
            branch.append((atoms, store, None))
            emit()
            branch.pop()
            return len(result.trees) > max_trees
        if depth >= max_depth:
            result.depth_limited = True
            return False
        selected, rest = atoms[0], atoms[1:]
        for ci in program.clauses_for(selected.predicate):
            clause = program.clauses[ci]
            if clause.head.arity != selected.arity:
                continue
            subst, body = _resolve(selected, clause, depth + 1)
            new_store = solve(
                [c.rename(subst) for c in store] + [b for b in body if isinstance(b, Constraint)], h)
            if new_store is None:
                continue
            new_atoms = tuple(b for b in body if isinstance(b, Atom)) + tuple(a.rename(subst) for a in rest)
            branch.append((atoms, store, ci))
            stop = search(new_atoms, new_store, depth + 1)
            branch.pop()
            if stop:
                return True
        return False

    search(goal.atoms, root_store, 0)
    if len(result.trees) > max_trees:
        del result.trees[max_trees:]
        result.truncated = True
    return result
