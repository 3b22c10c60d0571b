"""Shared fixtures: the two-type-chain example program and random small programs."""

import numpy as np

from loglinclp.derivation import enumerate_proof_trees
from loglinclp.model import LogLinearModel, TrainingSample, feature_matrix
from loglinclp.patterns import PropertyPattern, generate_candidates, parse_pattern
from loglinclp.program import Atom, Clause, Constraint, Goal, Program, load_corpus, load_program
from loglinclp.hierarchy import TypeHierarchy

PROGRAM = """\
# a < c < e, b < d < e; c and d disjoint
subtype a c.
subtype c e.
subtype b d.
subtype d e.

s(Z) :- p(Z), q(Z).
p(Z) :- Z = a.
p(Z) :- Z = b.
q(Z) :- Z = a.
q(Z) :- Z = b.
"""

CORPUS = """\
3\ts(Z) & Z = a
1\ts(Z) & Z = b
4\ts(Z) & Z = c
1\ts(Z) & Z = d
1\ts(Z) & Z = e
"""

T1 = "[V0=a]"
T2 = "[V0=b]"


def example_program():
    return load_program(PROGRAM)


def example_sample(corpus=CORPUS):
    program = example_program()
    return TrainingSample.from_corpus(program, load_corpus(corpus, program))


def example_model(patterns=(T1, T2), lam=None, corpus=CORPUS):
    return LogLinearModel.build(example_sample(corpus), [parse_pattern(p) for p in patterns], lam)


# --------------------------------------------------------------------------
# random fixtures
# --------------------------------------------------------------------------

def random_hierarchy(rng):
    n = int(rng.integers(3, 7))
    names = [f"t{i}" for i in range(n)]
    edges = [(names[i], names[int(rng.integers(0, i))]) for i in range(1, n)]
    return TypeHierarchy.from_edges(edges, names), names


def random_program(rng):
    hierarchy, types = random_hierarchy(rng)
    npred = int(rng.integers(2, 5))
    arity = {f"p{j}": int(rng.choice([1, 1, 2])) for j in range(npred)}
    preds = list(arity)
    nclauses = int(rng.integers(npred, 9))
    owners = preds + [preds[int(rng.integers(0, npred))] for _ in range(nclauses - npred)]
    owners.sort(key=preds.index)
    clauses = []
    for owner in owners:
        j = preds.index(owner)
        head_vars = ["X", "Y"][:arity[owner]]
        pool = head_vars + ["W"]
        body = []
        for _ in range(int(rng.integers(0, 3))):
            later = preds[j + 1:] if rng.random() < 0.9 else preds[j:]
            if not later:
                continue
            callee = later[int(rng.integers(0, len(later)))]
            args = tuple(pool[int(rng.integers(0, len(pool)))] for _ in range(arity[callee]))
            body.append(Atom(callee, args))
        for _ in range(int(rng.integers(0, 3))):
            body.append(Constraint(pool[int(rng.integers(0, len(pool)))],
                                   types[int(rng.integers(0, len(types)))]))
        clauses.append(Clause(Atom(owner, tuple(head_vars)), tuple(body)))
    return Program(hierarchy, tuple(clauses)), types


def random_corpus(seed, max_depth=6):
    """(program, entries, rng) with at most 6 queries, each with a proof tree.

    Retries with derived seeds until some query has a proof tree.
    """
    for attempt in range(200):
        rng = np.random.default_rng([seed, attempt])
        program, types = random_program(rng)
        entries = []
        for _ in range(int(rng.integers(1, 7))):
            pred = f"p{int(rng.integers(0, len(program.arities)))}"
            if pred not in program.arities:
                continue
            args = ("Z", "U")[:program.arities[pred]]
            conj = [Atom(pred, args)]
            if rng.random() < 0.7:
                conj.append(Constraint("Z", types[int(rng.integers(0, len(types)))]))
            goal = Goal(tuple(conj))
            found = enumerate_proof_trees(program, goal, max_depth, 40)
            if found and not found.truncated and goal not in dict(entries):
                entries.append((goal, int(rng.integers(1, 5))))
        if entries:
            return program, entries, rng
    raise RuntimeError(f"no usable fixture for seed {seed}")


def random_fixture(seed, max_props=5, max_depth=6):
    """(sample, patterns, rng): a random corpus plus up to ``max_props`` patterns."""
    program, entries, rng = random_corpus(seed, max_depth)
    sample = TrainingSample.from_corpus(program, entries, max_depth, 40)
    pool = generate_candidates([], sample.trees)
    if len(pool) > 1:
        seeds = [pool[int(i)] for i in rng.choice(len(pool), size=min(2, len(pool)), replace=False)]
        pool = generate_candidates(seeds, sample.trees) + seeds
    k = int(rng.integers(1, max_props + 1))
    picks = rng.choice(len(pool), size=min(k, len(pool)), replace=False)
    patterns = []
    for i in picks:
        if pool[int(i)].key not in {p.key for p in patterns}:
            patterns.append(pool[int(i)])
    return sample, patterns, rng


def unambiguous_sample(seed, max_depth=6):
    """Sample of the single-tree queries of a random corpus, all with count 2.

    Under the uniform model its empirical tree distribution is uniform too.
    Returns None when the corpus has no such query.
    """
    program, entries, _ = random_corpus(seed, max_depth)
    keep = [(g, 2) for g, _ in entries if len(enumerate_proof_trees(program, g, max_depth, 40)) == 1]
    return TrainingSample.from_corpus(program, keep, max_depth, 40) if keep else None


def random_model(seed, max_props=5, scale=1.0):
    """Random fixture with random log-parameters."""
    sample, patterns, rng = random_fixture(seed, max_props)
    lam = rng.normal(0.0, scale, size=len(patterns))
    return LogLinearModel.build(sample, patterns, lam)


def terminal_patterns(sample):
    """Single-node patterns of every terminal label; each tree then has nu_# == 1."""
    out = {}
    for tree in sample.trees:
        node = tree.root
        while node.children:
            node = node.children[0]
        p = PropertyPattern.from_node(node)
        out.setdefault(p.key, p)
    return list(out.values())


def counts(pattern, sample):
    """Per-tree occurrence counts of ``pattern`` over the sample's space."""
    return feature_matrix(sample.trees, [pattern])[:, 0]
