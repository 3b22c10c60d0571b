import pytest

import helpers
from loglinclp.derivation import answer, enumerate_proof_trees, solve
from loglinclp.program import Atom, Constraint, ProgramError, load_program, parse_goal

QUERIES = ["s(Z) & Z = a", "s(Z) & Z = b", "s(Z) & Z = c", "s(Z) & Z = d", "s(Z) & Z = e"]

LOOP = """\
type a.
n(X) :- n(X).
n(X) :- X = a.
"""


def trees(program, query, **kw):
    return enumerate_proof_trees(program, parse_goal(query, program), **kw)


class TestSolve:
    def test_examples(self, program):
        h = program.hierarchy
        assert solve([Constraint("Z", "c"), Constraint("Z", "a")], h) == (Constraint("Z", "a"),)
        assert solve([Constraint("Z", "c"), Constraint("Z", "b")], h) is None
        assert solve([Constraint("Z", "a")], h) == (Constraint("Z", "a"),)
        assert solve([], h) == ()

    def test_variables_kept_apart_in_first_mention_order(self, program):
        store = solve([Constraint("Y", "e"), Constraint("Z", "d"), Constraint("Y", "c")],
                      program.hierarchy)
        assert store == (Constraint("Y", "c"), Constraint("Z", "d"))


class TestEnumeration:
    def test_example_counts(self, program):
        assert len(trees(program, "s(Z) & Z = e")) == 2
        assert len(trees(program, "s(Z) & Z = a")) == 1
        assert len(trees(program, "s(Z) & Z = c", max_depth=0)) == 0
        assert [len(trees(program, q)) for q in QUERIES] == [1, 1, 1, 1, 2]

    def test_depth_three_suffices(self, program):
        assert [len(trees(program, q, max_depth=3)) for q in QUERIES] == [1, 1, 1, 1, 2]
        assert [len(trees(program, q, max_depth=2)) for q in QUERIES] == [0] * 5

    def test_node_labels_of_ambiguous_query(self, program):
        first, second = trees(program, "s(Z) & Z = e")
        assert [str(n) for n in first.nodes] == [
            "s(Z) & Z = e", "p(Z) & q(Z) & Z = e", "q(Z) & Z = a", "[Z = a]"]
        assert [str(n) for n in second.nodes] == [
            "s(Z) & Z = e", "p(Z) & q(Z) & Z = e", "q(Z) & Z = b", "[Z = b]"]
        assert [n.clause for n in first.nodes] == [0, 1, 3, None]
        assert [n.clause for n in second.nodes] == [0, 2, 4, None]

    def test_render(self, program):
        (tree,) = trees(program, "s(Z) & Z = c")
        assert tree.render() == (
            "s(Z) & Z = c    % clause 1\n"
            "  p(Z) & q(Z) & Z = c    % clause 2\n"
            "    q(Z) & Z = a    % clause 4\n"
            "      [Z = a]")

    def test_answers(self, program):
        (y1,) = trees(program, "s(Z) & Z = a")
        assert answer(y1) == (Constraint("Z", "a"),)
        first, second = trees(program, "s(Z) & Z = e")
        assert first.answer == (Constraint("Z", "a"),)
        assert second.answer == (Constraint("Z", "b"),)

    def test_failure_and_unknown_predicate(self, program):
        assert len(trees(program, "s(Z) & Z = a & Z = b")) == 0
        assert len(trees(program, "r(Z)")) == 0

    def test_arity_checked(self, program):
        with pytest.raises(ProgramError):
            enumerate_proof_trees(program, parse_goal("s(Z, Z)"))

    def test_deterministic(self, program):
        a = [t.render() for t in trees(program, "s(Z)")]
        b = [t.render() for t in trees(program, "s(Z)")]
        # mixed branches (p gives a, q gives b) are unsatisfiable and pruned
        assert a == b and len(a) == 2

    def test_truncation_is_flagged(self, program):
        found = trees(program, "s(Z)", max_trees=1)
        assert len(found) == 1 and found.truncated
        found = trees(program, "s(Z)", max_trees=2)
        assert len(found) == 2 and not found.truncated
        found = trees(load_program(LOOP), "n(Z)", max_trees=3)
        assert len(found) == 3 and found.truncated

    def test_recursion_bounded_by_depth(self):
        program = load_program(LOOP)
        found = trees(program, "n(Z)", max_depth=5)
        # n(Z) -> n(Z) k times, then the fact: k = 0..4
        assert len(found) == 5
        assert found.depth_limited
        assert [len(t) for t in found] == [6, 5, 4, 3, 2]

    def test_local_variables_renamed_apart(self):
        program = load_program("type a.\ntype b.\nr(X) :- u(X, W), u(W, X).\nu(X, Y) :- Y = b, X = a.\n")
        found = trees(program, "r(Z)")
        # the second call needs W = a and W = b: no proof
        assert len(found) == 0
        program = load_program("type a.\nr(X) :- u(W), u(X).\nu(Y) :- Y = a.\n")
        (tree,) = trees(program, "r(Z)")
        names = {c.variable for n in tree.nodes for c in n.store}
        assert "Z" in names and all(v == "Z" or v.startswith("_") for v in names)


def random_cases():
    yield helpers.example_program(), helpers.example_sample()
    for seed in range(40):
        program, entries, _ = helpers.random_corpus(seed)
        yield program, helpers.TrainingSample.from_corpus(program, entries, 6, 40)


class TestInvariants:
    def test_stores_satisfiable_and_solved(self):
        for program, sample in random_cases():
            for tree in sample.trees:
                for node in tree.nodes:
                    variables = [c.variable for c in node.store]
                    assert len(variables) == len(set(variables))
                    assert solve(node.store, program.hierarchy) == node.store

    def test_answers_imply_goal_constraints(self):
        for program, sample in random_cases():
            for tree in sample.trees:
                got = {c.variable: c.type for c in tree.answer}
                for c in tree.goal.constraints:
                    assert program.hierarchy.leq(got[c.variable], c.type)

    def test_terminal_is_last(self):
        for _, sample in random_cases():
            for tree in sample.trees:
                nodes = tree.nodes
                assert all(not n.is_terminal for n in nodes[:-1])
                assert nodes[-1].is_terminal and nodes[-1].clause is None

    def test_deterministic_on_random_programs(self):
        for seed in range(20):
            program, entries, _ = helpers.random_corpus(seed)
            for goal, _ in entries:
                a = enumerate_proof_trees(program, goal, 6, 40)
                b = enumerate_proof_trees(program, goal, 6, 40)
                assert [t.render() for t in a] == [t.render() for t in b]
