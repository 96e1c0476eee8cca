import itertools
import random

from hypothesis import given, settings, strategies as st

from fedont import logic
from fedont.logic import And, FALSE, Iff, Implies, Not, Or, TRUE, Var


def brute_sat(clauses, n):
    for bits in itertools.product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_solver_matches_brute_force_on_random_cnf(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 8)
    clauses = [[rng.choice((1, -1)) * rng.randint(1, n) for _ in range(rng.randint(1, 3))]
               for _ in range(rng.randint(0, 30))]
    model = logic.Solver(n, clauses).solve()
    assert (model is not None) == brute_sat(clauses, n)
    if model is not None:
        assert all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses)


def test_solver_assumptions_are_incremental():
    s = logic.Solver(2, [[1, 2], [-1, 2]])
    assert s.solve() is not None
    assert s.solve([-2]) is None
    assert s.solve([1])[2] is True
    assert s.solve() is not None


def test_empty_clause_is_unsat():
    assert logic.Solver(1, [[]]).solve() is None


def test_evaluate_and_tseitin_agree():
    a, b, c = Var("a"), Var("b"), Var("c")
    formulas = [
        Iff(a, Not(b)),
        Implies(And((a, b)), c),
        Or((And((a, Not(a))), FALSE)),
        And((TRUE, Iff(a, b), Iff(b, c), Not(c))),
    ]
    for f in formulas:
        expected = any(logic.evaluate(f, row) for row in logic.iter_assignments(["a", "b", "c"]))
        assert logic.is_satisfiable(f) == expected


def test_conj_disj_collapse():
    assert logic.conj([Var("x")]) == Var("x")
    assert logic.conj([]) == TRUE
    assert logic.disj([]) == FALSE
    assert logic.variables(Implies(Var("p"), Not(Var("q")))) == {"p", "q"}
