import itertools
import random

from hypothesis import given, settings, strategies as st

from contingent_pomcp.logic import Literal, conj, negate
from contingent_pomcp.sat import CNF, enumerate_models, satisfiable, solve
from oracles import models, random_formula


def brute_sat(n, clauses):
    for bits in itertools.product([False, True], repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


@given(st.integers(0, 100_000))
@settings(max_examples=150, deadline=None)
def test_dpll_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    clauses = [
        [rng.choice([-1, 1]) * rng.randint(1, n) for _ in range(rng.randint(1, 3))]
        for _ in range(rng.randint(1, 20))
    ]
    model = solve(n, clauses)
    assert (model is not None) == brute_sat(n, clauses)
    if model is not None:
        assert all(any(model[abs(l)] == (1 if l > 0 else -1) for l in c) for c in clauses)


@given(st.integers(0, 100_000))
@settings(max_examples=100, deadline=None)
def test_tseitin_projection_preserves_models(seed):
    f = random_formula(random.Random(seed), 5)
    cnf = CNF(5)
    cnf.assert_formula(f)
    assert sorted(enumerate_models(cnf, range(5))) == models(f, 5)


def test_empty_clause_unsat():
    assert solve(2, [[1], []]) is None
    assert solve(0, []) is not None


def test_entailment_via_refutation():
    p, q = Literal(0), Literal(1)
    cnf = CNF(2)
    cnf.assert_formula(conj(p, q))
    cnf.assert_formula(negate(p))
    assert not satisfiable(cnf)
