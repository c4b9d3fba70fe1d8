import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homsel.snf import invariant_factors, matmul, smith_normal_form

from oracles import bareiss_det, gcd_minor_factors, is_unimodular

matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=m, max_size=m)))


def test_bareiss_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        M = rng.integers(-5, 6, (n, n))
        assert bareiss_det(M.tolist()) == round(np.linalg.det(M))


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_smith_form_against_minors(M):
    S, U, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == S
    assert is_unimodular(U) and is_unimodular(V)
    diag = [S[i][i] for i in range(min(len(S), len(S[0])))]
    nonzero = [d for d in diag if d]
    assert all(d > 0 for d in nonzero)
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    assert diag[len(nonzero):] == [0] * (len(diag) - len(nonzero))
    assert all(S[i][j] == 0 for i in range(len(S)) for j in range(len(S[0])) if i != j)
    assert nonzero == gcd_minor_factors(M)


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_inverses(M):
    S, U, V, Ui, Vi = smith_normal_form(M, with_inverses=True)
    eye = lambda n: [[int(i == j) for j in range(n)] for i in range(n)]
    assert matmul(U, Ui) == eye(len(U))
    assert matmul(V, Vi) == eye(len(V))


def test_known_forms():
    assert invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert invariant_factors([[0, 0], [0, 0]]) == []
    assert invariant_factors([[2, 0], [0, 3]]) == [1, 6]


def test_empty_rows():
    S, U, V = smith_normal_form([], ncols=3)
    assert S == [] and V == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_large_entries_exact():
    M = [[10 ** 30, 3], [7, 10 ** 25]]
    S, U, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == S
    assert S[0][0] * S[1][1] == abs(bareiss_det(M))
