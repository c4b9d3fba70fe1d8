import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from homsel.constructions import CirclePath, sample_g_P, sample_h_C, to_disk
from homsel.lift import build_strand_system, forced_zero, lift_to_configuration
from homsel.metrics import config_distance
from homsel.multifunction import sample_multifunction


def can_be_positive(rows, nvar, j):
    """Dual route: maximise x_j over A x = 0, 0 <= x <= 1."""
    A = np.zeros((max(len(rows), 1), nvar))
    for r, row in enumerate(rows):
        for k, c in row.items():
            A[r, k] = c
    c = np.zeros(nvar)
    c[j] = -1
    res = linprog(c, A_eq=A, b_eq=np.zeros(len(A)), bounds=[(0, 1)] * nvar, method="highs-ipm")
    return -res.fun > 1e-7


def check_edges_admissible(f, lift):
    g = lift.lifted
    for u, v in f.edges():
        a, b = f.values[u], f.values[v]
        d = np.abs(a[:, None] - b[None]).max(axis=2)
        hd = max(d.min(axis=1).max(), d.min(axis=0).max())
        assert config_distance(g.configuration(u), g.configuration(v)) <= hd * (1 + 1e-9) + 1e-12


def test_single_valued_lifts_with_any_weight():
    f = sample_multifunction(lambda x: [(x[0] ** 2,)], 1, 1, 16, 1)
    for M in (1, 3):
        res = lift_to_configuration(f, None, M)
        assert res.status == "FEASIBLE"
        assert res.component_weights == [M]
        assert not res.forced_components


def test_crossing_branches():
    f = sample_multifunction(lambda x: [(x[0],), (1 - x[0],)], 1, 1, 16, 2)
    S = build_strand_system(f)
    assert S.merges
    res = lift_to_configuration(f, S, 2)
    assert res.status == "FEASIBLE"
    check_edges_admissible(f, res)
    assert lift_to_configuration(f, S, 1).status == "FEASIBLE"


def test_handmade_certificates():
    # x0 + x2 = 0 forces x0 and x2; x1 is unconstrained
    rows = [{0: 1, 2: 1}]
    cert = forced_zero(rows, 3)
    assert cert.forced == [0, 2] and cert.support == [1]
    assert cert.verify(rows, 3)
    tampered = type(cert)(cert.support, cert.forced, cert.witness, [-y for y in cert.multipliers])
    assert not tampered.verify(rows, 3)
    rows = [{0: 1, 1: 1, 2: -1}]
    cert = forced_zero(rows, 3)
    assert cert.forced == [] and cert.verify(rows, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.dictionaries(st.integers(0, n - 1), st.integers(-2, 2).filter(bool), min_size=1, max_size=3),
             min_size=1, max_size=4))))
def test_forced_zero_matches_lp_oracle(data):
    nvar, rows = data
    cert = forced_zero(rows, nvar)
    assert cert.verify(rows, nvar)
    assert sorted(cert.forced + cert.support) == list(range(nvar))
    for j in range(nvar):
        assert (j in cert.support) == can_be_positive(rows, nvar, j)


def test_g_P_middle_strand_forced():
    N = 32
    f = sample_g_P(N)
    S = build_strand_system(f)
    res = lift_to_configuration(f, S, 3)
    assert res.status == "FEASIBLE"
    node = f.node_index((16, 20))
    vals = f.values[node]
    assert len(vals) == 3
    # disk polar coordinates (t, a) = (1/4, 1/4); the middle strand sits at P(2 a t)
    assert np.allclose(to_disk(f.node_point(node)), [0.0, 0.25])
    target = CirclePath().P(1, 2 * 0.25 * 0.25)
    i = int(np.argmin(np.abs(vals - target).max(axis=1)))
    assert np.allclose(vals[i], target)
    middle = int(S.component[S.point_id(node, i)])
    assert middle in res.forced_components
    assert res.component_weights[middle] == 0
    others = [int(S.component[S.point_id(node, j)]) for j in range(3) if j != i]
    assert all(c not in res.forced_components for c in others)
    assert sum(res.component_weights[c] for c in others) == 3
    check_edges_admissible(f, res)


def test_h_C_obstructed():
    f = sample_h_C(32)
    res = lift_to_configuration(f, None, 3)
    assert res.status == "OBSTRUCTED"
    T = res.system.n_components
    assert sorted(res.certificate.forced) == list(range(T + 1))
    assert res.certificate.verify(res.system.constraint_rows(), T + 1)
    assert res.to_json()["total_forced_zero"] is True


def test_bad_weight():
    f = sample_multifunction(lambda x: [x], 1, 1, 4, 1)
    with pytest.raises(ValueError):
        lift_to_configuration(f, None, 0)
