from fractions import Fraction

import numpy as np
import pytest

from homsel.games import (Game, best_response, bilinear_game, bimatrix_solve, grid_points,
                          matching_pennies, nash_search, polynomial_like_check, refine_intersection,
                          response_field)

from oracles import bimatrix_equilibria

# costs (years in prison); the first action is "stay silent"
PD1 = [[1, 3], [0, 2]]
PD2 = [[1, 0], [3, 2]]


def test_grid_points():
    g = grid_points(2, 2)
    assert g.shape == (9, 2)
    assert g[0].tolist() == [0, 0] and g[-1].tolist() == [1, 1]


def test_best_response_pure_and_indifferent():
    mp = matching_pennies()
    br = best_response(mp, 0, [1.0], 16, 1e-9)
    assert br.points.tolist() == [[0.0]] and not br.flagged
    flat = best_response(mp, 0, [0.5], 16, 1e-9)
    assert flat.extended and flat.component_sizes == [17]
    with pytest.raises(ValueError):
        best_response(mp, 0, [0.5], 16, 0)


def test_local_minima_of_double_well():
    def cost(p):
        return (p[:, 0] - 0.2) ** 2 * (p[:, 0] - 0.8) ** 2 + 0.01 * p[:, 0] + 0 * p[:, 1]
    g = Game((1, 1), [cost, cost])
    br = best_response(g, 0, [0.0], 64, 1e-12, local=True, k=1)
    assert len(br.points) == 2 and br.exceeds
    assert abs(br.points[0][0] - 0.2) < 0.05 and abs(br.points[1][0] - 0.8) < 0.05


def test_prisoners_dilemma():
    sol = bimatrix_solve(PD1, PD2)
    assert sol.points == [(Fraction(0), Fraction(0))] and not sol.continuum
    res = nash_search(bilinear_game(PD1, PD2), 32, 1e-3)
    assert [c.point for c in res.certificates] == [(0.0, 0.0)]
    assert res.min_max_regret == 0.0
    field = response_field(bilinear_game(PD1, PD2), 0, 16, 1e-9)
    assert all(v.tolist() == [[0.0]] for v in field.field.values)
    assert polynomial_like_check(field, 1).status == "FEASIBLE"


def test_matching_pennies_certificate_audit():
    mp = matching_pennies()
    res = nash_search(mp, 64, 1e-2)
    assert res.certificates
    for c in res.certificates:
        assert max(abs(v - 0.5) for v in c.point) <= 1 / 64 * 2
        assert c.audit(mp)
    assert bimatrix_solve([[1, -1], [-1, 1]], [[-1, 1], [1, -1]]).points == [(Fraction(1, 2), Fraction(1, 2))]


def test_audit_rejects_forged_certificate():
    mp = matching_pennies()
    res = nash_search(mp, 16, 1e-2)
    c = res.certificates[0]
    forged = type(c)((1.0, 1.0), (0.0, 0.0), c.tol, c.resolution)
    assert not forged.audit(mp)


def test_exact_solver_matches_support_enumeration():
    rng = np.random.default_rng(17)
    for _ in range(300):
        M1, M2 = rng.integers(-4, 5, (2, 2)), rng.integers(-4, 5, (2, 2))
        sol = bimatrix_solve(M1.tolist(), M2.tolist())
        if sol.continuum:
            continue
        got = sorted((float(x), float(y)) for x, y in sol.points)
        want = bimatrix_equilibria(M1, M2)
        assert len(got) == len(want)
        assert np.allclose(got, want)


def test_coordination_game_has_three_equilibria():
    C = [[0, 1], [1, 0]]
    sol = bimatrix_solve(C, C)
    assert sol.points == [(0, 0), (Fraction(1, 2), Fraction(1, 2)), (1, 1)]


def test_degenerate_game_reports_continuum():
    sol = bimatrix_solve([[0, 0], [0, 0]], [[0, 1], [1, 0]])
    assert sol.continuum


def test_branch_and_bound_matches_exhaustive():
    rng = np.random.default_rng(4)
    for _ in range(5):
        g = bilinear_game(rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, (2, 2)))
        a = nash_search(g, 64, 0.02)
        b = nash_search(g, 64, 0.02, brute_limit=0)
        assert a.method == "exhaustive" and b.method == "branch-and-bound"
        assert a.min_max_regret == pytest.approx(b.min_max_regret, abs=1e-12)
        assert sorted(c.point for c in a.certificates) == sorted(c.point for c in b.certificates)


def test_refinement_converges_for_matching_pennies():
    rep = refine_intersection(matching_pennies(), [0.1, 0.05, 0.02], [16, 32, 64])
    assert rep.emptied_at is None
    assert rep.limit == pytest.approx((0.5, 0.5), abs=1 / 64)
    with pytest.raises(ValueError):
        refine_intersection(matching_pennies(), [0.01, 0.1], [16, 32])


def test_regret_is_nonnegative_and_zero_at_best_response():
    g = bilinear_game(PD1, PD2)
    prof = grid_points(2, 8)
    r = g.regrets(prof, 8)
    assert (r >= 0).all()
    assert r[prof.tolist().index([0.0, 0.0])].tolist() == [0.0, 0.0]


def test_finer_grid_keeps_nearby_certificates():
    rng = np.random.default_rng(12)
    games = [matching_pennies()] + [bilinear_game(rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, (2, 2)))
                                    for _ in range(5)]
    for g in games:
        coarse = nash_search(g, 32, 1e-2)
        fine = nash_search(g, 64, 1e-2)
        F = np.array([c.point for c in fine.certificates])
        for c in coarse.certificates:
            assert np.abs(F - c.point).max(axis=1).min() <= 2 / 32 + 1e-12
