import math

import numpy as np
import pytest

from homsel.constructions import (CENTRE, CirclePath, WedgeLayout, counterexample_game, cw_gr_gP,
                                  cw_gr_hC, f1, f2, from_disk, g_P, h_C, no_fixed_point_gap,
                                  root_cover, sample_f2, sample_h_C, to_disk)
from homsel.games import grid_points
from homsel.homology import Homology

PATH = CirclePath()
LAYOUT = WedgeLayout()


def as_set(A):
    return sorted(tuple(np.round(p, 9)) for p in np.asarray(A))


def test_gauge_chart_round_trip():
    rng = np.random.default_rng(0)
    for x in rng.random((200, 2)):
        assert np.allclose(from_disk(to_disk(x)), x)
    assert np.allclose(to_disk(CENTRE), [0, 0])
    assert math.hypot(*to_disk([1.0, 0.3])) == pytest.approx(1.0)


def test_paths():
    for i in (1, 2, 3):
        assert np.allclose(PATH.P(i, 0.5), PATH.A(i))
        assert np.allclose(PATH.P(i, 0.0), PATH.A((i - 2) % 3 + 1))
        assert np.allclose(PATH.P(i, 1.0), PATH.A(i % 3 + 1))


def test_g_P_values():
    assert as_set(g_P(CENTRE).array()) == as_set([PATH.P(1, 0)])
    assert as_set(g_P([0.0, 0.7]).array()) == as_set([CENTRE])
    # disk radius one half, angle a = 1/4: the start, the end and the point at parameter a
    x = from_disk([0.0, 0.5])
    assert as_set(g_P(x).array()) == as_set([PATH.P(1, 0), PATH.P(1, 1), PATH.P(1, 0.25)])


def test_h_C_centre_and_boundary():
    assert as_set(h_C(CENTRE).array()) == as_set([PATH.A(i) for i in (1, 2, 3)])
    for x in ([0.0, 0.3], [1.0, 1.0], [0.6, 0.0]):
        assert as_set(h_C(x).array()) == as_set([CENTRE])


def test_sectors_are_disjoint_away_from_apex():
    rng = np.random.default_rng(1)
    for z in rng.uniform(-1, 1, (500, 2)):
        if math.hypot(*z) > 1:
            continue
        inside = [i for i in (1, 2, 3) if LAYOUT.contains(i, z)]
        assert len(inside) <= 1
        j = LAYOUT.sector_of(z)
        if j is not None:
            t, a = LAYOUT.psi_inverse(j, z)
            assert np.allclose(LAYOUT.psi(j, t, a), z)


def test_retraction_lands_in_sectors():
    rng = np.random.default_rng(2)
    for z in rng.uniform(-1, 1, (300, 2)):
        if math.hypot(*z) > 1:
            continue
        target, lam = LAYOUT.retract(z)
        assert LAYOUT.sector_of(target) is not None
        assert 0 <= lam <= 1


def test_f2_sends_marked_point_opposite_the_apex():
    for i in (1, 2, 3):
        y = f2(PATH.A(i))
        assert np.allclose(y.coords, from_disk(LAYOUT.psi(i, 0.5, 0.0)))
        others = [PATH.A(j) for j in (1, 2, 3) if j != i]
        assert as_set(f1(y.coords).array()) == as_set(others)
    assert np.allclose(f2(PATH.point_at(30.0)).coords, CENTRE)


def test_no_fixed_point_gap_positive_and_stable():
    gaps = [no_fixed_point_gap(N).gap for N in (16, 32, 64)]
    assert min(gaps) > 0.3
    assert abs(gaps[1] - gaps[2]) / gaps[1] < 0.05


def test_cw_models():
    for C, expected in ((cw_gr_gP(), ["Z", "0", "Z"]), (cw_gr_hC(), ["Z", "Z", "0"])):
        C.check()
        h = Homology(C)
        assert [str(h.group(q)) for q in range(3)] == expected


def test_cw_gr_hC_boundary_class():
    C = cw_gr_hC()
    h = Homology(C)
    alpha = {C.index(1, n): 1 for n in ("alpha12", "alpha23", "alpha31")}
    assert not C.boundary(1, alpha)
    assert h.coordinates(1, alpha) in ([1], [-1])
    for i in (1, 2, 3):
        diff = dict(alpha)
        diff[C.index(1, f"a2^{i}")] = diff.get(C.index(1, f"a2^{i}"), 0) - 1
        diff[C.index(1, f"a1^{i}")] = diff.get(C.index(1, f"a1^{i}"), 0) + 1
        assert h.order(1, diff) == 1


def test_sampled_h_C_is_bounded_and_symmetric():
    f = sample_h_C(16)
    assert max(len(v) for v in f.values) == 3
    assert as_set(f.values[f.node_index((8, 8))]) == as_set([PATH.A(i) for i in (1, 2, 3)])


def test_game_costs_and_column_minima():
    game = counterexample_game(32)
    g2 = sample_f2(32)
    # player 1's cost vanishes on the graph of f2 (as a response to a2)
    prof = np.array([np.concatenate([g2.values[j][0], g2.node_point(j)]) for j in range(0, g2.node_count, 37)])
    assert np.allclose(game.cost(0, prof), 0)
    rng = np.random.default_rng(3)
    others = grid_points(2, 8)[rng.choice(81, 20, replace=False)]
    for i in (0, 1):
        assert np.allclose(game.column_min[i](others, 8), game.scan_column_min(i, others, 8))


def test_root_cover_constant_boundary():
    assert as_set(root_cover([0.0, 0.4], 3)) == as_set([CENTRE])
    assert len(root_cover([0.55, 0.6], 3)) == 3
