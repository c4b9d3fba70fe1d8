import numpy as np
import pytest

from homsel.constructions import sample_root_cover
from homsel.homology import Homology
from homsel.multifunction import sample_multifunction
from homsel.selection import (SelectionError, boundary_class_order_check, homological_selection_test,
                              min_selection, path_selection, selection_rung)


def two_roots(x):
    z = (x[0] - 0.5) + 1j * (x[1] - 0.5)
    w = np.sqrt(z + 0j) * 0.6
    return [(0.5 + w.real, 0.5 + w.imag), (0.5 - w.real, 0.5 - w.imag)]


def test_identity_admits_with_degree_one():
    f = sample_multifunction(lambda x: [x], 2, 2, 8, 1)
    report = homological_selection_test(f, (2, 3))
    assert report.verdict == "ADMITS"
    assert report.eps_ladder == [2, 3]
    assert all(abs(r.matrix[0][0]) == 1 for r in report.rungs)
    data = report.to_json()
    assert data["rungs"][0]["certificate"]["degree"] in (1, -1)


def test_double_cover_degree_two():
    f = sample_multifunction(two_roots, 2, 2, 12, 2)
    rung = selection_rung(f, 2)
    assert rung.verdict == "ADMITS"
    assert abs(rung.certificate["degree"]) == 2


def test_one_dimensional_models():
    f = sample_multifunction(lambda x: [(x[0],), (1 - x[0],)], 1, 1, 16, 2)
    for model in ("fibered", "explicit"):
        assert homological_selection_test(f, (2,), model).verdict == "ADMITS"


def test_min_selection_is_continuous_selection():
    f = sample_multifunction(lambda x: [(x[0],), (1 - x[0],), (0.5,)], 1, 1, 16, 3)
    g = min_selection(f)
    assert all(len(v) == 1 for v in g.values)
    for node in range(f.node_count):
        assert g.values[node][0, 0] == f.values[node].min()
        assert g.values[node][0] in f.values[node]
    assert g.modulus <= f.modulus + 1e-12
    h = sample_multifunction(lambda x: [x], 2, 2, 2, 1)
    with pytest.raises(SelectionError):
        min_selection(h)


def test_path_selection_is_relative_cycle():
    f = sample_multifunction(lambda x: [(x[0],), (1 - x[0],)], 1, 1, 16, 2)
    chain, pair = path_selection(f)
    C = pair.complex
    bd = C.boundary(1, chain)
    ends = {C.labels[0][v][1][0][0] for v in bd}
    assert ends == {0, 16}
    # the projection of the path is the fundamental class of the interval
    proj = pair.projection.apply(1, chain)
    assert sorted(proj.values()) in ([1] * 16, [-1] * 16)
    # at least one edge per grid step
    assert len(chain) >= 16


def test_path_selection_requires_interval():
    f = sample_multifunction(lambda x: [x], 2, 2, 4, 1)
    with pytest.raises(SelectionError):
        path_selection(f)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_liftable_constant_boundary(r):
    f = sample_root_cover(16, r)
    order = boundary_class_order_check(f, r)
    assert r % order == 0
    assert homological_selection_test(f, (2,)).verdict == "ADMITS"


def test_order_check_needs_constant_boundary():
    f = sample_multifunction(lambda x: [x], 2, 2, 4, 1)
    with pytest.raises(SelectionError, match="not constant"):
        boundary_class_order_check(f, 1)
