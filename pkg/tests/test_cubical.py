import numpy as np
import pytest

from homsel.cubical import domain_complex, epsilon_graph_pair, fundamental_chain, mask_complex, top_cubes
from homsel.homology import Homology, homology, induced_map, relative_homology
from homsel.multifunction import sample_multifunction
from homsel.snf import invariant_factors


def relative_summary(f, steps, model):
    pair = epsilon_graph_pair(f, steps * f.step, model=model)
    F = pair.relative_projection()
    im = induced_map(F, f.m)
    # the generator basis is model dependent; the image index is not
    return str(im.source), str(im.target), invariant_factors(im.matrix) if im.matrix else []


def two_branches(x):
    return [(x[0],), (1 - x[0],)]


def two_roots(x):
    z = (x[0] - 0.5) + 1j * (x[1] - 0.5)
    w = np.sqrt(z + 0j) * 0.6
    return [(0.5 + w.real, 0.5 + w.imag), (0.5 - w.real, 0.5 - w.imag)]


CASES = [
    ("identity-1d", lambda: sample_multifunction(lambda x: [x], 1, 1, 8, 1)),
    ("crossing-1d", lambda: sample_multifunction(two_branches, 1, 1, 8, 2)),
    ("constant-1d", lambda: sample_multifunction(lambda x: [(0.3,)], 1, 1, 8, 1)),
    ("identity-2d", lambda: sample_multifunction(lambda x: [x], 2, 2, 4, 1)),
    ("double-2d", lambda: sample_multifunction(two_roots, 2, 2, 8, 2)),
]


@pytest.mark.parametrize("name, make", CASES, ids=[c[0] for c in CASES])
def test_fibered_and_explicit_models_agree(name, make):
    f = make()
    for steps in (1, 2):
        assert relative_summary(f, steps, "fibered") == relative_summary(f, steps, "explicit")


def test_known_degrees():
    assert relative_summary(CASES[0][1](), 2, "fibered") == ("Z", "Z", [1])
    assert relative_summary(CASES[2][1](), 2, "fibered") == ("Z", "Z", [1])
    assert relative_summary(CASES[3][1](), 2, "fibered") == ("Z", "Z", [1])
    fine = sample_multifunction(two_roots, 2, 2, 12, 2)
    assert relative_summary(fine, 2, "fibered") == ("Z", "Z", [2])


def test_domain_complex():
    for m in (1, 2, 3):
        C, B = domain_complex(m, 3)
        assert relative_homology(C, B, m) == homology(C, 0)
        z = fundamental_chain(C)
        assert set(C.boundary(m, z)) <= B.selected[m - 1]


def test_top_cubes_monotone_in_eps():
    f = sample_multifunction(two_branches, 1, 1, 8, 2)
    small, large = top_cubes(f, 1 / 8), top_cubes(f, 2 / 8)
    assert small <= large and small != large


def test_neighbourhood_contains_graph():
    f = sample_multifunction(lambda x: [(x[0] ** 2,)], 1, 1, 8, 1)
    pair = epsilon_graph_pair(f, 1 / 8)
    assert Homology(pair.complex).group(0).betti == 1
    for flat in range(f.node_count):
        (y,) = f.values[flat][0]
        vertex = (int(round(y * 8)),)
        pair.vertex_cell(((flat,), (0,)), vertex)


def test_mask_complex_of_annulus():
    mask = np.ones((3, 3), dtype=bool)
    mask[1, 1] = False
    h = Homology(mask_complex(mask))
    assert [str(h.group(q)) for q in range(3)] == ["Z", "Z", "0"]


def test_eps_below_step_rejected():
    f = sample_multifunction(lambda x: [x], 1, 1, 8, 1)
    with pytest.raises(ValueError):
        epsilon_graph_pair(f, 0.5 / 8)
    with pytest.raises(ValueError):
        epsilon_graph_pair(f, 1 / 8, model="bogus")
