"""Simplicial models of standard spaces, for checks and examples."""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .cubical import domain_complex
from .homology import ChainComplex, Subcomplex

__all__ = ["simplicial_complex", "circle", "sphere", "torus", "projective_plane", "disk_pair"]


def simplicial_complex(facets: Iterable[Sequence[int]]) -> ChainComplex:
    """Oriented simplicial chain complex of the closure of ``facets``.

    Simplices are sorted vertex tuples; the boundary alternates signs.
    """
    simplices = set()
    for f in facets:
        f = tuple(sorted(set(f)))
        for r in range(1, len(f) + 1):
            simplices.update(itertools.combinations(f, r))
    if not simplices:
        raise ValueError("no simplices")
    top = max(len(s) for s in simplices) - 1
    labels = [sorted(s for s in simplices if len(s) == q + 1) for q in range(top + 1)]
    index = [{s: i for i, s in enumerate(ls)} for ls in labels]
    bds = [[{} for _ in labels[0]]]
    for q in range(1, top + 1):
        bds.append([{index[q - 1][s[:i] + s[i + 1:]]: (-1) ** i for i in range(len(s))}
                    for s in labels[q]])
    return ChainComplex(bds, labels)


def circle(n: int = 3) -> ChainComplex:
    return simplicial_complex([(i, (i + 1) % n) for i in range(n)])


def sphere(dim: int = 2) -> ChainComplex:
    """Boundary of the ``(dim + 1)``-simplex."""
    verts = range(dim + 2)
    return simplicial_complex(itertools.combinations(verts, dim + 1))


def torus() -> ChainComplex:
    """3 x 3 grid triangulation with opposite sides identified."""
    v = lambda i, j: 3 * (i % 3) + (j % 3)
    facets = []
    for i in range(3):
        for j in range(3):
            facets.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            facets.append((v(i, j), v(i, j + 1), v(i + 1, j + 1)))
    return simplicial_complex(facets)


def projective_plane() -> ChainComplex:
    """The six-vertex triangulation."""
    facets = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
              (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)]
    return simplicial_complex(facets)


def disk_pair(m: int, N: int = 2) -> tuple[ChainComplex, Subcomplex]:
    """The cube ``[0, N]^m`` with its boundary."""
    return domain_complex(m, N)
