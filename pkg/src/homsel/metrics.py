"""Points of the unit cube, finite subsets and weighted configurations.

All distances use the sup metric on coordinates.  Finite subsets carry the
Hausdorff metric and configurations (unordered k-tuples with repetition)
carry the min-over-relabelings sup metric.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

__all__ = [
    "Point",
    "FiniteSubset",
    "Configuration",
    "sup_metric",
    "hausdorff_distance",
    "config_distance",
    "forget_weights",
    "epsilon_neighborhood_indicator",
    "bottleneck_assignment",
]

# above this size config_distance switches from enumeration to bottleneck matching
PERMUTATION_LIMIT = 6


@dataclass(frozen=True, order=True)
class Point:
    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        for c in coords:
            if not math.isfinite(c) or c < 0.0 or c > 1.0:
                raise ValueError(f"coordinate {c!r} outside [0, 1]")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def of(cls, *coords: float) -> "Point":
        return cls(tuple(coords))

    def to_json(self) -> list[float]:
        return list(self.coords)

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "Point":
        return cls(tuple(data))


def _as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, (int, float)):
        return Point((p,))
    return Point(tuple(p))


@dataclass(frozen=True)
class FiniteSubset:
    """A nonempty set of at most ``k`` distinct points, stored sorted."""

    points: tuple[Point, ...]
    k: int

    def __post_init__(self):
        pts = tuple(sorted(set(_as_point(p) for p in self.points)))
        if not pts:
            raise ValueError("finite subsets are nonempty")
        if self.k < 1:
            raise ValueError("cardinality bound must be positive")
        if len(pts) > self.k:
            raise ValueError(f"{len(pts)} points exceed cardinality bound {self.k}")
        dims = {p.dim for p in pts}
        if len(dims) != 1:
            raise ValueError("points of a subset must share a dimension")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points: Iterable, k: int | None = None) -> "FiniteSubset":
        pts = tuple(_as_point(p) for p in points)
        return cls(pts, k if k is not None else max(1, len(set(pts))))

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def array(self) -> np.ndarray:
        return np.array([p.coords for p in self.points], dtype=float)

    def to_json(self) -> list[list[float]]:
        return [p.to_json() for p in self.points]

    @classmethod
    def from_json(cls, data, k: int | None = None) -> "FiniteSubset":
        return cls.of([Point.from_json(p) for p in data], k)


@dataclass(frozen=True)
class Configuration:
    """Distinct points with positive integer multiplicities summing to ``k``."""

    atoms: tuple[tuple[Point, int], ...]

    def __post_init__(self):
        merged: dict[Point, int] = {}
        for p, mult in self.atoms:
            p = _as_point(p)
            if int(mult) != mult or mult < 1:
                raise ValueError(f"multiplicity {mult!r} must be a positive integer")
            merged[p] = merged.get(p, 0) + int(mult)
        if not merged:
            raise ValueError("configurations are nonempty")
        if len({p.dim for p in merged}) != 1:
            raise ValueError("points of a configuration must share a dimension")
        atoms = tuple(sorted(merged.items(), key=lambda pm: (pm[0].coords, pm[1])))
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def of(cls, atoms: Iterable) -> "Configuration":
        return cls(tuple((_as_point(p), m) for p, m in atoms))

    @classmethod
    def from_tuple(cls, points: Iterable) -> "Configuration":
        counts: dict[Point, int] = {}
        for p in points:
            p = _as_point(p)
            counts[p] = counts.get(p, 0) + 1
        return cls(tuple(counts.items()))

    @property
    def k(self) -> int:
        return sum(m for _, m in self.atoms)

    @property
    def dim(self) -> int:
        return self.atoms[0][0].dim

    def expand(self) -> list[Point]:
        return [p for p, m in self.atoms for _ in range(m)]

    def to_json(self) -> list[dict]:
        return [{"point": p.to_json(), "mult": m} for p, m in self.atoms]

    @classmethod
    def from_json(cls, data) -> "Configuration":
        return cls(tuple((Point.from_json(a["point"]), int(a["mult"])) for a in data))


def sup_metric(x: Point, y: Point) -> float:
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} != {y.dim}")
    return max(abs(a - b) for a, b in zip(x.coords, y.coords))


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)


def hausdorff_distance(A: FiniteSubset, B: FiniteSubset) -> float:
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} != {B.dim}")
    d = _pairwise(A.array(), B.array())
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def bottleneck_assignment(cost: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimise the largest cost of a perfect matching on a square matrix.

    Returns the bottleneck value and ``perm`` with row ``i`` matched to
    column ``perm[i]``.
    """
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ValueError("bottleneck assignment needs a square matrix")
    levels = np.unique(cost)
    lo, hi = 0, len(levels) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((cost <= levels[mid]).astype(np.int8))
        match = maximum_bipartite_matching(graph, perm_type="column")
        if (match >= 0).all():
            best = (float(levels[mid]), match)
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None
    return best


def config_distance(u: Configuration, v: Configuration) -> float:
    if u.k != v.k:
        raise ValueError(f"weight mismatch: {u.k} != {v.k}")
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} != {v.dim}")
    xs = np.array([p.coords for p in u.expand()])
    ys = np.array([p.coords for p in v.expand()])
    cost = _pairwise(xs, ys)
    k = u.k
    if k <= PERMUTATION_LIMIT:
        idx = np.arange(k)
        return float(min(cost[idx, list(perm)].max() for perm in itertools.permutations(range(k))))
    return bottleneck_assignment(cost)[0]


def forget_weights(u: Configuration) -> FiniteSubset:
    return FiniteSubset(tuple(p for p, _ in u.atoms), u.k)


def epsilon_neighborhood_indicator(A: FiniteSubset, x: Point, eps: float) -> bool:
    if eps <= 0:
        raise ValueError("eps must be positive")
    return min(sup_metric(a, x) for a in A.points) <= eps
