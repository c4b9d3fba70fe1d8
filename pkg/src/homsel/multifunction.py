"""Set-valued maps sampled on a regular grid of the unit cube."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .metrics import Configuration, FiniteSubset, Point

__all__ = [
    "GridMultifunction",
    "sample_multifunction",
    "graph_samples",
    "canonical_points",
]

# points closer than this (sup metric) are identified when a sampled value is canonicalised
MERGE_TOL = 1e-12


def canonical_points(points, n: int, merge_tol: float = MERGE_TOL) -> np.ndarray:
    """Sort lexicographically and drop near-duplicates."""
    arr = np.asarray(points, dtype=float).reshape(-1, n)
    if arr.size == 0:
        return arr
    arr = arr[np.lexsort(arr.T[::-1])]
    keep = [0]
    for i in range(1, len(arr)):
        if np.abs(arr[keep] - arr[i]).max(axis=1).min() > merge_tol:
            keep.append(i)
    return arr[keep]


@dataclass
class GridMultifunction:
    """Values on the nodes ``i / N`` of ``[0,1]^m``, nodes in row-major order.

    ``resolution`` is the number of grid intervals per axis, so the step is
    ``1 / resolution``.  ``weights`` is set for configuration-valued maps.
    """

    m: int
    n: int
    resolution: int
    k: int
    values: list[np.ndarray]
    weights: list[np.ndarray] | None = None
    modulus: float = field(default=float("nan"))

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if self.resolution < 1:
            raise ValueError("resolution must be a positive number of intervals")
        expected = (self.resolution + 1) ** self.m
        if len(self.values) != expected:
            raise ValueError(f"expected {expected} node values, got {len(self.values)}")
        vals = []
        for idx, v in enumerate(self.values):
            a = np.asarray(v, dtype=float).reshape(-1, self.n)
            if len(a) == 0:
                raise ValueError(f"node {idx}: empty value")
            if len(a) > self.k:
                raise ValueError(f"node {idx}: {len(a)} points exceed cardinality bound {self.k}")
            if not np.isfinite(a).all() or a.min() < 0 or a.max() > 1:
                raise ValueError(f"node {idx}: value outside the unit cube")
            vals.append(a)
        self.values = vals
        if self.weights is not None:
            ws = [np.asarray(w, dtype=int) for w in self.weights]
            for idx, (a, w) in enumerate(zip(vals, ws)):
                if w.shape != (len(a),) or (w < 1).any() or w.sum() != self.k:
                    raise ValueError(f"node {idx}: multiplicities must be positive and sum to {self.k}")
            self.weights = ws
        if np.isnan(self.modulus):
            self.modulus = self.observed_modulus()

    @property
    def step(self) -> float:
        return 1.0 / self.resolution

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution + 1,) * self.m

    @property
    def node_count(self) -> int:
        return len(self.values)

    def node_index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.shape))

    def node_multi(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    def node_point(self, flat: int) -> np.ndarray:
        return np.array(self.node_multi(flat), dtype=float) / self.resolution

    def value(self, flat: int) -> FiniteSubset:
        return FiniteSubset(tuple(Point(tuple(p)) for p in self.values[flat]), self.k)

    def configuration(self, flat: int) -> Configuration:
        if self.weights is None:
            raise ValueError("multifunction carries no multiplicities")
        return Configuration(tuple((Point(tuple(p)), int(w))
                                   for p, w in zip(self.values[flat], self.weights[flat])))

    def edges(self) -> Iterable[tuple[int, int]]:
        """Pairs of nodes adjacent along one axis."""
        shape = self.shape
        for flat in range(self.node_count):
            multi = np.unravel_index(flat, shape)
            for a in range(self.m):
                if multi[a] < self.resolution:
                    nb = list(multi)
                    nb[a] += 1
                    yield flat, int(np.ravel_multi_index(tuple(nb), shape))

    def observed_modulus(self) -> float:
        """Largest Hausdorff step between axis-adjacent nodes."""
        best = 0.0
        for u, v in self.edges():
            a, b = self.values[u], self.values[v]
            d = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
            best = max(best, float(d.min(axis=1).max()), float(d.min(axis=0).max()))
        return best

    def boundary_nodes(self) -> list[int]:
        out = []
        for flat in range(self.node_count):
            multi = np.unravel_index(flat, self.shape)
            if any(i in (0, self.resolution) for i in multi):
                out.append(flat)
        return out

    def to_json(self) -> dict:
        data = {
            "m": self.m,
            "n": self.n,
            "resolution": self.resolution,
            "k": self.k,
            "values": [v.tolist() for v in self.values],
        }
        if self.weights is not None:
            data["weights"] = [w.tolist() for w in self.weights]
        return data

    @classmethod
    def from_json(cls, data) -> "GridMultifunction":
        for key in ("m", "n", "resolution", "k", "values"):
            if key not in data:
                raise ValueError(f"multifunction JSON: missing field {key!r}")
        n = int(data["n"])
        values = []
        for idx, pts in enumerate(data["values"]):
            try:
                values.append(np.asarray(pts, dtype=float).reshape(-1, n))
            except ValueError as exc:
                raise ValueError(f"multifunction JSON: values[{idx}] is not a list of "
                                 f"{n}-dimensional points") from exc
        weights = data.get("weights")
        return cls(int(data["m"]), n, int(data["resolution"]), int(data["k"]), values,
                   None if weights is None else [np.asarray(w, dtype=int) for w in weights])


def sample_multifunction(f: Callable[[np.ndarray], Iterable], m: int, n: int,
                         resolution: int, k: int,
                         merge_tol: float = MERGE_TOL) -> GridMultifunction:
    """Evaluate ``f`` at every grid node and canonicalise the values.

    ``f`` receives the node as a float array of length ``m`` and returns an
    iterable of ``n``-dimensional points.
    """
    values = []
    for multi in itertools.product(range(resolution + 1), repeat=m):
        x = np.array(multi, dtype=float) / resolution
        pts = canonical_points(list(f(x)), n, merge_tol)
        if len(pts) > k:
            raise ValueError(f"value at {x.tolist()} has {len(pts)} points, bound is {k}")
        values.append(pts)
    return GridMultifunction(m, n, resolution, k, values)


def graph_samples(f: GridMultifunction) -> np.ndarray:
    """One ``(m + n)``-dimensional row per (node, member) pair."""
    rows = []
    for flat, vals in enumerate(f.values):
        x = f.node_point(flat)
        for y in vals:
            rows.append(np.concatenate([x, y]))
    return np.array(rows)
