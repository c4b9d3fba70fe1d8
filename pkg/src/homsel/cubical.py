"""Cubical approximations of multifunction graphs and their epsilon-neighbourhoods.

A top cube of the neighbourhood is a product ``P x R`` of a domain grid cell
and a codomain grid cell whose centres lie within ``eps`` of one graph
sample.  The neighbourhood complex is the face closure of those cubes.

Two chain models are offered.  The explicit model lists every product cell.
The fibered model replaces the fibre over a domain cell by its connected
components.  That is exact over the integers whenever the fibres over the
cell and all its faces have acyclic components; cells failing this, and every
cell having such a face, keep their explicit product cells.  The result is
chain equivalent to the explicit model and usually far smaller.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy import ndimage

from .homology import ChainComplex, ChainMap, Homology, Subcomplex
from .multifunction import GridMultifunction

__all__ = [
    "DomainCell",
    "domain_complex",
    "fundamental_chain",
    "CubicalPair",
    "epsilon_graph_pair",
    "mask_cells",
    "mask_complex",
    "FiberError",
    "top_cubes",
]

DomainCell = tuple[tuple[int, ...], tuple[int, ...]]  # (corner, interval mask)

_SLACK = 1e-9


class FiberError(RuntimeError):
    """A fibre component is not acyclic, so the fibered model is not exact."""


def _cells(dim: int, N: int) -> list[DomainCell]:
    out = []
    for k in range(dim + 1):
        for axes in itertools.combinations(range(dim), k):
            mask = tuple(int(a in axes) for a in range(dim))
            ranges = [range(N - mask[a] + 1) for a in range(dim)]
            for corner in itertools.product(*ranges):
                out.append((corner, mask))
    return out


def _faces(cell: DomainCell) -> Iterator[tuple[int, DomainCell]]:
    corner, mask = cell
    j = 0
    for a, t in enumerate(mask):
        if not t:
            continue
        sign = 1 if j % 2 == 0 else -1
        face_mask = mask[:a] + (0,) + mask[a + 1:]
        upper = corner[:a] + (corner[a] + 1,) + corner[a + 1:]
        yield sign, (upper, face_mask)
        yield -sign, (corner, face_mask)
        j += 1


def _on_boundary(cell: DomainCell, N: int) -> bool:
    corner, mask = cell
    return any(not t and c in (0, N) for c, t in zip(corner, mask))


def domain_complex(m: int, N: int) -> tuple[ChainComplex, Subcomplex]:
    """The cubical complex of ``[0, N]^m`` with its boundary subcomplex."""
    cells = _cells(m, N)
    by_dim: list[list[DomainCell]] = [[] for _ in range(m + 1)]
    for c in cells:
        by_dim[sum(c[1])].append(c)
    index = [{c: i for i, c in enumerate(cs)} for cs in by_dim]
    bds = [[{} for _ in by_dim[0]]]
    for q in range(1, m + 1):
        bds.append([{index[q - 1][f]: s for s, f in _faces(c)} for c in by_dim[q]])
    C = ChainComplex(bds, by_dim, check=False)
    B = Subcomplex(C, [frozenset(i for i, c in enumerate(cs) if _on_boundary(c, N))
                       for cs in by_dim])
    return C, B


def fundamental_chain(C: ChainComplex) -> dict[int, int]:
    """Sum of all top cubes; a relative cycle generating ``H_m(D, dD)``."""
    return {j: 1 for j in range(C.sizes[C.dim])}


def _shifted_or(mask: np.ndarray, cell_type: tuple[int, ...]) -> np.ndarray:
    """Which cells of the given type lie in the closure of the top-cell mask."""
    out = mask
    for a, t in enumerate(cell_type):
        if t:
            continue
        pad = [(0, 0)] * out.ndim
        pad[a] = (1, 1)
        p = np.pad(out, pad)
        lo = [slice(None)] * out.ndim
        hi = [slice(None)] * out.ndim
        lo[a] = slice(0, -1)
        hi[a] = slice(1, None)
        out = p[tuple(lo)] | p[tuple(hi)]
    return out


def mask_cells(mask: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
    """Closure of a top-cell mask, as one boolean array per cell type."""
    n = mask.ndim
    return {t: _shifted_or(mask, t) for t in itertools.product((0, 1), repeat=n)}


def _euler(mask: np.ndarray) -> int:
    return sum((-1) ** sum(t) * int(arr.sum()) for t, arr in mask_cells(mask).items())


def mask_complex(mask: np.ndarray) -> ChainComplex:
    """Explicit cubical chain complex of the closure of a top-cell mask."""
    n = mask.ndim
    cells = mask_cells(mask)
    by_dim: list[list[DomainCell]] = [[] for _ in range(n + 1)]
    for t, arr in cells.items():
        for corner in zip(*np.nonzero(arr)):
            by_dim[sum(t)].append((tuple(int(c) for c in corner), t))
    for cs in by_dim:
        cs.sort(key=lambda c: (c[1], c[0]))
    index = [{c: i for i, c in enumerate(cs)} for cs in by_dim]
    bds = [[{} for _ in by_dim[0]]]
    for q in range(1, n + 1):
        bds.append([{index[q - 1][f]: s for s, f in _faces(c)} for c in by_dim[q]])
    return ChainComplex(bds, by_dim, check=False)


@dataclass
class _Fiber:
    origin: np.ndarray       # codomain cell index of labels[0, ..., 0]
    labels: np.ndarray       # component label per codomain top cell, 0 outside
    count: int
    reps: np.ndarray         # flat position (within labels) of one cell per component


class _FiberTable:
    """Fibres of the neighbourhood over every domain cell."""

    def __init__(self, f: GridMultifunction, eps: float):
        self.f = f
        self.N = f.resolution
        self.e = eps * self.N
        N, e = self.N, self.e
        lo_off = -0.5 - e
        hi_off = -0.5 + e
        self.boxes: list[np.ndarray] = []
        for vals in f.values:
            scaled = vals * N
            lo = np.ceil(scaled + lo_off - _SLACK).astype(int)
            hi = np.floor(scaled + hi_off + _SLACK).astype(int)
            lo = np.clip(lo, 0, N - 1)
            hi = np.clip(hi, 0, N - 1)
            ok = (lo <= hi).all(axis=1)
            self.boxes.append(np.stack([lo[ok], hi[ok]], axis=1))
        self.cache: dict[DomainCell, _Fiber] = {}
        self.structure = ndimage.generate_binary_structure(f.n, f.n)

    def node_window(self, cell: DomainCell) -> list[range]:
        N, e = self.N, self.e
        out = []
        for c, t in zip(*cell):
            centres = [c + 0.5] if t else [x + 0.5 for x in (c - 1, c) if 0 <= x <= N - 1]
            lo = max(0, min(math.ceil(x - e - _SLACK) for x in centres))
            hi = min(N, max(math.floor(x + e + _SLACK) for x in centres))
            out.append(range(lo, hi + 1))
        return out

    def top_cells(self, cell: DomainCell) -> np.ndarray:
        """Codomain boxes ``(lo, hi)`` painted over this domain cell."""
        shape = self.f.shape
        parts = []
        for multi in itertools.product(*self.node_window(cell)):
            parts.append(self.boxes[int(np.ravel_multi_index(multi, shape))])
        return np.concatenate(parts) if parts else np.zeros((0, 2, self.f.n), dtype=int)

    def fiber(self, cell: DomainCell) -> _Fiber:
        hit = self.cache.get(cell)
        if hit is not None:
            return hit
        boxes = self.top_cells(cell)
        if len(boxes) == 0:
            raise FiberError(f"empty fibre over domain cell {cell}; eps too small")
        origin = boxes[:, 0, :].min(axis=0)
        top = boxes[:, 1, :].max(axis=0)
        mask = np.zeros(tuple(top - origin + 1), dtype=bool)
        for lo, hi in boxes:
            mask[tuple(slice(a - o, b - o + 1) for a, b, o in zip(lo, hi, origin))] = True
        labels, count = ndimage.label(mask, structure=self.structure)
        ids, reps = np.unique(labels.ravel(), return_index=True)
        fib = _Fiber(origin, labels, count, reps[ids > 0])
        self.cache[cell] = fib
        return fib

    def acyclic(self, fib: _Fiber) -> bool:
        n = self.f.n
        if n == 1:
            return True
        if n == 2:
            return _euler(fib.labels > 0) == fib.count
        for c in range(1, fib.count + 1):
            h = Homology(mask_complex(fib.labels == c))
            if any(not h.group(q).is_zero() for q in range(1, n + 1)):
                return False
        return True

    def vertex_component(self, fib: _Fiber, vertex: tuple[int, ...]) -> int:
        """Component of the fibre whose closure holds a codomain grid vertex."""
        for shift in itertools.product((0, 1), repeat=len(vertex)):
            c = self.locate(fib, np.array(vertex) - np.array(shift))
            if c:
                return c
        return 0

    def locate(self, fib: _Fiber, absolute: np.ndarray) -> int:
        rel = absolute - fib.origin
        if (rel < 0).any() or (rel >= fib.labels.shape).any():
            return 0
        return int(fib.labels[tuple(rel)])


@dataclass
class CubicalPair:
    """Neighbourhood complex of a graph, its part over the domain boundary,
    and the projection onto the domain cube complex.

    Cell labels are ``("c", P, component)`` for collapsed fibre components
    and ``("x", P, R)`` for explicit product cells ``P x R``.
    """

    complex: ChainComplex
    boundary_part: Subcomplex
    domain: ChainComplex
    domain_boundary: Subcomplex
    projection: ChainMap
    model: str
    resolution: int
    eps: float
    fiber_stats: dict = field(default_factory=dict)
    fibers: "_FiberTable | None" = None

    @property
    def m(self) -> int:
        return self.domain.dim

    def relative_projection(self) -> ChainMap:
        return self.projection.relative(self.boundary_part, self.domain_boundary)

    def vertex_cell(self, P: DomainCell, vertex: tuple[int, ...]) -> int:
        """Index (in degree ``dim P``) of the cell carrying ``P x vertex``."""
        q = sum(P[1])
        C = self.complex
        try:
            return C.index(q, ("x", P, (tuple(vertex), (0,) * len(vertex))))
        except KeyError:
            fib = self.fibers.fiber(P)
            c = self.fibers.vertex_component(fib, tuple(vertex))
            if not c:
                raise KeyError(f"vertex {vertex} is not in the fibre over {P}") from None
            return C.index(q, ("c", P, c))


def epsilon_graph_pair(f: GridMultifunction, eps: float, model: str = "fibered") -> CubicalPair:
    """Build the cubical pair for the ``eps``-neighbourhood of the graph of ``f``.

    ``model`` is ``"fibered"`` (components wherever exact) or ``"explicit"``
    (all product cells).  Raises ``ValueError`` if ``eps`` is below one grid
    step.
    """
    if model not in ("fibered", "explicit"):
        raise ValueError(f"unknown model {model!r}")
    N = f.resolution
    if eps < f.step * (1 - 1e-9):
        raise ValueError(f"eps={eps} is below one grid step {f.step}; refusing to build a "
                         f"neighbourhood that may disconnect artificially")
    table = _FiberTable(f, eps)
    dom, dom_bd = domain_complex(f.m, N)
    m, n = f.m, f.n

    defective = set()
    max_comp = 0
    for q in range(m + 1):
        for cell in dom.labels[q]:
            fib = table.fiber(cell)
            max_comp = max(max_comp, fib.count)
            if model == "explicit" or not table.acyclic(fib):
                defective.add(cell)
    explicit = set()
    for q in range(m + 1):
        for cell in dom.labels[q]:
            if any(face in defective for face in _all_faces(cell)):
                explicit.add(cell)

    by_dim: list[list] = [[] for _ in range(m + n + 1)]
    for q in range(m + 1):
        for cell in dom.labels[q]:
            fib = table.fiber(cell)
            if cell in explicit:
                for t, arr in mask_cells(fib.labels > 0).items():
                    for corner in zip(*np.nonzero(arr)):
                        absolute = tuple(int(c + o) for c, o in zip(corner, fib.origin))
                        by_dim[q + sum(t)].append(("x", cell, (absolute, t)))
            else:
                for c in range(1, fib.count + 1):
                    by_dim[q].append(("c", cell, c))
    while len(by_dim) > 1 and not by_dim[-1]:
        by_dim.pop()
    index = [{c: i for i, c in enumerate(cs)} for cs in by_dim]

    def component_of_vertex(P, vertex):
        c = table.vertex_component(table.fiber(P), vertex)
        if not c:
            raise AssertionError("fibre over a face misses a vertex of the cell's fibre")
        return c

    bds = [[{} for _ in by_dim[0]]]
    for q in range(1, len(by_dim)):
        cols = []
        for label in by_dim[q]:
            col: dict[int, int] = {}
            if label[0] == "c":
                _, P, c = label
                fib = table.fiber(P)
                rep = np.array(np.unravel_index(fib.reps[c - 1], fib.labels.shape)) + fib.origin
                for s, face in _faces(P):
                    cf = table.locate(table.fiber(face), rep)
                    if cf == 0:
                        raise AssertionError("fibre over a face does not contain the cell's fibre")
                    j = index[q - 1][("c", face, cf)]
                    col[j] = col.get(j, 0) + s
            else:
                _, P, R = label
                for s, face in _faces(P):
                    if face in explicit:
                        j = index[q - 1][("x", face, R)]
                    elif sum(R[1]) == 0:
                        j = index[q - 1][("c", face, component_of_vertex(face, R[0]))]
                    else:
                        continue
                    col[j] = col.get(j, 0) + s
                sign = -1 if sum(P[1]) % 2 else 1
                for s, face in _faces(R):
                    j = index[q - 1][("x", P, face)]
                    col[j] = col.get(j, 0) + sign * s
            cols.append({k: v for k, v in col.items() if v})
        bds.append(cols)
    C = ChainComplex(bds, by_dim, check=True)

    dom_index = [{c: i for i, c in enumerate(cs)} for cs in dom.labels]
    boundary = Subcomplex(C, [frozenset(i for i, lab in enumerate(cs) if _on_boundary(lab[1], N))
                              for cs in by_dim])
    maps = []
    for q, cs in enumerate(by_dim):
        col = []
        for lab in cs:
            if q <= m and (lab[0] == "c" or sum(lab[2][1]) == 0):
                col.append({dom_index[q][lab[1]]: 1})
            else:
                col.append({})
        maps.append(col)
    proj = ChainMap(C, dom, maps, check=True)
    stats = {
        "cells": sum(C.sizes),
        "max_components": max_comp,
        "defective_fibers": 0 if model == "explicit" else len(defective),
        "explicit_domain_cells": len(explicit),
    }
    return CubicalPair(C, boundary, dom, dom_bd, proj, model, N, eps, stats, table)


def _all_faces(cell: DomainCell) -> Iterator[DomainCell]:
    corner, mask = cell
    axes = [a for a, t in enumerate(mask) if t]
    for choice in itertools.product((0, 1, 2), repeat=len(axes)):
        c = list(corner)
        mk = list(mask)
        for a, ch in zip(axes, choice):
            if ch < 2:
                c[a] += ch
                mk[a] = 0
        yield tuple(c), tuple(mk)


def top_cubes(f: GridMultifunction, eps: float) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The top product cubes ``(domain corner, codomain corner)`` of the neighbourhood."""
    table = _FiberTable(f, eps)
    out = set()
    full = (1,) * f.m
    for corner in itertools.product(range(f.resolution), repeat=f.m):
        for lo, hi in table.top_cells((corner, full)):
            for r in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
                out.add((corner, tuple(int(x) for x in r)))
    return out
