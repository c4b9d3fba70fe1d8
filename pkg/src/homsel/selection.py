"""Homological selection tests and explicit low-dimensional selections."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cubical import CubicalPair, epsilon_graph_pair, fundamental_chain
from .homology import INFINITE, ChainMap, Homology, class_order, induced_map
from .lift import lift_to_configuration
from .multifunction import GridMultifunction

__all__ = [
    "DEFAULT_EPS_STEPS",
    "RungResult",
    "SelectionReport",
    "selection_rung",
    "homological_selection_test",
    "boundary_class_order_check",
    "min_selection",
    "path_selection",
    "SelectionError",
]

DEFAULT_EPS_STEPS = (2, 3, 4)


class SelectionError(ValueError):
    pass


@dataclass
class RungResult:
    eps_steps: int
    eps: float
    source_group: str
    target_group: str
    matrix: list[list[int]]
    verdict: str
    stats: dict
    seconds: float
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "eps_steps": self.eps_steps,
            "eps": self.eps,
            "relative_homology": self.source_group,
            "domain_relative_homology": self.target_group,
            "induced_matrix": self.matrix,
            "verdict": self.verdict,
            "complex": self.stats,
            "certificate": self.certificate,
        }


@dataclass
class SelectionReport:
    resolution: int
    m: int
    rungs: list[RungResult]
    boundary_order: float | None = None

    @property
    def verdict(self) -> str:
        """ADMITS when some rung has a nonzero induced map."""
        return "ADMITS" if any(r.verdict == "ADMITS" for r in self.rungs) else "FAILS"

    @property
    def eps_ladder(self) -> list[int]:
        return [r.eps_steps for r in self.rungs]

    def to_json(self) -> dict:
        order = self.boundary_order
        return {
            "resolution": self.resolution,
            "m": self.m,
            "eps_ladder": self.eps_ladder,
            "verdict": self.verdict,
            "rungs": [r.to_json() for r in self.rungs],
            "boundary_class_order": None if order is None else
            ("infinite" if order == INFINITE else int(order)),
        }


def _degree_of(matrix: list[list[int]]) -> int | None:
    if len(matrix) == 1 and len(matrix[0]) == 1:
        return matrix[0][0]
    return None


def selection_rung(f: GridMultifunction, eps_steps: int, model: str = "fibered",
                   pair: CubicalPair | None = None) -> RungResult:
    """One rung of the test: the map induced by projection on relative ``H_m``."""
    start = time.perf_counter()
    pair = pair or epsilon_graph_pair(f, eps_steps * f.step, model=model)
    F = pair.relative_projection()
    target = Homology(F.target, [f.m])
    im = induced_map(F, f.m, target=target)
    verdict = "FAILS" if im.is_zero() else "ADMITS"
    cert = {}
    if verdict == "FAILS":
        cert = _failure_certificate(pair, F, target, im)
    else:
        deg = _degree_of(im.matrix)
        if deg is not None:
            cert = {"degree": deg}
    return RungResult(eps_steps, eps_steps * f.step, str(im.source), str(im.target), im.matrix,
                      verdict, pair.fiber_stats, time.perf_counter() - start, cert)


def _failure_certificate(pair: CubicalPair, F: ChainMap, target: Homology, im) -> dict:
    """Coordinates of the domain fundamental class, the number of source
    generators (all mapping to zero) and the order of the lifted boundary cycle."""
    m = pair.m
    coords = target.coordinates(m, fundamental_chain(F.target)) if im.target.rank else []
    out = {
        "domain_fundamental_class": coords,
        "image_rank": 0,
        "source_generators": len(im.matrix[0]) if im.matrix else 0,
    }
    try:
        order = _boundary_order(pair)
        out["boundary_class_order"] = "infinite" if order == INFINITE else int(order)
    except SelectionError as exc:
        out["boundary_class_order"] = f"unavailable: {exc}"
    return out


def homological_selection_test(f: GridMultifunction, eps_steps=DEFAULT_EPS_STEPS,
                               model: str = "fibered") -> SelectionReport:
    """Run every rung of the eps ladder (in grid steps) and collect the verdicts."""
    rungs = [selection_rung(f, int(s), model) for s in eps_steps]
    return SelectionReport(f.resolution, f.m, rungs)


def _constant_boundary(f: GridMultifunction) -> np.ndarray:
    nodes = f.boundary_nodes()
    first = f.values[nodes[0]]
    for node in nodes:
        v = f.values[node]
        if v.shape != first.shape or np.abs(v - first).max() > 1e-12:
            raise SelectionError("boundary values are not constant")
    if len(first) != 1:
        raise SelectionError("constant boundary value must be a single point")
    return first[0]


def _boundary_order(pair: CubicalPair, point: np.ndarray | None = None) -> float:
    """Order in ``H_{m-1}`` of the boundary sphere lifted at the codomain cell of ``point``.

    Without ``point`` the boundary value at the domain origin is used.
    """
    f_boundary = pair.fibers.f
    if point is None:
        point = f_boundary.values[0][0]
    N = pair.resolution
    vertex = tuple(int(min(N, max(0, round(c * N)))) for c in point)
    m = pair.m
    dom = pair.domain
    dom_bd = pair.domain_boundary
    C = pair.complex
    if m == 1:
        # the 0-sphere: the two endpoints with opposite signs
        lo = pair.vertex_cell(((0,), (0,)), vertex)
        hi = pair.vertex_cell(((N,), (0,)), vertex)
        cycle = {hi: 1, lo: -1}
        # reduced H_0: order of the difference class
        return class_order(C, 0, cycle)
    top = fundamental_chain(dom)
    bd = dom.boundary(m, top)
    cycle: dict[int, int] = {}
    for j, c in bd.items():
        P = dom.labels[m - 1][j]
        if j not in dom_bd.selected[m - 1]:
            raise AssertionError("boundary chain left the boundary subcomplex")
        k = pair.vertex_cell(P, vertex)
        cycle[k] = cycle.get(k, 0) + c
    cycle = {k: v for k, v in cycle.items() if v}
    if C.boundary(m - 1, cycle):
        raise SelectionError("lifted boundary chain is not a cycle; the boundary value "
                             "is not constant at this resolution")
    return class_order(C, m - 1, cycle)


def boundary_class_order_check(f: GridMultifunction, r: int, eps_steps: int = 2,
                               model: str = "fibered") -> float:
    """Order of the boundary sphere class in the graph neighbourhood.

    Requires a constant single-point boundary value and a weight-``r`` lift.
    The order divides ``r`` for liftable inputs.
    """
    point = _constant_boundary(f)
    lift = lift_to_configuration(f, None, r)
    if lift.status != "FEASIBLE":
        raise SelectionError(f"no weight-{r} lift ({lift.status}); use the plain selection test")
    pair = epsilon_graph_pair(f, eps_steps * f.step, model=model)
    return _boundary_order(pair, point)


def min_selection(f: GridMultifunction) -> GridMultifunction:
    """Pointwise minimum of a real-valued multifunction."""
    if f.n != 1:
        raise SelectionError("min-selection needs a one-dimensional codomain")
    values = [np.array([[float(v.min())]]) for v in f.values]
    return GridMultifunction(f.m, 1, f.resolution, 1, values)


def path_selection(f: GridMultifunction, eps_steps: int = 2,
                   pair: CubicalPair | None = None) -> tuple[dict[int, int], CubicalPair]:
    """An edge path in the explicit neighbourhood complex from the fibre over 0
    to the fibre over 1, as a relative 1-chain."""
    if f.m != 1:
        raise SelectionError("path selection needs a one-dimensional domain")
    pair = pair or epsilon_graph_pair(f, eps_steps * f.step, model="explicit")
    if pair.model != "explicit":
        raise SelectionError("path selection walks the explicit model")
    C = pair.complex
    N = pair.resolution
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(C.sizes[0])}
    for e, col in enumerate(C.bd[1]):
        ends = sorted(col.items(), key=lambda kv: kv[1])
        if len(ends) != 2:
            continue
        (a, _), (b, _) = ends   # a has coefficient -1 (start), b has +1 (end)
        adj[a].append((b, e, 1))
        adj[b].append((a, e, -1))
    over = lambda v, x: C.labels[0][v][1][0] == (x,)
    starts = [v for v in range(C.sizes[0]) if over(v, 0)]
    prev: dict[int, tuple[int, int, int] | None] = {v: None for v in starts}
    queue = deque(starts)
    goal = None
    while queue:
        v = queue.popleft()
        if over(v, N):
            goal = v
            break
        for w, e, s in adj[v]:
            if w not in prev:
                prev[w] = (v, e, s)
                queue.append(w)
    if goal is None:
        raise SelectionError("neighbourhood complex does not connect the two ends; "
                             "try a larger eps")
    chain: dict[int, int] = {}
    v = goal
    while prev[v] is not None:
        u, e, s = prev[v]
        chain[e] = chain.get(e, 0) + s
        v = u
    return {k: c for k, c in chain.items() if c}, pair
