"""The multifunctions with no homological selection and the game built from them.

Planar points live in the unit square.  The square is treated as a round disk
through the gauge chart ``x -> zeta``: ``zeta`` has Euclidean length equal to
twice the sup-distance of ``x`` from the centre and the same direction, so the
square's boundary is the unit circle and the centre is the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .games import Game
from .homology import ChainComplex
from .metrics import FiniteSubset, Point
from .multifunction import GridMultifunction, canonical_points, sample_multifunction

__all__ = [
    "CENTRE",
    "CirclePath",
    "WedgeLayout",
    "to_disk",
    "from_disk",
    "g_P",
    "h_C",
    "f1",
    "f2",
    "GraphDistance",
    "distance_cost",
    "no_fixed_point_gap",
    "cw_gr_gP",
    "cw_gr_hC",
    "sample_g_P",
    "sample_h_C",
    "sample_f1",
    "sample_f2",
    "GapReport",
    "counterexample_game",
    "root_cover",
    "sample_root_cover",
]

CENTRE = np.array([0.5, 0.5])


def to_disk(x) -> np.ndarray:
    """Gauge chart from the unit square onto the closed unit disk."""
    v = np.asarray(x, dtype=float) - CENTRE
    s = 2.0 * np.abs(v).max()
    r = math.hypot(*v)
    if r == 0.0:
        return np.zeros(2)
    return s * v / r


def from_disk(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    r = math.hypot(*z)
    if r == 0.0:
        return CENTRE.copy()
    u = z / r
    return CENTRE + 0.5 * r * u / np.abs(u).max()


@dataclass(frozen=True)
class CirclePath:
    """A circle with three marked points and the three paths that skip one arc.

    Path ``i`` (1-based) starts at the marked point preceding ``A_i``, passes
    through ``A_i`` at parameter one half and ends at the point following it,
    running counterclockwise over two thirds of the circle.
    """

    centre: tuple[float, float] = (0.5, 0.5)
    radius: float = 0.45
    angles_deg: tuple[float, float, float] = (90.0, 210.0, 330.0)

    def point_at(self, angle_deg: float) -> np.ndarray:
        t = math.radians(angle_deg)
        return np.array([self.centre[0] + self.radius * math.cos(t),
                         self.centre[1] + self.radius * math.sin(t)])

    def A(self, i: int) -> np.ndarray:
        return self.point_at(self.angles_deg[i - 1])

    def start_angle(self, i: int) -> float:
        return self.angles_deg[(i - 2) % 3]

    def span(self, i: int) -> float:
        return (self.angles_deg[i % 3] - self.start_angle(i)) % 360.0

    def P(self, i: int, s: float) -> np.ndarray:
        return self.point_at(self.start_angle(i) + self.span(i) * s)

    def angle_of(self, y) -> float:
        return math.degrees(math.atan2(y[1] - self.centre[1], y[0] - self.centre[0])) % 360.0


def _model_value(path: CirclePath, i: int, t: float, a: float) -> list[np.ndarray]:
    """Values on the model disk of radius one half, polar coordinates ``(t, a)``."""
    return [path.P(i, 0.0), path.P(i, 2 * t), path.P(i, 2 * a * t)]


@dataclass(frozen=True)
class WedgeLayout:
    """Three convex sectors of the unit disk meeting only at the origin.

    Sector ``i`` has bisector angle ``bisectors[i-1]``, opening ``opening_deg``
    and radius ``rho``.  Each carries a parametrisation by the model disk of
    radius one half: radial from the sector's incentre, rotated so that the
    model point ``(-1/2, 0)`` lands on the apex.
    """

    bisectors: tuple[float, float, float] = (60.0, 180.0, 300.0)
    opening_deg: float = 80.0
    rho: float = 0.9

    def __post_init__(self):
        if not 0 < self.opening_deg < 120:
            raise ValueError("sector opening must lie in (0, 120) degrees")
        if not 0 < self.rho < 1:
            raise ValueError("sector radius must lie in (0, 1)")

    @property
    def half_open(self) -> float:
        return math.radians(self.opening_deg) / 2

    def theta(self, i: int) -> float:
        return math.radians(self.bisectors[i - 1])

    def incentre(self, i: int) -> np.ndarray:
        d = self.rho / (1 + math.sin(self.half_open))
        th = self.theta(i)
        return d * np.array([math.cos(th), math.sin(th)])

    def _normals(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo = self.theta(i) - self.half_open
        hi = self.theta(i) + self.half_open
        return (np.array([-math.sin(lo), math.cos(lo)]), np.array([math.sin(hi), -math.cos(hi)]))

    def contains(self, i: int, z, tol: float = 1e-12) -> bool:
        z = np.asarray(z, dtype=float)
        n1, n2 = self._normals(i)
        return n1 @ z >= -tol and n2 @ z >= -tol and z @ z <= (self.rho + tol) ** 2

    def exit_distance(self, i: int, direction: np.ndarray) -> float:
        K = self.incentre(i)
        best = math.inf
        for n in self._normals(i):
            nd = n @ direction
            if nd < 0:
                best = min(best, -(n @ K) / nd)
        kd = K @ direction
        best = min(best, -kd + math.sqrt(kd * kd - K @ K + self.rho ** 2))
        return best

    def psi(self, i: int, t: float, a: float) -> np.ndarray:
        """Model polar point ``(t, a)`` to the sector."""
        phi = 2 * math.pi * a + self.theta(i)
        d = np.array([math.cos(phi), math.sin(phi)])
        return self.incentre(i) + 2 * t * self.exit_distance(i, d) * d

    def psi_inverse(self, i: int, z) -> tuple[float, float]:
        v = np.asarray(z, dtype=float) - self.incentre(i)
        r = math.hypot(*v)
        if r == 0.0:
            return 0.0, 0.0
        d = v / r
        t = min(0.5, r / (2 * self.exit_distance(i, d)))
        a = ((math.atan2(v[1], v[0]) - self.theta(i)) / (2 * math.pi)) % 1.0
        return t, a

    def sector_of(self, z) -> int | None:
        for i in (1, 2, 3):
            if self.contains(i, z):
                return i
        return None

    def retract(self, z) -> tuple[np.ndarray, float]:
        """Target on the union of sectors for a point outside it, and the
        outer homotopy parameter.

        Within a sector's angular range the target is the radial projection
        onto the arc.  In a gap between two sectors, points move parallel to
        the gap's bisector onto the nearer edge, and points beyond the edge
        ends go to the edge's outer corner.
        """
        z = np.asarray(z, dtype=float)
        r = math.hypot(*z)
        lam = max(0.0, (r - self.rho) / (1 - self.rho))
        ang = math.atan2(z[1], z[0])
        for i in (1, 2, 3):
            off = (ang - self.theta(i) + math.pi) % (2 * math.pi) - math.pi
            if abs(off) <= self.half_open:
                return self.rho * np.array([math.cos(ang), math.sin(ang)]), lam
        gap = 2 * math.pi / 3 - 2 * self.half_open
        for i in (1, 2, 3):
            beta = self.theta(i) + math.pi / 3
            off = (ang - beta + math.pi) % (2 * math.pi) - math.pi
            if abs(off) <= gap / 2 + 1e-15:
                normal = np.array([math.sin(beta), -math.cos(beta)])
                d = float(normal @ z)
                reach = min(abs(d) / math.sin(gap / 2), self.rho)
                edge = beta - gap / 2 if d >= 0 else beta + gap / 2
                return reach * np.array([math.cos(edge), math.sin(edge)]), lam
        raise AssertionError("angle matched neither a sector nor a gap")


def g_P(x, path: CirclePath | None = None, i: int = 1) -> FiniteSubset:
    """The single-disk map built on path ``i`` of ``path``."""
    path = path or CirclePath()
    return FiniteSubset.of([Point(tuple(p)) for p in _g_P_points(x, path, i)], 3)


def _g_P_points(x, path: CirclePath, i: int) -> np.ndarray:
    z = to_disk(x)
    t = math.hypot(*z)
    a = (math.atan2(z[1], z[0]) / (2 * math.pi)) % 1.0 if t > 0 else 0.0
    if t <= 0.5:
        pts = _model_value(path, i, t, a)
    else:
        lam = 2 * (t - 0.5)
        pts = [(1 - lam) * p + lam * np.asarray(path.centre) for p in _model_value(path, i, 0.5, a)]
    return canonical_points(pts, 2)


def _wedge_points(x, path: CirclePath, layout: WedgeLayout, homotopy: bool) -> np.ndarray:
    z = to_disk(x)
    j = layout.sector_of(z)
    if j is not None:
        t, a = layout.psi_inverse(j, z)
        return canonical_points(_model_value(path, j, t, a), 2)
    target, lam = layout.retract(z)
    j = layout.sector_of(target)
    if j is None:
        raise AssertionError("retraction left the sectors")
    t, a = layout.psi_inverse(j, target)
    pts = _model_value(path, j, t, a)
    if homotopy and lam > 0:
        c = np.asarray(path.centre)
        pts = [(1 - lam) * p + lam * c for p in pts]
    return canonical_points(pts, 2)


def h_C(x, path: CirclePath | None = None, layout: WedgeLayout | None = None) -> FiniteSubset:
    """Three single-disk maps wedged at the centre, contracted to a point on the boundary."""
    pts = _wedge_points(x, path or CirclePath(), layout or WedgeLayout(), homotopy=True)
    return FiniteSubset.of([Point(tuple(p)) for p in pts], 3)


def f1(x, path: CirclePath | None = None, layout: WedgeLayout | None = None) -> FiniteSubset:
    """Like ``h_C`` inside the sectors, constant along the retraction trajectories outside."""
    pts = _wedge_points(x, path or CirclePath(), layout or WedgeLayout(), homotopy=False)
    return FiniteSubset.of([Point(tuple(p)) for p in pts], 3)


def _f2_point(y, path: CirclePath, layout: WedgeLayout, base: np.ndarray) -> np.ndarray:
    v = np.asarray(y, dtype=float) - np.asarray(path.centre)
    r = math.hypot(*v)
    if r == 0.0:
        return base.copy()
    ang = math.degrees(math.atan2(v[1], v[0])) % 360.0
    on_circle = _f2_on_circle(ang, path, layout)
    s = min(1.0, r / path.radius)
    return base + s * (on_circle - base)


def _f2_on_circle(ang: float, path: CirclePath, layout: WedgeLayout) -> np.ndarray:
    for i in (1, 2, 3):
        u = ((ang - path.angles_deg[i - 1] + 60.0) % 360.0) / 120.0
        if u <= 1.0:
            a = (0.5 + u) % 1.0
            return from_disk(layout.psi(i, 0.5, a))
    raise AssertionError("angle not covered by the three arcs")


def f2(y, path: CirclePath | None = None, layout: WedgeLayout | None = None,
       base=CENTRE) -> Point:
    """Single-valued map sending the arc around ``A_i`` onto the boundary of sector ``i``.

    Arc endpoints go to the apex and ``A_i`` goes to the boundary point
    opposite the apex.  Off the circle the map is coned from ``base`` at the
    circle's centre and constant along rays outside.
    """
    p = _f2_point(y, path or CirclePath(), layout or WedgeLayout(), np.asarray(base, dtype=float))
    return Point(tuple(float(c) for c in np.clip(p, 0.0, 1.0)))


def sample_g_P(resolution: int, path: CirclePath | None = None, i: int = 1) -> GridMultifunction:
    path = path or CirclePath()
    return sample_multifunction(lambda x: _g_P_points(x, path, i), 2, 2, resolution, 3)


def sample_h_C(resolution: int, path: CirclePath | None = None,
               layout: WedgeLayout | None = None) -> GridMultifunction:
    path, layout = path or CirclePath(), layout or WedgeLayout()
    return sample_multifunction(lambda x: _wedge_points(x, path, layout, True), 2, 2, resolution, 3)


def sample_f1(resolution: int, path: CirclePath | None = None,
              layout: WedgeLayout | None = None) -> GridMultifunction:
    path, layout = path or CirclePath(), layout or WedgeLayout()
    return sample_multifunction(lambda x: _wedge_points(x, path, layout, False), 2, 2, resolution, 3)


def sample_f2(resolution: int, path: CirclePath | None = None,
              layout: WedgeLayout | None = None) -> GridMultifunction:
    path, layout = path or CirclePath(), layout or WedgeLayout()
    return sample_multifunction(lambda y: [f2(y, path, layout).coords], 2, 2, resolution, 1)


class GraphDistance:
    """Sup-metric distance to the sampled graph of a grid multifunction.

    With ``swap`` the graph is stored as (value, node) pairs, so the
    distance is to the transposed graph.
    """

    def __init__(self, g: GridMultifunction, swap: bool = False):
        rows = []
        for flat, vals in enumerate(g.values):
            x = g.node_point(flat)
            for y in vals:
                rows.append(np.concatenate([y, x]) if swap else np.concatenate([x, y]))
        self.points = np.array(rows)
        self.tree = cKDTree(self.points)
        self.step = g.step

    def __call__(self, x, y) -> np.ndarray:
        q = np.concatenate([np.atleast_2d(x), np.atleast_2d(y)], axis=1)
        d, _ = self.tree.query(q, p=np.inf)
        return d

    def query(self, pts: np.ndarray) -> np.ndarray:
        d, _ = self.tree.query(np.atleast_2d(pts), p=np.inf)
        return d

    def column_min(self, first: np.ndarray, resolution: int) -> np.ndarray:
        """Least distance from ``(first, y)`` over grid points ``y``, exactly.

        For a graph point ``(u, v)`` the best grid ``y`` is the grid point
        nearest ``v``, so the minimum is over graph points of the larger of
        ``|first - u|`` and the distance from ``v`` to the grid.
        """
        if not hasattr(self, "_first_tree"):
            k = self.points.shape[1] // 2
            self._split = k
            self._first_tree = cKDTree(self.points[:, :k])
        k = self._split
        v = self.points[:, k:]
        to_grid = np.abs(v * resolution - np.round(v * resolution)).max(axis=1) / resolution
        first = np.atleast_2d(first)
        near, _ = self._first_tree.query(first, p=np.inf)
        out = np.empty(len(first))
        for j, q in enumerate(first):
            radius = max(near[j], 0.5 / resolution) * (1 + 1e-12) + 1e-15
            cand = self._first_tree.query_ball_point(q, radius, p=np.inf)
            du = np.abs(self.points[cand, :k] - q).max(axis=1)
            out[j] = np.maximum(du, to_grid[cand]).min()
        return out


def distance_cost(g: GridMultifunction, swap: bool = False) -> GraphDistance:
    """Cost vanishing exactly on the sampled graph of ``g`` and growing with distance."""
    return GraphDistance(g, swap)


def counterexample_game(sample_resolution: int = 256, path: CirclePath | None = None,
                        layout: WedgeLayout | None = None) -> Game:
    """Two players on the square whose best responses are ``f2`` and ``f1``.

    Player 1 pays the distance of ``(a2, a1)`` to the sampled graph of ``f2``;
    player 2 pays the distance of ``(a1, a2)`` to the sampled graph of ``f1``.
    Both costs are 1-Lipschitz in the sup metric.
    """
    path, layout = path or CirclePath(), layout or WedgeLayout()
    d1 = GraphDistance(sample_f1(sample_resolution, path, layout))
    d2 = GraphDistance(sample_f2(sample_resolution, path, layout))
    swap = [2, 3, 0, 1]
    costs = [lambda p: d2.query(p[:, swap]), lambda p: d1.query(p)]
    return Game((2, 2), costs, lipschitz=[1.0, 1.0],
                column_min=[d2.column_min, d1.column_min], name="counterexample")


@dataclass
class GapReport:
    resolution: int
    gap: float
    argmin_angle: float
    samples: list[dict] = field(default_factory=list)


def no_fixed_point_gap(resolution: int, path: CirclePath | None = None,
                       layout: WedgeLayout | None = None) -> GapReport:
    """Smallest sup-distance from ``y`` to ``f1(f2(y))`` over ``3 * resolution``
    equally spaced points ``y`` of the circle."""
    path, layout = path or CirclePath(), layout or WedgeLayout()
    count = 3 * resolution
    best = (math.inf, 0.0)
    samples = []
    for j in range(count):
        ang = 360.0 * j / count
        y = path.point_at(ang)
        x = _f2_point(y, path, layout, CENTRE)
        vals = _wedge_points(x, path, layout, homotopy=False)
        d = float(np.abs(vals - y).max(axis=1).min())
        samples.append({"angle": ang, "distance": d,
                        "image_angles": sorted(round(path.angle_of(v), 9) for v in vals)})
        if d < best[0]:
            best = (d, ang)
    return GapReport(resolution, best[0], best[1], samples)


# unsigned incidences of the sheets over the slit: each sheet meets the slit
# lines of one disk; "A" and "B" sheets meet one line from both sides, the
# middle sheet meets both lines once
_HC_SHEETS = {
    "e1": {1: "A", 2: "B", 3: "M"},
    "e2": {1: "M", 2: "A", 3: "B"},
    "e3": {1: "B", 2: "M", 3: "A"},
}


def _sheet_boundary(role: str, lines: tuple[str, str]) -> dict[str, int]:
    # the sheet boundary leaves the centre along one side of the slit and
    # returns along the other; a line met from both sides cancels
    first, second = {"A": (lines[0], lines[0]), "B": (lines[1], lines[1]),
                     "M": (lines[0], lines[1])}[role]
    out: dict[str, int] = {}
    out[first] = out.get(first, 0) + 1
    out[second] = out.get(second, 0) - 1
    return {k: v for k, v in out.items() if v}


def cw_gr_gP() -> ChainComplex:
    """Cell structure of the single-disk graph: vertices ``v`` (over the centre)
    and ``w``; edges ``a1``, ``a2`` over the slit and the boundary loop ``alpha``;
    one 2-cell per sheet."""
    vertices = ["v", "w"]
    edges = ["a1", "a2", "alpha"]
    faces = ["e1", "e2", "e3"]
    bd1 = [{1: 1, 0: -1}, {1: 1, 0: -1}, {}]
    bd2 = []
    for role in ("A", "B", "M"):
        col = {edges.index("alpha"): 1}
        for name, c in _sheet_boundary(role, ("a1", "a2")).items():
            col[edges.index(name)] = col.get(edges.index(name), 0) + c
        bd2.append(col)
    return ChainComplex([[{}, {}], bd1, bd2], [vertices, edges, faces])


def cw_gr_hC() -> ChainComplex:
    """Cell structure of the wedged graph.

    Vertices ``v_i`` sit on the boundary loop and ``w_i`` over the centre of
    disk ``i``; edges ``a_j^i`` run from ``v_i`` to ``w_i`` and the boundary
    arcs ``alpha_kl`` join ``v_k`` to ``v_l``.  Each 2-cell is one sheet from
    every disk, glued by the cyclic permutations.
    """
    vertices = [f"v{i}" for i in (1, 2, 3)] + [f"w{i}" for i in (1, 2, 3)]
    edges = [f"a{j}^{i}" for i in (1, 2, 3) for j in (1, 2)] + ["alpha12", "alpha23", "alpha31"]
    vi = {name: k for k, name in enumerate(vertices)}
    ei = {name: k for k, name in enumerate(edges)}
    bd1 = []
    for name in edges:
        if name.startswith("alpha"):
            k, l = name[-2], name[-1]
            bd1.append({vi[f"v{l}"]: 1, vi[f"v{k}"]: -1})
        else:
            i = name[-1]
            bd1.append({vi[f"w{i}"]: 1, vi[f"v{i}"]: -1})
    bd2 = []
    for face in ("e1", "e2", "e3"):
        col = {ei["alpha12"]: 1, ei["alpha23"]: 1, ei["alpha31"]: 1}
        for disk, role in _HC_SHEETS[face].items():
            for name, c in _sheet_boundary(role, (f"a1^{disk}", f"a2^{disk}")).items():
                col[ei[name]] = col.get(ei[name], 0) + c
        bd2.append({k: v for k, v in col.items() if v})
    return ChainComplex([[{} for _ in vertices], bd1, bd2], [vertices, edges, ["e1", "e2", "e3"]])


def root_cover(x, r: int, scale: float = 0.4) -> np.ndarray:
    """The ``r`` complex ``r``-th roots of the chart point, shrunk to the centre
    towards the boundary so the boundary value is the single centre point."""
    z = to_disk(x)
    zc = complex(z[0], z[1])
    mod = abs(zc)
    if mod == 0.0 or mod >= 1.0:
        return CENTRE[None, :].copy()
    root = mod ** (1.0 / r)
    arg = math.atan2(z[1], z[0])
    pts = []
    for k in range(r):
        phi = (arg + 2 * math.pi * k) / r
        rad = scale * root * (1 - mod)
        pts.append(CENTRE + rad * np.array([math.cos(phi), math.sin(phi)]))
    return canonical_points(pts, 2)


def sample_root_cover(resolution: int, r: int, scale: float = 0.4) -> GridMultifunction:
    return sample_multifunction(lambda x: root_cover(x, r, scale), 2, 2, resolution, r)
