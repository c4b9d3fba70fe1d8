"""Games on cubes, best responses, and regret-certified equilibrium search.

A player's strategy lies in ``[0,1]^{n_i}`` and a profile is the concatenation
of all strategies.  Costs are vectorised: they take an array of profiles of
shape ``(K, d0)`` and return ``K`` values.  The regret of player ``i`` at a
profile is its cost minus the least cost over its own grid, the others held
fixed.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .lift import LiftResult, build_strand_system, lift_to_configuration
from .multifunction import GridMultifunction

__all__ = [
    "Game",
    "BestResponse",
    "BestResponseField",
    "EquilibriumCertificate",
    "NashResult",
    "RefinementReport",
    "bilinear_game",
    "matching_pennies",
    "best_response",
    "response_field",
    "nash_search",
    "refine_intersection",
    "bimatrix_solve",
    "BimatrixSolution",
    "polynomial_like_check",
    "grid_points",
]

Cost = Callable[[np.ndarray], np.ndarray]
ColumnMin = Callable[[np.ndarray, int], np.ndarray]

# profiles evaluated per vectorised cost call
_CHUNK = 1 << 18


def grid_points(dim: int, resolution: int) -> np.ndarray:
    """All nodes of ``[0,1]^dim`` at ``1/resolution``, row-major."""
    axes = [np.arange(resolution + 1) / resolution] * dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


@dataclass
class Game:
    """Players' strategy dimensions and costs.

    ``lipschitz[i]`` bounds cost ``i`` in the sup metric on profiles; it
    enables branch-and-bound search.  ``column_min[i]``, when given, returns
    the exact least cost over player ``i``'s grid for a batch of the other
    players' strategies (shape ``(K, d_i)``) and a resolution.
    """

    dims: tuple[int, ...]
    costs: list[Cost]
    lipschitz: list[float] | None = None
    column_min: list[ColumnMin | None] | None = None
    name: str = "game"

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.costs) != len(self.dims):
            raise ValueError("one cost per player")
        if any(d < 1 for d in self.dims):
            raise ValueError("strategy dimensions must be positive")

    @property
    def players(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def complement_dim(self, i: int) -> int:
        return self.total_dim - self.dims[i]

    def own_slice(self, i: int) -> slice:
        start = sum(self.dims[:i])
        return slice(start, start + self.dims[i])

    def split(self, i: int, profiles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = self.own_slice(i)
        own = profiles[:, s]
        others = np.concatenate([profiles[:, :s.start], profiles[:, s.stop:]], axis=1)
        return own, others

    def join(self, i: int, own: np.ndarray, others: np.ndarray) -> np.ndarray:
        s = self.own_slice(i)
        return np.concatenate([others[:, :s.start], own, others[:, s.start:]], axis=1)

    def cost(self, i: int, profiles: np.ndarray) -> np.ndarray:
        profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
        out = np.empty(len(profiles))
        for a in range(0, len(profiles), _CHUNK):
            out[a:a + _CHUNK] = self.costs[i](profiles[a:a + _CHUNK])
        if not np.isfinite(out).all():
            raise ValueError(f"player {i}: non-finite cost")
        return out

    def scan_column_min(self, i: int, others: np.ndarray, resolution: int) -> np.ndarray:
        """Least cost over the own grid by direct evaluation."""
        own = grid_points(self.dims[i], resolution)
        others = np.atleast_2d(others)
        out = np.empty(len(others))
        per = max(1, _CHUNK // len(own))
        for a in range(0, len(others), per):
            block = others[a:a + per]
            prof = self.join(i, np.tile(own, (len(block), 1)), np.repeat(block, len(own), axis=0))
            out[a:a + per] = self.cost(i, prof).reshape(len(block), len(own)).min(axis=1)
        return out

    def own_min(self, i: int, others: np.ndarray, resolution: int) -> np.ndarray:
        hook = self.column_min[i] if self.column_min else None
        if hook is not None:
            return np.asarray(hook(np.atleast_2d(others), resolution), dtype=float)
        return self.scan_column_min(i, others, resolution)

    def regrets(self, profiles: np.ndarray, resolution: int) -> np.ndarray:
        profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
        out = np.empty((len(profiles), self.players))
        for i in range(self.players):
            _, others = self.split(i, profiles)
            out[:, i] = self.cost(i, profiles) - self.own_min(i, others, resolution)
        return np.maximum(out, 0.0)


def bilinear_game(M1, M2) -> Game:
    """Mixed extension of a 2x2 game; each strategy is the weight on the first action.

    Player ``i`` pays ``p^T M_i q`` where ``p = (x, 1-x)`` and ``q = (y, 1-y)``.
    """
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)

    def make(M):
        def cost(prof):
            x, y = prof[:, 0], prof[:, 1]
            p = np.stack([x, 1 - x], axis=1)
            q = np.stack([y, 1 - y], axis=1)
            return np.einsum("ki,ij,kj->k", p, M, q)
        return cost

    L = [float(2 * np.abs(M).max()) for M in (M1, M2)]
    return Game((1, 1), [make(M1), make(M2)], lipschitz=L, name="bimatrix")


def matching_pennies() -> Game:
    M1 = [[1, -1], [-1, 1]]
    g = bilinear_game(M1, -np.asarray(M1))
    g.name = "matching_pennies"
    return g


@dataclass
class BestResponse:
    points: np.ndarray          # one representative per argmin component
    costs: np.ndarray
    component_sizes: list[int]
    extended: bool              # some component spans more than two grid steps
    exceeds: bool               # more components than the cardinality bound

    @property
    def flagged(self) -> bool:
        return self.extended or self.exceeds


def best_response(game: Game, i: int, others, resolution: int, tol: float,
                  local: bool = False, k: int | None = None) -> BestResponse:
    """Grid argmin (or local minima) of player ``i`` against ``others``, clustered."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = game.dims[i]
    own = grid_points(n, resolution)
    others = np.atleast_2d(np.asarray(others, dtype=float))
    c = game.cost(i, game.join(i, own, np.repeat(others, len(own), axis=0)))
    shape = (resolution + 1,) * n
    grid = c.reshape(shape)
    if local:
        footprint = np.ones((3,) * n, dtype=bool)
        lowest = ndimage.minimum_filter(grid, footprint=footprint, mode="nearest")
        mask = grid <= lowest + tol
    else:
        mask = grid <= grid.min() + tol
    labels, count = ndimage.label(mask, structure=ndimage.generate_binary_structure(n, n))
    flat_labels = labels.ravel()
    reps, rep_costs, sizes = [], [], []
    extended = False
    for comp in range(1, count + 1):
        idx = np.nonzero(flat_labels == comp)[0]
        best = idx[np.argmin(c[idx])]
        reps.append(own[best])
        rep_costs.append(c[best])
        sizes.append(len(idx))
        multi = np.array(np.unravel_index(idx, shape))
        if (multi.max(axis=1) - multi.min(axis=1)).max() > 2:
            extended = True
    order = np.argsort(rep_costs, kind="stable")
    pts = np.array(reps)[order]
    costs = np.array(rep_costs)[order]
    sizes = [sizes[j] for j in order]
    exceeds = k is not None and len(pts) > k
    return BestResponse(pts, costs, sizes, extended, exceeds)


@dataclass
class BestResponseField:
    player: int
    field: GridMultifunction
    tol: float
    counts: list[int]
    flagged_nodes: list[int]
    local: bool = False


def response_field(game: Game, i: int, resolution: int, tol: float, k: int | None = None,
                   local: bool = False) -> BestResponseField:
    """Best responses of player ``i`` at every node of the others' grid.

    With a bound ``k``, only the ``k`` cheapest representatives are kept and
    the node is flagged.
    """
    dom = grid_points(game.complement_dim(i), resolution)
    values, counts, flagged = [], [], []
    for node, others in enumerate(dom):
        br = best_response(game, i, others, resolution, tol, local=local, k=k)
        pts = br.points if k is None else br.points[:k]
        values.append(pts)
        counts.append(len(br.points))
        if br.flagged:
            flagged.append(node)
    bound = k if k is not None else max(counts)
    f = GridMultifunction(game.complement_dim(i), game.dims[i], resolution, bound, values)
    return BestResponseField(i, f, tol, counts, flagged, local)


@dataclass
class EquilibriumCertificate:
    point: tuple[float, ...]
    regrets: tuple[float, ...]
    tol: float
    resolution: int

    @property
    def max_regret(self) -> float:
        return max(self.regrets)

    def audit(self, game: Game) -> bool:
        """Recompute every regret by a full scan of each player's grid."""
        prof = np.array([self.point])
        for i in range(game.players):
            _, others = game.split(i, prof)
            r = game.cost(i, prof)[0] - game.scan_column_min(i, others, self.resolution)[0]
            if r > self.tol + 1e-12:
                return False
        return True

    def to_json(self) -> dict:
        return {"point": list(self.point), "regrets": list(self.regrets),
                "max_regret": self.max_regret, "tol": self.tol, "resolution": self.resolution}


@dataclass
class NashResult:
    certificates: list[EquilibriumCertificate]
    min_max_regret: float
    argmin: tuple[float, ...]
    resolution: int
    tol: float
    evaluated: int
    method: str

    def to_json(self) -> dict:
        return {
            "resolution": self.resolution,
            "tol": self.tol,
            "method": self.method,
            "evaluated_profiles": self.evaluated,
            "min_max_regret": self.min_max_regret,
            "argmin": list(self.argmin),
            "certificates": [c.to_json() for c in self.certificates],
        }


def _dedupe(points: np.ndarray, regrets: np.ndarray, radius: float) -> list[int]:
    """Greedy clustering: lowest (max, sum) regret first, absorbing points within ``radius``."""
    order = np.lexsort((regrets.sum(axis=1), regrets.max(axis=1)))
    kept: list[int] = []
    for j in order:
        if all(np.abs(points[j] - points[k]).max() > radius + 1e-12 for k in kept):
            kept.append(int(j))
    return kept


class _GridRegret:
    """Regrets at grid profiles using column minima tabulated once per player."""

    def __init__(self, game: Game, resolution: int):
        self.game = game
        self.N = resolution
        self.tables = []
        for i in range(game.players):
            dom = grid_points(game.complement_dim(i), resolution)
            self.tables.append(game.own_min(i, dom, resolution))
        self.evaluated = 0

    def __call__(self, idx: np.ndarray) -> np.ndarray:
        """Regrets at integer profile indices, shape ``(K, d0)``."""
        g, N = self.game, self.N
        prof = idx / N
        out = np.empty((len(idx), g.players))
        for i in range(g.players):
            _, oth = g.split(i, idx)
            flat = np.ravel_multi_index(tuple(oth.T), (N + 1,) * oth.shape[1])
            out[:, i] = g.cost(i, prof) - self.tables[i][flat]
        self.evaluated += len(idx)
        return np.maximum(out, 0.0)


def nash_search(game: Game, resolution: int, tol: float, brute_limit: int = 200_000,
                dedupe_radius: float | None = None) -> NashResult:
    """All grid profiles with every regret at most ``tol``, deduplicated, plus
    the least attained maximal regret.

    Small grids are scanned exhaustively.  Larger ones use branch and bound
    over boxes of the product grid, pruning with the Lipschitz bound
    ``regret_i(a) >= regret_i(c) - 2 L_i |a - c|``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = resolution
    d0 = game.total_dim
    R = _GridRegret(game, N)
    total = (N + 1) ** d0
    hits: list[np.ndarray] = []
    hit_regrets: list[np.ndarray] = []
    if total <= brute_limit:
        method = "exhaustive"
        best = (math.inf, None)
        for a in range(0, total, _CHUNK):
            flat = np.arange(a, min(total, a + _CHUNK))
            idx = np.stack(np.unravel_index(flat, (N + 1,) * d0), axis=1)
            reg = R(idx)
            mx = reg.max(axis=1)
            j = int(np.argmin(mx))
            if mx[j] < best[0]:
                best = (float(mx[j]), idx[j])
            keep = mx <= tol
            hits.append(idx[keep])
            hit_regrets.append(reg[keep])
    else:
        if game.lipschitz is None:
            raise ValueError("grid too large for exhaustive search and no Lipschitz bounds given")
        method = "branch-and-bound"
        best = _branch_and_bound(game, R, N, tol, hits, hit_regrets)
    pts = np.concatenate(hits) if hits else np.zeros((0, d0))
    regs = np.concatenate(hit_regrets) if hit_regrets else np.zeros((0, game.players))
    radius = 2.0 / N if dedupe_radius is None else dedupe_radius
    certs = []
    if len(pts):
        for j in _dedupe(pts / N, regs, radius):
            certs.append(EquilibriumCertificate(tuple(float(v) for v in pts[j] / N),
                                                tuple(float(v) for v in regs[j]), tol, N))
    return NashResult(certs, best[0], tuple(float(v) for v in np.asarray(best[1]) / N), N, tol,
                      R.evaluated, method)


def _branch_and_bound(game, R, N, tol, hits, hit_regrets):
    d0 = game.total_dim
    L2 = 2 * np.array(game.lipschitz, dtype=float)
    boxes = [(np.zeros(d0, dtype=int), np.full(d0, N, dtype=int))]
    best_val, best_idx = math.inf, None
    seen = set()
    while boxes:
        lo = np.array([b[0] for b in boxes])
        hi = np.array([b[1] for b in boxes])
        mid = (lo + hi) // 2
        reg = R(mid)
        mx = reg.max(axis=1)
        j = int(np.argmin(mx))
        if mx[j] < best_val:
            best_val, best_idx = float(mx[j]), mid[j].copy()
        radius = np.maximum(hi - mid, mid - lo).max(axis=1) / N
        lower = (reg - radius[:, None] * L2[None, :]).max(axis=1)
        threshold = max(tol, best_val)
        point_box = (hi == lo).all(axis=1)
        for b in np.nonzero(point_box & (mx <= tol))[0]:
            key = tuple(mid[b])
            if key not in seen:
                seen.add(key)
                hits.append(mid[b][None, :])
                hit_regrets.append(reg[b][None, :])
        nxt = []
        for b in np.nonzero(~point_box & (lower <= threshold))[0]:
            l, h = lo[b], hi[b]
            m = (l + h) // 2
            halves = [((l[a], m[a]), (m[a] + 1, h[a])) if h[a] > l[a] else ((l[a], h[a]),)
                      for a in range(d0)]
            for choice in itertools.product(*halves):
                nl = np.array([c[0] for c in choice])
                nh = np.array([c[1] for c in choice])
                if (nl <= nh).all():
                    nxt.append((nl, nh))
        boxes = nxt
        # boxes pruned later with a better incumbent simply cost extra work
    return best_val, best_idx


@dataclass
class RefinementReport:
    rungs: list[dict]
    limit: tuple[float, ...] | None
    cauchy_modulus: list[float]
    emptied_at: int | None

    def to_json(self) -> dict:
        return {"rungs": self.rungs, "limit": None if self.limit is None else list(self.limit),
                "cauchy_modulus": self.cauchy_modulus, "emptied_at": self.emptied_at}


def refine_intersection(game: Game, eps_ladder: Sequence[float],
                        resolutions: Sequence[int]) -> RefinementReport:
    """Witnesses of the intersection of the eps-fattened best-response graphs.

    A profile lies in the fattened graph of player ``i`` when its regret is
    at most ``eps``; the witness at each rung is the profile of least
    maximal regret, which lies in every fattened graph iff it is within
    ``eps``.  Witnesses are tracked across rungs for a Cauchy modulus.
    """
    if len(eps_ladder) != len(resolutions):
        raise ValueError("eps ladder and resolution ladder must have equal length")
    if any(b > a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be non-increasing")
    if any(b < a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be non-decreasing")
    rungs, witnesses = [], []
    emptied = None
    for k, (eps, N) in enumerate(zip(eps_ladder, resolutions)):
        res = nash_search(game, N, eps)
        found = res.min_max_regret <= eps
        rungs.append({"eps": eps, "resolution": N, "witness": list(res.argmin),
                      "min_max_regret": res.min_max_regret, "nonempty": found,
                      "certificates": len(res.certificates)})
        if not found:
            emptied = k
            break
        witnesses.append(np.array(res.argmin))
    modulus = [float(np.abs(a - b).max()) for a, b in zip(witnesses, witnesses[1:])]
    limit = tuple(float(v) for v in witnesses[-1]) if witnesses and emptied is None else None
    return RefinementReport(rungs, limit, modulus, emptied)


@dataclass
class BimatrixSolution:
    """Equilibria as boxes ``((x_lo, x_hi), (y_lo, y_hi))`` of exact rationals."""

    boxes: list[tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]]
    continuum: bool

    @property
    def points(self) -> list[tuple[Fraction, Fraction]]:
        return [(b[0][0], b[1][0]) for b in self.boxes if b[0][0] == b[0][1] and b[1][0] == b[1][1]]


def _indifference(coef: Fraction, const: Fraction) -> list[tuple[tuple[Fraction, Fraction], str]]:
    """Pieces of [0,1] on which ``coef * t + const`` is negative, zero or positive."""
    z, o = Fraction(0), Fraction(1)
    if coef == 0:
        s = "0" if const == 0 else ("-" if const < 0 else "+")
        return [((z, o), s)]
    root = -const / coef
    sign_at = lambda t: "-" if coef * t + const < 0 else ("+" if coef * t + const > 0 else "0")
    if root <= 0 or root >= 1:
        pieces = [((z, o), sign_at(Fraction(1, 2)))]
        if root == 0:
            pieces.append(((z, z), "0"))
        elif root == 1:
            pieces.append(((o, o), "0"))
        return pieces
    return [((z, root), sign_at(root / 2)), ((root, root), "0"), ((root, o), sign_at((root + 1) / 2))]


def _response_boxes(coef, const):
    """Graph of the best response to the opponent's strategy ``t`` when the own
    cost slope is ``coef * t + const``: boxes (own interval, t interval)."""
    z, o = Fraction(0), Fraction(1)
    out = []
    for interval, s in _indifference(coef, const):
        own = {"+": (z, z), "-": (o, o), "0": (z, o)}[s]
        out.append((own, interval))
    return out


def bimatrix_solve(M1, M2) -> BimatrixSolution:
    """All equilibria of the mixed 2x2 game in exact rational arithmetic.

    Each player's cost is linear in its own weight with a slope affine in the
    opponent's weight, so each best-response graph is a union of axis-parallel
    segments; equilibria are their intersections.
    """
    A = [[Fraction(v) for v in row] for row in M1]
    B = [[Fraction(v) for v in row] for row in M2]
    # player 1: d/dx of p^T A q with q = (y, 1-y)
    c1 = (A[0][0] - A[0][1]) - (A[1][0] - A[1][1])
    k1 = A[0][1] - A[1][1]
    c2 = (B[0][0] - B[1][0]) - (B[0][1] - B[1][1])
    k2 = B[1][0] - B[1][1]
    # both lists hold (x interval, y interval) boxes
    g1 = _response_boxes(c1, k1)
    g2 = [(t, own) for own, t in _response_boxes(c2, k2)]
    boxes = []
    for (x1, y1) in g1:
        for (x2, y2) in g2:
            x = (max(x1[0], x2[0]), min(x1[1], x2[1]))
            y = (max(y1[0], y2[0]), min(y1[1], y2[1]))
            if x[0] <= x[1] and y[0] <= y[1]:
                boxes.append((x, y))
    boxes = _merge_boxes(boxes)
    continuum = any(b[0][0] < b[0][1] or b[1][0] < b[1][1] for b in boxes)
    return BimatrixSolution(sorted(boxes), continuum)


def _merge_boxes(boxes):
    out = []
    for b in boxes:
        if any(o[0][0] <= b[0][0] and b[0][1] <= o[0][1] and o[1][0] <= b[1][0] and b[1][1] <= o[1][1]
               for o in out):
            continue
        out = [o for o in out if not (b[0][0] <= o[0][0] and o[0][1] <= b[0][1]
                                      and b[1][0] <= o[1][0] and o[1][1] <= b[1][1])]
        out.append(b)
    return out


def polynomial_like_check(field: BestResponseField, M: int, tol: float | None = None) -> LiftResult:
    """Whether the response field lifts to weight-``M`` configurations."""
    S = build_strand_system(field.field, tol)
    return lift_to_configuration(field.field, S, M)
