"""Strand systems of sampled multifunctions and configuration lifts.

Between two adjacent nodes, member points are linked when they lie within the
Hausdorff distance of the two values.  A lift must move weight only along such
links, so the weight of every linked cluster is conserved across the edge.
Clusters with one point on each side glue strands together; larger clusters
become sum constraints.  Which strands are forced to weight zero is decided by
a linear program and then proved with an exact rational certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .multifunction import GridMultifunction

__all__ = [
    "Cluster",
    "StrandSystem",
    "LiftResult",
    "build_strand_system",
    "forced_zero",
    "lift_to_configuration",
]

_REL = 1e-9
_ABS = 1e-12
_DENOM = 10 ** 6


@dataclass(frozen=True)
class Cluster:
    """A linked group of member points across one grid edge."""

    u: int
    left: tuple[int, ...]
    v: int
    right: tuple[int, ...]
    distance: float

    @property
    def kind(self) -> str:
        if len(self.left) == len(self.right) == 1:
            return "edge"
        return "ambiguous" if len(self.left) == len(self.right) else "merge"


@dataclass
class StrandSystem:
    """Strand points ``(node, index)``, the clusters linking them and the
    resulting strand components."""

    f: GridMultifunction
    tol: float
    points: list[tuple[int, int]]
    clusters: list[Cluster]
    component: np.ndarray          # component id per strand point
    n_components: int
    offsets: np.ndarray            # first strand point of each node

    def point_id(self, node: int, index: int) -> int:
        return int(self.offsets[node] + index)

    @property
    def edges(self) -> list[Cluster]:
        return [c for c in self.clusters if c.kind == "edge"]

    @property
    def merges(self) -> list[Cluster]:
        return [c for c in self.clusters if c.kind == "merge"]

    @property
    def ambiguous(self) -> list[Cluster]:
        return [c for c in self.clusters if c.kind == "ambiguous"]

    def component_sizes(self) -> np.ndarray:
        return np.bincount(self.component, minlength=self.n_components)

    def constraint_rows(self) -> list[dict[int, int]]:
        """Homogeneous equations over component weights plus the total (last variable)."""
        T = self.n_components
        rows: list[dict[int, int]] = []
        seen = set()
        for node in range(self.f.node_count):
            row: dict[int, int] = {T: -1}
            for i in range(len(self.f.values[node])):
                c = int(self.component[self.point_id(node, i)])
                row[c] = row.get(c, 0) + 1
            key = tuple(sorted(row.items()))
            if key not in seen:
                seen.add(key)
                rows.append(row)
        for cl in self.clusters:
            if cl.kind == "edge":
                continue
            row = {}
            for i in cl.left:
                c = int(self.component[self.point_id(cl.u, i)])
                row[c] = row.get(c, 0) + 1
            for j in cl.right:
                c = int(self.component[self.point_id(cl.v, j)])
                row[c] = row.get(c, 0) - 1
            row = {k: v for k, v in row.items() if v}
            key = tuple(sorted(row.items()))
            if row and key not in seen:
                seen.add(key)
                rows.append(row)
        return rows

    def summary(self) -> dict:
        sizes = self.component_sizes()
        return {
            "strand_points": len(self.points),
            "components": self.n_components,
            "largest_components": sorted(sizes.tolist(), reverse=True)[:6],
            "edges": len(self.edges),
            "merges": len(self.merges),
            "ambiguous": len(self.ambiguous),
            "tol": self.tol,
        }


def build_strand_system(f: GridMultifunction, tol: float | None = None) -> StrandSystem:
    """Link member points of adjacent nodes.

    ``tol`` bounds the Hausdorff step between adjacent nodes; it defaults to
    the observed modulus.  Raises ``ValueError`` if an edge exceeds it.
    """
    if tol is None:
        tol = f.modulus * (1 + _REL) + _ABS
    counts = np.array([len(v) for v in f.values])
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    points = [(node, i) for node in range(f.node_count) for i in range(counts[node])]
    clusters: list[Cluster] = []
    rows, cols = [], []
    for u, v in f.edges():
        a, b = f.values[u], f.values[v]
        D = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
        haus = max(float(D.min(axis=1).max()), float(D.min(axis=0).max()))
        if haus > tol:
            raise ValueError(f"nodes {f.node_multi(u)} and {f.node_multi(v)} differ by {haus:.3g}, "
                             f"above the tolerance {tol:.3g}")
        eta = haus * (1 + _REL) + _ABS
        link = D <= eta
        p, q = link.shape
        adj = np.zeros((p + q, p + q), dtype=bool)
        adj[:p, p:] = link
        n, lab = connected_components(csr_matrix(adj), directed=False)
        for c in range(n):
            left = tuple(int(i) for i in np.nonzero(lab[:p] == c)[0])
            right = tuple(int(j) for j in np.nonzero(lab[p:] == c)[0])
            dist = float(D[np.ix_(left, right)].min(axis=1).max()) if left and right else 0.0
            cl = Cluster(u, left, v, right, dist)
            clusters.append(cl)
            if cl.kind == "edge":
                rows.append(offsets[u] + left[0])
                cols.append(offsets[v] + right[0])
    total = len(points)
    g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(total, total))
    n_comp, comp = connected_components(g, directed=False)
    return StrandSystem(f, float(tol), points, clusters, comp.astype(int), int(n_comp), offsets)


def _dense(rows: list[dict[int, int]], nvar: int) -> np.ndarray:
    A = np.zeros((len(rows), nvar))
    for r, row in enumerate(rows):
        for j, c in row.items():
            A[r, j] = c
    return A


def _exact_transpose_product(rows: list[dict[int, int]], y: list[Fraction], nvar: int) -> list[Fraction]:
    out = [Fraction(0)] * nvar
    for r, row in enumerate(rows):
        if y[r]:
            for j, c in row.items():
                out[j] += y[r] * c
    return out


@dataclass
class ForcedZero:
    """Variables vanishing in every non-negative solution, with proofs.

    ``witness`` is an exact non-negative solution positive on ``support``;
    ``multipliers`` combine the equations into one whose coefficients are
    non-negative and positive exactly off the support.
    """

    support: list[int]
    forced: list[int]
    witness: list[Fraction]
    multipliers: list[Fraction]

    def verify(self, rows: list[dict[int, int]], nvar: int) -> bool:
        for row in rows:
            if sum(self.witness[j] * c for j, c in row.items()) != 0:
                return False
        if any(w < 0 for w in self.witness):
            return False
        if any(self.witness[j] <= 0 for j in self.support):
            return False
        combo = _exact_transpose_product(rows, self.multipliers, nvar)
        if any(c < 0 for c in combo):
            return False
        return all(combo[j] > 0 for j in self.forced)


def forced_zero(rows: list[dict[int, int]], nvar: int) -> ForcedZero:
    """Split the variables of ``A x = 0, x >= 0`` into the maximal support and
    the variables forced to zero, each side with an exact certificate."""
    A = _dense(rows, nvar)
    m = len(rows)
    # maximise the number of variables that can be positive: x >= s, 0 <= s <= 1
    c = np.concatenate([np.zeros(nvar), -np.ones(nvar)])
    A_eq = np.hstack([A, np.zeros((m, nvar))])
    A_ub = np.hstack([-np.eye(nvar), np.eye(nvar)])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nvar), A_eq=A_eq, b_eq=np.zeros(m),
                  bounds=[(0, None)] * nvar + [(0, 1)] * nvar, method="highs")
    if res.status != 0:
        raise RuntimeError(f"support LP failed: {res.message}")
    support = [j for j in range(nvar) if res.x[nvar + j] > 0.5]
    forced = [j for j in range(nvar) if j not in set(support)]
    witness = _support_witness(A, support, nvar)
    multipliers = _farkas_multipliers(A, support, forced, m)
    cert = ForcedZero(support, forced, witness, multipliers)
    if not cert.verify(rows, nvar):
        raise RuntimeError("could not certify the forced-zero split exactly")
    return cert


def _rationalise(v) -> list[Fraction]:
    return [Fraction(float(x)).limit_denominator(_DENOM) for x in v]


def _support_witness(A: np.ndarray, support: list[int], nvar: int) -> list[Fraction]:
    if not support:
        return [Fraction(0)] * nvar
    ub = np.zeros(nvar)
    lb = np.zeros(nvar)
    lb[support] = 1
    ub[support] = np.inf
    res = linprog(np.ones(nvar), A_eq=A, b_eq=np.zeros(len(A)),
                  bounds=list(zip(lb, ub)), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"witness LP failed: {res.message}")
    return _rationalise(res.x)


def _farkas_multipliers(A: np.ndarray, support: list[int], forced: list[int],
                        m: int) -> list[Fraction]:
    if not forced:
        return [Fraction(0)] * m
    # A^T y = 0 on the support, >= 1 off it
    A_eq = A[:, support].T if support else None
    A_ub = -A[:, forced].T
    res = linprog(np.zeros(m), A_ub=A_ub, b_ub=-np.ones(len(forced)),
                  A_eq=A_eq, b_eq=np.zeros(len(support)) if support else None,
                  bounds=[(None, None)] * m, method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"multiplier LP failed: {res.message}")
    return _rationalise(res.x)


@dataclass
class LiftResult:
    status: str                              # "FEASIBLE", "OBSTRUCTED" or "NO_INTEGER_LIFT"
    total: int
    system: StrandSystem
    certificate: ForcedZero
    component_weights: list[int] | None = None
    lifted: GridMultifunction | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def forced_components(self) -> list[int]:
        T = self.system.n_components
        return [j for j in self.certificate.forced if j != T]

    def to_json(self) -> dict:
        data = {
            "status": self.status,
            "total_weight": self.total,
            "strands": self.system.summary(),
            "forced_zero_components": self.forced_components,
            "total_forced_zero": self.system.n_components in self.certificate.forced,
            "certificate": {
                "multipliers": [str(y) for y in self.certificate.multipliers],
                "witness": [str(w) for w in self.certificate.witness],
            },
            "notes": self.notes,
        }
        if self.component_weights is not None:
            data["component_weights"] = self.component_weights
        return data


def lift_to_configuration(f: GridMultifunction, S: StrandSystem | None, M: int) -> LiftResult:
    """Integer weights, constant on strand components and conserved on
    clusters, summing to ``M`` at every node; or a certificate that the total
    is forced to zero."""
    if M < 1:
        raise ValueError("total weight must be positive")
    S = S or build_strand_system(f)
    rows = S.constraint_rows()
    nvar = S.n_components + 1
    T = S.n_components
    cert = forced_zero(rows, nvar)
    if T in cert.forced:
        return LiftResult("OBSTRUCTED", M, S, cert,
                          notes=["every admissible weighting has total zero"])
    A = _dense(rows, nvar)
    lb = np.zeros(nvar)
    ub = np.full(nvar, float(M))
    ub[cert.forced] = 0
    lb[T] = ub[T] = M
    res = milp(np.zeros(nvar), constraints=LinearConstraint(A, 0, 0),
               integrality=np.ones(nvar), bounds=Bounds(lb, ub))
    if res.status != 0 or res.x is None:
        return LiftResult("NO_INTEGER_LIFT", M, S, cert,
                          notes=[f"integer program: {res.message}"])
    w = [int(round(x)) for x in res.x]
    if any(sum(w[j] * c for j, c in row.items()) for row in rows):
        return LiftResult("NO_INTEGER_LIFT", M, S, cert, notes=["rounded solution failed exact check"])
    values, weights = [], []
    for node in range(f.node_count):
        pts, ws = [], []
        for i, p in enumerate(f.values[node]):
            wt = w[S.component[S.point_id(node, i)]]
            if wt:
                pts.append(p)
                ws.append(wt)
        values.append(np.array(pts))
        weights.append(np.array(ws, dtype=int))
    lifted = GridMultifunction(f.m, f.n, f.resolution, M, values, weights)
    return LiftResult("FEASIBLE", M, S, cert, w[:T], lifted)
