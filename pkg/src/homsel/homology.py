"""Integer chain complexes and their (relative) homology.

Boundaries are stored sparsely, one ``{row: coeff}`` dict per cell.  Homology
is computed by first eliminating pairs of cells joined by a unit incidence
(an exact chain equivalence over the integers) and then taking the Smith
normal form of whatever survives.  The equivalence is recorded so cycles can
be pushed into the small complex and generators pulled back out.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .snf import smith_normal_form

__all__ = [
    "Chain",
    "ChainComplex",
    "Subcomplex",
    "ChainMap",
    "HomologyGroup",
    "Homology",
    "InducedMap",
    "ComplexError",
    "homology",
    "relative_homology",
    "induced_map",
    "class_order",
    "quotient",
    "INFINITE",
    "rational_rank",
]

Chain = dict[int, int]
INFINITE = math.inf


class ComplexError(ValueError):
    """Raised for malformed complexes, subcomplexes or chain maps."""


def _add_into(target: dict, source: Mapping, scale: int = 1) -> None:
    for key, value in source.items():
        new = target.get(key, 0) + scale * value
        if new:
            target[key] = new
        else:
            target.pop(key, None)


def _clean(chain: Mapping) -> Chain:
    return {int(k): int(v) for k, v in chain.items() if v}


class ChainComplex:
    """A finite free chain complex over the integers.

    ``boundaries[q][j]`` is the boundary of cell ``j`` in degree ``q`` as a
    dict from row indices in degree ``q - 1`` to coefficients; degree 0 has
    no boundary.  ``labels`` are optional per-degree cell names.
    """

    def __init__(self, boundaries: Sequence[Sequence[Mapping[int, int]]],
                 labels: Sequence[Sequence[Hashable]] | None = None, check: bool = True):
        if not boundaries:
            raise ComplexError("a complex needs at least degree 0")
        self.bd: list[list[Chain]] = [[_clean(col) for col in cols] for cols in boundaries]
        self.bd[0] = [dict() for _ in self.bd[0]]
        self.sizes = [len(cols) for cols in self.bd]
        if labels is None:
            labels = [list(range(n)) for n in self.sizes]
        self.labels = [list(ls) for ls in labels]
        if [len(ls) for ls in self.labels] != self.sizes:
            raise ComplexError("label counts do not match cell counts")
        self._index = None
        for q in range(1, len(self.bd)):
            for j, col in enumerate(self.bd[q]):
                for row in col:
                    if not 0 <= row < self.sizes[q - 1]:
                        raise ComplexError(f"boundary of cell {j} in degree {q} "
                                           f"refers to missing cell {row}")
        if check:
            self.check()

    @property
    def dim(self) -> int:
        return len(self.sizes) - 1

    def check(self) -> None:
        """Reject complexes with a nonzero composite of boundary maps."""
        for q in range(2, len(self.bd)):
            for j, col in enumerate(self.bd[q]):
                acc: dict[int, int] = {}
                for row, c in col.items():
                    _add_into(acc, self.bd[q - 1][row], c)
                if acc:
                    raise ComplexError(f"boundary of boundary of {self.labels[q][j]!r} "
                                       f"(degree {q}) is nonzero: {acc}")

    def index(self, q: int, label: Hashable) -> int:
        if self._index is None:
            self._index = [{lab: i for i, lab in enumerate(ls)} for ls in self.labels]
        return self._index[q][label]

    def boundary(self, q: int, chain: Mapping[int, int]) -> Chain:
        out: dict[int, int] = {}
        if q == 0:
            return out
        for j, c in chain.items():
            _add_into(out, self.bd[q][j], c)
        return out

    def matrix(self, q: int) -> list[list[int]]:
        rows = self.sizes[q - 1] if q >= 1 else 0
        M = [[0] * self.sizes[q] for _ in range(rows)]
        if q >= 1:
            for j, col in enumerate(self.bd[q]):
                for i, c in col.items():
                    M[i][j] = c
        return M

    def euler_characteristic(self) -> int:
        return sum((-1) ** q * n for q, n in enumerate(self.sizes))

    @classmethod
    def from_matrices(cls, sizes: Sequence[int], matrices: Sequence[Sequence[Sequence[int]]],
                      labels=None, check: bool = True) -> "ChainComplex":
        """Build from dense boundary matrices ``D_1, ..., D_top``."""
        bds: list[list[Chain]] = [[{} for _ in range(sizes[0])]]
        for q in range(1, len(sizes)):
            M = matrices[q - 1]
            cols = []
            for j in range(sizes[q]):
                cols.append({i: int(M[i][j]) for i in range(sizes[q - 1]) if M[i][j]})
            bds.append(cols)
        return cls(bds, labels, check)

    def to_json(self) -> dict:
        return {
            "degrees": self.dim,
            "cells": [[_json_label(l) for l in ls] for ls in self.labels],
            "boundaries": [
                [[i, j, c] for j, col in enumerate(self.bd[q]) for i, c in sorted(col.items())]
                for q in range(1, self.dim + 1)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ChainComplex":
        try:
            D = int(data["degrees"])
            cells = data["cells"]
            trips = data.get("boundaries", [])
        except (KeyError, TypeError) as exc:
            raise ComplexError(f"complex JSON missing field: {exc}") from exc
        if len(cells) != D + 1:
            raise ComplexError(f"cells: expected {D + 1} degree lists, got {len(cells)}")
        if len(trips) != D:
            raise ComplexError(f"boundaries: expected {D} triplet lists, got {len(trips)}")
        sizes = [len(c) for c in cells]
        bds: list[list[Chain]] = [[{} for _ in range(sizes[0])]]
        for q in range(1, D + 1):
            cols: list[Chain] = [{} for _ in range(sizes[q])]
            for k, trip in enumerate(trips[q - 1]):
                if len(trip) != 3:
                    raise ComplexError(f"boundaries[{q - 1}][{k}]: expected (row, col, coeff)")
                i, j, c = (int(x) for x in trip)
                if not (0 <= j < sizes[q]) or not (0 <= i < sizes[q - 1]):
                    raise ComplexError(f"boundaries[{q - 1}][{k}]: index out of range")
                _add_into(cols[j], {i: c})
            bds.append(cols)
        labels = [[_from_json_label(l) for l in ls] for ls in cells]
        return cls(bds, labels)


def _json_label(label):
    if isinstance(label, tuple):
        return [_json_label(x) for x in label]
    return label


def _from_json_label(label):
    if isinstance(label, list):
        return tuple(_from_json_label(x) for x in label)
    return label


@dataclass
class Subcomplex:
    parent: ChainComplex
    selected: list[frozenset[int]]

    def __post_init__(self):
        sel = [frozenset(s) for s in self.selected]
        sel += [frozenset()] * (len(self.parent.sizes) - len(sel))
        self.selected = sel
        for q in range(1, len(sel)):
            for j in sel[q]:
                missing = set(self.parent.bd[q][j]) - sel[q - 1]
                if missing:
                    raise ComplexError(f"subcomplex not closed under boundary: cell "
                                       f"{self.parent.labels[q][j]!r} has faces outside it")

    @classmethod
    def from_predicate(cls, parent: ChainComplex, keep) -> "Subcomplex":
        return cls(parent, [frozenset(j for j, lab in enumerate(ls) if keep(q, lab))
                            for q, ls in enumerate(parent.labels)])

    def as_complex(self) -> tuple[ChainComplex, list[list[int]]]:
        """The subcomplex as a complex of its own, with its embedding."""
        order = [sorted(s) for s in self.selected]
        pos = [{j: i for i, j in enumerate(o)} for o in order]
        bds = []
        for q, o in enumerate(order):
            bds.append([{pos[q - 1][r]: c for r, c in self.parent.bd[q][j].items()} if q else {}
                        for j in o])
        labels = [[self.parent.labels[q][j] for j in o] for q, o in enumerate(order)]
        return ChainComplex(bds, labels, check=False), order


def quotient(C: ChainComplex, A: Subcomplex) -> tuple[ChainComplex, list[dict[int, int]]]:
    """The relative complex ``C / A`` and the index map from ``C`` into it."""
    if A.parent is not C:
        raise ComplexError("subcomplex belongs to a different complex")
    keep = [[j for j in range(n) if j not in A.selected[q]] for q, n in enumerate(C.sizes)]
    pos = [{j: i for i, j in enumerate(k)} for k in keep]
    bds = []
    for q, k in enumerate(keep):
        cols = []
        for j in k:
            if q == 0:
                cols.append({})
            else:
                cols.append({pos[q - 1][r]: c for r, c in C.bd[q][j].items() if r in pos[q - 1]})
        bds.append(cols)
    labels = [[C.labels[q][j] for j in k] for q, k in enumerate(keep)]
    return ChainComplex(bds, labels, check=False), pos


class ChainMap:
    """Degree-wise integer maps ``F_q`` given column by column as sparse dicts."""

    def __init__(self, source: ChainComplex, target: ChainComplex,
                 maps: Sequence[Sequence[Mapping[int, int]]], check: bool = True):
        self.source = source
        self.target = target
        depth = min(source.dim, target.dim) + 1
        cols = [[_clean(c) for c in maps[q]] if q < len(maps) else [{} for _ in range(source.sizes[q])]
                for q in range(source.dim + 1)]
        for q in range(depth, source.dim + 1):
            if any(cols[q]):
                raise ComplexError(f"chain map sends degree {q} beyond the target complex")
        self.maps = cols
        for q in range(source.dim + 1):
            if len(cols[q]) != source.sizes[q]:
                raise ComplexError(f"chain map degree {q}: expected {source.sizes[q]} columns")
        if check:
            self.check()

    def apply(self, q: int, chain: Mapping[int, int]) -> Chain:
        out: dict[int, int] = {}
        for j, c in chain.items():
            _add_into(out, self.maps[q][j], c)
        return out

    def check(self) -> None:
        for q in range(1, self.source.dim + 1):
            for j in range(self.source.sizes[q]):
                lhs = self.target.boundary(q, self.maps[q][j]) if q <= self.target.dim else {}
                rhs = self.apply(q - 1, self.source.bd[q][j])
                if lhs != rhs:
                    raise ComplexError(f"chain map does not commute with boundaries at "
                                       f"{self.source.labels[q][j]!r} (degree {q})")

    def compose(self, first: "ChainMap") -> "ChainMap":
        """``self ∘ first``."""
        if first.target is not self.source:
            raise ComplexError("maps are not composable")
        maps = []
        for q in range(first.source.dim + 1):
            if q > self.source.dim:
                maps.append([{} for _ in range(first.source.sizes[q])])
            else:
                maps.append([self.apply(q, col) for col in first.maps[q]])
        return ChainMap(first.source, self.target, maps, check=False)

    def relative(self, A: Subcomplex, B: Subcomplex) -> "ChainMap":
        """The induced map ``C/A -> D/B``; requires ``F(A) ⊆ B``."""
        src, spos = quotient(self.source, A)
        tgt, tpos = quotient(self.target, B)
        maps = []
        for q in range(self.source.dim + 1):
            if q <= self.target.dim:
                for j in A.selected[q]:
                    if any(r not in B.selected[q] for r in self.maps[q][j]):
                        raise ComplexError("chain map does not carry the subcomplex into the target pair")
            cols = []
            for j in sorted(spos[q], key=spos[q].get):
                cols.append({tpos[q][r]: c for r, c in self.maps[q][j].items() if r in tpos[q]}
                            if q <= self.target.dim else {})
            maps.append(cols)
        return ChainMap(src, tgt, maps, check=False)

    @classmethod
    def identity(cls, C: ChainComplex) -> "ChainMap":
        return cls(C, C, [[{j: 1} for j in range(n)] for n in C.sizes], check=False)


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(int(x) for x in self.torsion)
        if any(x < 2 for x in t):
            raise ValueError("torsion coefficients must be at least 2")
        if any(b % a for a, b in zip(t, t[1:])):
            raise ValueError("torsion coefficients must form a divisibility chain")
        object.__setattr__(self, "torsion", t)

    @property
    def rank(self) -> int:
        return len(self.torsion) + self.betti

    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"betti": self.betti, "torsion": list(self.torsion)}

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion]
        if self.betti:
            parts.append("Z" if self.betti == 1 else f"Z^{self.betti}")
        return " + ".join(parts) or "0"


class _Reduction:
    """Record of unit-pivot eliminations applied to a chain complex.

    Each step removes a cell ``b`` and a face ``a`` of it with incidence
    ``kappa = ±1``.  The forward projection and backward inclusion of the
    resulting chain equivalence are replayed from the stored columns.
    """

    def __init__(self, C: ChainComplex, degrees: range):
        lo, hi = degrees.start, degrees.stop - 1
        self.lo, self.hi = lo, hi
        self.offset = [0]
        for n in C.sizes:
            self.offset.append(self.offset[-1] + n)
        dims: dict[int, int] = {}
        bd: dict[int, dict[int, int]] = {}
        cob: dict[int, dict[int, int]] = {}
        for q in range(lo, hi + 1):
            for j in range(C.sizes[q]):
                g = self.offset[q] + j
                dims[g] = q
                bd[g] = {}
                cob[g] = {}
        for q in range(max(lo + 1, 1), hi + 1):
            for j, col in enumerate(C.bd[q]):
                g = self.offset[q] + j
                for r, c in col.items():
                    h = self.offset[q - 1] + r
                    bd[g][h] = c
                    cob[h][g] = c
        self.dims = dims
        self.steps: list[tuple[int, int, int, int, dict, dict]] = []
        self._eliminate(bd, cob)
        self.bd = bd
        self.alive = {q: sorted(g for g in bd if dims[g] == q) for q in range(lo, hi + 1)}

    def _eliminate(self, bd, cob) -> None:
        dims = self.dims
        heap: list[tuple[int, int, int]] = []

        def push(b):
            nb = len(bd[b]) - 1
            for a, c in bd[b].items():
                if c == 1 or c == -1:
                    heapq.heappush(heap, ((len(cob[a]) - 1) * nb, b, a))

        for b in bd:
            if bd[b]:
                push(b)
        while heap:
            cost, b, a = heapq.heappop(heap)
            if b not in bd or a not in bd:
                continue
            kappa = bd[b].get(a)
            if kappa not in (1, -1):
                continue
            current = (len(cob[a]) - 1) * (len(bd[b]) - 1)
            if current > cost:
                heapq.heappush(heap, (current, b, a))
                continue
            bd_b = dict(bd[b])
            cob_a = dict(cob[a])
            self.steps.append((a, b, kappa, dims[b], bd_b, cob_a))
            touched = []
            for x, cxa in cob_a.items():
                if x == b:
                    continue
                lam = cxa * kappa
                bx = bd[x]
                for f, cf in bd_b.items():
                    new = bx.get(f, 0) - lam * cf
                    if new:
                        bx[f] = new
                        cob[f][x] = new
                    else:
                        bx.pop(f, None)
                        cob[f].pop(x, None)
                touched.append(x)
            for f in bd[b]:
                cob[f].pop(b, None)
            for y in cob[b]:
                bd[y].pop(b, None)
            for f in bd[a]:
                cob[f].pop(a, None)
            for y in cob[a]:
                bd[y].pop(a, None)
            del bd[b], cob[b], bd[a], cob[a]
            for x in touched:
                if x in bd and bd[x]:
                    push(x)

    def project(self, q: int, chain: Mapping[int, int]) -> Chain:
        """Push a degree-``q`` chain (global ids) into the reduced complex."""
        z = dict(chain)
        for a, b, kappa, qb, bd_b, _ in self.steps:
            if qb == q + 1:
                ca = z.get(a)
                if ca:
                    _add_into(z, bd_b, -ca * kappa)
            elif qb == q:
                z.pop(b, None)
        return z

    def include(self, q: int, chain: Mapping[int, int]) -> Chain:
        """Pull a degree-``q`` chain of the reduced complex back to the original."""
        g = dict(chain)
        for a, b, kappa, qb, _, cob_a in reversed(self.steps):
            if qb != q:
                continue
            s = 0
            for cell, coeff in g.items():
                t = cob_a.get(cell)
                if t:
                    s += coeff * t
            if s:
                _add_into(g, {b: -s * kappa})
        return g


@dataclass
class _Degree:
    cells: list[int]
    rank: int
    Vinv: list[list[int]]
    kernel_cols: list[list[int]]      # columns of V beyond the rank
    U2: list[list[int]]
    factors: list[int]                # invariant factors of the image in kernel coordinates
    generators: list[Chain]           # reduced-complex chains, torsion first then free
    orders: list[float]
    group: HomologyGroup


class Homology:
    """Homology of one complex with cycle classification and generators."""

    def __init__(self, C: ChainComplex, degrees: Iterable[int] | None = None):
        self.C = C
        degs = sorted(set(range(C.dim + 1) if degrees is None else degrees))
        for q in degs:
            if not 0 <= q <= C.dim:
                raise ComplexError(f"degree {q} out of range 0..{C.dim}")
        self.degrees = degs
        # two extra degrees each side so the boundary degrees also get paired off
        lo = max(min(degs) - 2, 0) if degs else 0
        hi = min(max(degs) + 2, C.dim) if degs else 0
        self._red = _Reduction(C, range(lo, hi + 1))
        self._cache: dict[int, _Degree] = {}

    @property
    def reduced_sizes(self) -> dict[int, int]:
        return {q: len(v) for q, v in self._red.alive.items()}

    def _degree(self, q: int) -> _Degree:
        if q in self._cache:
            return self._cache[q]
        if q not in self.degrees:
            raise ComplexError(f"degree {q} was not requested for this complex")
        red = self._red
        cells = red.alive.get(q, [])
        pos = {g: i for i, g in enumerate(cells)}
        n = len(cells)
        below = red.alive.get(q - 1, []) if q - 1 >= red.lo else []
        bpos = {g: i for i, g in enumerate(below)}
        Dq = [[0] * n for _ in below]
        for j, g in enumerate(cells):
            for f, c in red.bd[g].items():
                if f in bpos:
                    Dq[bpos[f]][j] = c
        S, U, V, _, Vinv = smith_normal_form(Dq, ncols=n, with_inverses=True)
        r = sum(1 for i in range(min(len(S), n)) if S[i][i])
        above = red.alive.get(q + 1, []) if q + 1 <= red.hi else []
        Dn = [[0] * len(above) for _ in range(n)]
        for j, g in enumerate(above):
            for f, c in red.bd[g].items():
                if f in pos:
                    Dn[pos[f]][j] = c
        k = n - r
        Y = [[sum(Vinv[i][t] * Dn[t][j] for t in range(n) if Vinv[i][t] and Dn[t][j])
              for j in range(len(above))] for i in range(r, n)]
        S2, U2, _, U2inv, _ = smith_normal_form(Y, ncols=len(above), with_inverses=True)
        factors = [S2[i][i] for i in range(min(k, len(above))) if S2[i][i]]
        kernel_cols = [[V[t][r + i] for t in range(n)] for i in range(k)]
        torsion_gens, free_gens, torsion = [], [], []
        for i in range(k):
            d = factors[i] if i < len(factors) else 0
            if d == 1:
                continue
            coeffs = [sum(kernel_cols[s][t] * U2inv[s][i] for s in range(k)) for t in range(n)]
            chain = {cells[t]: c for t, c in enumerate(coeffs) if c}
            if d == 0:
                free_gens.append(chain)
            else:
                torsion_gens.append(chain)
                torsion.append(d)
        group = HomologyGroup(len(free_gens), tuple(torsion))
        data = _Degree(cells, r, Vinv, kernel_cols, U2, factors,
                       torsion_gens + free_gens,
                       [float(d) for d in torsion] + [INFINITE] * len(free_gens), group)
        self._cache[q] = data
        return data

    def group(self, q: int) -> HomologyGroup:
        return self._degree(q).group

    def _global(self, q: int, chain: Mapping[int, int]) -> Chain:
        off = self._red.offset[q]
        return {off + j: c for j, c in chain.items() if c}

    def _local(self, q: int, chain: Mapping[int, int]) -> Chain:
        off = self._red.offset[q]
        return {g - off: c for g, c in chain.items() if c}

    def generators(self, q: int) -> list[Chain]:
        """Cycles of ``C`` representing the generators (torsion first, then free)."""
        data = self._degree(q)
        return [self._local(q, self._red.include(q, g)) for g in data.generators]

    def coordinates(self, q: int, cycle: Mapping[int, int]) -> list[int]:
        """Coordinates of ``[cycle]`` on the generators; torsion entries reduced mod order."""
        if self.C.boundary(q, cycle):
            raise ComplexError(f"chain is not a cycle in degree {q}")
        data = self._degree(q)
        z = self._red.project(q, self._global(q, cycle))
        pos = {g: i for i, g in enumerate(data.cells)}
        vec = [0] * len(data.cells)
        for g, c in z.items():
            if g not in pos:
                raise AssertionError("projected chain left the reduced complex")
            vec[pos[g]] = c
        n, r = len(vec), data.rank
        y = [sum(data.Vinv[i][t] * vec[t] for t in range(n) if vec[t]) for i in range(n)]
        if any(y[:r]):
            raise AssertionError("cycle projected outside the kernel")
        c = y[r:]
        k = len(c)
        c2 = [sum(data.U2[i][s] * c[s] for s in range(k)) for i in range(k)]
        out = []
        for i in range(k):
            d = data.factors[i] if i < len(data.factors) else 0
            if d == 1:
                continue
            out.append(c2[i] % d if d else c2[i])
        return out

    def order(self, q: int, cycle: Mapping[int, int]) -> float:
        coords = self.coordinates(q, cycle)
        data = self._degree(q)
        order = 1
        for x, d in zip(coords, data.orders):
            if d == INFINITE:
                if x:
                    return INFINITE
            elif x:
                d = int(d)
                order = math.lcm(order, d // math.gcd(d, x))
        return order


def homology(C: ChainComplex, q: int) -> HomologyGroup:
    if not 0 <= q <= C.dim:
        raise ComplexError(f"degree {q} out of range 0..{C.dim}")
    return Homology(C, [q]).group(q)


def relative_homology(C: ChainComplex, A: Subcomplex, q: int) -> HomologyGroup:
    Q, _ = quotient(C, A)
    return homology(Q, q)


@dataclass
class InducedMap:
    matrix: list[list[int]]
    source: HomologyGroup
    target: HomologyGroup
    target_orders: list[float] = field(default_factory=list)

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.matrix)


def induced_map(F: ChainMap, q: int, source: Homology | None = None,
                target: Homology | None = None) -> InducedMap:
    """Matrix of ``F_*`` on homology generators in degree ``q``.

    Columns follow the source generators, rows the target generators; rows
    belonging to torsion generators are reduced modulo their order.
    """
    hs = source or Homology(F.source, [q])
    ht = target or Homology(F.target, [q])
    if q > F.target.dim:
        cols = [[] for _ in hs.generators(q)]
    else:
        cols = [ht.coordinates(q, F.apply(q, g)) for g in hs.generators(q)]
    tg = ht.group(q) if q <= F.target.dim else HomologyGroup(0)
    rows = tg.rank
    matrix = [[cols[j][i] for j in range(len(cols))] for i in range(rows)]
    orders = ht._degree(q).orders if q <= F.target.dim else []
    return InducedMap(matrix, hs.group(q), tg, list(orders))


def class_order(C: ChainComplex, q: int, z, homology_: Homology | None = None) -> float:
    """Smallest ``r > 0`` with ``r [z] = 0`` in ``H_q``, or ``INFINITE``."""
    if not isinstance(z, Mapping):
        z = {j: int(c) for j, c in enumerate(z) if c}
    h = homology_ or Homology(C, [q])
    return h.order(q, z)


def rational_rank(M: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals by fraction-exact elimination."""
    A = [[Fraction(x) for x in row] for row in M]
    rank = 0
    rows = len(A)
    cols = len(A[0]) if rows else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rows):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / A[rank][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank
