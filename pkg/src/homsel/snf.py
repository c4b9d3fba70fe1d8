"""Smith normal form over the integers.

Matrices are plain lists of lists of Python ``int`` so every entry is
arbitrary precision; there is no overflow path to guard.
"""
from __future__ import annotations

from typing import Sequence

Matrix = list[list[int]]

__all__ = ["smith_normal_form", "invariant_factors", "identity", "matmul", "to_int_matrix"]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def to_int_matrix(M, rows: int | None = None, cols: int | None = None) -> Matrix:
    out = [[int(x) for x in row] for row in M]
    if rows is not None and not out:
        out = [[0] * (cols or 0) for _ in range(rows)]
    return out


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    out = [[0] * cols for _ in range(len(A))]
    for i, row in enumerate(A):
        target = out[i]
        for k in range(inner):
            a = row[k]
            if a:
                bk = B[k]
                for j in range(cols):
                    if bk[j]:
                        target[j] += a * bk[j]
    return out


def _shape(A: Matrix, ncols: int | None) -> tuple[int, int]:
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    return m, n


def smith_normal_form(M: Sequence[Sequence[int]], ncols: int | None = None,
                      with_inverses: bool = False):
    """Return ``(S, U, V)`` with ``U @ M @ V == S``.

    ``S`` is diagonal with non-negative entries ``d1 | d2 | ...`` and ``U``,
    ``V`` are unimodular.  ``ncols`` gives the column count of a matrix with
    zero rows.  With ``with_inverses`` the result is ``(S, U, V, Uinv, Vinv)``.
    """
    A = to_int_matrix(M)
    m, n = _shape(A, ncols)
    U = identity(m)
    V = identity(n)
    Uinv = identity(m) if with_inverses else None
    Vinv = identity(n) if with_inverses else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        if Uinv is not None:
            for row in Uinv:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        if Vinv is not None:
            Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(dst, src, q):
        # row[dst] += q * row[src]
        rs, rd = A[src], A[dst]
        for c in range(n):
            if rs[c]:
                rd[c] += q * rs[c]
        us, ud = U[src], U[dst]
        for c in range(m):
            if us[c]:
                ud[c] += q * us[c]
        if Uinv is not None:
            for row in Uinv:
                if row[dst]:
                    row[src] -= q * row[dst]

    def add_col(dst, src, q):
        # col[dst] += q * col[src]
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]
        if Vinv is not None:
            vd, vs = Vinv[dst], Vinv[src]
            for c in range(n):
                if vd[c]:
                    vs[c] -= q * vd[c]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, bi, bj = best
        if bi != t:
            swap_rows(t, bi)
        if bj != t:
            swap_cols(t, bj)

        while True:
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            # remainders smaller than the pivot are promoted and the sweep repeats
            cand = None
            for i in range(t + 1, m):
                if A[i][t] and (cand is None or abs(A[i][t]) < cand[0]):
                    cand = (abs(A[i][t]), "r", i)
            for j in range(t + 1, n):
                if A[t][j] and (cand is None or abs(A[t][j]) < cand[0]):
                    cand = (abs(A[t][j]), "c", j)
            if cand is not None:
                if cand[1] == "r":
                    swap_rows(t, cand[2])
                else:
                    swap_cols(t, cand[2])
                continue
            bad = None
            for i in range(t + 1, m):
                row = A[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
            if Uinv is not None:
                for row in Uinv:
                    row[t] = -row[t]
    if with_inverses:
        return A, U, V, Uinv, Vinv
    return A, U, V


def invariant_factors(M: Sequence[Sequence[int]], ncols: int | None = None) -> list[int]:
    """Nonzero diagonal entries of the Smith form, in divisibility order."""
    S, _, _ = smith_normal_form(M, ncols)
    out = []
    for i in range(min(len(S), len(S[0]) if S else 0)):
        if S[i][i]:
            out.append(S[i][i])
    return out
