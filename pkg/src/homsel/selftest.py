"""Randomised property checks runnable from the command line."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .homology import Homology, relative_homology
from .metrics import Configuration, FiniteSubset, Point, config_distance, forget_weights, hausdorff_distance, sup_metric
from .snf import matmul, smith_normal_form
from .spaces import circle, disk_pair, projective_plane, sphere, torus


def _det(M) -> int:
    n = len(M)
    if n == 0:
        return 1
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return int(det)


def minor_factors(M) -> list[int]:
    """Invariant factors as ratios of successive gcds of k x k minors."""
    m, n = len(M), len(M[0]) if M else 0
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, _det([[M[r][c] for c in cols] for r in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def _snf_ok(M) -> bool:
    S, U, V = smith_normal_form(M)
    if matmul(matmul(U, M), V) != S:
        return False
    diag = [S[i][i] for i in range(min(len(S), len(S[0]) if S else 0)) if S[i][i]]
    return diag == minor_factors(M)


def run_selftest(seed: int = 0, count: int = 200) -> dict:
    rng = np.random.default_rng(seed)
    results = {}
    ok = 0
    for _ in range(count):
        m, n = (int(v) for v in rng.integers(1, 5, size=2))
        M = rng.integers(-5, 6, size=(m, n)).tolist()
        ok += _snf_ok(M)
    results["smith_normal_form"] = {"checked": count, "passed": ok}

    expected = {
        "circle": (circle(), ["Z", "Z"]),
        "sphere": (sphere(), ["Z", "0", "Z"]),
        "torus": (torus(), ["Z", "Z^2", "Z"]),
        "projective_plane": (projective_plane(), ["Z", "Z/2", "0"]),
    }
    spaces = {}
    for name, (C, groups) in expected.items():
        h = Homology(C)
        spaces[name] = [str(h.group(q)) for q in range(C.dim + 1)] == groups
    for m in (1, 2, 3):
        C, B = disk_pair(m)
        spaces[f"disk_pair_{m}"] = str(relative_homology(C, B, m)) == "Z"
    results["standard_spaces"] = spaces

    bad = 0
    for _ in range(count):
        k = int(rng.integers(1, 4))
        sets = [FiniteSubset.of([Point(tuple(p)) for p in rng.random((int(rng.integers(1, k + 1)), 2))], k)
                for _ in range(3)]
        a, b, c = sets
        dab, dbc, dac = hausdorff_distance(a, b), hausdorff_distance(b, c), hausdorff_distance(a, c)
        bad += dac > dab + dbc + 1e-12 or hausdorff_distance(a, a) != 0 or dab != hausdorff_distance(b, a)
        confs = []
        for _ in range(2):
            pts = rng.random((k, 2))
            confs.append(Configuration.from_tuple([Point(tuple(p)) for p in pts]))
        u, v = confs
        bad += hausdorff_distance(forget_weights(u), forget_weights(v)) > config_distance(u, v) + 1e-12
        x, y = (Point(tuple(p)) for p in rng.random((2, 2)))
        bad += sup_metric(x, y) != sup_metric(y, x)
    results["metrics"] = {"checked": count, "violations": int(bad)}
    passed = (results["smith_normal_form"]["passed"] == count and all(spaces.values()) and bad == 0)
    return {"seed": seed, "count": count, "results": results, "passed": passed}
