"""Command-line front end: ``homsel <command> ...``.

Every report is JSON with sorted keys and a ``provenance`` block holding the
resolved arguments, so identical invocations give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .homology import INFINITE, ChainComplex, ComplexError, Homology, Subcomplex, quotient
from .multifunction import GridMultifunction

EXIT_OK, EXIT_ERROR, EXIT_FAILS = 0, 1, 2


class UsageError(ValueError):
    pass


def _version() -> str:
    try:
        return metadata.version("homsel")
    except metadata.PackageNotFoundError:
        return "unknown"


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("HOMSEL_THREADS")
    return int(env) if env else 1


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and x == INFINITE:
        return "infinite"
    return x


def _emit(report: dict, args) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "threads")}
    report = dict(report)
    report["provenance"] = {"command": args.command, "arguments": resolved,
                            "threads": _threads(args), "version": _version()}
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"{what}: no such file {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: malformed JSON in {path} at line {exc.lineno}: {exc.msg}") from exc


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise UsageError(f"expected positive integers, got {text!r}")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _check_resolution(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise UsageError(f"resolution must be a power of two, got {n}")
    return n


def cmd_homology(args) -> int:
    C = ChainComplex.from_json(_load_json(args.complex, "complex"))
    if args.subcomplex:
        data = _load_json(args.subcomplex, "subcomplex")
        try:
            A = Subcomplex(C, [frozenset(int(i) for i in s) for s in data["cells"]])
        except (KeyError, TypeError) as exc:
            raise UsageError("subcomplex JSON needs a 'cells' list of index lists per degree") from exc
        C, _ = quotient(C, A)
    degrees = [args.degree] if args.degree is not None else list(range(C.dim + 1))
    H = Homology(C, degrees)
    if args.degree is not None:
        report = H.group(args.degree).to_json()
    else:
        report = {"groups": {str(q): H.group(q).to_json() for q in degrees}}
    _emit(report, args)
    return EXIT_OK


def _multifunction(path: str) -> GridMultifunction:
    return GridMultifunction.from_json(_load_json(path, "multifunction"))


def cmd_selection(args) -> int:
    from .selection import homological_selection_test
    f = _multifunction(args.multifunction)
    steps = _int_list(args.eps_steps)
    report = homological_selection_test(f, steps, model=args.model)
    _emit(report.to_json(), args)
    return EXIT_FAILS if args.fail_exit and report.verdict == "FAILS" else EXIT_OK


def cmd_lift(args) -> int:
    from .lift import build_strand_system, lift_to_configuration
    f = _multifunction(args.multifunction)
    S = build_strand_system(f, args.tol)
    res = lift_to_configuration(f, S, args.weight)
    report = res.to_json()
    if res.lifted is not None:
        report["lift"] = res.lifted.to_json()
    _emit(report, args)
    return EXIT_FAILS if args.fail_exit and res.status != "FEASIBLE" else EXIT_OK


def _table_cost(table, resolution: int, d0: int):
    arr = np.asarray(table, dtype=float).reshape((resolution + 1,) * d0)
    axes = [np.linspace(0, 1, resolution + 1)] * d0
    interp = RegularGridInterpolator(axes, arr)
    return lambda p: interp(np.clip(p, 0, 1))


def load_game(spec: str):
    """A builtin game name or a path to a game JSON file."""
    from .games import Game, bilinear_game, matching_pennies
    if spec == "matching_pennies":
        return matching_pennies()
    if spec == "counterexample":
        from .constructions import counterexample_game
        return counterexample_game()
    data = _load_json(spec, "game")
    cost = data.get("cost")
    if not isinstance(cost, dict) or "kind" not in cost:
        raise UsageError("game JSON: 'cost' must be an object with a 'kind'")
    kind = cost["kind"]
    if kind == "builtin":
        name = cost.get("name")
        if name == "bimatrix":
            return bilinear_game(cost["M1"], cost["M2"])
        if name in ("matching_pennies", "counterexample"):
            return load_game(name)
        raise UsageError(f"game JSON: unknown builtin {name!r}")
    if kind == "bilinear":
        return bilinear_game(cost["M1"], cost["M2"])
    if kind == "table":
        dims = [int(d) for d in data.get("dims", [])]
        if len(dims) != int(data.get("players", len(dims))):
            raise UsageError("game JSON: 'dims' must list one dimension per player")
        r = int(cost["resolution"])
        tables = cost["tables"]
        if len(tables) != len(dims):
            raise UsageError("game JSON: cost.tables needs one table per player")
        return Game(tuple(dims), [_table_cost(t, r, sum(dims)) for t in tables], name="table")
    raise UsageError(f"game JSON: unknown cost kind {kind!r}")


def cmd_nash_solve(args) -> int:
    from .games import nash_search
    game = load_game(args.game)
    res = nash_search(game, _check_resolution(args.resolution), args.tol)
    audited = all(c.audit(game) for c in res.certificates)
    report = res.to_json()
    report["audit_passed"] = audited
    report["game"] = game.name
    _emit(report, args)
    return EXIT_OK


def cmd_nash_response(args) -> int:
    from .games import polynomial_like_check, response_field
    game = load_game(args.game)
    if not 0 <= args.player < game.players:
        raise UsageError(f"player must be in 0..{game.players - 1}")
    field = response_field(game, args.player, _check_resolution(args.resolution), args.tol,
                           k=args.k, local=args.local)
    report = {
        "game": game.name,
        "player": args.player,
        "local": args.local,
        "counts": field.counts,
        "flagged_nodes": field.flagged_nodes,
        "field": field.field.to_json(),
    }
    if args.weight is not None:
        lift = polynomial_like_check(field, args.weight)
        report["lift"] = lift.to_json()
    _emit(report, args)
    return EXIT_OK


def cmd_nash_refine(args) -> int:
    from .games import refine_intersection
    game = load_game(args.game)
    eps = _float_list(args.eps)
    res = [_check_resolution(n) for n in _int_list(args.resolutions)]
    report = refine_intersection(game, eps, res).to_json()
    report["game"] = game.name
    _emit(report, args)
    return EXIT_OK


def cmd_repro_gr_hc(args) -> int:
    from .constructions import cw_gr_hC
    from .homology import Homology as H
    C = cw_gr_hC()
    h = H(C)
    alpha = {C.index(1, n): 1 for n in ("alpha12", "alpha23", "alpha31")}
    loops = {}
    for i in (1, 2, 3):
        loop = {C.index(1, f"a2^{i}"): 1, C.index(1, f"a1^{i}"): -1}
        diff = dict(alpha)
        for k, v in loop.items():
            diff[k] = diff.get(k, 0) - v
        loops[str(i)] = h.order(1, {k: v for k, v in diff.items() if v}) == 1
    report = {
        "complex": C.to_json(),
        "H0": h.group(0).to_json(),
        "H1": h.group(1).to_json(),
        "H2": h.group(2).to_json(),
        "alpha_coordinates": h.coordinates(1, alpha),
        "alpha_order": h.order(1, alpha),
        "alpha_minus_loop_is_boundary": loops,
    }
    _emit(report, args)
    return EXIT_OK


def cmd_repro_lift(args) -> int:
    from .constructions import sample_h_C
    from .lift import lift_to_configuration
    f = sample_h_C(_check_resolution(args.resolution))
    res = lift_to_configuration(f, None, args.weight)
    _emit(res.to_json(), args)
    return EXIT_FAILS if args.fail_exit and res.status != "FEASIBLE" else EXIT_OK


def cmd_repro_game(args) -> int:
    from .constructions import counterexample_game, no_fixed_point_gap
    from .games import nash_search
    game = counterexample_game(args.sample_resolution)
    resolutions = [_check_resolution(n) for n in _int_list(args.resolutions)]
    gaps = []
    for N in resolutions:
        res = nash_search(game, N, 1e-9)
        gaps.append({"resolution": N, "min_max_regret": res.min_max_regret,
                     "argmin": list(res.argmin)})
    delta = min(g["min_max_regret"] for g in gaps)
    searches = []
    for N in resolutions:
        res = nash_search(game, N, delta / 2)
        searches.append({"resolution": N, "tol": delta / 2, "certificates": len(res.certificates)})
    rel = [abs(a["min_max_regret"] - b["min_max_regret"]) / max(a["min_max_regret"], b["min_max_regret"])
           for a, b in zip(gaps, gaps[1:])]
    fixed = {str(N): no_fixed_point_gap(N).gap for N in resolutions}
    report = {
        "gaps": gaps,
        "delta": delta,
        "relative_changes": rel,
        "stable": all(r <= 0.10 for r in rel) and delta > 0,
        "searches_at_half_delta": searches,
        "fixed_point_gap": fixed,
        "graph_sample_resolution": args.sample_resolution,
    }
    _emit(report, args)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    report = run_selftest(args.seed, args.count)
    _emit(report, args)
    return EXIT_OK if report["passed"] else EXIT_FAILS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homsel", description="Homological selection toolkit")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (recorded; falls back to HOMSEL_THREADS)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        return sp

    h = common(sub.add_parser("homology", help="homology groups of a chain complex"))
    h.add_argument("--complex", required=True)
    h.add_argument("--subcomplex", help="JSON {'cells': [[indices per degree]...]} for relative homology")
    h.add_argument("--degree", type=int)
    h.set_defaults(func=cmd_homology)

    s = common(sub.add_parser("selection-test", help="homological selection test"))
    s.add_argument("--multifunction", required=True)
    s.add_argument("--eps-steps", default="2,3,4")
    s.add_argument("--model", choices=["fibered", "explicit"], default="fibered")
    s.add_argument("--fail-exit", action="store_true", help="exit 2 when the verdict is FAILS")
    s.set_defaults(func=cmd_selection)

    l = common(sub.add_parser("lift", help="configuration lift or obstruction certificate"))
    l.add_argument("--multifunction", required=True)
    l.add_argument("--weight", type=int, required=True)
    l.add_argument("--tol", type=float, default=None)
    l.add_argument("--fail-exit", action="store_true", help="exit 2 unless a lift is found")
    l.set_defaults(func=cmd_lift)

    n = sub.add_parser("nash", help="equilibrium search")
    nsub = n.add_subparsers(dest="nash_command", required=True)
    ns = common(nsub.add_parser("solve"))
    ns.add_argument("--game", required=True, help="builtin name or game JSON path")
    ns.add_argument("--resolution", type=int, required=True)
    ns.add_argument("--tol", type=float, required=True)
    ns.set_defaults(func=cmd_nash_solve)
    nb = common(nsub.add_parser("response", help="best-response field of one player"))
    nb.add_argument("--game", required=True)
    nb.add_argument("--player", type=int, default=0)
    nb.add_argument("--resolution", type=int, required=True)
    nb.add_argument("--tol", type=float, required=True)
    nb.add_argument("--k", type=int, default=None, help="keep at most k representatives per node")
    nb.add_argument("--local", action="store_true", help="local minima instead of global minima")
    nb.add_argument("--weight", type=int, default=None, help="also try a weight-W configuration lift")
    nb.set_defaults(func=cmd_nash_response)
    nr = common(nsub.add_parser("refine"))
    nr.add_argument("--game", required=True)
    nr.add_argument("--eps", required=True, help="non-increasing comma-separated eps ladder")
    nr.add_argument("--resolutions", required=True, help="comma-separated resolutions")
    nr.set_defaults(func=cmd_nash_refine)

    r = sub.add_parser("repro", help="reproduce the constructions")
    rsub = r.add_subparsers(dest="repro_command", required=True)
    rg = common(rsub.add_parser("gr-hc"))
    rg.set_defaults(func=cmd_repro_gr_hc)
    rn = common(rsub.add_parser("no-nash-game"))
    rn.add_argument("--resolutions", default="32,64,128")
    rn.add_argument("--sample-resolution", type=int, default=256)
    rn.set_defaults(func=cmd_repro_game)
    rl = common(rsub.add_parser("lift-obstruction"))
    rl.add_argument("--resolution", type=int, default=32)
    rl.add_argument("--weight", type=int, default=3)
    rl.add_argument("--fail-exit", action="store_true")
    rl.set_defaults(func=cmd_repro_lift)

    t = common(sub.add_parser("selftest", help="randomised property checks"))
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--count", type=int, default=200)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (UsageError, ComplexError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
