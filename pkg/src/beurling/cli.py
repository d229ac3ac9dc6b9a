"""Command-line front end; every command prints one JSON report.

Exit status: 0 success, 1 a numeric verdict failed (or the computation broke
down), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .density import DEFAULT_LADDER, THREADS_ENV, beurling_density
from .framebounds import CubeUnion, epsilon_sweep, frame_bounds
from .generators import (ModelSetSpec, almost_period_search, bessel_blowup_probe, dyadic_measure_bound,
                         dyadic_membership, frame_shift_transfer, lattice, model_set, perturbed_lattice,
                         select_almost_periods, gap_stats)
from .groups import (ResidueCellQuery, SubgroupSpec, random_queries, uniform_group_test,
                     well_distributed_test)
from .local_l2 import local_l2_demo
from .matrix_density import NodeSet, matrix_densities, pair_density_closed_form
from .measure import lebesgue_approx, load_point_set, load_report, write_point_set
from .quadratic import QuadraticIrrational


class UsageError(Exception):
    pass


def parse_real(text: str) -> float:
    """``"0.5"``, ``"1/3"``, ``"sqrt2"``, ``"1+sqrt5"``."""
    s = text.strip()
    try:
        return float(s)
    except ValueError:
        pass
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(QuadraticIrrational.parse(s))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse number {text!r}") from None


def parse_list(text: str) -> list[float]:
    if text is None or not text.strip():
        raise UsageError("empty list")
    return [parse_real(p) for p in text.split(",")]


def parse_pair(text: str) -> tuple[float, float]:
    v = parse_list(text)
    if len(v) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    return v[0], v[1]


def build_measure(spec: str, extent):
    """``lattice:B``, ``perturbed:B:JITTER:SEED``, ``modelset:THETA:LO:HI``, ``lebesgue:SPACING``."""
    kind, *args = spec.split(":")
    try:
        if kind == "lattice" and len(args) == 1:
            return lattice(parse_real(args[0]), extent)
        if kind == "perturbed" and len(args) == 3:
            return perturbed_lattice(parse_real(args[0]), parse_real(args[1]), int(args[2]), extent)
        if kind == "modelset" and len(args) == 3:
            theta = QuadraticIrrational.parse(args[0])
            window = tuple(_exact_arg(a) for a in args[1:])
            return model_set(ModelSetSpec(theta, window, tuple(Fraction(v) for v in extent)))
        if kind == "lebesgue" and len(args) == 1:
            return lebesgue_approx(parse_real(args[0]), extent)
    except ValueError as exc:
        raise UsageError(f"bad generator {spec!r}: {exc}") from None
    raise UsageError(f"unknown generator spec {spec!r}")


def _exact_arg(s: str):
    if "sqrt" in s:
        return QuadraticIrrational.parse(s)
    return Fraction(s)


def _measure_from_args(args):
    if (args.input is None) == (args.gen is None):
        raise UsageError("give exactly one of --input and --gen")
    extent = parse_pair(args.extent) if args.extent else None
    if args.gen is not None:
        if extent is None:
            raise UsageError("--gen needs --extent")
        mu = build_measure(args.gen, extent)
    else:
        path = Path(args.input)
        if not path.exists():
            raise UsageError(f"input file {path} does not exist")
        mu = load_point_set(path, args.weight, extent=extent)
    return mu


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# commands; each returns (result dict, ok flag)


def cmd_density(args, mu):
    ladder = parse_list(args.ladder)
    rep = beurling_density(mu, ladder, args.edge_margin, args.settle_tol, args.corner_step)
    if args.csv:
        _write_csv(args.csv, ["h", "supRatio", "infRatio"],
                   [(e.h, e.sup_ratio, e.inf_ratio) for e in rep.per_h])
    return rep.as_dict(), True


def cmd_matrix_density(args, mu):
    nodes = NodeSet(tuple(parse_list(args.nodes)))
    ladder = parse_list(args.ladder)
    rep = matrix_densities(mu, nodes, ladder, args.sweep_step, args.edge_margin)
    out = rep.as_dict()
    if args.closed_form:
        if nodes.size != 2:
            raise UsageError("--closed-form needs exactly two nodes")
        cf = pair_density_closed_form(mu, nodes.nodes[0], nodes.nodes[1], ladder, args.edge_margin)
        out["closedForm"] = cf.as_dict()
    if args.csv:
        _write_csv(args.csv, ["h", "supLambdaMaxRatio", "infLambdaMinRatio"],
                   [(s.h, s.sup_ratio, s.inf_ratio) for s in rep.per_h])
    return out, True


def cmd_frame_bounds(args, mu):
    omega = CubeUnion(tuple(parse_list(args.centers)), parse_real(args.eps))
    est = frame_bounds(mu, omega, args.grid, args.trunc, args.bessel_only)
    return est.as_dict(), True


def cmd_eps_sweep(args, mu):
    dl = parse_list(args.density_ladder) if args.density_ladder else None
    sw = epsilon_sweep(mu, parse_list(args.centers), parse_list(args.eps), args.grid, args.trunc, dl,
                       args.tol_fraction)
    if args.csv:
        _write_csv(args.csv, ["eps", "Aeps", "Beps"], [(r.eps, r.a_eps, r.b_eps) for r in sw.rows])
    return sw.as_dict(), sw.verdict == "PASS"


def _parse_cells(text: str, G: SubgroupSpec) -> ResidueCellQuery:
    cells = []
    for part in text.split(";"):
        l, r = (parse_real(v) for v in part.split(":"))
        cells.append((l, r))
    q = ResidueCellQuery(tuple(cells))
    try:
        q.validate(G)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return q


def cmd_group_test(args, mu):
    G = SubgroupSpec.parse(args.group)
    queries = [_parse_cells(c, G) for c in (args.cell or [])]
    if args.random_cells:
        queries += random_queries(G, args.random_cells, args.seed, args.min_cell)
    if not queries:
        raise UsageError("give --cell and/or --random-cells")
    v = uniform_group_test(mu, G, queries, parse_list(args.R_ladder), args.target_a, args.target_b,
                           args.tol, args.edge_margin)
    if args.csv:
        rows = [(i, R, s, f) for i, t in enumerate(v.traces) for R, s, f in zip(t.R, t.sup, t.inf)]
        _write_csv(args.csv, ["query", "R", "sup", "inf"], rows)
    out = {"group": G.as_dict(), **v.as_dict()}
    return out, v.a_pass is not False and v.b_pass is not False


def cmd_well_dist(args, mu):
    if mu is not None:
        seq = mu.positions
    else:
        theta = parse_real(args.mult)
        seq = theta * np.arange(1, args.count + 1, dtype=float)
    wd = well_distributed_test(seq, parse_real(args.b), parse_pair(args.interval), [int(v) for v in parse_list(args.N_ladder)],
                               args.tol)
    if args.csv:
        _write_csv(args.csv, ["N", "maxFreq", "minFreq"], list(zip(wd.N, wd.max_freq, wd.min_freq)))
    return wd.as_dict(), wd.verdict == "PASS"


def cmd_gen(args, mu):
    out = {"measure": load_report(mu)}
    if mu.dimension == 1:
        g = gap_stats(mu)
        out["gaps"] = {"minGap": g.min_gap, "maxGap": g.max_gap}
    if args.points:
        write_point_set(mu, args.points, header=f"generated by beurling {__version__}: {args.gen}")
        out["points"] = str(args.points)
    return out, True


def cmd_dyadic_witness(args, mu):
    shifts = parse_list(args.shifts) if args.shifts else []
    tr = frame_shift_transfer(shifts)
    w = tr.witness
    checks = [dyadic_membership(w.center, args.jmax)]
    checks += [dyadic_membership(w.center - Fraction(s), args.jmax) for s in shifts]
    out = {
        **tr.as_dict(),
        "membershipSearch": [c.as_dict() for c in checks],
        "measureBound": {"jMax": args.jmax, "partialSum": str(dyadic_measure_bound(args.jmax)),
                         "limit": str(dyadic_measure_bound(None))},
    }
    ok = w.validate() and all(w.memberships()) and tr.eps_max.is_positive()
    return out, ok


def cmd_bessel_blowup(args, mu):
    if args.nodes:
        nodes = parse_list(args.nodes)
        scan = None
    else:
        lo, hi = parse_pair(args.scan)
        hits = almost_period_search(mu, (lo, hi), args.scan_step, args.scan_eps)
        chosen = select_almost_periods(hits, args.auto_nodes, args.min_separation)
        nodes = [x for x, _ in chosen]
        scan = {"hits": len(hits), "chosen": [{"x": x, "s": s} for x, s in chosen]}
        if not nodes:
            raise ValueError("almost-period scan found no nodes")
    pr = bessel_blowup_probe(mu, nodes, args.R, args.edge_margin)
    out = pr.as_dict()
    if scan is not None:
        out["scan"] = scan
    return out, True


def cmd_local_l2(args, mu):
    try:
        demo = local_l2_demo(args.alpha, args.jmax)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.csv:
        _write_csv(args.csv, ["J", "S_J"], list(zip(demo.checkpoints, demo.partial_sums)))
    return demo.as_dict(), True


COMMANDS = {
    "density": (cmd_density, True),
    "matrix-density": (cmd_matrix_density, True),
    "frame-bounds": (cmd_frame_bounds, True),
    "eps-sweep": (cmd_eps_sweep, True),
    "group-test": (cmd_group_test, True),
    "well-dist": (cmd_well_dist, False),
    "gen": (cmd_gen, True),
    "dyadic-witness": (cmd_dyadic_witness, False),
    "bessel-blowup": (cmd_bessel_blowup, True),
    "local-l2-demo": (cmd_local_l2, False),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="beurling",
        description="Beurling densities, matrix densities and exponential frame bounds.",
        epilog=f"Set {THREADS_ENV}=n to run ladder loops on n threads.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_input(sp, required=True):
        sp.add_argument("--input", help="point-set file (position [weight] per line)")
        sp.add_argument("--gen", help="lattice:B | perturbed:B:JITTER:SEED | modelset:THETA:LO:HI | lebesgue:SPACING")
        sp.add_argument("--extent", help="a,b (required with --gen; overrides the file's bounding box)")
        sp.add_argument("--weight", type=float, default=1.0, help="default atom weight (default 1)")
        sp.set_defaults(needs_input=required)

    def common(sp):
        sp.add_argument("--output", help="write the JSON report here instead of stdout")
        sp.add_argument("--csv", help="also write the main trace as CSV")

    ladder = ",".join(f"{h:g}" for h in DEFAULT_LADDER)

    sp = sub.add_parser("density", help="scalar upper/lower Beurling densities")
    with_input(sp)
    sp.add_argument("--ladder", default=ladder, help=f"window sides (default {ladder})")
    sp.add_argument("--edge-margin", type=float, default=None, help="default: largest ladder side")
    sp.add_argument("--settle-tol", type=float, default=0.01, help="default 0.01")
    sp.add_argument("--corner-step", type=float, default=None, help="planar corner grid (default h/20)")
    common(sp)

    sp = sub.add_parser("matrix-density", help="extremal-eigenvalue densities for nodes x_1..x_N")
    with_input(sp)
    sp.add_argument("--nodes", required=True, help="comma-separated nodes, e.g. 0,1")
    sp.add_argument("--ladder", default=ladder, help=f"window sides (default {ladder})")
    sp.add_argument("--sweep-step", type=float, default=None, help="extra uniform corner grid (default none)")
    sp.add_argument("--edge-margin", type=float, default=None, help="default: largest ladder side")
    sp.add_argument("--closed-form", action="store_true", help="also run the two-node closed form")
    common(sp)

    sp = sub.add_parser("frame-bounds", help="A_eps and B_eps on a union of intervals")
    with_input(sp)
    sp.add_argument("--centers", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--grid", type=int, default=64, help="hats per interval (default 64)")
    sp.add_argument("--trunc", type=float, default=None, help="truncation radius (default 50/eps)")
    sp.add_argument("--bessel-only", action="store_true")
    common(sp)

    sp = sub.add_parser("eps-sweep", help="frame bounds along an eps ladder vs matrix densities")
    with_input(sp)
    sp.add_argument("--centers", required=True)
    sp.add_argument("--eps", required=True, help="decreasing eps values")
    sp.add_argument("--grid", type=int, default=64, help="hats per interval (default 64)")
    sp.add_argument("--trunc", type=float, default=None, help="truncation radius (default 50/eps)")
    sp.add_argument("--density-ladder", default=None, help="default: entries of the standard ladder that fit")
    sp.add_argument("--tol-fraction", type=float, default=0.05, help="final-gap tolerance / D+_N (default 0.05)")
    common(sp)

    sp = sub.add_parser("group-test", help="uniform residue-cell test over G = a_1 Z + ... + a_s Z")
    with_input(sp)
    sp.add_argument("--group", required=True, help="generators, e.g. 1 or 1,sqrt2")
    sp.add_argument("--cell", action="append", help="l:r per generator, ';'-separated; repeatable")
    sp.add_argument("--random-cells", type=int, default=0)
    sp.add_argument("--min-cell", type=float, default=0.2, help="random cell length / period (default 0.2)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--R-ladder", default="100,1000,10000", help="default 100,1000,10000")
    sp.add_argument("--target-a", type=float, default=None)
    sp.add_argument("--target-b", type=float, default=None)
    sp.add_argument("--tol", type=float, default=0.02, help="default 0.02")
    sp.add_argument("--edge-margin", type=float, default=None)
    common(sp)

    sp = sub.add_parser("well-dist", help="well-distribution of a sequence modulo b")
    with_input(sp, required=False)
    sp.add_argument("--mult", help="use lambda_n = n * MULT, n = 1..COUNT")
    sp.add_argument("--count", type=int, default=100000)
    sp.add_argument("--b", default="1")
    sp.add_argument("--interval", required=True, help="l,r with 0 <= l <= r <= b")
    sp.add_argument("--N-ladder", default="100,1000,10000")
    sp.add_argument("--tol", type=float, default=0.01)
    common(sp)

    sp = sub.add_parser("gen", help="generate a point set")
    sp.add_argument("gen", metavar="SPEC", help="lattice:B | perturbed:B:JITTER:SEED | modelset:THETA:LO:HI | lebesgue:SPACING")
    sp.add_argument("--extent", required=True)
    sp.add_argument("--points", help="write the atoms in point-set format")
    sp.set_defaults(needs_input=True, input=None, weight=1.0)
    common(sp)

    sp = sub.add_parser("dyadic-witness", help="point z in E and all E + x_i, with certificates")
    sp.add_argument("--shifts", default="", help="comma-separated shifts (may be empty)")
    sp.add_argument("--jmax", type=int, default=64, help="membership search depth (default 64)")
    common(sp)

    sp = sub.add_parser("bessel-blowup", help="Bessel probe with unit coefficients")
    with_input(sp)
    sp.add_argument("--nodes", help="explicit y_j; otherwise picked from an almost-period scan")
    sp.add_argument("--auto-nodes", type=int, default=4)
    sp.add_argument("--scan", default="0.5,25", help="scan range lo,hi (default 0.5,25)")
    sp.add_argument("--scan-step", type=float, default=2e-5)
    sp.add_argument("--scan-eps", type=float, default=0.5)
    sp.add_argument("--min-separation", type=float, default=0.1)
    sp.add_argument("--R", type=float, default=100.0)
    sp.add_argument("--edge-margin", type=float, default=None)
    common(sp)

    sp = sub.add_parser("local-l2-demo", help="partial sums of a locally square-integrable example")
    sp.add_argument("--alpha", type=float, required=True, help="in (0, 1/2)")
    sp.add_argument("--jmax", type=int, default=10 ** 6)
    common(sp)
    return p


def _join_negative_values(argv):
    """Turn ``--extent -5,5`` into ``--extent=-5,5`` so argparse does not read a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        out.append(tok)
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is None:
                break
            if len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                out[-1] = f"{tok}={nxt}"
            else:
                out.append(nxt)
    return out


def run(argv=None) -> tuple[int, dict]:
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    fn, needs_input = COMMANDS[args.command]
    params = {k: v for k, v in vars(args).items() if k not in ("needs_input",)}
    report = {"command": args.command, "version": __version__, "params": params}
    try:
        mu = None
        if args.command == "well-dist":
            if args.input or args.gen:
                mu = _measure_from_args(args)
            elif not args.mult:
                raise UsageError("well-dist needs --mult, --input or --gen")
        elif needs_input:
            mu = _measure_from_args(args)
        if mu is not None:
            report["input"] = load_report(mu)
        result, ok = fn(args, mu)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        report.update(status="usage-error", error=str(exc))
        return 2, report
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, MemoryError) as exc:
        report.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return 1, report
    report["result"] = result
    report["status"] = "ok" if ok else "FAIL"
    return (0 if ok else 1), report


def main(argv=None) -> int:
    code, report = run(argv)
    text = json.dumps(_clean(report), indent=2, allow_nan=False)
    out = report["params"].get("output")
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
