"""Command-line driver for the verification suites and the tau evaluator.

Every subcommand prints a JSON list of reports (or CSV for a t-grid) and
exits with 0 when every check passes, 1 when an identity fails and 2 when a
precondition (resonance, domain, pole, mode) stops the run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import mpmath as mp

from . import blocks, nekrasov, qpvi, riemann
from .errors import QError
from .qspecial import QContext
from .report import Report, dump_reports, jsonable, merge
from .tau import ThetaParams, bilinear_base, tau_eval_detailed, tau_family, tau_formula_family

THREADS_ENV = "QPAINLEVE_THREADS"

THETA_KEYS = ("theta0", "theta_t", "theta1", "theta_inf", "sigma", "s")

QPVI_DEFAULTS = {"q": "0.3", "t": "0.02", "theta0": "0.317", "theta_t": "0.241", "theta1": "0.153",
                 "theta_inf": "0.382", "sigma": "0.271", "s": "0.83"}
RIEMANN_DEFAULTS = {"q": "0.002", "t": "0.126", "theta0": "0.317", "theta_t": "0.07", "theta1": "0.08",
                    "theta_inf": "0.382", "sigma": "0.271", "s": "0.83"}
# (q, theta_inf, theta1, sigma) for the braiding relation.  Both eta-series
# run in q^(theta1 + 1/2); it must stay near 0.03 so that the K_eta = 12 cut
# is below 1e-12 even when a partition of weight 3 delays the series start.
BRAIDING_POINTS = (("0.05", "0.382", "0.7", "0.271"), ("0.06", "0.213", "0.83", "0.347"))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn, items: list) -> list:
    """Map in input order, across processes when the thread variable asks for more than one."""
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# configuration


def _context(args, q: str) -> QContext:
    return QContext(q, mantissa_bits=args.bits, product_cutoff=args.P,
                    weight_cap=args.weight_cap, fourier_window=args.fourier_window)


def _theta_params(args, ctx: QContext) -> ThetaParams:
    return ThetaParams.parse(ctx, **{k: getattr(args, k) for k in THETA_KEYS})


def _add_common(p: argparse.ArgumentParser, weight_cap: int) -> None:
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--bits", type=int, default=128, help="mantissa bits")
    p.add_argument("--P", type=int, default=256, help="infinite-product cutoff")
    p.add_argument("--weight-cap", "-K", dest="weight_cap", type=int, default=weight_cap)
    p.add_argument("--fourier-window", "-N", dest="fourier_window", type=int, default=6)
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def _add_thetas(p: argparse.ArgumentParser, defaults: dict) -> None:
    p.add_argument("--q", default=defaults["q"])
    p.add_argument("--t", default=defaults["t"])
    for key in THETA_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=defaults[key])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpainleve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-lemmas", help="exact Nekrasov-factor identities")
    _add_common(p, 5)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--pair-weight-cap", type=int, default=None)
    p.add_argument("--points", default="2/7:3/5,3/11:5/13", help="rational q:u pairs")

    p = sub.add_parser("check-braiding", help="braiding matrix and braiding relation")
    _add_common(p, 10)
    p.add_argument("--max-weight", type=int, default=3, help="total weight of partition quadruples")
    p.add_argument("--eps-prime", choices=("both", "plus", "minus"), default="both")
    p.add_argument("--k-eta", type=int, default=12)
    p.add_argument("--matrix-points", type=int, default=50)
    p.add_argument("--seed", type=int, default=20240607)

    p = sub.add_parser("eval-tau", help="tau families at t, qt, t/q")
    _add_common(p, 8)
    _add_thetas(p, QPVI_DEFAULTS)
    p.add_argument("--family", choices=("bilinear", "formula", "both"), default="both")
    p.add_argument("--grid", help="t0,ratio,count: CSV over a geometric t-grid")

    for name, help_text in (("check-bilinear", "bilinear relations"), ("check-qpvi", "qPVI map from tau")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p, 8)
        _add_thetas(p, QPVI_DEFAULTS)
        p.add_argument("--tol", default="1e-8")
        if name == "check-qpvi":
            p.add_argument("--steps", type=int, default=3)
            p.add_argument("--trace", type=int, default=0, help="orbit comparison over this many steps")
            p.add_argument("--convention-probe", action="store_true")
            p.add_argument("--with-riemann", action="store_true")

    p = sub.add_parser("check-riemann", help="Riemann-problem structure on the mid circle")
    _add_common(p, 8)
    _add_thetas(p, RIEMANN_DEFAULTS)
    p.add_argument("--tol", default="1e-6")
    p.add_argument("--samples", type=int, default=riemann.SAMPLE_POINTS)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        unknown = set(config) - {a.dest for a in sub._actions}
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k: str(v) if isinstance(v, float) else v for k, v in config.items()})
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# commands


def cmd_check_lemmas(args) -> list[Report]:
    points = []
    for pair in args.points.split(","):
        q, u = pair.split(":")
        points.append((Fraction(q), Fraction(u)))
    return nekrasov.partition_identity_suite(args.weight_cap, args.n_max, tuple(points), args.pair_weight_cap)


def _braiding_point(spec):
    q, thi, th1, sig = spec
    ctx = QContext(q)
    with ctx.precision():
        vals = [ctx.scalar(v) for v in (thi, th1, sig)]
        x1 = ctx.scalar("1.1")
        x2 = x1 * ctx.q ** (blocks.HALF - vals[1])
    return ctx, vals, x1, x2


def _quadruple_job(job):
    point, quad, eps_primes, k_eta = job
    ctx, (thi, th1, sig), x1, x2 = _braiding_point(point)
    with ctx.precision():
        reps = []
        for ep in eps_primes:
            r = blocks.braiding_identity_residual(*quad, thi, th1, sig, x1, x2, ctx, k_eta, (ep,))
            reps.append(Report("braiding_relation", {"q": ctx.q, "quadruple": quad, "eps_p": ep},
                               "float", bool(r <= mp.mpf("1e-12")), {"residual": r}))
        return reps


def braiding_relation_reports(max_weight: int, eps_primes, k_eta: int, points=BRAIDING_POINTS) -> list[Report]:
    jobs = [(pt, quad, tuple(eps_primes), k_eta)
            for pt in points for quad in blocks.quadruples(max_weight)]
    reports = [r for batch in ordered_map(_quadruple_job, jobs) for r in batch]
    meta = {"max_weight": max_weight, "k_eta": k_eta, "eps_primes": list(eps_primes),
            "points": [list(p) for p in points]}
    out = [merge("braiding_relation", reports, meta)]

    vac = []
    for pt in points:
        ctx, (thi, th1, sig), x1, x2 = _braiding_point(pt)
        for ep in eps_primes:
            r = blocks.vacuum_heine_residual(ep, thi, th1, sig, x1, x2, ctx, k_eta)
            vac.append(Report("vacuum_heine", {"q": ctx.q, "eps_p": ep}, "float",
                              bool(r <= mp.mpf("1e-12")), {"residual": r}))
    out.append(merge("vacuum_heine", vac, meta))

    red = []
    for pt in points:
        ctx, (thi, th1, sig), x1, x2 = _braiding_point(pt)
        for quad in blocks.quadruples(max_weight):
            if 1 <= quad[0].weight <= 2:
                red.append(blocks.check_braiding_reduction(*quad, thi, th1, sig, x1, x2, ctx, k_eta))
    if red:
        out.append(merge("braiding_reduction", red, meta))
    return out


def cmd_check_braiding(args) -> list[Report]:
    eps = {"both": (1, -1), "plus": (1,), "minus": (-1,)}[args.eps_prime]
    ctx = QContext("0.3", mantissa_bits=args.bits, product_cutoff=args.P)
    reports = blocks.braiding_suite(ctx, args.matrix_points, args.seed)
    return reports + braiding_relation_reports(args.max_weight, eps, args.k_eta)


def _fmt(value) -> str:
    v = jsonable(value)
    return v if isinstance(v, str) else f"{v[0]}{'' if v[1].startswith('-') else '+'}{v[1]}j"


def _families(args, ctx):
    base = _theta_params(args, ctx)
    fams = []
    if args.family in ("bilinear", "both"):
        fams.append(tau_family(bilinear_base(base)))
    if args.family in ("formula", "both"):
        fams.append(tau_formula_family(base))
    return fams


def cmd_eval_tau(args):
    ctx = _context(args, args.q)
    with ctx.precision():
        fams = _families(args, ctx)
        if args.grid:
            t0, ratio, count = args.grid.split(",")
            ts = [ctx.scalar(t0) * ctx.scalar(ratio) ** k for k in range(int(count))]
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            header = ["t"] + [f"{f.kind}_tau{i}" for f in fams for i in range(1, len(f) + 1)]
            writer.writerow(header)
            for t in ts:
                writer.writerow([_fmt(t)] + [_fmt(v) for f in fams for v in f.values(t, ctx)])
            return buf.getvalue()
        t = ctx.scalar(args.t)
        out = {"metadata": ctx.metadata(), "t": t, "families": {}}
        warnings = []
        for f in fams:
            rows = {}
            for i in range(1, len(f) + 1):
                entry = {}
                for label, tt in (("t", t), ("qt", ctx.q * t), ("t/q", t / ctx.q)):
                    val = tau_eval_detailed(f[i], tt, ctx)
                    entry[label] = val
                    if not val.converged:
                        warnings.append(f"{f.kind} tau{i} at {label} under-converged")
                rows[f"tau{i}"] = entry
            out["families"][f.kind] = rows
        out["warnings"] = warnings
        return json.dumps(jsonable(out), sort_keys=True, indent=1)


def cmd_check_bilinear(args) -> list[Report]:
    ctx = _context(args, args.q)
    with ctx.precision():
        return qpvi.bilinear_report(_theta_params(args, ctx), ctx.scalar(args.t), ctx, mp.mpf(args.tol))


def cmd_check_qpvi(args) -> list[Report]:
    ctx = _context(args, args.q)
    with ctx.precision():
        base, t, tol = _theta_params(args, ctx), ctx.scalar(args.t), mp.mpf(args.tol)
        reports = qpvi.bilinear_report(base, t, ctx, tol)
        reports += qpvi.qpvi_report(base, t, ctx, args.steps, tol, probe=args.convention_probe)
        if args.trace:
            rows = qpvi.trace(base, t, ctx, args.trace)
            worst = max(r["deviation"] for r in rows)
            reports.append(Report("trace", {"steps": args.trace, **ctx.metadata()}, "float",
                                  bool(worst <= mp.mpf("1e-7")), {"residual": worst, "rows": rows}))
        if args.with_riemann:
            reports += riemann_reports(base, t, ctx, mp.mpf("1e-6"))
    return reports


def riemann_reports(base, t, ctx, tol, samples: int = riemann.SAMPLE_POINTS) -> list[Report]:
    res = riemann.structure_residuals(base, t, ctx, samples)
    meta = {"t": t, "base": base, "samples": samples, **ctx.metadata()}
    return [Report(f"riemann_{k}", meta, "float", bool(v <= tol), {"residual": v}) for k, v in res.items()]


def cmd_check_riemann(args) -> list[Report]:
    ctx = _context(args, args.q)
    with ctx.precision():
        return riemann_reports(_theta_params(args, ctx), ctx.scalar(args.t), ctx, mp.mpf(args.tol), args.samples)


COMMANDS = {
    "check-lemmas": cmd_check_lemmas,
    "check-braiding": cmd_check_braiding,
    "eval-tau": cmd_eval_tau,
    "check-bilinear": cmd_check_bilinear,
    "check-qpvi": cmd_check_qpvi,
    "check-riemann": cmd_check_riemann,
}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except QError as exc:
        sys.stderr.write(f"precondition failed: {type(exc).__name__}: {exc}\n")
        return 2
    if isinstance(result, str):
        _emit(result, args.output)
        return 0
    _emit(dump_reports(result), args.output)
    return 0 if all(r.passed for r in result) else 1


if __name__ == "__main__":
    sys.exit(main())
