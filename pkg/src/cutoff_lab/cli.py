"""Command-line front end: analyze single chains, verify the inequality
suite, scan families for cutoff signatures, dump curvature tables, and
generate random Cayley instances.

Exit codes: 0 success, 2 spec error, 3 theorem-verdict failure,
4 resource cap.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import entropy as ent
from . import families as fam
from . import svg
from .cache import HeatKernelCache
from .chain import (Distribution, StochasticMatrix, heat_kernel,
                    heat_kernel_row, load_chain_file, metric_data,
                    save_chain_file, stationary, validate)
from .curvature import (bakry_emery_curvature, contraction_check,
                        ollivier_curvature, subcommutativity_check)
from .errors import (CurvatureHypothesisFailed, CutoffLabError, SpecParseError,
                     StateCapExceeded)
from .spectral import relaxation_time

CSV_VERSION = "cutoff-lab-csv-v1"
EXIT_OK, EXIT_SPEC, EXIT_VERDICT, EXIT_CAP = 0, 2, 3, 4

DEFAULTS = {
    "eps": "0.05,0.1,0.25,0.5,0.75,0.9,0.95",
    "tgrid": "auto",
    "tol": "1e-8",
    "seed": "0",
    "out": "out",
    "threads": "1",
    "cache": "1",
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {CSV_VERSION}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _pmap(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


# ---------------------------------------------------------------------------
# Options
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SpecParseError(f"bad config line {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


class Options:
    """Merged options: CLI flags > config file > defaults."""

    def __init__(self, args):
        cfg = load_config(args.config) if args.config else {}

        def pick(name, flag_value):
            if flag_value is not None:
                return str(flag_value)
            if name in cfg:
                return cfg[name]
            return DEFAULTS.get(name)

        self.spec = pick("spec", args.spec)
        self.chain_file = pick("chain-file", args.chain_file)
        self.eps = [float(v) for v in pick("eps", args.eps).split(",")]
        if any(not (0.0 < e < 1.0) for e in self.eps):
            raise SpecParseError("eps values must lie in (0,1)")
        self.tgrid = pick("tgrid", args.tgrid)
        self.tol = min(float(pick("tol", args.tol)), 1e-6)
        self.seed = int(pick("seed", args.seed))
        self.out = pick("out", args.out)
        self.threads = int(pick("threads", args.threads))
        no_cache = getattr(args, "no_cache", False)
        self.cache_enabled = (not no_cache) and pick("cache", None) != "0"

    def instance(self) -> fam.ChainInstance:
        if self.spec:
            return fam.parse_family_spec(self.spec)
        if self.chain_file:
            P = load_chain_file(self.chain_file)
            return fam.ChainInstance(P, family="file",
                                     params={"path": self.chain_file})
        raise SpecParseError("need --spec or --chain-file")

    def outdir(self) -> str:
        os.makedirs(self.out, exist_ok=True)
        return self.out

    def kernel_cache(self):
        if not self.cache_enabled:
            return None
        return HeatKernelCache(os.path.join(self.outdir(), "cache"))


def _cached_rows(cache, P, t, tol, starts):
    def compute():
        if starts is None:
            return heat_kernel(P, t, tol)
        return np.vstack([heat_kernel_row(P, o, t, tol).probs
                          for o in starts])
    if cache is None:
        return compute()
    return cache.get_or_compute(P, t, tol, starts, compute)


def _t_grid(opts, t_scale):
    if opts.tgrid == "auto":
        return list(np.linspace(0.0, 1.5 * max(t_scale, 1e-6), 25))
    try:
        a, b, steps = opts.tgrid.split(":")
        return list(np.linspace(float(a), float(b), int(steps)))
    except ValueError as exc:
        raise SpecParseError(f"bad tgrid {opts.tgrid!r}") from exc


def _check_valid(P: StochasticMatrix):
    rep = validate(P)
    if not rep.stochastic:
        raise SpecParseError(
            f"matrix is not stochastic (row residual {rep.row_sum_residual})")
    if not rep.irreducible:
        raise SpecParseError("matrix is not irreducible")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(opts: Options) -> int:
    inst = opts.instance()
    P = inst.matrix
    _check_valid(P)
    out = opts.outdir()
    cache = opts.kernel_cache()
    metric = metric_data(P)
    pi = stationary(P)
    srel = relaxation_time(P)
    starts = inst.starts
    tmix = {e: ent.mixing_time(P, e, tol=opts.tol, starts=starts)
            for e in opts.eps}
    olli = ollivier_curvature(P, metric)
    be = bakry_emery_curvature(P, samples=0)
    eps0 = 0.25 if 0.25 in opts.eps else opts.eps[0]
    d0 = ent.d_star_at(P, tmix[eps0], tol=opts.tol, starts=starts, pi=pi)
    v0 = ent.v_star_at(P, tmix[eps0], tol=opts.tol, starts=starts, pi=pi)
    header = (["n", "delta", "diam", "t_rel", "kappa_ollivier",
               "kappa_bakry_emery"]
              + [f"tmix_{_fmt(e)}" for e in opts.eps]
              + ["d_star", "v_star"])
    row = ([P.n, metric.delta, metric.diameter, srel.t_rel,
            olli.ollivier_min, be.bakry_emery_min]
           + [tmix[e] for e in opts.eps] + [d0, v0])
    write_csv(os.path.join(out, "analysis.csv"), header, [row])

    grid = _t_grid(opts, max(tmix.values()))

    def profile_point(t):
        rows = _cached_rows(cache, P, t, opts.tol, starts)
        tv = float(0.5 * np.abs(rows - pi.probs[None, :]).sum(axis=1).max())
        d = max(ent.kl_divergence(r, pi) for r in rows)
        return tv, d
    points = _pmap(profile_point, grid, opts.threads)
    svg.line_plot(
        os.path.join(out, "profile.svg"),
        [("worst-case TV", grid, [p[0] for p in points]),
         ("d*_KL", grid, [p[1] for p in points])],
        title=f"mixing profile ({inst.family}, n={P.n})",
        xlabel="t", ylabel="distance",
        vlines=[(f"tmix({_fmt(e)})", tmix[e]) for e in opts.eps])
    print(f"analyze: n={P.n} t_rel={srel.t_rel:.6g} "
          f"kappa_olli={olli.ollivier_min:.6g} "
          f"kappa_be={be.bakry_emery_min:.6g}")
    for e in opts.eps:
        print(f"  tmix({e}) = {tmix[e]:.6g}")
    return EXIT_OK


def verdict_suite(inst: fam.ChainInstance, eps_list, seed=0, tol=1e-9,
                  n_f=100, semigroup_checks=True):
    """All proved-inequality verdicts for one instance.

    Returns a list of InequalityVerdict.  Semigroup-level checks
    (contraction, sub-commutativity) use a reduced observable count.
    """
    P = inst.matrix
    metric = metric_data(P)
    pi = stationary(P)
    srel = relaxation_time(P)
    starts = inst.starts
    olli = ollivier_curvature(P, metric)
    be = bakry_emery_curvature(P, samples=0)
    kappa_cert = max(olli.ollivier_min, be.bakry_emery_min)
    verdicts = []
    tmix = {}

    def tm(e):
        if e not in tmix:
            tmix[e] = ent.mixing_time(P, e, tol=1e-9, starts=starts)
        return tmix[e]

    t_half = tm(0.5)
    for e in eps_list:
        verdicts.append(ent.entropic_upper_bound(
            P, t_half, e, tol=tol, starts=starts, t_rel=srel.t_rel))
        # Entropic lower bound on the entropy-worst kernel row at tmix(1-e).
        rows = (heat_kernel(P, tm(1.0 - e), 1e-12) if starts is None else
                np.vstack([heat_kernel_row(P, o, tm(1.0 - e), 1e-12).probs
                           for o in starts]))
        worst = max(rows, key=lambda r: ent.kl_divergence(r, pi))
        verdicts.append(ent.entropic_lower_bound_check(
            Distribution(worst), pi, e, tol=tol))
        if e < 0.5:
            verdicts.append(ent.cutoff_window_bound(
                P, e, tol=tol, starts=starts, t_rel=srel.t_rel))
        verdicts.append(ent.diameter_bound_check(
            P, e, tol=tol, starts=starts, metric=metric, t_rel=srel.t_rel))
    t_log = max(metric.diameter / 4.0, tm(0.25))
    verdicts.append(ent.log_gradient_bound_check(P, t_log, tol=tol,
                                                 starts=starts, metric=metric))
    kappa_cc = max(0.0, kappa_cert)
    if kappa_cert >= -1e-8:
        verdicts.append(ent.local_concentration_sweep(
            P, [1.0, tm(0.25)], kappa_cc, n_f=n_f, seed=seed, tol=tol))
        for e in eps_list:
            verdicts.extend(ent.varentropy_bound_check(
                P, e, kappa=kappa_cert, tol=tol, starts=starts,
                metric=metric))
    if semigroup_checks:
        t_grid = [0.5, tm(0.25)]
        verdicts.append(contraction_check(
            P, olli.ollivier_min, t_grid, seed=seed, n_f=min(n_f, 20),
            tol=tol, check_w1=P.n <= 128))
        verdicts.append(subcommutativity_check(
            P, be.bakry_emery_min, t_grid, seed=seed, n_f=min(n_f, 20),
            tol=tol))
    return verdicts


def cmd_verify(opts: Options) -> int:
    inst = opts.instance()
    _check_valid(inst.matrix)
    out = opts.outdir()
    verdicts = verdict_suite(inst, opts.eps, seed=opts.seed)
    rows = []
    failed = False
    for v in verdicts:
        # The context column must stay comma-free inside a CSV row.
        ctx = ";".join(f"{k}={_fmt(val)}" for k, val in sorted(v.context.items()))
        ctx = ctx.replace(",", "/").replace(" ", "")
        rows.append([v.name, ctx, v.lhs, v.rhs, v.slack,
                     "1" if v.passed else "0"])
        print(v)
        if not v.passed:
            failed = True
    write_csv(os.path.join(out, "verdicts.csv"),
              ["name", "context", "lhs", "rhs", "slack", "pass"], rows)
    return EXIT_VERDICT if failed else EXIT_OK


def scan_rows(opts: Options):
    members = fam.parse_family_range(opts.spec)
    eps_lo = min(opts.eps)
    eps_hi = max(opts.eps)

    def one(item):
        value, inst = item
        P = inst.matrix
        metric = metric_data(P)
        pi = stationary(P)
        srel = relaxation_time(P)
        starts = inst.starts
        tmix = {e: ent.mixing_time(P, e, tol=opts.tol, starts=starts)
                for e in opts.eps}
        olli = ollivier_curvature(P, metric)
        be = bakry_emery_curvature(P, samples=0)
        d0 = ent.d_star_at(P, tmix[eps_lo], tol=opts.tol, starts=starts, pi=pi)
        v0 = ent.v_star_at(P, tmix[eps_lo], tol=opts.tol, starts=starts, pi=pi)
        window = tmix[eps_lo] - tmix[eps_hi]
        ratio = tmix[eps_lo] / tmix[eps_hi] if tmix[eps_hi] > 0 else math.inf
        conc = (1.0 + math.sqrt(v0)) * srel.t_rel / tmix[eps_lo]
        log_delta = math.log(metric.delta)
        sparse = (tmix[eps_lo] / (srel.t_rel * log_delta) ** 2
                  if log_delta > 0 else math.inf)
        th1_window = math.sqrt(tmix[0.25] if 0.25 in tmix else tmix[eps_lo]) \
            * srel.t_rel * max(log_delta, 1e-12)
        if eps_lo < 0.5:
            wb = ent.cutoff_window_bound(P, eps_lo, starts=starts,
                                         t_rel=srel.t_rel)
            th2_bound = wb.rhs
        else:
            th2_bound = math.nan
        return ([value, P.n, metric.delta, metric.diameter, srel.t_rel,
                 olli.ollivier_min, be.bakry_emery_min]
                + [tmix[e] for e in opts.eps]
                + [window, ratio, d0, v0, conc, sparse, th1_window,
                   th2_bound])

    rows = _pmap(one, members, opts.threads)
    header = (["param", "n", "delta", "diam", "t_rel", "kappa_ollivier",
               "kappa_bakry_emery"]
              + [f"tmix_{_fmt(e)}" for e in opts.eps]
              + ["window", "ratio", "d_star", "v_star",
                 "concentration_ratio", "sparse_condition",
                 "th1_window_scale", "th2_window_bound"])
    return header, rows


def cmd_scan(opts: Options) -> int:
    header, rows = scan_rows(opts)
    out = opts.outdir()
    write_csv(os.path.join(out, "scan.csv"), header, rows)
    params = [r[0] for r in rows]
    i_ratio = header.index("ratio")
    i_window = header.index("window")
    i_th1 = header.index("th1_window_scale")
    svg.line_plot(os.path.join(out, "cutoff_ratio.svg"),
                  [("tmix ratio", params, [r[i_ratio] for r in rows])],
                  title=f"cutoff ratio scan: {opts.spec}",
                  xlabel="family parameter", ylabel="tmix ratio")
    svg.line_plot(os.path.join(out, "window.svg"),
                  [("window", params, [r[i_window] for r in rows]),
                   ("sqrt(tmix) t_rel logD", params,
                    [r[i_th1] for r in rows])],
                  title=f"window scan: {opts.spec}",
                  xlabel="family parameter", ylabel="time")
    for row in rows:
        print(" ".join(f"{h}={_fmt(v)}" for h, v in zip(header, row)))
    return EXIT_OK


def cmd_curvature(opts: Options) -> int:
    inst = opts.instance()
    P = inst.matrix
    _check_valid(P)
    metric = metric_data(P)
    olli = ollivier_curvature(P, metric)
    be = bakry_emery_curvature(P, samples=0)
    rows = [["edge", x, y, k] for (x, y), k in sorted(olli.ollivier_edges.items())]
    rows += [["vertex", x, "", k]
             for x, k in sorted(be.bakry_emery_vertices.items())]
    write_csv(os.path.join(opts.outdir(), "curvature.csv"),
              ["kind", "x", "y", "kappa"], rows)
    print(f"ollivier_min={olli.ollivier_min:.12g} "
          f"bakry_emery_min={be.bakry_emery_min:.12g}")
    return EXIT_OK


def cmd_random_cayley(opts: Options) -> int:
    inst = opts.instance()
    if inst.family != "cayley-random":
        raise SpecParseError("random-cayley needs a cayley-random spec")
    out = opts.outdir()
    path = os.path.join(out, "chain.txt")
    save_chain_file(inst.matrix, path)
    print(f"n={inst.matrix.n} d={inst.params['d']} seed={inst.params['seed']} "
          f"draws={list(inst.params['draws'])} -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cutoff-lab",
        description="mixing, curvature and entropic cutoff diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "verify", "scan", "curvature", "random-cayley"):
        p = sub.add_parser(name)
        p.add_argument("--spec", default=None)
        p.add_argument("--chain-file", default=None)
        p.add_argument("--eps", default=None)
        p.add_argument("--tgrid", default=None)
        p.add_argument("--tol", default=None)
        p.add_argument("--seed", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", default=None)
        p.add_argument("--no-cache", action="store_true")
        p.add_argument("--config", default=None)
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "curvature": cmd_curvature,
    "random-cayley": cmd_random_cayley,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = Options(args)
        return COMMANDS[args.command](opts)
    except StateCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SpecParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except CutoffLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
