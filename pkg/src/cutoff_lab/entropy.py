"""Mixing profiles, KL divergence, varentropy, and the quantitative
inequalities relating them: entropic upper/lower bounds, the cutoff window
bound, the varentropy estimate, the logarithmic gradient estimate, the
local concentration inequality and the diameter bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import curvature as _curv
from .chain import (Distribution, MetricData, StochasticMatrix, heat_kernel,
                    heat_kernel_apply, heat_kernel_row, metric_data,
                    stationary)
from .errors import (CurvatureHypothesisFailed, DimensionMismatch,
                     HypothesisViolation, NoCrossing, NotIrreducible,
                     UnderflowRisk, UnsupportedState)
from .spectral import relaxation_time
from .verdicts import InequalityVerdict, make_verdict

EPS_GRID = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95)
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class MixingProfile:
    """Sampled map t -> worst-case TV distance to pi."""

    times: np.ndarray
    worst_tv: np.ndarray
    per_start_tv: Optional[np.ndarray] = None   # (starts, times)


@dataclass(frozen=True)
class EntropyProfile:
    """Worst-case relative entropy d* and varentropy V* along a time grid."""

    times: np.ndarray
    d_star: np.ndarray
    v_star: np.ndarray


# ---------------------------------------------------------------------------
# Distances and entropies
# ---------------------------------------------------------------------------

def tv_distance(mu, nu) -> float:
    """Total-variation distance 1/2 sum |mu - nu|."""
    a = mu.probs if isinstance(mu, Distribution) else np.asarray(mu, float)
    b = nu.probs if isinstance(nu, Distribution) else np.asarray(nu, float)
    if a.shape != b.shape:
        raise DimensionMismatch("distributions of different length")
    return 0.5 * float(np.abs(a - b).sum())


def _ratio_terms(mu, pi):
    a = mu.probs if isinstance(mu, Distribution) else np.asarray(mu, float)
    p = pi.probs if isinstance(pi, Distribution) else np.asarray(pi, float)
    if a.shape != p.shape:
        raise DimensionMismatch("distributions of different length")
    if np.any((a > 0) & (p <= 0)):
        raise UnsupportedState("mu charges a state outside the support of pi")
    mask = a > 0
    return a[mask], np.log(a[mask] / p[mask])


def kl_divergence(mu, pi) -> float:
    """Relative entropy sum mu log(mu/pi), with 0 log 0 = 0."""
    w, logr = _ratio_terms(mu, pi)
    return float(w @ logr)


def varentropy(mu, pi) -> float:
    """Variance of log(mu/pi) under mu."""
    w, logr = _ratio_terms(mu, pi)
    mean = w @ logr
    return float(w @ (logr - mean) ** 2)


# ---------------------------------------------------------------------------
# Worst-case profiles and mixing times
# ---------------------------------------------------------------------------

def _kernel_rows(P: StochasticMatrix, t: float, tol: float,
                 starts: Optional[Sequence[int]]) -> np.ndarray:
    if starts is None:
        return heat_kernel(P, t, tol)
    return np.vstack([heat_kernel_row(P, o, t, tol).probs for o in starts])


def worst_tv(P: StochasticMatrix, t: float, pi: Distribution | None = None,
             tol: float = 1e-9, starts: Optional[Sequence[int]] = None) -> float:
    """max over starting states of ||P_t(x,.) - pi||_TV."""
    if pi is None:
        pi = stationary(P)
    rows = _kernel_rows(P, t, tol, starts)
    return float(0.5 * np.abs(rows - pi.probs[None, :]).sum(axis=1).max())


def mixing_profile(P: StochasticMatrix, t_grid, tol: float = 1e-9,
                   starts: Optional[Sequence[int]] = None,
                   keep_per_start: bool = False) -> MixingProfile:
    pi = stationary(P)
    times = np.asarray(sorted(t_grid), dtype=float)
    table = []
    for t in times:
        rows = _kernel_rows(P, t, tol, starts)
        table.append(0.5 * np.abs(rows - pi.probs[None, :]).sum(axis=1))
    table = np.array(table).T
    return MixingProfile(times=times, worst_tv=table.max(axis=0),
                         per_start_tv=table if keep_per_start else None)


def mixing_time(P: StochasticMatrix, eps: float, tol_t: float | None = None,
                tol: float = 1e-9, starts: Optional[Sequence[int]] = None) -> float:
    """Smallest t with worst-case TV <= eps, by doubling then bisection.

    Uses monotonicity of the worst-case TV in t; the answer is within
    ``tol_t`` of the true crossing (default 1e-4 times the bracket scale).
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    if not P.irreducible:
        raise NotIrreducible("mixing time requires an irreducible chain")
    pi = stationary(P)
    if worst_tv(P, 0.0, pi, tol, starts) <= eps:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(64):
        if worst_tv(P, hi, pi, tol, starts) <= eps:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RuntimeError("mixing time bracket exceeded 2^64")
    if tol_t is None:
        tol_t = 1e-4 * max(1.0, hi)
    while hi - lo > tol_t:
        mid = 0.5 * (lo + hi)
        if worst_tv(P, mid, pi, tol, starts) <= eps:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def entropy_profile(P: StochasticMatrix, t_grid, tol: float = 1e-9,
                    starts: Optional[Sequence[int]] = None) -> EntropyProfile:
    """d*_KL and V*_KL over a time grid (max over the given start set)."""
    pi = stationary(P)
    times = np.asarray(sorted(t_grid), dtype=float)
    d_star, v_star = [], []
    for t in times:
        rows = _kernel_rows(P, t, tol, starts)
        d_star.append(max(kl_divergence(row, pi) for row in rows))
        v_star.append(max(varentropy(row, pi) for row in rows))
    return EntropyProfile(times=times, d_star=np.array(d_star),
                          v_star=np.array(v_star))


def d_star_at(P, t, tol=1e-9, starts=None, pi=None) -> float:
    if pi is None:
        pi = stationary(P)
    rows = _kernel_rows(P, t, tol, starts)
    return max(kl_divergence(row, pi) for row in rows)


def v_star_at(P, t, tol=1e-9, starts=None, pi=None) -> float:
    if pi is None:
        pi = stationary(P)
    rows = _kernel_rows(P, t, tol, starts)
    return max(varentropy(row, pi) for row in rows)


# ---------------------------------------------------------------------------
# Inequality verdicts
# ---------------------------------------------------------------------------

def entropic_upper_bound(P: StochasticMatrix, t: float, eps: float,
                         tol: float = 1e-9, starts=None,
                         t_rel: float | None = None) -> InequalityVerdict:
    """t_mix(eps) <= t + (t_rel/eps) (1 + d*_KL(t))."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    if t_rel is None:
        t_rel = relaxation_time(P).t_rel
    lhs = mixing_time(P, eps, tol=tol, starts=starts)
    rhs = t + (t_rel / eps) * (1.0 + d_star_at(P, t, tol=tol, starts=starts))
    return make_verdict("entropic-upper-bound", lhs, rhs, tol, eps=eps, t=t)


def entropic_lower_bound_check(mu, pi, eps: float,
                               tol: float = 1e-9) -> InequalityVerdict:
    """If ||mu - pi||_TV <= 1 - eps then d_KL <= (1 + sqrt(V_KL)) / eps."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    tv = tv_distance(mu, pi)
    lhs = kl_divergence(mu, pi)
    rhs = (1.0 + math.sqrt(varentropy(mu, pi))) / eps
    if tv > 1.0 - eps:
        # Hypothesis gate fails: vacuous pass, recorded as such.
        return make_verdict("entropic-lower-bound", 0.0, 0.0, tol, eps=eps,
                            tv=tv, vacuous=True, d_kl=lhs)
    return make_verdict("entropic-lower-bound", lhs, rhs, tol, eps=eps, tv=tv,
                        vacuous=False)


def cutoff_window_bound(P: StochasticMatrix, eps: float, tol: float = 1e-9,
                        starts=None,
                        t_rel: float | None = None) -> InequalityVerdict:
    """t_mix(eps) - t_mix(1-eps) <= (2 t_rel/eps^2)(1 + sqrt(V*(t_mix(1-eps))))."""
    if not (0.0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 1/2)")
    if t_rel is None:
        t_rel = relaxation_time(P).t_rel
    t_hi = mixing_time(P, eps, tol=tol, starts=starts)
    t_lo = mixing_time(P, 1.0 - eps, tol=tol, starts=starts)
    v = v_star_at(P, t_lo, tol=tol, starts=starts)
    lhs = t_hi - t_lo
    rhs = (2.0 * t_rel / eps ** 2) * (1.0 + math.sqrt(v))
    return make_verdict("cutoff-window-bound", lhs, rhs, tol, eps=eps,
                        t_mix_eps=t_hi, t_mix_1meps=t_lo, v_star=v)


def entropic_concentration_ratio(P: StochasticMatrix, eps: float,
                                 tol: float = 1e-9, starts=None,
                                 t_rel: float | None = None) -> float:
    """[1 + sqrt(V*(t_mix(eps)))] * t_rel / t_mix(eps); small values certify
    the cutoff criterion."""
    if t_rel is None:
        t_rel = relaxation_time(P).t_rel
    t_mix = mixing_time(P, eps, tol=tol, starts=starts)
    if t_mix <= 0.0:
        raise ValueError("degenerate chain: t_mix(eps) = 0")
    v = v_star_at(P, t_mix, tol=tol, starts=starts)
    return (1.0 + math.sqrt(v)) * t_rel / t_mix


def cutoff_time_equation(P: StochasticMatrix, c: float = 1.0,
                         tol: float = 1e-9, tol_t: float = 1e-4,
                         starts=None) -> float:
    """Solve d*_KL(t) = c (1 + sqrt(V*_KL(t))) by doubling and bisection.

    Uses the monotone decay of d* to bracket the crossing; raises
    NoCrossing when even t=0 falls below the target.
    """
    if c <= 0.0:
        raise ValueError("prefactor c must be positive")
    pi = stationary(P)

    def g(t):
        rows = _kernel_rows(P, t, tol, starts)
        d = max(kl_divergence(row, pi) for row in rows)
        v = max(varentropy(row, pi) for row in rows)
        return d - c * (1.0 + math.sqrt(v))

    if g(0.0) < 0.0:
        raise NoCrossing("d*(0) already below c (1 + sqrt(V*(0)))")
    lo, hi = 0.0, 1.0
    for _ in range(64):
        if g(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NoCrossing("no sign change found while doubling")
    while hi - lo > tol_t * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Log-gradient, local concentration, varentropy and diameter bounds
# ---------------------------------------------------------------------------

def log_density_lip_norm(P: StochasticMatrix, o: int, t: float,
                         tol: float = 1e-12,
                         metric: MetricData | None = None,
                         pi: Distribution | None = None) -> float:
    """Lipschitz norm of log(P_t(o,.)/pi) over support edges."""
    if not P.symmetric_support:
        raise HypothesisViolation("log-gradient requires symmetric support")
    if pi is None:
        pi = stationary(P)
    if metric is None:
        metric = metric_data(P)
    # The truncated series must reach every state: entries at graph distance
    # k first appear at order k of the Poisson mixture.
    row = heat_kernel_row(P, o, t, tol, min_terms=metric.diameter + 16).probs
    if np.any(row < _LOG_FLOOR):
        raise UnderflowRisk(
            f"heat-kernel entry below {_LOG_FLOOR} at t={t}; increase t")
    logr = np.log(row) - np.log(pi.probs)
    adj = P.support.copy()
    np.fill_diagonal(adj, False)
    xs, ys = np.nonzero(adj)
    return float(np.max(np.abs(logr[xs] - logr[ys])))


def log_gradient_bound_check(P: StochasticMatrix, t: float,
                             tol: float = 1e-9, kernel_tol: float = 1e-12,
                             starts=None,
                             metric: MetricData | None = None) -> InequalityVerdict:
    """max_o ||log(P_t(o,.)/pi)||_Lip <= 3 (1 + log Delta) for t >= diam/4."""
    if metric is None:
        metric = metric_data(P)
    if t < metric.diameter / 4.0:
        raise HypothesisViolation(
            f"t={t} below diam/4 = {metric.diameter / 4.0}")
    pi = stationary(P)
    olist = range(P.n) if starts is None else starts
    lhs = max(log_density_lip_norm(P, o, t, tol=kernel_tol, pi=pi,
                                   metric=metric)
              for o in olist)
    rhs = 3.0 * (1.0 + math.log(metric.delta))
    return make_verdict("log-gradient-bound", lhs, rhs, tol, t=t,
                        delta=metric.delta)


def _lip_rhs(t: float, kappa: float) -> float:
    if kappa == 0.0:
        return 2.0 * t
    return (1.0 - math.exp(-2.0 * t * kappa)) / kappa


def local_concentration_check(P: StochasticMatrix, f: np.ndarray, t: float,
                              kappa: float, tol: float = 1e-9,
                              kernel_tol: float = 1e-9,
                              metric: MetricData | None = None) -> InequalityVerdict:
    """Pointwise P_t(f^2) - (P_t f)^2 <= ((1-e^{-2 t kappa})/kappa) ||f||_Lip^2,
    with the kappa = 0 limit 2t ||f||_Lip^2."""
    if kappa < 0.0:
        raise CurvatureHypothesisFailed("local concentration needs kappa >= 0")
    if metric is None:
        metric = metric_data(P)
    f = np.asarray(f, dtype=np.float64)
    adj = P.support.copy()
    np.fill_diagonal(adj, False)
    xs, ys = np.nonzero(adj)
    lip2 = float(np.max(np.abs(f[xs] - f[ys]))) ** 2 if len(xs) else 0.0
    var = heat_kernel_apply(P, f * f, t, kernel_tol) \
        - heat_kernel_apply(P, f, t, kernel_tol) ** 2
    i = int(np.argmax(var))
    rhs = _lip_rhs(t, kappa) * lip2
    return make_verdict("local-concentration", float(var[i]), rhs, tol,
                        t=t, kappa=kappa, state=i)


def local_concentration_sweep(P: StochasticMatrix, t_list, kappa: float,
                              n_f: int = 100, seed: int = 0,
                              tol: float = 1e-9) -> InequalityVerdict:
    """Worst verdict over random Lipschitz observables and times."""
    metric = metric_data(P)
    rng = np.random.default_rng(seed)
    worst = None
    for t in t_list:
        for _ in range(n_f):
            f = rng.standard_normal(P.n)
            v = local_concentration_check(P, f, t, kappa, tol=tol,
                                          metric=metric)
            if worst is None or v.slack < worst.slack:
                worst = v
    return worst


def varentropy_bound_check(P: StochasticMatrix, eps: float,
                           kappa: float | None = None, tol: float = 1e-9,
                           kernel_tol: float = 1e-12, starts=None,
                           metric: MetricData | None = None):
    """Both forms of the varentropy estimate at t = t_mix(eps):

    1. V*_KL <= 18 t (1 + log Delta)^2;
    2. V*_KL <= 2 t (max_o ||log(P_t(o,.)/pi)||_Lip)^2.

    Returns a list of two verdicts.  Requires a non-negatively curved chain;
    pass the certified kappa (max of the two curvature minima) to skip the
    curvature computation.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    if metric is None:
        metric = metric_data(P)
    if kappa is None:
        olli = _curv.ollivier_curvature(P, metric).ollivier_min
        be = _curv.bakry_emery_curvature(P, samples=0).bakry_emery_min
        kappa = max(olli, be)
    if kappa < -1e-8:
        raise CurvatureHypothesisFailed(
            f"chain not certified non-negatively curved (kappa={kappa})")
    t = mixing_time(P, eps, tol=1e-9, starts=starts)
    pi = stationary(P)
    if t == 0.0:
        # Point masses have zero varentropy; both bounds hold as 0 <= 0.
        v, lip = 0.0, 0.0
    else:
        v = v_star_at(P, t, tol=kernel_tol, starts=starts, pi=pi)
        olist = range(P.n) if starts is None else starts
        lip = max(log_density_lip_norm(P, o, t, tol=kernel_tol, pi=pi,
                                       metric=metric)
                  for o in olist)
    v18 = make_verdict("varentropy-bound-18", v,
                       18.0 * t * (1.0 + math.log(metric.delta)) ** 2, tol,
                       eps=eps, t_mix=t)
    vcomp = make_verdict("varentropy-bound-composition", v,
                         2.0 * t * lip ** 2, tol, eps=eps, t_mix=t,
                         log_lip=lip)
    return [v18, vcomp]


def diameter_bound_check(P: StochasticMatrix, eps: float, tol: float = 1e-9,
                         starts=None, metric: MetricData | None = None,
                         t_rel: float | None = None) -> InequalityVerdict:
    """diam <= 2 t_mix(eps) + sqrt(8 t_mix(eps)/(1-eps)) + sqrt(8 t_rel/(1-eps))."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0,1)")
    if metric is None:
        metric = metric_data(P)
    if t_rel is None:
        t_rel = relaxation_time(P).t_rel
    t = mixing_time(P, eps, tol=1e-9, starts=starts)
    rhs = 2.0 * t + math.sqrt(8.0 * t / (1.0 - eps)) \
        + math.sqrt(8.0 * t_rel / (1.0 - eps))
    return make_verdict("diameter-bound", float(metric.diameter), rhs, tol,
                        eps=eps, t_mix=t)
