"""Core chain representation: transition matrix, stationary law, support
metric and heat kernel.

The heat kernel is the continuous-time semigroup e^{t(P-I)}, evaluated as a
Poisson mixture of matrix powers with certified truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import (AsymmetricSupport, DimensionMismatch, InvalidTolerance,
                     NotIrreducible, SpecParseError)

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic kernel P with its support-graph structure.

    Immutable after construction.  ``irreducible`` and ``symmetric_support``
    are computed once from the positive-entry pattern (exact zero threshold:
    entries are exact inputs).  Construction does not reject broken rows;
    use :func:`validate` to obtain a diagnostics record.
    """

    entries: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch(f"expected square matrix, got {entries.shape}")
        if entries.shape[0] < 2:
            raise DimensionMismatch("need at least 2 states")
        if not np.all(np.isfinite(entries)):
            raise ValueError("non-finite entries in transition matrix")
        object.__setattr__(self, "entries", _readonly(entries))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != entries.shape[0]:
                raise DimensionMismatch("label count does not match state count")
            object.__setattr__(self, "labels", labels)
        support = entries > 0
        object.__setattr__(self, "_support", support)
        n_comp, _ = connected_components(csr_matrix(support), directed=True,
                                         connection="strong")
        object.__setattr__(self, "irreducible", bool(n_comp == 1))
        object.__setattr__(self, "symmetric_support",
                           bool(np.array_equal(support, support.T)))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def support(self) -> np.ndarray:
        return self._support

    def edges(self):
        """Off-diagonal support edges as ordered pairs (x, y) with x < y.

        Requires symmetric support so that each undirected edge is listed once.
        """
        if not self.symmetric_support:
            raise AsymmetricSupport("edge list needs symmetric support")
        xs, ys = np.nonzero(np.triu(self._support, k=1))
        return list(zip(xs.tolist(), ys.tolist()))


@dataclass(frozen=True)
class Distribution:
    """Probability vector over states."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1:
            raise DimensionMismatch("distribution must be a vector")
        if np.any(p < -1e-15):
            raise ValueError(f"negative probability: min={p.min()}")
        total = p.sum()
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", _readonly(np.clip(p, 0.0, None)))

    @property
    def n(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class MetricData:
    """Graph distance on the support graph, diameter and sparsity Delta."""

    dist: np.ndarray       # (n, n) integer distances
    diameter: int
    delta: float           # max over adjacent pairs of 1/P(x,y)


@dataclass(frozen=True)
class ValidationReport:
    n: int
    row_sum_residual: float       # max_x |sum_y P(x,y) - 1|
    min_entry: float
    irreducible: bool
    symmetric_support: bool
    nondegenerate: bool           # n >= 3

    @property
    def stochastic(self) -> bool:
        return self.row_sum_residual <= ROW_SUM_TOL and self.min_entry >= 0.0


def validate(P: StochasticMatrix) -> ValidationReport:
    """Pure diagnostics: row sums, positivity, irreducibility, support symmetry."""
    E = P.entries
    return ValidationReport(
        n=P.n,
        row_sum_residual=float(np.max(np.abs(E.sum(axis=1) - 1.0))),
        min_entry=float(E.min()),
        irreducible=P.irreducible,
        symmetric_support=P.symmetric_support,
        nondegenerate=P.n >= 3,
    )


def stationary(P: StochasticMatrix) -> Distribution:
    """Unique invariant law pi = pi P of an irreducible chain.

    Solves the singular linear system directly, replacing the last equation
    with the normalization sum(pi) = 1; falls back to power iteration on the
    lazy kernel if the solve is ill-conditioned.
    """
    if not P.irreducible:
        raise NotIrreducible("stationary law requires an irreducible chain")
    n = P.n
    A = P.entries.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        pi = np.full(n, np.nan)
    if not np.all(np.isfinite(pi)) or _stationary_residual(P, pi) > STATIONARY_TOL:
        pi = _stationary_power_iteration(P)
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    return Distribution(pi)


def _stationary_residual(P: StochasticMatrix, pi: np.ndarray) -> float:
    return float(np.max(np.abs(pi @ P.entries - pi)))


def _stationary_power_iteration(P: StochasticMatrix, max_iter=200000) -> np.ndarray:
    # Lazy average kills periodicity; convergence is geometric for
    # irreducible chains.
    n = P.n
    M = 0.5 * (np.eye(n) + P.entries)
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = pi @ M
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < 1e-16:
            pi = nxt
            break
        pi = nxt
    if _stationary_residual(P, pi) > STATIONARY_TOL:
        raise NotIrreducible("power iteration failed to converge to pi")
    return pi


def metric_data(P: StochasticMatrix) -> MetricData:
    """All-pairs BFS distance on the support graph, diameter and sparsity."""
    if not P.symmetric_support:
        raise AsymmetricSupport("graph metric requires symmetric support")
    adj = P.support.copy()
    np.fill_diagonal(adj, False)
    d = shortest_path(csr_matrix(adj), method="D", unweighted=True, directed=False)
    if np.any(np.isinf(d)):
        raise NotIrreducible("support graph is disconnected")
    dist = d.astype(np.int64)
    off = P.entries[adj]
    delta = float(np.max(1.0 / off)) if off.size else 1.0
    return MetricData(dist=_readonly(d).astype(np.int64),
                      diameter=int(dist.max()), delta=delta)


# ---------------------------------------------------------------------------
# Heat kernel
# ---------------------------------------------------------------------------

# Poisson tail is truncated below min(tol, _MASS_TOL) so that kernel rows
# remain valid Distributions (sum to 1 within 1e-12) without renormalizing.
_MASS_TOL = 1e-13


def _check_tol(tol: float):
    if not (0.0 < tol <= 1e-6):
        raise InvalidTolerance(f"tol must lie in (0, 1e-6], got {tol}")


def poisson_weights(t: float, tol: float, min_terms: int = 0) -> np.ndarray:
    """Poisson(t) pmf q_0..q_K with tail mass below min(tol, 1e-13).

    K is floored at ceil(t + 8*sqrt(t) + 8) to avoid premature truncation
    at small t; ``min_terms`` raises the floor further (needed when entries
    at graph distance up to the diameter must be resolved, e.g. for log
    densities).
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return np.array([1.0])
    if t > 700.0:
        raise OverflowError("heat kernel times above 700 are out of scale")
    floor_k = max(math.ceil(t + 8.0 * math.sqrt(t) + 8.0), int(min_terms))
    target = 1.0 - min(tol, _MASS_TOL)
    q = [math.exp(-t)]
    cum = q[0]
    k = 0
    while cum < target or k < floor_k:
        k += 1
        q.append(q[-1] * t / k)
        cum += q[-1]
        if k > 200000:
            raise RuntimeError("Poisson truncation did not converge")
    return np.array(q)


def heat_kernel_row(P: StochasticMatrix, o: int, t: float,
                    tol: float = 1e-9, min_terms: int = 0) -> Distribution:
    """Heat-kernel row P_t(o, .) = sum_k e^{-t} t^k/k! P^k(o, .).

    Renormalization-free: the truncation point certifies a TV error below
    ``tol`` against the exact series.  Row-vector iteration, no matrix
    powers stored.
    """
    _check_tol(tol)
    if not (0 <= o < P.n):
        raise DimensionMismatch(f"state {o} out of range")
    q = poisson_weights(t, tol, min_terms=min_terms)
    v = np.zeros(P.n)
    v[o] = 1.0
    acc = q[0] * v
    for k in range(1, len(q)):
        v = v @ P.entries
        acc += q[k] * v
    return Distribution(acc)


def heat_kernel(P: StochasticMatrix, t: float, tol: float = 1e-9) -> np.ndarray:
    """Full heat-kernel matrix; row x is the law P_t(x, .)."""
    _check_tol(tol)
    q = poisson_weights(t, tol)
    V = np.eye(P.n)
    acc = q[0] * V
    for k in range(1, len(q)):
        V = V @ P.entries
        acc += q[k] * V
    return acc


def heat_kernel_apply(P: StochasticMatrix, f: np.ndarray, t: float,
                      tol: float = 1e-9) -> np.ndarray:
    """Action of the semigroup on an observable: (P_t f)(x)."""
    _check_tol(tol)
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != P.n:
        raise DimensionMismatch("observable length does not match state count")
    q = poisson_weights(t, tol)
    v = f.copy()
    acc = q[0] * v
    for k in range(1, len(q)):
        v = P.entries @ v
        acc += q[k] * v
    return acc


# ---------------------------------------------------------------------------
# Chain file format
# ---------------------------------------------------------------------------

def load_chain_file(path) -> StochasticMatrix:
    """Text format: first line n, then n rows of n probabilities.

    ``#`` starts a comment line; an optional line ``labels: a b c`` names
    the states.
    """
    labels = None
    rows = []
    n = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("labels:"):
                labels = line[len("labels:"):].split()
                continue
            if n is None:
                try:
                    n = int(line)
                except ValueError as exc:
                    raise SpecParseError(f"bad state count line: {line!r}") from exc
                continue
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError as exc:
                raise SpecParseError(f"bad matrix row: {line!r}") from exc
    if n is None or len(rows) != n or any(len(r) != n for r in rows):
        raise SpecParseError("chain file does not contain an n x n matrix")
    return StochasticMatrix(np.array(rows), labels=labels)


def save_chain_file(P: StochasticMatrix, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{P.n}\n")
        if P.labels is not None:
            fh.write("labels: " + " ".join(P.labels) + "\n")
        for row in P.entries:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
