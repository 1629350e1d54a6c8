"""Built-in chain families: abelian Cayley walks (deterministic and random),
hypercubes, cycles, complete graphs, birth-death chains, conjugacy-invariant
walks on the permutation group, and the cutoff-destroying perturbation
toward the stationary law.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .chain import StochasticMatrix, stationary
from .errors import (GenerationFailed, NotGenerating, NotSymmetricSet,
                     SpecParseError, StateCapExceeded)

STATE_CAP = 5000

CLAIM_ABELIAN = "nonneg-abelian"
CLAIM_OTHER = "nonneg-other"
CLAIM_UNKNOWN = "unknown"


@dataclass(frozen=True)
class GroupSpec:
    """Product of cyclic groups Z_{m1} x ... x Z_{mk}."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(int(m) for m in self.factors)
        if not factors or any(m < 2 for m in factors):
            raise SpecParseError("cyclic factors must all be >= 2")
        object.__setattr__(self, "factors", factors)

    @property
    def N(self) -> int:
        return math.prod(self.factors)

    # Elements are mixed-radix indices, last factor fastest.
    def _weights(self) -> np.ndarray:
        w = [1]
        for m in reversed(self.factors[1:]):
            w.append(w[-1] * m)
        return np.array(w[::-1], dtype=np.int64)

    def decode(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        w = self._weights()
        f = np.array(self.factors, dtype=np.int64)
        return (idx[..., None] // w) % f

    def encode(self, coords):
        coords = np.asarray(coords, dtype=np.int64)
        return coords @ self._weights()

    def add(self, a, b):
        f = np.array(self.factors, dtype=np.int64)
        return self.encode((self.decode(a) + self.decode(b)) % f)

    def neg(self, a):
        f = np.array(self.factors, dtype=np.int64)
        return self.encode((-self.decode(a)) % f)

    @staticmethod
    def parse(text: str) -> "GroupSpec":
        """``Z12xZ2`` or ``Z2^8`` or ``Z101``."""
        factors = []
        for part in text.split("x"):
            part = part.strip()
            if not part.startswith("Z"):
                raise SpecParseError(f"bad group factor {part!r}")
            body = part[1:]
            if "^" in body:
                base, power = body.split("^", 1)
                try:
                    factors.extend([int(base)] * int(power))
                except ValueError as exc:
                    raise SpecParseError(f"bad group factor {part!r}") from exc
            else:
                try:
                    factors.append(int(body))
                except ValueError as exc:
                    raise SpecParseError(f"bad group factor {part!r}") from exc
        return GroupSpec(tuple(factors))


@dataclass(frozen=True)
class ChainInstance:
    """A constructed chain plus provenance and symmetry metadata."""

    matrix: StochasticMatrix
    family: str
    params: dict = field(default_factory=dict)
    transitive: bool = False
    curvature_claim: str = CLAIM_UNKNOWN

    @property
    def starts(self):
        """Start set sufficient for worst-case maximizations."""
        return [0] if self.transitive else None


def _check_cap(n: int, cap: int):
    if n > cap:
        raise StateCapExceeded(f"{n} states exceeds cap {cap}")


def _generating(spec: GroupSpec, gens) -> bool:
    reached = {0}
    frontier = [0]
    gens = [int(g) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(spec.add(x, g))
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(reached) == spec.N


def abelian_cayley(spec: GroupSpec, S, state_cap: int = STATE_CAP) -> ChainInstance:
    """Random walk P(x,y) = (1/|S|) #{z in S : y = x + z} on the group.

    ``S`` is a multiset of element indices (negative g means the inverse of
    element -g); it must be closed under negation and generating.
    """
    _check_cap(spec.N, state_cap)
    S = [int(g) for g in S]
    elems = [int(spec.neg(-g)) if g < 0 else g % spec.N for g in S]
    if Counter(elems) != Counter(int(spec.neg(g)) for g in elems):
        raise NotSymmetricSet("generator multiset not closed under negation")
    if not _generating(spec, elems):
        raise NotGenerating("generators do not generate the group")
    N = spec.N
    P = np.zeros((N, N))
    xs = np.arange(N)
    for g in elems:
        ys = spec.add(xs, g)
        P[xs, ys] += 1.0 / len(elems)
    return ChainInstance(StochasticMatrix(P), family="cayley",
                         params={"factors": spec.factors, "gens": tuple(S)},
                         transitive=True, curvature_claim=CLAIM_ABELIAN)


def random_abelian_cayley(spec: GroupSpec, d: int, seed: int,
                          state_cap: int = STATE_CAP,
                          max_redraws: int = 100) -> ChainInstance:
    """d i.i.d. uniform draws, symmetrized as S = draws + their inverses.

    Redraws (up to ``max_redraws``) until the set generates; deterministic
    given the seed.  The identity may be drawn (adds laziness).
    """
    if d < 1:
        raise SpecParseError("need at least one generator draw")
    _check_cap(spec.N, state_cap)
    rng = np.random.default_rng(seed)
    for _ in range(max_redraws):
        draws = rng.integers(0, spec.N, size=d)
        elems = list(draws) + [int(spec.neg(g)) for g in draws]
        if _generating(spec, elems):
            inst = abelian_cayley(spec, elems, state_cap=state_cap)
            return ChainInstance(inst.matrix, family="cayley-random",
                                 params={"factors": spec.factors, "d": d,
                                         "seed": seed,
                                         "draws": tuple(int(g) for g in draws)},
                                 transitive=True,
                                 curvature_claim=CLAIM_ABELIAN)
    raise GenerationFailed(f"no generating draw in {max_redraws} attempts")


def hypercube(d: int, laziness: float = 0.0,
              state_cap: int = STATE_CAP) -> ChainInstance:
    """Simple random walk on {0,1}^d, optionally alpha-lazy."""
    if d < 1:
        raise SpecParseError("hypercube needs d >= 1")
    if not (0.0 <= laziness < 1.0):
        raise SpecParseError("laziness must lie in [0,1)")
    spec = GroupSpec((2,) * d)
    _check_cap(spec.N, state_cap)
    basis = [int(spec.encode(np.eye(d, dtype=np.int64)[i])) for i in range(d)]
    inst = abelian_cayley(spec, basis, state_cap=state_cap)
    P = inst.matrix.entries
    if laziness > 0.0:
        P = laziness * np.eye(spec.N) + (1.0 - laziness) * P
    return ChainInstance(StochasticMatrix(P), family="hypercube",
                         params={"d": d, "lazy": laziness},
                         transitive=True, curvature_claim=CLAIM_ABELIAN)


def cycle(n: int, state_cap: int = STATE_CAP) -> ChainInstance:
    """Simple random walk on the n-cycle."""
    if n < 2:
        raise SpecParseError("cycle needs n >= 2")
    inst = abelian_cayley(GroupSpec((n,)), [1, -1], state_cap=state_cap)
    return ChainInstance(inst.matrix, family="cycle", params={"n": n},
                         transitive=True, curvature_claim=CLAIM_ABELIAN)


def complete_graph(n: int, state_cap: int = STATE_CAP) -> ChainInstance:
    """Simple random walk on K_n (a Cayley graph of Z_n)."""
    if n < 2:
        raise SpecParseError("complete graph needs n >= 2")
    inst = abelian_cayley(GroupSpec((n,)), list(range(1, n)),
                          state_cap=state_cap)
    return ChainInstance(inst.matrix, family="complete", params={"n": n},
                         transitive=True, curvature_claim=CLAIM_ABELIAN)


def birth_death(p, q, state_cap: int = STATE_CAP) -> ChainInstance:
    """Tridiagonal chain with reflecting boundaries.

    ``p[i]`` is the up-rate from state i, ``q[i]`` the down-rate from state
    i+1; the state count is len(p) + 1.  The non-negative curvature claim is
    made only for monotone chains (p[i] + q[i] <= 1 for interior states).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.ndim != 1 or p.shape != q.shape or len(p) < 1:
        raise SpecParseError("p and q must be equal-length nonempty vectors")
    if np.any(p <= 0) or np.any(q <= 0):
        raise SpecParseError("birth-death rates must be positive")
    n = len(p) + 1
    _check_cap(n, state_cap)
    P = np.zeros((n, n))
    for i in range(n - 1):
        P[i, i + 1] = p[i]
        P[i + 1, i] = q[i]
    holds = 1.0 - P.sum(axis=1)
    if np.any(holds < -1e-12):
        raise SpecParseError("rates exceed 1 at some state")
    P[np.arange(n), np.arange(n)] = np.clip(holds, 0.0, None)
    # Monotone coupling condition: up-rate from i plus down-rate from i+1
    # at most 1, i.e. P(i,.) is stochastically below P(i+1,.).
    monotone = bool(np.all(p + q <= 1.0 + 1e-12))
    return ChainInstance(StochasticMatrix(P), family="bd",
                         params={"p": tuple(p), "q": tuple(q)},
                         transitive=False,
                         curvature_claim=CLAIM_OTHER if monotone
                         else CLAIM_UNKNOWN)


def perturb_toward_uniform(inner, theta: float,
                           state_cap: int = STATE_CAP) -> ChainInstance:
    """Replace P with (1-theta) P + theta Pi, Pi having every row pi.

    Preserves pi exactly and inflates the sparsity parameter by roughly
    1/(theta min pi); used to demonstrate why the log Delta term in the
    cutoff criterion cannot be dropped.
    """
    if not (0.0 <= theta <= 1.0):
        raise SpecParseError("theta must lie in [0,1]")
    if isinstance(inner, ChainInstance):
        P, meta = inner.matrix, inner
    else:
        P, meta = inner, None
    pi = stationary(P).probs
    mixed = (1.0 - theta) * P.entries + theta * pi[None, :]
    uniform_pi = np.allclose(pi, 1.0 / P.n, atol=1e-12)
    transitive = bool(meta.transitive and uniform_pi) if meta else False
    claim = CLAIM_UNKNOWN
    if meta and meta.curvature_claim == CLAIM_ABELIAN and uniform_pi:
        claim = CLAIM_ABELIAN      # still an abelian-group walk
    return ChainInstance(StochasticMatrix(mixed), family="perturb",
                         params={"theta": theta,
                                 "inner": meta.family if meta else "matrix"},
                         transitive=transitive, curvature_claim=claim)


def _cycle_type(perm) -> tuple:
    seen = [False] * len(perm)
    lengths = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length > 1:
            lengths.append(length)
    return tuple(sorted(lengths))


def conjugacy_walk(k: int, cls="transpositions",
                   state_cap: int = STATE_CAP) -> ChainInstance:
    """Random walk on S_k with uniform step in a conjugacy class."""
    if k < 2 or k > 6:
        raise StateCapExceeded("conjugacy walk supports 2 <= k <= 6")
    if cls == "transpositions":
        target = (2,)
    else:
        try:
            target = tuple(sorted(int(v) for v in str(cls).split(",")))
        except ValueError as exc:
            raise SpecParseError(f"bad conjugacy class {cls!r}") from exc
        if any(v < 2 for v in target) or sum(target) > k:
            raise SpecParseError(f"cycle type {target} does not fit in S_{k}")
    perms = list(itertools.permutations(range(k)))
    _check_cap(len(perms), state_cap)
    index = {p: i for i, p in enumerate(perms)}
    steps = [p for p in perms if _cycle_type(p) == target]
    if not steps:
        raise SpecParseError(f"empty conjugacy class {target} in S_{k}")
    n = len(perms)
    P = np.zeros((n, n))
    w = 1.0 / len(steps)
    for i, sigma in enumerate(perms):
        for tau in steps:
            composed = tuple(tau[sigma[j]] for j in range(k))
            P[i, index[composed]] += w
    return ChainInstance(StochasticMatrix(P), family="sym",
                         params={"k": k, "class": target},
                         transitive=True, curvature_claim=CLAIM_OTHER)


# ---------------------------------------------------------------------------
# Family spec strings
# ---------------------------------------------------------------------------

def _kv(segment: str):
    if "=" not in segment:
        raise SpecParseError(f"expected key=value, got {segment!r}")
    key, value = segment.split("=", 1)
    return key.strip(), value.strip()


def parse_family_spec(text: str, state_cap: int = STATE_CAP) -> ChainInstance:
    """Build a ChainInstance from a spec string.

    Grammar: ``cayley:Z12xZ2:gens=1,-1,5,-5``,
    ``cayley-random:Z2^8:d=16:seed=42``, ``hypercube:d=8:lazy=0.0``,
    ``cycle:n=32``, ``complete:n=50``, ``bd:p=0.3,0.3;q=0.4,0.4``,
    ``perturb:theta=0.01:<inner spec>``, ``sym:k=4:class=transpositions``.
    """
    parts = text.strip().split(":")
    head = parts[0]
    try:
        if head == "cayley":
            if len(parts) < 3:
                raise SpecParseError("cayley needs group and gens")
            spec = GroupSpec.parse(parts[1])
            key, value = _kv(parts[2])
            if key != "gens":
                raise SpecParseError("cayley expects gens=...")
            gens = [int(v) for v in value.split(",")]
            return abelian_cayley(spec, gens, state_cap=state_cap)
        if head == "cayley-random":
            spec = GroupSpec.parse(parts[1])
            kv = dict(_kv(p) for p in parts[2:])
            return random_abelian_cayley(spec, int(kv["d"]),
                                         int(kv.get("seed", 0)),
                                         state_cap=state_cap)
        if head == "hypercube":
            kv = dict(_kv(p) for p in parts[1:])
            return hypercube(int(kv["d"]), float(kv.get("lazy", 0.0)),
                             state_cap=state_cap)
        if head == "cycle":
            kv = dict(_kv(p) for p in parts[1:])
            return cycle(int(kv["n"]), state_cap=state_cap)
        if head == "complete":
            kv = dict(_kv(p) for p in parts[1:])
            return complete_graph(int(kv["n"]), state_cap=state_cap)
        if head == "bd":
            if len(parts) != 2 or ";" not in parts[1]:
                raise SpecParseError("bd expects p=...;q=...")
            pseg, qseg = parts[1].split(";", 1)
            pk, pv = _kv(pseg)
            qk, qv = _kv(qseg)
            if (pk, qk) != ("p", "q"):
                raise SpecParseError("bd expects p=...;q=...")
            p = [float(v) for v in pv.split(",")]
            q = [float(v) for v in qv.split(",")]
            return birth_death(p, q, state_cap=state_cap)
        if head == "perturb":
            key, value = _kv(parts[1])
            if key not in ("theta", "θ"):
                raise SpecParseError("perturb expects theta=...")
            inner = parse_family_spec(":".join(parts[2:]), state_cap=state_cap)
            return perturb_toward_uniform(inner, float(value),
                                          state_cap=state_cap)
        if head == "sym":
            kv = dict(_kv(p) for p in parts[1:])
            return conjugacy_walk(int(kv["k"]),
                                  kv.get("class", "transpositions"),
                                  state_cap=state_cap)
    except (KeyError, ValueError, IndexError) as exc:
        raise SpecParseError(f"malformed spec {text!r}: {exc}") from exc
    raise SpecParseError(f"unknown family {head!r}")


def parse_family_range(text: str, state_cap: int = STATE_CAP):
    """Expand a spec containing one ``lo..hi`` (or ``lo..hi..step``) range.

    Yields (value, ChainInstance) pairs in increasing order.
    """
    marker = None
    for seg in text.split(":"):
        if ".." in seg and "=" in seg:
            marker = seg
            break
    if marker is None:
        raise SpecParseError(f"no range of the form key=lo..hi in {text!r}")
    key, value = _kv(marker)
    pieces = value.split("..")
    if len(pieces) == 2:
        lo, hi, step = int(pieces[0]), int(pieces[1]), 1
    elif len(pieces) == 3:
        lo, hi, step = int(pieces[0]), int(pieces[1]), int(pieces[2])
    else:
        raise SpecParseError(f"bad range {value!r}")
    if step < 1 or hi < lo:
        raise SpecParseError(f"bad range {value!r}")
    out = []
    for v in range(lo, hi + 1, step):
        spec = text.replace(marker, f"{key}={v}", 1)
        out.append((v, parse_family_spec(spec, state_cap=state_cap)))
    return out
