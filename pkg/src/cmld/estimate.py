"""Parallel Monte Carlo estimation of rare component events.

The target event: some component's degree configuration (m_k) satisfies
n(q_k - eps) <= m_k <= n(q_k + eps) for every degree k simultaneously
(degrees absent from the graph contribute m_k = 0 and therefore require
q_k <= eps).  Replications are exploration-chain runs; replication r draws
from the stream keyed by (master_seed, r), so the estimate is a pure
function of (input, seed, reps) and is bitwise identical for any worker
count or shard schedule.  Hits accumulate as integers, so summation order
cannot matter.

The inner loop is a lockstep-vectorized version of
:func:`cmld.explore.eea_run` over blocks of replications; it reproduces
the scalar chain decision-for-decision because both consume the uniform of
step j from the same counter position.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DegreeDistribution, SubProfile
from .errors import DomainError, FitError
from .explore import DegreeSequence, eea_run, empirical_path, extract_components
from .lln import lln_path
from .rng import CounterRNG, counter_uniforms, stream_keys

_DEFAULT_CHUNK = 1 << 18


@dataclass(frozen=True)
class EstimateResult:
    """Event-probability estimate with an exact binomial interval."""

    p_hat: float
    ci_low: float
    ci_high: float
    reps: int
    hits: int
    n: int
    seed: int
    per_n_rate: float  # -log(p_hat)/n, +inf when no hits

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "reps": self.reps,
            "hits": self.hits,
            "seed": self.seed,
            "per_n_rate": self.per_n_rate if math.isfinite(self.per_n_rate) else None,
        }


def clopper_pearson(hits: int, reps: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval."""
    from scipy.stats import beta as beta_dist

    alpha = 1.0 - level
    lo = 0.0 if hits == 0 else float(beta_dist.ppf(alpha / 2.0, hits, reps - hits + 1))
    hi = 1.0 if hits == reps else float(beta_dist.ppf(1.0 - alpha / 2.0, hits + 1, reps - hits))
    return lo, hi


def _event_windows(n: int, q: dict[int, float], eps: float,
                   graph_degrees: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray, bool]:
    """Per-degree inclusive count windows over the graph's degree columns.

    Returns (lo, hi, possible); ``possible`` is False when a degree carrying
    q-mass does not occur in the graph and q_k > eps.
    """
    lo = np.array([n * (q.get(k, 0.0) - eps) for k in graph_degrees])
    hi = np.array([n * (q.get(k, 0.0) + eps) for k in graph_degrees])
    possible = all(q[k] <= eps for k in q if k not in graph_degrees)
    return lo, hi, possible


def _batch_hits(counts: dict[int, int], rep_lo: int, rep_hi: int, seed: int,
                lo: np.ndarray, hi: np.ndarray) -> int:
    """Event hits among replications [rep_lo, rep_hi), lockstep-vectorized."""
    degs = np.array(sorted(counts), dtype=np.int64)
    D = len(degs)
    R = rep_hi - rep_lo
    n = sum(counts.values())
    m = sum(k * c for k, c in counts.items()) // 2

    V = np.tile(np.array([counts[int(k)] for k in degs], dtype=np.int64), (R, 1))
    A = np.zeros(R, dtype=np.int64)
    s = np.full(R, sum(k * c for k, c in counts.items()), dtype=np.int64)
    cur = np.zeros((R, D), dtype=np.int64)
    hit = np.zeros(R, dtype=bool)
    keys = stream_keys(seed, np.arange(rep_lo, rep_hi, dtype=np.uint64))
    rows = np.arange(R)

    for j in range(m + n):
        killw = np.maximum(A - 1, 0)
        denom = s + killw
        active = denom > 0
        if not active.any():
            break
        u = counter_uniforms(keys, j)
        x = u * denom
        kills = active & (x < killw)
        wakes = active & ~kills

        y = x - killw
        cum = np.cumsum(degs[None, :] * V, axis=1)
        b = np.sum(cum <= y[:, None], axis=1)
        over = wakes & (b >= D)
        if over.any():  # u within one ulp of 1: take the largest nonempty bucket
            for r in np.nonzero(over)[0]:
                b[r] = int(np.max(np.nonzero(V[r] > 0)[0]))
        b = np.minimum(b, D - 1)

        woken = degs[b]
        A_new = np.where(kills, A - 2,
                         np.where(wakes, np.where(A > 0, A + woken - 2, woken), A))
        wr = rows[wakes]
        V[wr, b[wakes]] -= 1
        cur[wr, b[wakes]] += 1
        s = s - np.where(wakes, woken, 0)

        closed = active & (A > 0) & (A_new == 0)
        if closed.any():
            ok = np.all((cur[closed] >= lo) & (cur[closed] <= hi), axis=1)
            hit[np.nonzero(closed)[0][ok]] = True
            cur[closed] = 0
        A = A_new
    return int(hit.sum())


def _resolve_input(p_or_d, n: int | None) -> tuple[DegreeSequence, dict[int, int]]:
    if isinstance(p_or_d, DegreeDistribution):
        if n is None:
            raise DomainError("n is required when estimating from a distribution")
        d = DegreeSequence.from_distribution(p_or_d, n)
    elif isinstance(p_or_d, DegreeSequence):
        d = p_or_d
    else:
        d = DegreeSequence(tuple(int(x) for x in p_or_d))
    return d, d.counts()


def estimate_event_prob(p_or_d, q, eps: float, reps: int, seed: int,
                        n: int | None = None, workers: int = 1,
                        chunk_size: int = _DEFAULT_CHUNK) -> EstimateResult:
    """Probability that some component's degree configuration is eps-close to n*q."""
    if reps <= 0:
        raise DomainError(f"reps must be positive, got {reps}")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    d, counts = _resolve_input(p_or_d, n)
    n_actual = d.n
    qw = q.weights if isinstance(q, SubProfile) else {int(k): float(v) for k, v in q.items()}

    lo, hi, possible = _event_windows(n_actual, qw, eps, tuple(sorted(counts)))
    hits = 0
    if possible:
        shards = [(a, min(a + chunk_size, reps)) for a in range(0, reps, chunk_size)]
        if workers <= 1 or len(shards) == 1:
            for a, b in shards:
                hits += _batch_hits(counts, a, b, seed, lo, hi)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_batch_hits, counts, a, b, seed, lo, hi)
                        for a, b in shards]
                hits = sum(f.result() for f in futs)

    p_hat = hits / reps
    ci_lo, ci_hi = clopper_pearson(hits, reps)
    rate = -math.log(p_hat) / n_actual if p_hat > 0.0 else math.inf
    return EstimateResult(p_hat=p_hat, ci_low=ci_lo, ci_high=ci_hi, reps=reps,
                          hits=hits, n=n_actual, seed=seed, per_n_rate=rate)


def rate_fit(results: list[EstimateResult]) -> tuple[float, float]:
    """Least-squares fit of -log p_hat against n; the slope is the decay rate."""
    usable = []
    for r in results:
        if r.hits == 0:
            warnings.warn(f"excluding n = {r.n}: no hits", stacklevel=2)
            continue
        usable.append(r)
    if len(usable) < 3:
        raise FitError(f"need >= 3 points with hits, have {len(usable)}")
    x = np.array([r.n for r in usable], dtype=float)
    y = np.array([-math.log(r.p_hat) for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def lln_check(p: DegreeDistribution, n: int, seed: int,
              grid_points: int = 401) -> tuple[float, float]:
    """One trajectory-recorded run against the zero-cost fluid limit.

    Returns (largest component vertex fraction, sup over the grid and over
    degrees k <= max_degree of |empirical zeta_k - fluid zeta_k|).
    """
    if n < 1000:
        raise DomainError(f"n >= 1000 required for a meaningful check, got {n}")
    d = DegreeSequence.from_distribution(p, n)
    rec = eea_run(d, CounterRNG(seed, 0), record_trajectory=True)
    largest, _, _ = extract_components(rec)

    T = max(rec.n_steps / d.n, 0.5 * p.mu + 1e-9)
    grid = np.linspace(0.0, T, grid_points)
    emp = empirical_path(rec, d.n, grid)
    fluid = lln_path(p, grid=grid)
    sup = 0.0
    for k in range(0, p.max_degree + 1):
        sup = max(sup, float(np.max(np.abs(emp.zeta(k) - fluid.zeta(k)))))
    return largest, sup
