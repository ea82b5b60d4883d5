"""Static decay-rate formulas for component degree profiles.

All logarithms are natural and every rate is reported in nats per vertex.
Sign convention: functions return the nonnegative decay rate; the
corresponding large-n limit of (1/n) log P is the negative of the returned
value.  Conventions 0 log 0 = 0 and 0 log(x/0) = 0 hold throughout, while
x log(x/0) = +inf for x > 0.

The central objects are the entropy-like functional

    H(r) = sum_k r_k log r_k - (1/2 sum_k k r_k) log(1/2 sum_k k r_k),

the root beta(q) in [0,1) coupling edge and vertex budgets of a profile
with q_1 > 0, and the correction

    K(q) = (1/2 sum_k k q_k) log(1 - beta^2) - sum_k q_k log(1 - beta^k).

The rate for observing a component with degree profile q inside a graph
with degree distribution p is H(q) + H(p-q) - H(p) + K(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, FeasibilityError

PROB_TOL = 1e-12

BOUND_TWO_SIDED = "two_sided"
BOUND_LOWER_ONLY = "lower_only"

_BISECT_LO = 1e-15
_BISECT_HI = 1.0 - 1e-15
_BISECT_MAX_ITER = 200


def _clean_weights(weights: Mapping[int, float], what: str) -> dict[int, float]:
    out: dict[int, float] = {}
    for k, v in weights.items():
        kk = int(k)
        if kk < 1 or kk != float(k):
            raise DomainError(f"{what}: degree {k!r} is not a positive integer")
        v = float(v)
        if v < -PROB_TOL:
            raise DomainError(f"{what}: negative weight {v} at degree {kk}")
        if v > 0.0:
            out[kk] = v
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class DegreeDistribution:
    """Finite-support probability weights p_k on degrees k >= 1."""

    weights: dict[int, float]

    def __post_init__(self) -> None:
        w = _clean_weights(self.weights, "DegreeDistribution")
        total = math.fsum(w.values())
        if abs(total - 1.0) > PROB_TOL:
            raise DomainError(f"DegreeDistribution: weights sum to {total}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def max_degree(self) -> int:
        return max(self.weights)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(self.weights)

    def pk(self, k: int) -> float:
        return self.weights.get(k, 0.0)

    def moment(self, m: int) -> float:
        return math.fsum((k ** m) * v for k, v in self.weights.items())

    @property
    def mu(self) -> float:
        """Mean degree; twice the edge density."""
        return self.moment(1)


@dataclass(frozen=True)
class SubProfile:
    """A sub-distribution 0 <= q <= p of a reference degree distribution."""

    weights: dict[int, float]
    reference: DegreeDistribution

    def __post_init__(self) -> None:
        w = _clean_weights(self.weights, "SubProfile")
        for k, v in w.items():
            if v > self.reference.pk(k) + PROB_TOL:
                raise DomainError(
                    f"SubProfile violates q <= p: q_{k} = {v} > p_{k} = {self.reference.pk(k)}"
                )
        object.__setattr__(self, "weights", w)

    def qk(self, k: int) -> float:
        return self.weights.get(k, 0.0)

    @property
    def edge_mass(self) -> float:
        return math.fsum(k * v for k, v in self.weights.items())

    @property
    def vertex_mass(self) -> float:
        return math.fsum(self.weights.values())

    @property
    def feasible(self) -> bool:
        """Strictly more edge mass than twice the vertex mass."""
        return self.edge_mass > 2.0 * self.vertex_mass

    def complement(self) -> dict[int, float]:
        """p - q as a plain weight map."""
        out = {}
        for k, pk in self.reference.weights.items():
            d = pk - self.qk(k)
            if d > 0.0:
                out[k] = d
        return out


@dataclass(frozen=True)
class RateBreakdown:
    """Term-by-term decomposition of a component-profile decay rate (nats)."""

    beta: float
    H_q: float
    H_pq: float
    H_p: float
    K: float
    I1: float
    feasible: bool
    bound_kind: str  # BOUND_TWO_SIDED when p_1 = 0, else BOUND_LOWER_ONLY

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "H_q": self.H_q,
            "H_pq": self.H_pq,
            "H_p": self.H_p,
            "K": self.K,
            "rate": self.I1,
            "limit": -self.I1,
            "feasible": self.feasible,
            "bound_kind": self.bound_kind,
            "sign_convention": "rate >= 0; lim (1/n) log P = -rate",
        }


def _weights_of(r) -> dict[int, float]:
    if isinstance(r, (DegreeDistribution, SubProfile)):
        return r.weights
    return _clean_weights(r, "weights")


def ell(x: float) -> float:
    """Pointwise Poisson cost x log x - x + 1, with 0 log 0 = 0."""
    if x < 0.0:
        raise DomainError(f"ell: negative argument {x}")
    if x == 0.0:
        return 1.0
    return x * math.log(x) - x + 1.0


def entropy_H(r) -> float:
    """H(r) = sum r_k log r_k - s log s with s = (1/2) sum k r_k."""
    w = _weights_of(r)
    if not w:
        return 0.0
    s = 0.5 * math.fsum(k * v for k, v in w.items())
    terms = [v * math.log(v) for v in w.values() if v > 0.0]
    if s > 0.0:
        terms.append(-s * math.log(s))
    return math.fsum(terms)


def _f_root_fn(q: Mapping[int, float]):
    """F(alpha) = sum_{k>=3} F_k(alpha) k q_k - q_1, strictly increasing."""
    q1 = q.get(1, 0.0)
    hi = [(k, k * v) for k, v in q.items() if k >= 3 and v > 0.0]

    def F(alpha: float) -> float:
        acc = -q1
        for k, kv in hi:
            acc += kv * (alpha - alpha ** (k - 1)) / (1.0 - alpha ** k)
        return acc

    return F


def _bisect_increasing(f, lo: float, hi: float) -> float:
    """Root of an increasing function by bisection.

    Runs to interval width 1e-15 (at most 200 iterations), which leaves the
    residual well inside the documented 1e-12.
    """
    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise FeasibilityError(f"bisection bracket invalid: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= 1e-15:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def beta_of_q(q) -> float:
    """The unique root beta(q) in [0,1); zero when q_1 = 0.

    Requires q_1 = 0 or strictly more edge mass than twice the vertex mass.
    """
    w = _weights_of(q)
    if w.get(1, 0.0) == 0.0:
        return 0.0
    edge = math.fsum(k * v for k, v in w.items())
    vert = math.fsum(w.values())
    if not edge > 2.0 * vert:
        raise FeasibilityError(
            f"profile with q_1 > 0 violates sum k q_k > 2 sum q_k ({edge} <= {2.0 * vert})"
        )
    return _bisect_increasing(_f_root_fn(w), _BISECT_LO, _BISECT_HI)


def K_of_q(q) -> float:
    """Correction K(q); exactly zero when q_1 = 0."""
    w = _weights_of(q)
    if w.get(1, 0.0) == 0.0:
        return 0.0
    beta = beta_of_q(w)
    s = 0.5 * math.fsum(k * v for k, v in w.items())
    out = s * math.log1p(-beta * beta)
    out -= math.fsum(v * math.log1p(-beta ** k) for k, v in w.items())
    return out


def rate_component_degree(p: DegreeDistribution, q) -> RateBreakdown:
    """Decay rate for a component with degree profile close to n*q."""
    sub = q if isinstance(q, SubProfile) else SubProfile(_weights_of(q), p)
    if sub.reference is not p and sub.reference.weights != p.weights:
        raise DomainError("SubProfile reference does not match p")
    if not sub.feasible:
        raise FeasibilityError(
            "profile violates sum k q_k > 2 sum q_k "
            f"({sub.edge_mass} <= {2.0 * sub.vertex_mass})"
        )
    beta = beta_of_q(sub)
    K = K_of_q(sub)
    H_q = entropy_H(sub)
    H_pq = entropy_H(sub.complement())
    H_p = entropy_H(p)
    I1 = H_q + H_pq - H_p + K
    kind = BOUND_TWO_SIDED if p.pk(1) == 0.0 else BOUND_LOWER_ONLY
    return RateBreakdown(beta, H_q, H_pq, H_p, K, I1, sub.feasible, kind)


def _binary_entropy_pair(qD: float) -> tuple[float, float]:
    # canonicalize through the larger element: 1 - big is exact for big in
    # [0.5, 1], so (D, q) and (D, 1-q) see bit-identical inputs
    big = max(qD, 1.0 - qD)
    small = 1.0 - big
    return small, big


def rate_d_regular(D: int, qD: float) -> float:
    """Rate for a component of size about n*qD in a D-regular graph.

    Equals (1 - D/2)(qD log qD + (1-qD) log(1-qD)) >= 0 and is symmetric
    under qD <-> 1 - qD.
    """
    if D < 3:
        raise DomainError(f"D-regular rate requires D >= 3, got {D}")
    if not 0.0 < qD <= 1.0:
        raise DomainError(f"qD must lie in (0, 1], got {qD}")
    small, big = _binary_entropy_pair(qD)
    ent = big * math.log(big)
    if small > 0.0:
        ent += small * math.log(small)
    return (1.0 - 0.5 * D) * ent


def rate_d_regular_subgraph(p: DegreeDistribution, D: int, qD: float) -> float:
    """Rate for a D-regular component of size about n*qD under general p with p_1 = 0."""
    if p.pk(1) > 0.0:
        raise FeasibilityError("D-regular-subgraph rate requires p_1 = 0")
    if D < 3:
        raise DomainError(f"D >= 3 required, got {D}")
    pD = p.pk(D)
    if pD <= 0.0:
        raise DomainError(f"p_{D} must be positive")
    if not 0.0 < qD <= pD + PROB_TOL:
        raise DomainError(f"qD must lie in (0, p_{D}] = (0, {pD}], got {qD}")
    qD = min(qD, pD)
    mu = p.mu

    def xlogx(x: float) -> float:
        return x * math.log(x) if x > 0.0 else 0.0

    vertex_part = xlogx(qD) + xlogx(pD - qD) - xlogx(pD)
    edge_part = xlogx(0.5 * D * qD) + xlogx(0.5 * (mu - D * qD)) - xlogx(0.5 * mu)
    return vertex_part - edge_part


def rate_conjectured_largest(D: int, x: float) -> float:
    """Conjectured rate for the largest component to have size about n*x.

    Output is conjectural and is flagged as such wherever it is emitted.
    """
    if D < 3:
        raise DomainError(f"D >= 3 required, got {D}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    k = math.floor(1.0 / x)
    xk = min(x * k, 1.0)
    ent = xk * math.log(x)
    if xk < 1.0:
        ent += (1.0 - xk) * math.log(1.0 - xk)
    return (1.0 - 0.5 * D) * ent


def rate_conjectured_multi(D: int, sizes: Iterable[float]) -> float:
    """Conjectured rate for simultaneous components of the given size fractions
    in a D-regular graph.  Conjectural; flagged in emitted output."""
    if D < 3:
        raise DomainError(f"D >= 3 required, got {D}")
    qs = [float(s) for s in sizes]
    if any(not 0.0 < s <= 1.0 for s in qs):
        raise DomainError("component size fractions must lie in (0, 1]")
    rest = 1.0 - math.fsum(qs)
    if rest < -PROB_TOL:
        raise FeasibilityError("component size fractions sum to more than 1")
    qs.append(max(rest, 0.0))
    ent = math.fsum(s * math.log(s) for s in qs if s > 0.0)
    return (1.0 - 0.5 * D) * ent


def _size_objective(qvec: np.ndarray, pvec: np.ndarray, ks: np.ndarray, H_p: float) -> float:
    q = {int(k): float(v) for k, v in zip(ks, qvec) if v > 0.0}
    pq = {int(k): float(pk - v) for k, pk, v in zip(ks, pvec, qvec) if pk - v > 0.0}
    return entropy_H(q) + entropy_H(pq) - H_p


def _coordinate_descent(q0: np.ndarray, pvec: np.ndarray, ks: np.ndarray, H_p: float) -> tuple[np.ndarray, float]:
    from scipy.optimize import minimize_scalar

    q = q0.copy()
    best = _size_objective(q, pvec, ks, H_p)
    n = len(q)
    for _ in range(200):
        improved = False
        for i in range(n):
            for j in range(i + 1, n):
                lo = max(-q[i], q[j] - pvec[j])
                hi = min(pvec[i] - q[i], q[j])
                if hi - lo < 1e-14:
                    continue

                def along(d: float, i=i, j=j) -> float:
                    trial = q.copy()
                    trial[i] += d
                    trial[j] -= d
                    np.clip(trial, 0.0, pvec, out=trial)
                    return _size_objective(trial, pvec, ks, H_p)

                res = minimize_scalar(along, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-12})
                if res.fun < best - 1e-14:
                    q[i] += res.x
                    q[j] -= res.x
                    np.clip(q, 0.0, pvec, out=q)
                    best = res.fun
                    improved = True
        if not improved:
            break
    return q, best


def _size_grid_check(pvec: np.ndarray, ks: np.ndarray, r: float, H_p: float,
                     step: float = 1e-4) -> tuple[np.ndarray, float] | None:
    """Grid scan of the constraint slice for supports of size <= 3."""
    n = len(ks)
    if n == 1:
        q = np.array([r])
        return q, _size_objective(q, pvec, ks, H_p)
    if n == 2:
        lo = max(0.0, r - pvec[1])
        hi = min(pvec[0], r)
        m = max(2, int(round((hi - lo) / step)) + 1)
        q0 = np.linspace(lo, hi, m)
        vals = [ _size_objective(np.array([a, r - a]), pvec, ks, H_p) for a in q0 ]
        i = int(np.argmin(vals))
        return np.array([q0[i], r - q0[i]]), vals[i]
    if n == 3:
        # coarse 2-D scan, then local refinement at the requested step
        best = None
        for coarse, centre in ((1e-3, None), (step, "refine")):
            if centre is None:
                a_lo, a_hi = 0.0, pvec[0]
                b_lo, b_hi = 0.0, pvec[1]
            else:
                a_c, b_c = best[0][0], best[0][1]
                a_lo, a_hi = max(0.0, a_c - 2e-3), min(pvec[0], a_c + 2e-3)
                b_lo, b_hi = max(0.0, b_c - 2e-3), min(pvec[1], b_c + 2e-3)
            na = max(2, int(round((a_hi - a_lo) / coarse)) + 1)
            nb = max(2, int(round((b_hi - b_lo) / coarse)) + 1)
            for a in np.linspace(a_lo, a_hi, na):
                rem = r - a
                for b in np.linspace(b_lo, b_hi, nb):
                    c = rem - b
                    if c < -1e-12 or c > pvec[2] + 1e-12:
                        continue
                    q = np.array([a, b, min(max(c, 0.0), pvec[2])])
                    v = _size_objective(q, pvec, ks, H_p)
                    if best is None or v < best[1]:
                        best = (q, v)
        return best
    return None


def rate_component_size(p: DegreeDistribution, r: float,
                        restarts: int = 5, seed: int = 0) -> tuple[float, dict[int, float]]:
    """Minimal rate over profiles q with vertex mass r; requires p_1 = p_2 = 0.

    Returns the positive rate and the minimizing profile.  The minimum of
    H(q) + H(p-q) - H(p) is found by pairwise coordinate descent with random
    feasible restarts and validated against a grid scan on small supports.
    """
    if p.pk(1) > 0.0 or p.pk(2) > 0.0:
        raise DomainError("component-size rate requires p_1 = p_2 = 0")
    if not 0.0 < r <= 1.0 + PROB_TOL:
        raise DomainError(f"size fraction r must lie in (0, 1], got {r}")
    total = math.fsum(p.weights.values())
    if r > total + PROB_TOL:
        raise FeasibilityError(f"no feasible q: r = {r} exceeds sum p_k = {total}")
    r = min(r, total)

    ks = np.array(p.degrees, dtype=float)
    pvec = np.array([p.weights[int(k)] for k in ks])
    H_p = entropy_H(p)

    candidates = [r * pvec / total]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        w = rng.uniform(size=len(ks)) * pvec
        s = w.sum()
        guess = np.minimum(w * (r / s) if s > 0 else pvec * (r / total), pvec)
        # water-fill any mass clipped off by the box constraint
        for _ in range(50):
            deficit = r - guess.sum()
            if abs(deficit) < 1e-15:
                break
            room = pvec - guess if deficit > 0 else guess
            tot_room = room.sum()
            if tot_room <= 0:
                break
            guess = np.clip(guess + deficit * room / tot_room, 0.0, pvec)
        candidates.append(guess)

    best_q, best_val = None, math.inf
    for q0 in candidates:
        q, val = _coordinate_descent(np.asarray(q0, dtype=float), pvec, ks, H_p)
        if val < best_val:
            best_q, best_val = q, val

    if len(ks) <= 3:
        grid = _size_grid_check(pvec, ks, r, H_p)
        if grid is not None and grid[1] < best_val:
            best_q, best_val = grid

    argmin = {int(k): float(v) for k, v in zip(ks, best_q) if v > 1e-15}
    return best_val, argmin
