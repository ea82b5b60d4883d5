"""Generating functions, criticality, and zero-cost fluid trajectories.

For a degree distribution p with mean mu:

    G0(z) = sum_k p_k z^k,   G1(z) = sum_k k p_k z^{k-1} / mu,

criticality nu = sum_k k(k-1) p_k / mu.  When sum_k k(k-2) p_k > 0 a giant
component exists and rho is the unique fixed point G1(rho) = rho in [0, 1);
for sum_k k(k-2) p_k <= 0 the survival root is reported as the sentinel 1
("no giant"), which also makes the giant fraction 1 - G0(rho) vanish.

The zero-cost trajectory explores the graph at unit pace.  Subcritical:
zeta_k(t) = p_k f_1(t)^k with f_s the inverse of F_s(u) = G0(s) - G0(su).
Supercritical: zeta_k(t) = p_k (1 - 2t/mu)^{k/2} until tau = mu(1-rho^2)/2
(the giant is exhausted), then p_k rho^k f_rho(t - tau)^k.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DegreeDistribution
from .errors import DomainError
from .fluid import FluidPath

_MAX_ITER = 200


def gen_G0(p: DegreeDistribution, z: float) -> float:
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"G0 requires z in [0, 1], got {z}")
    return math.fsum(v * z ** k for k, v in p.weights.items())


def gen_G1(p: DegreeDistribution, z: float) -> float:
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"G1 requires z in [0, 1], got {z}")
    mu = p.mu
    return math.fsum(k * v * z ** (k - 1) for k, v in p.weights.items()) / mu


def criticality_nu(p: DegreeDistribution) -> float:
    """Mean forward degree nu = sum k(k-1) p_k / sum k p_k."""
    mu = p.mu
    if mu <= 0.0:
        raise DomainError("degenerate distribution: zero mean degree")
    return p.moment(2) / mu - 1.0


def _kk2(p: DegreeDistribution) -> float:
    return math.fsum(k * (k - 2) * v for k, v in p.weights.items())


def survival_rho(p: DegreeDistribution) -> float:
    """Fixed point G1(rho) = rho governing the giant component.

    Returns the sentinel 1.0 in the subcritical/critical regime (no giant),
    0.0 when p_1 = 0, and otherwise the unique root in (0, 1) by bisection.
    """
    if _kk2(p) <= 0.0:
        return 1.0
    if p.pk(1) == 0.0:
        return 0.0

    def h(z: float) -> float:
        return gen_G1(p, z) - z

    lo, hi = 0.0, 1.0 - 1e-9  # h(0) = p_1/mu > 0; h < 0 just below 1 when supercritical
    if h(hi) >= 0.0:
        hi = 1.0 - 1e-12
    for _ in range(_MAX_ITER):
        if hi - lo <= 1e-15:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def giant_fraction(p: DegreeDistribution) -> float:
    """Vertex fraction 1 - G0(rho) of the giant component (0 without one)."""
    return 1.0 - gen_G0(p, survival_rho(p))


def inverse_Fs(p: DegreeDistribution, s: float, t: float) -> float:
    """f_s(t): inverse of F_s(u) = G0(s) - G0(su) for t <= G0(s), else 0."""
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    g0s = gen_G0(p, s)
    if t <= 0.0:
        return 1.0
    if t >= g0s:
        return 0.0
    target = g0s - t  # solve G0(s u) = target, increasing in u
    lo, hi = 0.0, 1.0
    for _ in range(_MAX_ITER):
        if hi - lo <= 1e-15:
            break
        mid = 0.5 * (lo + hi)
        if gen_G0(p, s * mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refined_grid(T: float, grid_points: int, special: float | None) -> np.ndarray:
    """Uniform grid with x4 density in a window around ``special``."""
    base = np.linspace(0.0, T, grid_points)
    if special is None or not 0.0 < special < T:
        return base
    h = T / (grid_points - 1)
    w = 5.0 * h
    lo, hi = max(0.0, special - w), min(T, special + w)
    fine = np.arange(lo, hi + 0.25 * h * 0.5, 0.25 * h)
    grid = np.unique(np.concatenate([base, fine, [special]]))
    return grid


def _psi_from_zeta(grid: np.ndarray, p: DegreeDistribution, ks: np.ndarray,
                   zetak: np.ndarray, zeta0: np.ndarray) -> np.ndarray:
    """psi = -2 int_0^t r0(zeta) ds + sum_k (k-2)(p_k - zeta_k(t)); trapezoid."""
    pk = np.array([p.weights[int(k)] for k in ks])
    r = np.maximum(zeta0, 0.0) + zetak @ ks
    with np.errstate(invalid="ignore", divide="ignore"):
        r0 = np.where(r > 0.0, np.maximum(zeta0, 0.0) / np.where(r > 0.0, r, 1.0), 0.0)
    dt = np.diff(grid)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (r0[1:] + r0[:-1]) * dt)])
    series = (pk - zetak) @ (ks - 2.0)
    return -2.0 * integral + series


def lln_path(p: DegreeDistribution, T: float | None = None, grid_points: int = 1001,
             grid: np.ndarray | None = None) -> FluidPath:
    """The unique zero-cost fluid trajectory on [0, T], T >= mu/2.

    The returned path carries tau markers and summary scalars (mu, nu, rho,
    tau, giant fraction) in ``meta``.
    """
    mu = p.mu
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        T = float(grid[-1])
    if T is None:
        raise DomainError("either T or an explicit grid is required")
    if T < 0.5 * mu - 1e-12:
        raise DomainError(f"horizon T = {T} shorter than mu/2 = {0.5 * mu}")

    nu = criticality_nu(p)
    rho = survival_rho(p)
    supercritical = _kk2(p) > 0.0
    ks = np.array(p.degrees, dtype=float)
    pk = np.array([p.weights[int(k)] for k in ks])

    if supercritical:
        tau = 0.5 * mu * (1.0 - rho * rho)
        tau_zeta = tau + gen_G0(p, rho)
    else:
        tau = None
        tau_zeta = gen_G0(p, 1.0)

    if grid is None:
        grid = _refined_grid(T, grid_points, tau)

    n = len(grid)
    zetak = np.zeros((n, len(ks)))
    zeta0 = np.zeros(n)

    if not supercritical:
        f1 = np.array([inverse_Fs(p, 1.0, t) for t in grid])
        zetak[:] = pk[None, :] * f1[:, None] ** ks[None, :]
    else:
        before = grid <= tau
        x = np.sqrt(np.maximum(1.0 - 2.0 * grid[before] / mu, 0.0))
        zetak[before] = pk[None, :] * x[:, None] ** ks[None, :]
        g1x = np.array([gen_G1(p, xi) for xi in x])
        zeta0[before] = np.maximum(mu - 2.0 * grid[before] - mu * x * g1x, 0.0)
        after = ~before
        if np.any(after):
            frho = np.array([inverse_Fs(p, rho, t - tau) if rho > 0.0 else 0.0
                             for t in grid[after]])
            zetak[after] = pk[None, :] * (rho ** ks)[None, :] * frho[:, None] ** ks[None, :]

    psi = _psi_from_zeta(grid, p, ks, zetak, zeta0)
    markers = {"tau_zeta": tau_zeta}
    if tau is not None:
        markers["tau"] = tau
    meta = {
        "mu": mu,
        "nu": nu,
        "rho": rho,
        "tau": tau if tau is not None else 0.0,
        "giant_fraction": 1.0 - gen_G0(p, rho),
    }
    return FluidPath(grid=grid, degrees=p.degrees, zeta0=zeta0, zetak=zetak,
                     psi=psi, tau_markers=markers, meta=meta)
