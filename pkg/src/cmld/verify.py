"""Cross-consistency battery behind the ``verify`` command.

Each check exercises two independent routes to the same quantity
(quadrature vs closed form, profile rate vs segment cost, simulation vs
conservation law) and reports pass/fail with the observed discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    DegreeDistribution,
    SubProfile,
    rate_component_degree,
    rate_d_regular,
)
from .explore import DegreeSequence, eea_run
from .fluid import reflect
from .lln import giant_fraction, lln_path, survival_rho
from .paths import (
    StatePoint,
    cost_closed_form,
    make_segment_spec,
    minimizer_path,
    path_cost,
)
from .rng import CounterRNG


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_triple_agreement() -> CheckResult:
    target = 0.5 * math.log(2.0)
    a = rate_d_regular(3, 0.5)
    b = rate_component_degree(DegreeDistribution({3: 1.0}), {3: 0.5}).I1
    c = cost_closed_form(StatePoint(0.0, {3: 1.0}), StatePoint(0.0, {3: 0.5}))
    worst = max(abs(v - target) for v in (a, b, c))
    return CheckResult("triple agreement (regular rate)", worst <= 1e-9,
                       f"max |.-log(2)/2| = {worst:.3e}")


def _segment_battery(fast: bool) -> list[tuple[StatePoint, StatePoint]]:
    cases = [
        (StatePoint(0.0, {3: 1.0}), StatePoint(0.0, {3: 0.5})),
        (StatePoint(1.0, {3: 1.0}), StatePoint(0.5, {3: 0.5})),
        (StatePoint(0.0, {1: 0.5, 3: 0.5}), StatePoint(0.0, {1: 0.4, 3: 0.2})),
        (StatePoint(0.0, {4: 1.0}), StatePoint(0.0, {4: 0.25})),
    ]
    if not fast:
        rng = np.random.default_rng(20240817)
        while len(cases) < 12:
            ks = sorted(rng.choice(np.arange(1, 7), size=rng.integers(1, 4), replace=False))
            x1k = {int(k): float(rng.uniform(0.05, 0.6)) for k in ks}
            frac = rng.uniform(0.2, 0.9, size=len(ks))
            x2k = {k: v * f for (k, v), f in zip(x1k.items(), frac)}
            x10 = float(rng.uniform(0.0, 0.8))
            x20 = float(rng.uniform(0.0, x10)) if rng.uniform() < 0.5 else 0.0
            zk = {k: x1k[k] - x2k.get(k, 0.0) for k in x1k}
            edge = (x10 - x20) + sum(k * v for k, v in zk.items())
            if edge <= 2 * sum(zk.values()):  # pairs this sparse have no root
                continue
            cases.append((StatePoint(x10, x1k), StatePoint(x20, x2k)))
    return cases


def _check_quadrature(fast: bool) -> CheckResult:
    worst = 0.0
    for x1, x2 in _segment_battery(fast):
        spec = make_segment_spec(x1, x2)
        q = path_cost(minimizer_path(spec))
        cf = cost_closed_form(x1, x2)
        worst = max(worst, abs(q - cf))
    return CheckResult("quadrature vs closed form", worst <= 1e-6,
                       f"max |quad - closed| = {worst:.3e}")


def _check_profile_vs_segment() -> CheckResult:
    p = DegreeDistribution({1: 0.5, 3: 0.5})
    q = SubProfile({1: 0.1, 3: 0.3}, p)
    rb = rate_component_degree(p, q)
    cf = cost_closed_form(StatePoint(0.0, p.weights),
                          StatePoint(0.0, {1: 0.4, 3: 0.2}))
    err = abs(rb.I1 - cf)
    return CheckResult("profile rate vs segment cost", err <= 1e-12,
                       f"|I1 - cost| = {err:.3e}")


def _check_lln_zero_cost() -> CheckResult:
    p = DegreeDistribution({1: 0.5, 3: 0.5})
    fp = lln_path(p, T=1.2, grid_points=2001)
    tau = fp.tau_markers["tau"]
    t2 = float(fp.grid[fp.grid <= tau + 1e-12][-1])
    cost = path_cost(fp, 0.0, t2)
    return CheckResult("zero-cost fluid trajectory", cost <= 1e-5,
                       f"cost on [0, tau] = {cost:.3e}")


def _check_conservation(fast: bool) -> CheckResult:
    rng = np.random.default_rng(7)
    n_seq = 100 if fast else 1000
    for i in range(n_seq):
        n = int(rng.integers(2, 40))
        degs = rng.integers(1, 6, size=n)
        if degs.sum() % 2 == 1:
            degs[0] += 1
        d = DegreeSequence(tuple(int(x) for x in degs))
        rec = eea_run(d, CounterRNG(1234, i), record_trajectory=True)
        if rec.n_steps > d.m + d.n:
            return CheckResult("exploration conservation", False,
                               f"step bound violated on sequence {i}")
        A, V = rec.steps_A, rec.steps_V
        ks = np.array(rec.degrees)
        wake = (V[:-1] - V[1:]).sum(axis=1)
        kills = (A[1:] - A[:-1] == -2) & (wake == 0)
        if not np.all((wake == 1) | kills):
            return CheckResult("exploration conservation", False,
                               f"non-conservative step on sequence {i}")
        r = np.where(A > 0, A - 1, 0) + V @ ks
        if np.any(np.diff(r) > 0):
            return CheckResult("exploration conservation", False,
                               f"r increased on sequence {i}")
    return CheckResult("exploration conservation", True,
                       f"{n_seq} randomized degree sequences")


def _check_survival() -> CheckResult:
    p = DegreeDistribution({1: 0.5, 3: 0.5})
    errs = [abs(survival_rho(p) - 1.0 / 3.0), abs(giant_fraction(p) - 22.0 / 27.0)]
    return CheckResult("survival root and giant fraction", max(errs) <= 1e-10,
                       f"max err = {max(errs):.3e}")


def _check_reflection() -> CheckResult:
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        steps = rng.normal(size=200)
        psi = np.concatenate([[0.0], np.cumsum(steps)])
        g = reflect(psi)
        if np.any(g < 0.0):
            return CheckResult("reflection map", False, "negative reflected value")
        psi2 = np.concatenate([[0.0], np.cumsum(rng.normal(size=200))])
        lhs = np.max(np.abs(reflect(psi) - reflect(psi2)))
        rhs = 2.0 * np.max(np.abs(psi - psi2))
        worst = max(worst, lhs - rhs)
    return CheckResult("reflection map", worst <= 1e-12,
                       f"Lipschitz slack = {worst:.3e}")


def run_battery(fast: bool = False) -> list[CheckResult]:
    checks: list[Callable[[], CheckResult]] = [
        _check_triple_agreement,
        lambda: _check_quadrature(fast),
        _check_profile_vs_segment,
        _check_lln_zero_cost,
        lambda: _check_conservation(fast),
        _check_survival,
        _check_reflection,
    ]
    return [c() for c in checks]


def print_table(results: list[CheckResult]) -> bool:
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    return all_ok
