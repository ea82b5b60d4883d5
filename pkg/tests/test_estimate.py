import math
import warnings

import numpy as np
import pytest

from cmld import (
    CounterRNG,
    DegreeDistribution,
    DegreeSequence,
    DomainError,
    EstimateResult,
    FitError,
    eea_run,
    estimate_event_prob,
    lln_check,
    rate_fit,
)
from cmld.estimate import _batch_hits, _event_windows, clopper_pearson


class TestEventProbability:
    def test_certain_event(self):
        res = estimate_event_prob((1, 1), {1: 1.0}, eps=0.1, reps=500, seed=3)
        assert res.p_hat == 1.0
        assert res.hits == 500
        assert res.ci_high == 1.0

    def test_impossible_event(self):
        res = estimate_event_prob((1, 1), {1: 0.25}, eps=0.1, reps=500, seed=3)
        assert res.p_hat == 0.0
        assert res.ci_low == 0.0
        assert math.isinf(res.per_n_rate)

    def test_zero_reps_rejected(self):
        with pytest.raises(DomainError):
            estimate_event_prob((1, 1), {1: 1.0}, eps=0.1, reps=0, seed=3)

    def test_worker_invariance(self):
        p = DegreeDistribution({3: 1.0})
        base = None
        for workers in (1, 4, 16):
            res = estimate_event_prob(p, {3: 0.5}, eps=0.25, reps=20000, seed=77,
                                      n=16, workers=workers, chunk_size=1024)
            if base is None:
                base = res
            else:
                assert res == base

    def test_chunking_invariance(self):
        p = DegreeDistribution({3: 1.0})
        a = estimate_event_prob(p, {3: 0.5}, eps=0.25, reps=5000, seed=8, n=12,
                                chunk_size=100)
        b = estimate_event_prob(p, {3: 0.5}, eps=0.25, reps=5000, seed=8, n=12,
                                chunk_size=4096)
        assert a == b

    def test_eps_monotonicity(self):
        p = DegreeDistribution({3: 1.0})
        prev = -1.0
        for eps in (0.05, 0.1, 0.2, 0.4):
            res = estimate_event_prob(p, {3: 0.5}, eps=eps, reps=4000, seed=55, n=12)
            assert res.p_hat >= prev
            prev = res.p_hat

    def test_matches_scalar_chain(self):
        d = DegreeSequence((1, 1, 1, 1, 2, 3, 3, 2, 1, 1, 3, 3))
        counts = d.counts()
        q = {3: 2 / 12}
        eps = 0.5 / 12
        lo, hi, ok = _event_windows(12, q, eps, tuple(sorted(counts)))
        assert ok
        vec = _batch_hits(counts, 0, 2000, 123, lo, hi)
        scalar = 0
        for r in range(2000):
            rec = eea_run(d, CounterRNG(123, r))
            for comp in rec.components:
                m = np.array([comp.degree_config.get(k, 0) for k in sorted(counts)])
                if np.all((m >= lo) & (m <= hi)):
                    scalar += 1
                    break
        assert vec == scalar

    def test_absent_degree_requires_small_q(self):
        # q puts mass on a degree not present in the graph: impossible unless q_k <= eps
        res = estimate_event_prob((3, 3, 3, 3), {2: 0.5}, eps=0.1, reps=100, seed=1)
        assert res.p_hat == 0.0

    def test_result_invariants(self):
        p = DegreeDistribution({3: 1.0})
        for eps in (0.05, 0.2, 0.5):
            res = estimate_event_prob(p, {3: 0.5}, eps=eps, reps=3000, seed=2, n=12)
            assert 0.0 <= res.ci_low <= res.p_hat <= res.ci_high <= 1.0
            assert res.hits <= res.reps

    def test_matches_independent_matching_sampler(self):
        # the lockstep engine's event probability agrees with a uniform-matching
        # sampler plus union-find components, sharing no code path
        from collections import Counter

        from cmld import sample_multigraph

        deg = (1, 1, 1, 2, 2, 3, 3, 3, 2, 1, 1, 2)
        d = DegreeSequence(deg)
        counts = d.counts()
        q = {3: 2 / 12, 2: 1 / 12}
        eps = 1.2 / 12
        lo, hi, ok = _event_windows(d.n, q, eps, tuple(sorted(counts)))
        assert ok
        reps = 30000
        p_engine = _batch_hits(counts, 0, reps, 5150, lo, hi) / reps

        def configs(edges):
            parent = list(range(d.n))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for u, v in edges:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
            groups = {}
            for i in range(d.n):
                groups.setdefault(find(i), []).append(deg[i])
            return [Counter(g) for g in groups.values()]

        ks = sorted(counts)
        hits = 0
        for s in range(reps):
            for cfg in configs(sample_multigraph(d, CounterRNG(999, s))):
                m = np.array([cfg.get(k, 0) for k in ks])
                if np.all((m >= lo) & (m <= hi)):
                    hits += 1
                    break
        p_match = hits / reps
        se = (math.sqrt(p_engine * (1 - p_engine) / reps)
              + math.sqrt(p_match * (1 - p_match) / reps))
        assert abs(p_engine - p_match) <= 4.0 * se


class TestConfidenceIntervals:
    def test_exact_interval_bounds(self):
        lo, hi = clopper_pearson(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05
        lo, hi = clopper_pearson(100, 100)
        assert hi == 1.0 and 0.95 < lo < 1.0

    def test_coverage_meta_trial(self):
        # 95% interval covers the truth in >= 93% of 1000 synthetic trials
        rng = np.random.default_rng(2718)
        p_true = 0.3
        reps = 200
        covered = 0
        for _ in range(1000):
            hits = int(rng.binomial(reps, p_true))
            lo, hi = clopper_pearson(hits, reps)
            covered += lo <= p_true <= hi
        assert covered >= 930


class TestRateFit:
    def _synthetic(self, c, b, ns):
        out = []
        for n in ns:
            p = math.exp(-c * n + b)
            out.append(EstimateResult(p_hat=p, ci_low=p, ci_high=p, reps=10,
                                      hits=1, n=n, seed=0, per_n_rate=-math.log(p) / n))
        return out

    def test_exact_exponential(self):
        slope, intercept = rate_fit(self._synthetic(0.35, 0.0, [10, 20, 30, 40]))
        assert slope == pytest.approx(0.35, abs=1e-12)
        assert intercept == pytest.approx(0.0, abs=1e-10)

    def test_exact_with_prefactor(self):
        slope, intercept = rate_fit(self._synthetic(0.2, 1.5, [8, 16, 24]))
        assert slope == pytest.approx(0.2, abs=1e-12)
        assert intercept == pytest.approx(-1.5, abs=1e-10)

    def test_zero_hits_excluded_with_warning(self):
        results = self._synthetic(0.3, 0.0, [10, 20, 30, 40])
        dead = EstimateResult(p_hat=0.0, ci_low=0.0, ci_high=0.1, reps=10, hits=0,
                              n=50, seed=0, per_n_rate=math.inf)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            slope, _ = rate_fit(results + [dead])
        assert any("no hits" in str(w.message) for w in caught)
        assert slope == pytest.approx(0.3, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            rate_fit(self._synthetic(0.3, 0.0, [10, 20]))


class TestLLNCheck:
    def test_pure_three_regular(self):
        p = DegreeDistribution({3: 1.0})
        largest, sup = lln_check(p, 10000, seed=11)
        assert largest > 0.98
        assert sup <= 0.05

    def test_subcritical_leaves(self):
        p = DegreeDistribution({1: 1.0})
        largest, sup = lln_check(p, 2000, seed=4)
        assert largest == pytest.approx(2.0 / 2000.0, abs=1e-12)

    def test_small_n_rejected(self):
        with pytest.raises(DomainError):
            lln_check(DegreeDistribution({3: 1.0}), 100, seed=0)
