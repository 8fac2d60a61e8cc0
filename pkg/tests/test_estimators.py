"""Tests des estimateurs Monte Carlo et des verdicts.

Graines fixes, peu de répliques ; les comparaisons à un oracle se font à
au moins 4 écarts-types.
"""

import math

import numpy as np
import pytest

from app.engine import _stat_helpers as sh
from app.engine.env_dynamics import IntegratorConfig
from app.engine.errors import (
    DegenerateEstimateError,
    InsufficientReplicasError,
    InsufficientSignalError,
    InvalidInputError,
    QueryError,
)
from app.engine.estimators import (
    Estimate,
    LipschitzSpec,
    Verdict,
    burn_in_time,
    corollary_bound_check,
    corollary_cross_check,
    decay_rate_fit,
    estimate_cov,
    estimate_diag_cov_avg,
    estimate_walker_prob,
    fkg_check,
    lemma_equality_check,
    negative_correlation_check,
    simulate_replicas,
    theorem_sandwich,
)
from app.engine.exact_oracle import cycle_gap_formula, heat_kernel, negcorr_oracle, pair_gap
from app.engine.graph_core import build_cycle
from app.engine.potentials import GibbsSpec, gaussian, quadratic_pair, smoothed_gaussian


def _cfg(times=(0.5,), dt=0.01, seed=42):
    return IntegratorConfig.for_times(dt, times, seed)


GAUSS = GibbsSpec(build_cycle(8), gaussian())
SMOOTH = GibbsSpec(build_cycle(8), smoothed_gaussian(1.0))


# ─────────────────────────────────────────────────────────────────────────────
# Primitives statistiques
# ─────────────────────────────────────────────────────────────────────────────
def test_batch_means_constant():
    bm = sh.batch_means(np.full(100, 2.5))
    assert bm.mean == 2.5
    assert bm.stderr == 0.0
    assert bm.n == 100
    assert bm.n_batches == 10


def test_batch_means_iid_stderr():
    v = np.random.default_rng(0).normal(size=10000)
    bm = sh.batch_means(v)
    assert bm.stderr == pytest.approx(0.01, rel=0.3)


def test_batch_means_too_few():
    with pytest.raises(InsufficientReplicasError):
        sh.batch_means([1.0])


def test_centered_products():
    out = sh.centered_products([1.0, 3.0], [2.0, 4.0])
    assert list(out) == [1.0, 1.0]


def test_binomial_stderr():
    bm = sh.binomial_stderr([1, 0, 1, 0])
    assert bm.mean == 0.5
    assert bm.stderr == pytest.approx(0.25)


def test_sigma_margin():
    assert sh.sigma_margin(1.0, 0.5) == 2.0
    assert sh.sigma_margin(0.0, 0.0) == math.inf
    assert sh.sigma_margin(-1.0, 0.0) == -math.inf


# ─────────────────────────────────────────────────────────────────────────────
# Types
# ─────────────────────────────────────────────────────────────────────────────
def test_estimate_validation():
    with pytest.raises(DegenerateEstimateError):
        Estimate(0.0, -1.0, 100, "cov_mass", 0.0, 0, 0)
    with pytest.raises(InsufficientReplicasError):
        Estimate(0.0, 0.1, 1, "cov_mass", 0.0, 0, 0)


def test_verdict_to_dict():
    est = Estimate(0.1, 0.01, 100, "cov_mass", 0.5, 0, 1, oracle=0.12)
    d = Verdict("theorem", True, 1.5, {"cov": est, "sigma": 0.01}, "equality").to_dict()
    assert d["claim"] == "theorem"
    assert d["pass"] is True
    assert d["tag"] == "equality"
    assert d["inputs"]["cov"]["oracle"] == 0.12
    assert d["inputs"]["sigma"] == 0.01


def test_lipschitz_spec():
    f = LipschitzSpec.from_dict({0: 1.0, 3: 0.5, 5: 0.0})
    assert f.support == [0, 3]
    assert f.is_increasing
    assert f.norm(GAUSS) == pytest.approx(1.5)
    eta = np.arange(8.0)
    assert f.value(eta, GAUSS) == pytest.approx(0.0 + 1.5)


def test_lipschitz_vprime_scales_with_curvature():
    f = LipschitzSpec.from_dict({0: 1.0}, kind="vprime")
    assert f.norm(SMOOTH) == pytest.approx(2.0)


def test_lipschitz_decreasing_and_unknown_kind():
    assert not LipschitzSpec.from_dict({0: -1.0}).is_increasing
    with pytest.raises(InvalidInputError):
        LipschitzSpec.from_dict({0: 1.0}, kind="cubic")


# ─────────────────────────────────────────────────────────────────────────────
# Simulation des répliques
# ─────────────────────────────────────────────────────────────────────────────
def test_simulate_replicas_minimum():
    with pytest.raises(InsufficientReplicasError):
        simulate_replicas(GAUSS, _cfg(), 50)


def test_simulate_replicas_worker_invariance():
    cfg = _cfg((0.0, 0.2))
    a = simulate_replicas(SMOOTH, cfg, 300, starts=[0, 2], batch_size=64, workers=1)
    b = simulate_replicas(SMOOTH, cfg, 300, starts=[0, 2], batch_size=64, workers=3)
    assert np.array_equal(a.init, b.init)
    assert all(np.array_equal(x, y) for x, y in zip(a.snapshots, b.snapshots))
    assert all(np.array_equal(x, y) for x, y in zip(a.positions, b.positions))


def test_replica_set_queries():
    rs = simulate_replicas(GAUSS, _cfg((0.0, 0.2)), 200, starts=[1])
    assert rs.n_replicas == 200
    assert np.array_equal(rs.env_at(0.0), rs.init)
    assert np.all(rs.hits(0.0, 1, 1) == 1)
    with pytest.raises(QueryError):
        rs.env_at(0.3)
    with pytest.raises(QueryError):
        rs.hits(0.2, 1, 4)


# ─────────────────────────────────────────────────────────────────────────────
# Estimations
# ─────────────────────────────────────────────────────────────────────────────
def test_estimate_cov_gaussian_oracle():
    est = estimate_cov(GAUSS, _cfg(seed=1), 0, 1, 0.5, 20000)
    assert est.oracle == pytest.approx(heat_kernel(GAUSS.graph, 0.5)[0, 1])
    assert est.replicas == 20000
    assert abs(est.value - est.oracle) <= 5 * est.stderr


def test_estimate_cov_smoothed_has_no_oracle():
    est = estimate_cov(SMOOTH, _cfg(seed=1), 0, 0, 0.5, 2000)
    assert est.oracle is None
    assert est.value > 0


def test_estimate_cov_unknown_observable():
    with pytest.raises(InvalidInputError):
        estimate_cov(GAUSS, _cfg(), 0, 1, 0.5, 200, observable_tag="cube")


def test_estimate_walker_prob_gaussian_oracle():
    est = estimate_walker_prob(GAUSS, _cfg(seed=2), 0, 0, 0.5, 20000)
    assert abs(est.value - est.oracle) <= 5 * est.stderr


def test_estimate_diag_cov_avg_gaussian():
    est = estimate_diag_cov_avg(GAUSS, _cfg(seed=3), 0.5, 20000)
    assert abs(est.value - est.oracle) <= 5 * est.stderr


def test_estimate_cov_reversibility():
    rs = simulate_replicas(SMOOTH, _cfg(seed=11), 10000)
    a = estimate_cov(SMOOTH, _cfg(seed=11), 0, 2, 0.5, 10000, replicas=rs)
    b = estimate_cov(SMOOTH, _cfg(seed=11), 2, 0, 0.5, 10000, replicas=rs)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.stderr, b.stderr)


def test_walker_prob_partition_of_unity():
    cfg = _cfg(seed=12)
    rs = simulate_replicas(SMOOTH, cfg, 2000, starts=[0])
    assert np.all(sum(rs.hits(0.5, y, 0) for y in range(8)) == 1)
    total = sum(estimate_walker_prob(SMOOTH, cfg, 0, y, 0.5, 2000, replicas=rs).value
                for y in range(8))
    assert total == pytest.approx(1.0, abs=1e-12)


# ─────────────────────────────────────────────────────────────────────────────
# Verdicts
# ─────────────────────────────────────────────────────────────────────────────
def test_theorem_gaussian_equality():
    v = theorem_sandwich(GAUSS, _cfg(seed=4), 0, 1, 0.5, 20000)
    assert v.theorem_tag == "equality"
    assert v.margin_in_sigmas > -2.0
    assert v.inputs["lower_bound"] == v.inputs["upper_bound"]


def test_theorem_smoothed_sandwich():
    v = theorem_sandwich(SMOOTH, _cfg(seed=5), 0, 0, 0.5, 10000)
    assert v.theorem_tag == "sandwich"
    assert v.inputs["lower_bound"] < v.inputs["upper_bound"]
    assert v.margin_in_sigmas > -2.0


def test_theorem_rejects_pair_potential():
    spec = GibbsSpec(build_cycle(8), gaussian(), quadratic_pair(0.5))
    with pytest.raises(InvalidInputError):
        theorem_sandwich(spec, _cfg(), 0, 1, 0.5, 200)


def test_lemma_equality_smoothed():
    spec = GibbsSpec(build_cycle(8), smoothed_gaussian(2.0))
    v = lemma_equality_check(spec, _cfg(dt=0.005, seed=6), 0, 1, 0.5, 10000)
    assert v.claim_tag == "lemma-equality"
    assert v.margin_in_sigmas > -2.0


def test_fkg_increasing_functions():
    f = LipschitzSpec.from_dict({0: 1.0, 1: 0.5})
    g = LipschitzSpec.from_dict({1: 1.0}, kind="tanh")
    v = fkg_check(SMOOTH, _cfg(seed=7), f, g, 0.5, 4000)
    assert v.passed
    assert v.inputs["cov"].value > 0


def test_fkg_requires_increasing():
    f = LipschitzSpec.from_dict({0: -1.0})
    with pytest.raises(InvalidInputError):
        fkg_check(GAUSS, _cfg(), f, f, 0.5, 200)


def test_fkg_rejects_pair_potential():
    spec = GibbsSpec(build_cycle(8), gaussian(), quadratic_pair(0.5))
    f = LipschitzSpec.from_dict({0: 1.0})
    with pytest.raises(InvalidInputError):
        fkg_check(spec, _cfg(), f, f, 0.5, 200)


def test_corollary_bound():
    f = LipschitzSpec.from_dict({0: 1.0, 1: 1.0})
    v = corollary_bound_check(SMOOTH, _cfg(seed=8), f, 0.5, 2000)
    assert v.passed
    assert v.inputs["bound"] > v.inputs["cov"]
    assert v.inputs["norm_f"] == pytest.approx(2.0)


def test_corollary_empty_support():
    with pytest.raises(InvalidInputError):
        corollary_bound_check(GAUSS, _cfg(), LipschitzSpec.from_dict({}), 0.5, 200)


def test_corollary_cross():
    f = LipschitzSpec.from_dict({0: 1.0})
    g = LipschitzSpec.from_dict({1: 1.0})
    v = corollary_cross_check(SMOOTH, _cfg(seed=9), f, g, 0.5, 2000)
    assert v.passed
    assert v.inputs["argmax"][0] == 0


def test_lemma_at_time_zero_off_diagonal():
    # à t = 0 et y ≠ x, le marcheur n'a pas bougé : Ŵ ≡ 0 mais Ĉov fluctue
    v = lemma_equality_check(GAUSS, _cfg((0.0,)), 0, 1, 0.0, 400)
    assert v.inputs["walker"].value == 0.0
    assert v.inputs["sigma"] > 0


# ─────────────────────────────────────────────────────────────────────────────
# Corrélation négative
# ─────────────────────────────────────────────────────────────────────────────
PAIR = GibbsSpec(build_cycle(8), gaussian(), quadratic_pair(0.5))


def test_burn_in_time():
    t = burn_in_time(PAIR, 0.01)
    assert t >= 20.0 / pair_gap(PAIR)
    assert round(t / 0.01) * 0.01 == pytest.approx(t)


def test_negative_correlation_with_oracle():
    v = negative_correlation_check(PAIR, _cfg((0.01,), seed=10), 0, 1, 8000)
    est = v.inputs["moment"]
    assert est.oracle == pytest.approx(negcorr_oracle(PAIR, 0, 1))
    assert est.oracle < 0
    assert v.passed
    assert abs(est.value - est.oracle) <= 5 * est.stderr


def test_negative_correlation_requires_neighbors():
    with pytest.raises(InvalidInputError):
        negative_correlation_check(PAIR, _cfg(), 0, 4, 200)


def test_negative_correlation_requires_pair():
    with pytest.raises(InvalidInputError):
        negative_correlation_check(GAUSS, _cfg(), 0, 1, 200)


# ─────────────────────────────────────────────────────────────────────────────
# Décroissance
# ─────────────────────────────────────────────────────────────────────────────
def _series(rate, floor, stderr=1e-4):
    return [
        (t, Estimate(floor + 2.0 * math.exp(-rate * t), stderr, 1000, "cov_diag_avg", t, -1, -1))
        for t in (2.0, 2.5, 3.0, 3.5, 4.0)
    ]


def test_decay_rate_fit_exact():
    fit = decay_rate_fit(_series(0.7, 0.125), 0.125)
    assert fit.rate == pytest.approx(0.7, rel=1e-9)
    assert fit.intercept == pytest.approx(math.log(2.0), rel=1e-9)
    assert fit.times == [2.0, 2.5, 3.0, 3.5, 4.0]


def test_decay_rate_fit_too_few_points():
    with pytest.raises(InsufficientSignalError):
        decay_rate_fit(_series(0.7, 0.0)[:3], 0.0)


def test_decay_rate_fit_weak_signal():
    with pytest.raises(InsufficientSignalError):
        decay_rate_fit(_series(0.7, 0.0, stderr=0.05), 0.0)


def test_decay_rate_fit_recovers_cycle_gap():
    g = build_cycle(8)
    series = [
        (t, Estimate(float(heat_kernel(g, t)[0, 0]), 1e-6, 1000, "walker_prob", t, 0, 0))
        for t in (6.0, 7.0, 8.0, 9.0, 10.0)
    ]
    fit = decay_rate_fit(series, 1.0 / 8)
    assert fit.rate == pytest.approx(cycle_gap_formula(8), rel=0.02)
