"""Tests de la marche aléatoire en environnement dynamique."""

import numpy as np
import pytest

from app.engine.env_dynamics import Environment, IntegratorConfig, run_trajectory
from app.engine.env_walker import (
    JointTrajectory,
    WalkerState,
    hitting_indicator,
    run_joint,
    step_walker,
)
from app.engine.errors import (
    InvalidInputError,
    QueryError,
    RateBoundViolationError,
)
from app.engine.graph_core import build_cycle, build_torus, laplacian
from app.engine.potentials import (
    GibbsSpec,
    Potential,
    gaussian,
    quadratic_pair,
    smoothed_gaussian,
)
from app.engine.rng import RngPlan


# ─────────────────────────────────────────────────────────────────────────────
# step_walker
# ─────────────────────────────────────────────────────────────────────────────
def test_step_walker_zero_dt_is_identity():
    spec = GibbsSpec(build_cycle(8), gaussian())
    w = WalkerState(np.int64(3), 0.5)
    out = step_walker(w, Environment(np.zeros(8)), spec, 0.0, np.random.default_rng(0))
    assert int(out.position) == 3
    assert out.time == 0.5


def test_step_walker_scalar_position():
    spec = GibbsSpec(build_cycle(8), gaussian())
    out = step_walker(WalkerState(np.int64(0)), Environment(np.zeros(8)), spec, 0.01,
                      np.random.default_rng(1))
    assert int(out.position) in (0, 1, 7)
    assert out.time == pytest.approx(0.01)


def test_step_walker_scalar_position_batched_environment():
    """Position scalaire diffusée sur l'axe des répliques."""
    spec = GibbsSpec(build_cycle(8), gaussian())
    env = Environment(np.zeros((2000, 8)))
    out = step_walker(WalkerState(np.int64(0)), env, spec, 0.05, np.random.default_rng(3))
    assert out.position.shape == (2000,)
    assert set(np.unique(out.position)) <= {0, 1, 7}
    # d·C₊·dt = 0.1, chaque tentative acceptée (V'' ≡ C₊)
    assert abs(np.mean(out.position != 0) - 0.1) < 5 * np.sqrt(0.1 * 0.9 / 2000)


def test_step_walker_batched_shape_mismatch():
    spec = GibbsSpec(build_cycle(8), gaussian())
    env = Environment(np.zeros((10, 8)))
    with pytest.raises(InvalidInputError):
        step_walker(WalkerState(np.zeros(4, dtype=np.int64)), env, spec, 0.01,
                    np.random.default_rng(0))


def test_step_walker_rejects_pair_potential():
    spec = GibbsSpec(build_cycle(8), gaussian(), quadratic_pair(0.5))
    with pytest.raises(InvalidInputError):
        step_walker(WalkerState(np.int64(0)), Environment(np.zeros(8)), spec, 0.01,
                    np.random.default_rng(0))


@pytest.mark.parametrize("level, eps", [(0.0, 2.0), (10.0, 2.0), (0.0, 0.0)])
def test_one_step_move_probability(level, eps):
    site = smoothed_gaussian(eps) if eps else gaussian()
    spec = GibbsSpec(build_cycle(8), site)
    dt = 0.01
    env = Environment(np.full(8, level))
    pos = np.zeros(20000, dtype=np.int64)
    out = step_walker(WalkerState(pos), env, spec, dt, np.random.default_rng(5))
    moved = np.mean(out.position != 0)
    expected = dt * 2 * float(site.curv(level))
    assert moved == pytest.approx(expected, abs=0.008)
    assert set(np.unique(out.position)) <= {0, 1, 7}


def test_rate_bound_violation():
    # C₊ déclaré 1.5 alors que V''(0) = 3
    lying = Potential("smoothed_gaussian", 2.0, 1.0, 1.5, 0.0, 0.0)
    spec = GibbsSpec(build_cycle(8), lying)
    with pytest.raises(RateBoundViolationError):
        step_walker(WalkerState(np.zeros(100, dtype=np.int64)), Environment(np.zeros(8)),
                    spec, 0.5, np.random.default_rng(0))


# ─────────────────────────────────────────────────────────────────────────────
# run_joint
# ─────────────────────────────────────────────────────────────────────────────
def test_gaussian_walker_law_is_lazy_heat_kernel():
    g = build_cycle(8)
    spec = GibbsSpec(g, gaussian())
    dt, k = 0.01, 100
    cfg = IntegratorConfig.for_times(dt, [k * dt], seed=21)
    init = Environment(np.zeros((20000, 8)))
    traj = run_joint(spec, cfg, init, 0)
    law = np.linalg.matrix_power(np.eye(8) - dt * laplacian(g), k)[0]
    freq = np.bincount(traj.walker_positions[-1][:, 0], minlength=8) / 20000
    # écart-type binomial ≤ 0.0036
    assert np.allclose(freq, law, atol=0.02)


def test_joint_environment_matches_trajectory():
    spec = GibbsSpec(build_cycle(8), smoothed_gaussian(1.0))
    cfg = IntegratorConfig.for_times(0.01, [0.1, 0.3], seed=13)
    init = Environment(np.random.default_rng(0).normal(size=(16, 8)))
    traj = run_joint(spec, cfg, init, 2)
    snaps = run_trajectory(spec, cfg, init)
    for a, b in zip(traj.env_snapshots, snaps):
        assert np.array_equal(a.masses, b.masses)


def test_joint_walker_moves_to_neighbors_only():
    g = build_torus(4, 2)
    spec = GibbsSpec(g, smoothed_gaussian(1.0))
    dt = 0.01
    cfg = IntegratorConfig.for_times(dt, [i * dt for i in range(31)], seed=3)
    init = Environment(np.random.default_rng(1).normal(size=(200, 16)))
    traj = run_joint(spec, cfg, init, 5)
    for prev, cur in zip(traj.walker_positions, traj.walker_positions[1:]):
        for a, b in zip(prev[:, 0], cur[:, 0]):
            assert a == b or g.are_neighbors(int(a), int(b))


def test_joint_multi_start_shape():
    spec = GibbsSpec(build_cycle(8), gaussian())
    cfg = IntegratorConfig.for_times(0.01, [0.0, 0.2], seed=1)
    traj = run_joint(spec, cfg, Environment(np.zeros((10, 8))), [0, 4, 6])
    assert traj.start_vertex == (0, 4, 6)
    assert traj.walker_positions[0].shape == (10, 3)
    assert list(traj.walker_positions[0][0]) == [0, 4, 6]


def test_joint_rejects_bad_start():
    spec = GibbsSpec(build_cycle(8), gaussian())
    cfg = IntegratorConfig.for_times(0.01, [0.1])
    with pytest.raises(InvalidInputError):
        run_joint(spec, cfg, Environment(np.zeros(8)), 9)


def test_joint_rejects_pair_potential():
    spec = GibbsSpec(build_cycle(8), gaussian(), quadratic_pair(0.5))
    with pytest.raises(InvalidInputError):
        run_joint(spec, IntegratorConfig.for_times(0.01, [0.1]), Environment(np.zeros(8)), 0)


def test_joint_walker_stream_independent_of_env_stream():
    spec = GibbsSpec(build_cycle(8), gaussian())
    cfg = IntegratorConfig.for_times(0.01, [0.5], seed=4)
    init = Environment(np.zeros((500, 8)))
    plan = RngPlan(4)
    a = run_joint(spec, cfg, init, 0)
    b = run_joint(spec, cfg, init, 0, env_rng=RngPlan(99).generator(0, "env"),
                  walker_rng=plan.generator(0, "walker"))
    # potentiel gaussien : les taux ne dépendent pas de η
    assert np.array_equal(a.walker_positions[-1], b.walker_positions[-1])
    assert not np.array_equal(a.env_snapshots[-1].masses, b.env_snapshots[-1].masses)


# ─────────────────────────────────────────────────────────────────────────────
# Indicatrices
# ─────────────────────────────────────────────────────────────────────────────
def test_hitting_indicator_scalar_and_batched():
    spec = GibbsSpec(build_cycle(8), gaussian())
    cfg = IntegratorConfig.for_times(0.01, [0.0, 0.1], seed=2)
    single = run_joint(spec, cfg, Environment(np.zeros(8)), 3)
    assert hitting_indicator(single, 0.0, 3) == 1
    assert hitting_indicator(single, 0.0, 4) == 0
    batched = run_joint(spec, cfg, Environment(np.zeros((5, 8))), [3, 6])
    assert list(hitting_indicator(batched, 0.0, 6, start_index=1)) == [1] * 5


def test_index_of_unknown_time():
    traj = JointTrajectory((0.0, 0.5), [], [], (0,), 1)
    assert traj.index_of(0.5) == 1
    with pytest.raises(QueryError):
        traj.index_of(0.25)
