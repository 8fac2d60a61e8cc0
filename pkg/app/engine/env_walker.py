"""
Marche aléatoire en environnement dynamique, simulée conjointement à η.

Le marcheur saute de x vers chacun de ses voisins au taux V''(η_x(t)). Les
taux sont gelés sur chaque pas dt (lecture de l'environnement avant le pas)
et le saut est réalisé par amincissement d'une horloge dominante R = d·C₊.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.engine.env_dynamics import (
    Environment,
    IntegratorConfig,
    edge_increment,
    draw_noise,
)
from app.engine.errors import InvalidInputError, QueryError, RateBoundViolationError
from app.engine.potentials import GibbsSpec
from app.engine.rng import RngPlan

logger = logging.getLogger(__name__)

BERNOULLI_THRESHOLD = 0.1
_RATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WalkerState:
    position: np.ndarray
    time: float = 0.0


@dataclass(frozen=True, eq=False)
class JointTrajectory:
    times: tuple[float, ...]
    env_snapshots: list[Environment]
    walker_positions: list[np.ndarray]
    start_vertex: tuple[int, ...]
    seed: int

    def index_of(self, t: float) -> int:
        for i, ti in enumerate(self.times):
            if abs(ti - t) <= 1e-12 * max(1.0, t):
                return i
        raise QueryError(f"t={t} n'est pas un temps d'observation.")


# ═══════════════════════════════════════════════════════════════════════════════
# AMINCISSEMENT
# ═══════════════════════════════════════════════════════════════════════════════

def _gather(masses: np.ndarray, pos: np.ndarray) -> np.ndarray:
    if masses.ndim == 1:
        return masses[pos]
    return np.take_along_axis(masses, pos, axis=-1)


def _move(pos: np.ndarray, masses: np.ndarray, spec: GibbsSpec, dt: float,
          rng: np.random.Generator) -> np.ndarray:
    g = spec.graph
    d = g.degree_bound
    c_plus = spec.site.c_plus
    lam = d * c_plus * dt
    if lam <= BERNOULLI_THRESHOLD:
        counts = (rng.random(pos.shape) < lam).astype(np.int64)
    else:
        counts = rng.poisson(lam, pos.shape)
    nbrs = g.padded_neighbors
    rounds = int(counts.max()) if counts.size else 0
    for j in range(rounds):
        active = counts > j
        slot = rng.integers(0, d, size=pos.shape)
        u = rng.random(pos.shape)
        curv = spec.site.curv(_gather(masses, pos))
        if np.any(curv > c_plus * (1.0 + _RATE_TOL)):
            raise RateBoundViolationError(
                f"V''={float(curv.max()):.6g} dépasse la borne déclarée C₊={c_plus:g}."
            )
        target = nbrs[pos, slot]
        accept = active & (target >= 0) & (u * c_plus < curv)
        pos = np.where(accept, target, pos)
    return pos


def step_walker(w: WalkerState, env: Environment, spec: GibbsSpec, dt: float,
                rng: np.random.Generator) -> WalkerState:
    """Un pas du marcheur, environnement gelé sur [t, t+dt]."""
    spec.require_product("step_walker")
    pos = np.asarray(w.position, dtype=np.int64)
    if dt == 0:
        return WalkerState(pos, w.time)
    lead = env.masses.shape[:-1]
    if lead:
        # environnement par répliques : une position par réplique
        if pos.ndim == 0:
            pos = np.full(lead, int(pos), dtype=np.int64)
        elif pos.shape != lead:
            raise InvalidInputError(
                f"Positions de forme {pos.shape} pour un environnement de forme {env.masses.shape}."
            )
        moved = _move(pos[..., None], env.masses, spec, dt, rng)
        return WalkerState(moved[..., 0], w.time + dt)
    scalar = pos.ndim == 0
    moved = _move(np.atleast_1d(pos), env.masses, spec, dt, rng)
    return WalkerState(moved[0] if scalar else moved, w.time + dt)


# ═══════════════════════════════════════════════════════════════════════════════
# ÉVOLUTION JOINTE
# ═══════════════════════════════════════════════════════════════════════════════

def run_joint(
    spec: GibbsSpec,
    cfg: IntegratorConfig,
    init: Environment,
    start: int | Sequence[int],
    env_rng: np.random.Generator | None = None,
    walker_rng: np.random.Generator | None = None,
) -> JointTrajectory:
    """Alterne pas d'Euler et pas du marcheur sur la même grille.

    `start` peut être une liste : un marcheur indépendant par départ, tous dans
    le même environnement. Positions de forme (..., len(start)).
    """
    spec.require_product("run_joint")
    cfg.validate_for(spec)
    g = spec.graph
    if init.n_vertices != g.n_vertices:
        raise InvalidInputError("L'environnement initial ne correspond pas au graphe.")
    starts = (start,) if np.ndim(start) == 0 else tuple(start)
    starts = tuple(g.check_vertex(s, "start") for s in starts)

    plan = RngPlan(cfg.seed)
    env_rng = env_rng if env_rng is not None else plan.generator(0, "env")
    walker_rng = walker_rng if walker_rng is not None else plan.generator(0, "walker")

    lead = init.masses.shape[:-1]
    pos = np.broadcast_to(np.array(starts, dtype=np.int64), lead + (len(starts),)).copy()
    noise_shape = lead + (len(g.edges),)

    wanted = set(cfg.steps)
    envs: list[Environment] = []
    walkers: list[np.ndarray] = []
    masses = init.masses
    for k in range(cfg.n_steps + 1):
        if k in wanted:
            envs.append(Environment(masses, k * cfg.dt))
            walkers.append(pos.copy())
        if k == cfg.n_steps:
            break
        delta = edge_increment(masses, spec, cfg.dt, draw_noise(env_rng, cfg.dt, noise_shape), k * cfg.dt)
        pos = _move(pos, masses, spec, cfg.dt, walker_rng)
        masses = masses + delta
    return JointTrajectory(cfg.observation_times, envs, walkers, starts, cfg.seed)


def hitting_indicator(traj: JointTrajectory, t: float, y: int, start_index: int = 0):
    """1{X(t) = y} pour le marcheur parti de start_vertex[start_index]."""
    i = traj.index_of(t)
    hit = (traj.walker_positions[i][..., start_index] == y).astype(np.int64)
    return int(hit) if hit.ndim == 0 else hit
