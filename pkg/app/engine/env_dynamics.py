"""
Intégration d'Euler–Maruyama de la dynamique conservative de Ginzburg–Landau.

dη_x = Σ_{b∈B⃗} sgn(x,b)·(∂_bH dt - √2 dB_b) : chaque arête transfère de la
masse de façon antisymétrique, Σ_x η_x est conservée. Les masses portent un
axe de répliques en tête, forme (R, |V|).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from app.engine.errors import (
    InvalidInputError,
    InvalidParameterError,
    NumericalBlowupError,
)
from app.engine.graph_core import Graph
from app.engine.potentials import GibbsSpec
from app.engine.rng import RngPlan

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_GRID_TOL = 1e-12


# ═══════════════════════════════════════════════════════════════════════════════
# TYPES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class Environment:
    masses: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if not np.all(np.isfinite(m)):
            raise InvalidInputError("Environnement non fini.")
        object.__setattr__(self, "masses", m)

    @property
    def n_vertices(self) -> int:
        return self.masses.shape[-1]


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    observation_times: tuple[float, ...]
    seed: int = 42
    steps: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError(f"dt doit être > 0 (reçu {self.dt}).")
        if self.t_end < 0:
            raise InvalidParameterError("t_end doit être >= 0.")
        times = tuple(float(t) for t in self.observation_times)
        if list(times) != sorted(times):
            raise InvalidParameterError("Les temps d'observation doivent être triés.")
        steps = []
        for t in times:
            if t < 0 or t > self.t_end + _GRID_TOL:
                raise InvalidParameterError(f"Temps d'observation {t} hors de [0, {self.t_end}].")
            k = round(t / self.dt)
            if abs(k * self.dt - t) > _GRID_TOL * max(1.0, t):
                raise InvalidParameterError(
                    f"Le temps d'observation {t} n'est pas un multiple de dt={self.dt}."
                )
            steps.append(int(k))
        object.__setattr__(self, "observation_times", times)
        object.__setattr__(self, "steps", tuple(steps))

    @classmethod
    def for_times(cls, dt: float, times, seed: int = 42) -> IntegratorConfig:
        times = tuple(sorted(float(t) for t in times))
        return cls(dt, times[-1] if times else 0.0, times, seed)

    @property
    def n_steps(self) -> int:
        return self.steps[-1] if self.steps else 0

    def step_of(self, t: float) -> int | None:
        for ti, k in zip(self.observation_times, self.steps):
            if abs(ti - t) <= _GRID_TOL * max(1.0, t):
                return k
        return None

    def validate_for(self, spec: GibbsSpec) -> None:
        """Garde de stabilité dt ≤ 1/(4·d·C₊) (courbure de paire incluse)."""
        c_plus = spec.site.c_plus
        if spec.pair is not None:
            c_plus += 2 * spec.graph.degree_bound * spec.pair.c2_plus
        limit = 1.0 / (4 * spec.graph.degree_bound * c_plus)
        logger.debug("garde de stabilité : dt=%g, limite=%g", self.dt, limit)
        if self.dt > limit:
            raise InvalidParameterError(
                f"dt={self.dt} dépasse la limite de stabilité {limit:.6g}."
            )


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """(η, σ) pilotés par les mêmes browniens ; φ = η - σ."""

    upper: Environment
    lower: Environment

    @property
    def difference(self) -> np.ndarray:
        return self.upper.masses - self.lower.masses

    def is_ordered(self) -> bool:
        return bool(np.all(self.difference >= 0))


# ═══════════════════════════════════════════════════════════════════════════════
# PAS D'EULER
# ═══════════════════════════════════════════════════════════════════════════════

def edge_increment(masses: np.ndarray, spec: GibbsSpec, dt: float, noise: np.ndarray, time: float):
    drift = spec.edge_drift(masses)
    if not np.all(np.isfinite(drift)):
        bad = np.argwhere(~np.isfinite(drift))
        raise NumericalBlowupError(
            f"Dérive non finie à t={time:.6g}.",
            state={
                "time": time,
                "first_bad_index": bad[0].tolist(),
                "max_abs_mass": float(np.nanmax(np.abs(masses))),
            },
        )
    flux = drift * dt - _SQRT2 * noise
    idx, sgn_ = spec.graph.vertex_edges
    return (flux[..., idx] * sgn_).sum(axis=-1)


def euler_step(env: Environment, spec: GibbsSpec, dt: float, noise) -> Environment:
    """Un pas : η_tail -= ∂_bH dt - √2 ξ_b ; η_head += la même quantité."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape[-1] != len(spec.graph.edges):
        raise InvalidInputError("Il faut un bruit par arête orientée de B⃗.")
    if env.n_vertices != spec.graph.n_vertices:
        raise InvalidInputError("L'environnement ne correspond pas au graphe.")
    delta = edge_increment(env.masses, spec, dt, noise, env.time)
    return Environment(env.masses + delta, env.time + dt)


def draw_noise(rng: np.random.Generator, dt: float, shape: tuple[int, ...]) -> np.ndarray:
    return rng.normal(0.0, math.sqrt(dt), size=shape)


def _env_rng(cfg: IntegratorConfig, rng: np.random.Generator | None) -> np.random.Generator:
    return rng if rng is not None else RngPlan(cfg.seed).generator(0, "env")


def run_trajectory(
    spec: GibbsSpec,
    cfg: IntegratorConfig,
    init: Environment,
    rng: np.random.Generator | None = None,
) -> list[Environment]:
    """Instantanés de l'environnement aux temps d'observation."""
    if init.n_vertices != spec.graph.n_vertices:
        raise InvalidInputError("L'environnement initial ne correspond pas au graphe.")
    cfg.validate_for(spec)
    rng = _env_rng(cfg, rng)
    m = len(spec.graph.edges)
    shape = init.masses.shape[:-1] + (m,)

    wanted = set(cfg.steps)
    snapshots: list[Environment] = []
    masses = init.masses
    for k in range(cfg.n_steps + 1):
        if k in wanted:
            snapshots.append(Environment(masses, k * cfg.dt))
        if k == cfg.n_steps:
            break
        masses = masses + edge_increment(masses, spec, cfg.dt, draw_noise(rng, cfg.dt, shape), k * cfg.dt)
    return snapshots


# ═══════════════════════════════════════════════════════════════════════════════
# COUPLAGE MONOTONE ET FONCTIONNELLE Φ
# ═══════════════════════════════════════════════════════════════════════════════

def phi_weights(g: Graph) -> np.ndarray:
    return (2.0 * g.degree_bound) ** (-g.distances.astype(float))


def phi(pair: CoupledPair, g: Graph):
    """Φ = Σ_x (2d)^{-|x|} φ_x² 1{φ_x < 0} (une valeur par réplique)."""
    diff = pair.difference
    neg = np.where(diff < 0, diff * diff, 0.0)
    out = (neg * phi_weights(g)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def run_coupled(
    spec: GibbsSpec,
    cfg: IntegratorConfig,
    pair: CoupledPair,
    rng: np.random.Generator | None = None,
) -> list[tuple[CoupledPair, object]]:
    """Les deux environnements reçoivent le même tableau de bruit à chaque pas."""
    if pair.upper.masses.shape != pair.lower.masses.shape:
        raise InvalidInputError("Les deux environnements doivent avoir la même forme.")
    if not pair.is_ordered():
        raise InvalidInputError("Le couple doit être ordonné à t=0 (upper >= lower).")
    cfg.validate_for(spec)
    rng = _env_rng(cfg, rng)
    m = len(spec.graph.edges)
    shape = pair.upper.masses.shape[:-1] + (m,)

    wanted = set(cfg.steps)
    out: list[tuple[CoupledPair, object]] = []
    both = np.stack([pair.upper.masses, pair.lower.masses])
    for k in range(cfg.n_steps + 1):
        if k in wanted:
            snap = CoupledPair(Environment(both[0], k * cfg.dt), Environment(both[1], k * cfg.dt))
            out.append((snap, phi(snap, spec.graph)))
        if k == cfg.n_steps:
            break
        noise = draw_noise(rng, cfg.dt, shape)
        both = both + edge_increment(both, spec, cfg.dt, noise, k * cfg.dt)
    return out


def total_mass(env: Environment):
    """Σ_x η_x en sommation compensée, une valeur par réplique."""
    m = env.masses
    if m.ndim == 1:
        return math.fsum(m)
    flat = m.reshape(-1, m.shape[-1])
    return np.array([math.fsum(row) for row in flat]).reshape(m.shape[:-1])
