"""
Estimateurs Monte Carlo et verdicts statistiques.

Un ReplicaSet regroupe les trajectoires (environnement + marcheurs) d'un même
plan de graines ; les deux membres d'une comparaison sont toujours calculés
sur le même ReplicaSet (nombres aléatoires communs). L'écart-type d'une
comparaison est celui, par lots, de la différence réplique par réplique.

Convention de marge : margin_sigmas ≥ 0 ⟺ verdict positif.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from app import config
from app.engine import _stat_helpers as sh
from app.engine import exact_oracle
from app.engine.env_dynamics import Environment, IntegratorConfig, run_trajectory
from app.engine.env_walker import run_joint
from app.engine.errors import (
    DegenerateEstimateError,
    InsufficientReplicasError,
    InsufficientSignalError,
    InvalidInputError,
    QueryError,
)
from app.engine.potentials import GibbsSpec, sample_product
from app.engine.rng import RngPlan, batch_sizes, map_batches

logger = logging.getLogger(__name__)

MIN_REPLICAS = 100
SIGNAL_FACTOR = 5.0


# ═══════════════════════════════════════════════════════════════════════════════
# TYPES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class Estimate:
    value: float
    stderr: float
    replicas: int
    quantity_tag: str
    t: float
    x: int
    y: int
    oracle: float | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise DegenerateEstimateError("Erreur standard négative.")
        if self.replicas < 2:
            raise InsufficientReplicasError("Une estimation demande au moins 2 répliques.")


@dataclass
class Verdict:
    claim_tag: str
    passed: bool
    margin_in_sigmas: float
    inputs: dict[str, Any] = field(default_factory=dict)
    theorem_tag: str = ""
    # faux : verdict rapporté sans effet sur le code de sortie
    gating: bool = True

    def to_dict(self) -> dict:
        out = {
            "claim": self.claim_tag,
            "pass": self.passed,
            "margin_sigmas": self.margin_in_sigmas,
            "tag": self.theorem_tag,
            "gating": self.gating,
            "inputs": {},
        }
        for k, v in self.inputs.items():
            out["inputs"][k] = v.__dict__.copy() if isinstance(v, Estimate) else v
        return out


LIPSCHITZ_KINDS = ("linear", "tanh", "vprime")


@dataclass(frozen=True)
class LipschitzSpec:
    """f(η) = Σ_x a_x·φ(η_x) avec φ ∈ {identité, tanh, V'} ; support fini."""

    coefficients: tuple[tuple[int, float], ...]
    kind: str = "linear"

    @classmethod
    def from_dict(cls, coefficients: dict[int, float], kind: str = "linear") -> LipschitzSpec:
        if kind not in LIPSCHITZ_KINDS:
            raise InvalidInputError(f"Type de fonction inconnu : {kind}")
        items = tuple(sorted((int(x), float(a)) for x, a in coefficients.items() if a != 0))
        for _, a in items:
            if not math.isfinite(a):
                raise InvalidInputError("Coefficient non fini.")
        return cls(items, kind)

    @property
    def support(self) -> list[int]:
        return [x for x, _ in self.coefficients]

    @property
    def is_increasing(self) -> bool:
        return all(a >= 0 for _, a in self.coefficients)

    def lipschitz(self, x: int, spec: GibbsSpec) -> float:
        a = dict(self.coefficients).get(x, 0.0)
        scale = spec.site.c_plus if self.kind == "vprime" else 1.0
        return abs(a) * scale

    def norm(self, spec: GibbsSpec) -> float:
        """‖f‖ = Σ_x ‖∂_x f‖_∞."""
        return math.fsum(self.lipschitz(x, spec) for x in self.support)

    def value(self, eta: np.ndarray, spec: GibbsSpec) -> np.ndarray:
        out = np.zeros(eta.shape[:-1])
        for x, a in self.coefficients:
            col = eta[..., x]
            if self.kind == "tanh":
                col = np.tanh(col)
            elif self.kind == "vprime":
                col = spec.site.grad(col)
            out = out + a * col
        return out


# ═══════════════════════════════════════════════════════════════════════════════
# SIMULATION DES RÉPLIQUES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(eq=False)
class ReplicaSet:
    spec: GibbsSpec
    cfg: IntegratorConfig
    init: np.ndarray
    snapshots: list[np.ndarray]
    positions: list[np.ndarray] | None
    starts: tuple[int, ...]

    @property
    def n_replicas(self) -> int:
        return self.init.shape[0]

    def env_at(self, t: float) -> np.ndarray:
        for ti, snap in zip(self.cfg.observation_times, self.snapshots):
            if abs(ti - t) <= 1e-12 * max(1.0, t):
                return snap
        raise QueryError(f"t={t} n'est pas un temps d'observation de ce jeu de répliques.")

    def hits(self, t: float, y: int, start: int) -> np.ndarray:
        if self.positions is None or start not in self.starts:
            raise QueryError(f"Aucun marcheur parti de {start} dans ce jeu de répliques.")
        j = self.starts.index(start)
        for ti, pos in zip(self.cfg.observation_times, self.positions):
            if abs(ti - t) <= 1e-12 * max(1.0, t):
                return (pos[:, j] == y).astype(np.int64)
        raise QueryError(f"t={t} n'est pas un temps d'observation de ce jeu de répliques.")


def simulate_replicas(
    spec: GibbsSpec,
    cfg: IntegratorConfig,
    n_replicas: int,
    starts: Sequence[int] | None = None,
    batch_size: int | None = None,
    workers: int | None = None,
) -> ReplicaSet:
    """Répliques stationnaires (init ~ mesure produit), découpées en lots fixes.

    Le lot i consomme les sous-flux (i, init), (i, env) et (i, walker) : le
    résultat ne dépend pas du nombre de workers.
    """
    if n_replicas < MIN_REPLICAS:
        raise InsufficientReplicasError(
            f"Au moins {MIN_REPLICAS} répliques sont requises (reçu {n_replicas})."
        )
    cfg.validate_for(spec)
    plan = RngPlan(cfg.seed)
    sizes = batch_sizes(n_replicas, batch_size or config.GLHS_BATCH_SIZE)
    starts_t = tuple(int(s) for s in starts) if starts is not None else ()
    logger.info("simulation : %d répliques, %d lots, %d pas", n_replicas, len(sizes), cfg.n_steps)

    def one_batch(i: int):
        init = sample_product(spec, plan.generator(i, "init"), sizes[i])
        env = Environment(init)
        if starts_t:
            traj = run_joint(spec, cfg, env, starts_t,
                             env_rng=plan.generator(i, "env"),
                             walker_rng=plan.generator(i, "walker"))
            snaps = [e.masses for e in traj.env_snapshots]
            pos = traj.walker_positions
        else:
            snaps = [e.masses for e in run_trajectory(spec, cfg, env, rng=plan.generator(i, "env"))]
            pos = None
        logger.debug("lot %d terminé (%d répliques)", i, sizes[i])
        return init, snaps, pos

    results = map_batches(one_batch, len(sizes), workers or config.GLHS_WORKERS)
    init = np.concatenate([r[0] for r in results])
    snapshots = [np.concatenate([r[1][k] for r in results]) for k in range(len(cfg.steps))]
    positions = None
    if starts_t:
        positions = [np.concatenate([r[2][k] for r in results]) for k in range(len(cfg.steps))]
    return ReplicaSet(spec, cfg, init, snapshots, positions, starts_t)


def _replicas(spec, cfg, n, replicas, starts) -> ReplicaSet:
    if replicas is not None:
        if replicas.n_replicas < MIN_REPLICAS:
            raise InsufficientReplicasError(
                f"Au moins {MIN_REPLICAS} répliques sont requises (reçu {replicas.n_replicas})."
            )
        return replicas
    return simulate_replicas(spec, cfg, n, starts=starts)


def _observable(tag: str, col: np.ndarray, spec: GibbsSpec) -> np.ndarray:
    if tag == "mass":
        return col
    if tag == "vprime":
        return spec.site.grad(col)
    raise InvalidInputError(f"Observable inconnue : {tag}")


def _gaussian_oracle(spec: GibbsSpec, t: float, x: int, y: int) -> float | None:
    if spec.is_product and spec.site.family_tag == "gaussian":
        return exact_oracle.gaussian_covariance(spec.graph, t, x, y)
    return None


# ═══════════════════════════════════════════════════════════════════════════════
# ESTIMATIONS
# ═══════════════════════════════════════════════════════════════════════════════

def estimate_cov(spec, cfg, x, y, t, n_replicas, observable_tag="mass",
                 replicas: ReplicaSet | None = None) -> Estimate:
    """Ĉov(obs(η_x(0)) ; η_y(t)), moyennes empiriques soustraites."""
    g = spec.graph
    x, y = g.check_vertex(x, "x"), g.check_vertex(y, "y")
    rs = _replicas(spec, cfg, n_replicas, replicas, None)
    a = _observable(observable_tag, rs.init[:, x], spec)
    bm = sh.batch_covariance(a, rs.env_at(t)[:, y])
    oracle = _gaussian_oracle(spec, t, x, y)
    return Estimate(bm.mean, bm.stderr, bm.n, f"cov_{observable_tag}", t, x, y, oracle)


def estimate_walker_prob(spec, cfg, x, y, t, n_replicas,
                         replicas: ReplicaSet | None = None) -> Estimate:
    """Ê[P_x^η(X(t) = y)] avec erreur binomiale."""
    g = spec.graph
    x, y = g.check_vertex(x, "x"), g.check_vertex(y, "y")
    spec.require_product("estimate_walker_prob")
    rs = _replicas(spec, cfg, n_replicas, replicas, (x,))
    bm = sh.binomial_stderr(rs.hits(t, y, x))
    oracle = _gaussian_oracle(spec, t, x, y)
    return Estimate(bm.mean, bm.stderr, bm.n, "walker_prob", t, x, y, oracle)


def estimate_diag_cov_avg(spec, cfg, t, n_replicas,
                          replicas: ReplicaSet | None = None) -> Estimate:
    """Moyenne sur x de Ĉov(η_x(0) ; η_x(t)) (graphes transitifs)."""
    rs = _replicas(spec, cfg, n_replicas, replicas, None)
    a, b = rs.init, rs.env_at(t)
    terms = ((a - a.mean(axis=0)) * (b - b.mean(axis=0))).mean(axis=1)
    bm = sh.batch_means(terms)
    oracle = _gaussian_oracle(spec, t, 0, 0)
    return Estimate(bm.mean, bm.stderr, bm.n, "cov_diag_avg", t, -1, -1, oracle)


def _comparison(terms: np.ndarray) -> sh.BatchMeans:
    bm = sh.batch_means(terms)
    if bm.stderr == 0:
        raise DegenerateEstimateError("Erreur standard combinée nulle : comparaison dégénérée.")
    return bm


# ═══════════════════════════════════════════════════════════════════════════════
# VERDICTS
# ═══════════════════════════════════════════════════════════════════════════════

def theorem_sandwich(spec, cfg, x, y, t, n, replicas: ReplicaSet | None = None) -> Verdict:
    """(1/C₊)·W - 3σ ≤ Ĉov(η_x ; P_tη_y) ≤ (1/C₋)·W + 3σ."""
    spec.require_product("theorem_sandwich")
    g = spec.graph
    x, y = g.check_vertex(x, "x"), g.check_vertex(y, "y")
    rs = _replicas(spec, cfg, n, replicas, (x,))
    c_terms = sh.centered_products(rs.init[:, x], rs.env_at(t)[:, y])
    hits = rs.hits(t, y, x).astype(float)
    c_minus, c_plus = spec.site.c_minus, spec.site.c_plus

    lower = sh.batch_means(c_terms - hits / c_plus)
    upper = sh.batch_means(hits / c_minus - c_terms)
    if lower.stderr == 0 and upper.stderr == 0:
        raise DegenerateEstimateError("Erreur standard combinée nulle : comparaison dégénérée.")
    margin = sh.SIGMA_BAND + min(
        sh.sigma_margin(lower.mean, lower.stderr),
        sh.sigma_margin(upper.mean, upper.stderr),
    )
    cov = estimate_cov(spec, cfg, x, y, t, n, replicas=rs)
    walk = estimate_walker_prob(spec, cfg, x, y, t, n, replicas=rs)
    tag = "equality" if c_minus == c_plus else "sandwich"
    return Verdict("theorem", margin >= 0, margin, {
        "cov": cov, "walker": walk,
        "lower_bound": walk.value / c_plus, "upper_bound": walk.value / c_minus,
        "sigma": max(lower.stderr, upper.stderr),
    }, tag)


def lemma_equality_check(spec, cfg, x, y, t, n, replicas: ReplicaSet | None = None) -> Verdict:
    """|Ĉov(V'(η_x) ; P_tη_y) - Ŵ| ≤ 3σ."""
    spec.require_product("lemma_equality_check")
    g = spec.graph
    x, y = g.check_vertex(x, "x"), g.check_vertex(y, "y")
    rs = _replicas(spec, cfg, n, replicas, (x,))
    c_terms = sh.centered_products(spec.site.grad(rs.init[:, x]), rs.env_at(t)[:, y])
    diff = _comparison(c_terms - rs.hits(t, y, x))
    margin = sh.SIGMA_BAND - abs(diff.mean) / diff.stderr
    cov = estimate_cov(spec, cfg, x, y, t, n, observable_tag="vprime", replicas=rs)
    walk = estimate_walker_prob(spec, cfg, x, y, t, n, replicas=rs)
    return Verdict("lemma-equality", margin >= 0, margin,
                   {"cov": cov, "walker": walk, "sigma": diff.stderr}, "equality")


def fkg_check(spec, cfg, f: LipschitzSpec, g: LipschitzSpec, t, n,
              replicas: ReplicaSet | None = None) -> Verdict:
    """Ĉov(f ; P_t g) ≥ -3σ pour f, g croissantes.

    Mesure produit seulement : les répliques partent de sample_product.
    """
    spec.require_product("fkg_check")
    if not (f.is_increasing and g.is_increasing):
        raise InvalidInputError("FKG demande deux fonctions croissantes (coefficients >= 0).")
    rs = _replicas(spec, cfg, n, replicas, None)
    bm = sh.batch_covariance(f.value(rs.init, spec), g.value(rs.env_at(t), spec))
    if bm.stderr == 0:
        raise DegenerateEstimateError("Erreur standard nulle pour la covariance FKG.")
    margin = sh.SIGMA_BAND + bm.mean / bm.stderr
    est = Estimate(bm.mean, bm.stderr, bm.n, "cov_fg", t, -1, -1)
    return Verdict("fkg", margin >= 0, margin, {"cov": est})


def _return_probabilities(rs: ReplicaSet, t: float, pairs) -> dict[tuple[int, int], np.ndarray]:
    return {(x, y): rs.hits(t, y, x).astype(float) for x, y in pairs}


def corollary_bound_check(spec, cfg, f: LipschitzSpec, t, n,
                          replicas: ReplicaSet | None = None) -> Verdict:
    """Ĉov(f ; P_t f) ≤ (1/C₋)·‖f‖²·max_x Ŵ(x, x, t) + 3σ."""
    spec.require_product("corollary_bound_check")
    if not f.support:
        raise InvalidInputError("Le support de f est vide (L_f ≡ 0).")
    verts = tuple(range(spec.graph.n_vertices))
    rs = _replicas(spec, cfg, n, replicas, verts)
    probs = _return_probabilities(rs, t, [(x, x) for x in verts])
    best = max(probs, key=lambda k: (probs[k].mean(), -k[0]))
    scale = f.norm(spec) ** 2 / spec.site.c_minus
    c_terms = sh.centered_products(f.value(rs.init, spec), f.value(rs.env_at(t), spec))
    diff = _comparison(scale * probs[best] - c_terms)
    margin = sh.SIGMA_BAND + diff.mean / diff.stderr
    diag = [float(p.mean()) for p in probs.values()]
    return Verdict("corollary", margin >= 0, margin, {
        "cov": float(c_terms.mean()), "bound": scale * float(probs[best].mean()),
        "argmax_x": best[0], "return_prob_spread": max(diag) - min(diag),
        "norm_f": f.norm(spec), "sigma": diff.stderr,
    })


def corollary_cross_check(spec, cfg, f: LipschitzSpec, g: LipschitzSpec, t, n,
                          replicas: ReplicaSet | None = None) -> Verdict:
    """Ĉov(f ; P_t g) ≤ (‖f‖·‖g‖/C₋)·max_{x∈supp f, y∈supp g} Ŵ(x, y, t) + 3σ."""
    spec.require_product("corollary_cross_check")
    if not (f.is_increasing and g.is_increasing):
        raise InvalidInputError("La borne croisée demande deux fonctions croissantes.")
    if not f.support or not g.support:
        raise InvalidInputError("Supports vides.")
    rs = _replicas(spec, cfg, n, replicas, tuple(f.support))
    probs = _return_probabilities(rs, t, [(x, y) for x in f.support for y in g.support])
    best = max(probs, key=lambda k: (probs[k].mean(), -k[0], -k[1]))
    scale = f.norm(spec) * g.norm(spec) / spec.site.c_minus
    c_terms = sh.centered_products(f.value(rs.init, spec), g.value(rs.env_at(t), spec))
    diff = _comparison(scale * probs[best] - c_terms)
    margin = sh.SIGMA_BAND + diff.mean / diff.stderr
    return Verdict("corollary-cross", margin >= 0, margin, {
        "cov": float(c_terms.mean()), "bound": scale * float(probs[best].mean()),
        "argmax": list(best), "sigma": diff.stderr,
    })


def burn_in_time(spec: GibbsSpec, dt: float) -> float:
    """20/gap arrondi au multiple de dt supérieur."""
    gap = exact_oracle.pair_gap(spec)
    return math.ceil(20.0 / gap / dt) * dt


def negative_correlation_check(spec, cfg, x, y, n, replicas: ReplicaSet | None = None) -> Verdict:
    """Ê[η_xη_y] + 3σ < 0 après rodage, voisins x ∼ y, paire strictement convexe."""
    if spec.pair is None:
        raise InvalidInputError("La corrélation négative demande un potentiel de paire.")
    if spec.pair.c2_minus <= 0:
        raise InvalidInputError("Le potentiel de paire doit être strictement convexe.")
    g = spec.graph
    x, y = g.check_vertex(x, "x"), g.check_vertex(y, "y")
    if not g.are_neighbors(x, y):
        raise InvalidInputError(f"{x} et {y} ne sont pas voisins.")
    if replicas is None:
        t_burn = burn_in_time(spec, cfg.dt)
        burn_cfg = IntegratorConfig.for_times(cfg.dt, [t_burn], cfg.seed)
        replicas = _replicas(spec, burn_cfg, n, None, None)
    rs = replicas
    t_final = rs.cfg.observation_times[-1]
    eta = rs.env_at(t_final)
    bm = sh.batch_means(eta[:, x] * eta[:, y])
    if bm.stderr == 0:
        raise DegenerateEstimateError("Erreur standard nulle.")
    margin = -(bm.mean / bm.stderr) - sh.SIGMA_BAND
    oracle = None
    if spec.site.family_tag == "gaussian":
        oracle = exact_oracle.negcorr_oracle(spec, x, y)
    est = Estimate(bm.mean, bm.stderr, bm.n, "moment_xy", t_final, x, y, oracle)
    return Verdict("negcorr", margin > 0, margin, {"moment": est, "burn_in": t_final})


# ═══════════════════════════════════════════════════════════════════════════════
# DÉCROISSANCE
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class DecayFit:
    rate: float
    intercept: float
    times: list[float]
    points: list[float]


def decay_rate_fit(series: Sequence[tuple[float, Estimate]], floor: float) -> DecayFit:
    """Pente des moindres carrés de log(Estimate - floor) en fonction de t."""
    if len(series) < 4:
        raise InsufficientSignalError(f"Au moins 4 points sont requis (reçu {len(series)}).")
    times, logs = [], []
    for t, est in series:
        excess = est.value - floor
        if excess <= 0 or excess <= SIGNAL_FACTOR * est.stderr:
            raise InsufficientSignalError(
                f"Signal insuffisant à t={t} : excès {excess:.3g} pour erreur {est.stderr:.3g}."
            )
        times.append(float(t))
        logs.append(math.log(excess))
    slope, intercept = np.polyfit(np.array(times), np.array(logs), 1)
    return DecayFit(-float(slope), float(intercept), times, logs)

