"""
Potentials à un site, potentiels de paire et mesure de Gibbs.

Toutes les évaluations acceptent des scalaires ou des tableaux numpy (y compris
complexes pour grad/curv, ce que la vérification d'entrelacement exploite).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

from app.engine.errors import (
    InvalidInputError,
    InvalidParameterError,
    SamplerExhaustedError,
)
from app.engine.graph_core import Graph

logger = logging.getLogger(__name__)

EPSILON_MAX = 10.0
QUAD_BOUND = 50.0
MAX_PROPOSALS = 10**6

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_cosh(t):
    """ln cosh t sans dépassement pour |t| grand."""
    if np.iscomplexobj(t):
        return np.log(np.cosh(t))
    return np.logaddexp(t, -t) - math.log(2.0)


@lru_cache(maxsize=64)
def _log_normalizer(epsilon: float) -> float:
    if epsilon == 0.0:
        return _LOG_SQRT_2PI
    z, _ = integrate.quad(
        lambda s: math.exp(-0.5 * s * s - epsilon * float(_log_cosh(s))),
        -QUAD_BOUND, QUAD_BOUND, limit=200,
    )
    return math.log(z)


# ═══════════════════════════════════════════════════════════════════════════════
# POTENTIEL À UN SITE
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Potential:
    """V(t) = t²/2 + ε·ln cosh t + ln Z ; V'' ∈ [1, 1+ε].

    ε = 0 et family_tag « gaussian » donnent le potentiel gaussien normalisé.
    """

    family_tag: str
    epsilon: float
    c_minus: float
    c_plus: float
    mean: float
    log_norm: float

    def eval(self, t):
        t = np.asarray(t)
        out = 0.5 * t * t + self.log_norm
        if self.epsilon:
            out = out + self.epsilon * _log_cosh(t)
        return out

    def grad(self, t):
        t = np.asarray(t)
        if self.epsilon:
            return t + self.epsilon * np.tanh(t)
        return t * 1.0

    def curv(self, t):
        t = np.asarray(t)
        if self.epsilon:
            th = np.tanh(t)
            return 1.0 + self.epsilon * (1.0 - th * th)
        return np.ones_like(t, dtype=np.result_type(t, 1.0))

    def minorant(self, t):
        """Minorant quadratique V(0) + V'(0)·t + c_minus·t²/2 (log-concavité)."""
        t = np.asarray(t, dtype=float)
        return float(self.eval(0.0)) + float(self.grad(0.0)) * t + 0.5 * self.c_minus * t * t

    def label(self) -> str:
        if self.family_tag == "gaussian":
            return "gaussian"
        return f"smoothed_gaussian({self.epsilon:g})"


def gaussian() -> Potential:
    return Potential("gaussian", 0.0, 1.0, 1.0, 0.0, _LOG_SQRT_2PI)


def smoothed_gaussian(epsilon: float) -> Potential:
    """Famille paire V(t) = t²/2 + ε·ln cosh t, normalisée par quadrature."""
    eps = float(epsilon)
    if not math.isfinite(eps) or eps < 0:
        raise InvalidParameterError(f"ε doit être >= 0 (reçu {epsilon}).")
    if eps > EPSILON_MAX:
        raise InvalidParameterError(f"ε doit être <= {EPSILON_MAX:g} (reçu {epsilon}).")
    return Potential("smoothed_gaussian", eps, 1.0, 1.0 + eps, 0.0, _log_normalizer(eps))


def make_potential(family: str, epsilon: float = 0.0) -> Potential:
    if family == "gaussian":
        return gaussian()
    if family == "smoothed_gaussian":
        return smoothed_gaussian(epsilon)
    raise InvalidParameterError(f"Famille de potentiel inconnue : {family}")


def quadrature_moment(p: Potential, order: int) -> float:
    """∫ tᵏ e^{-V(t)} dt sur [-50, 50]."""
    val, _ = integrate.quad(
        lambda s: s**order * math.exp(-float(p.eval(s))), -QUAD_BOUND, QUAD_BOUND, limit=200
    )
    return val


def quadrature_mean(p: Potential) -> float:
    return quadrature_moment(p, 1) / quadrature_moment(p, 0)


def site_variance(p: Potential) -> float:
    if p.family_tag == "gaussian":
        return 1.0
    m = quadrature_mean(p)
    return quadrature_moment(p, 2) / quadrature_moment(p, 0) - m * m


# ═══════════════════════════════════════════════════════════════════════════════
# POTENTIEL DE PAIRE  V_{x,y}(η_x + η_y)
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class PairPotential:
    """V_{x,y}(s) = a·s²/2, compté une fois par arête non orientée."""

    coupling: float

    @property
    def c2_minus(self) -> float:
        return self.coupling

    @property
    def c2_plus(self) -> float:
        return self.coupling

    def eval(self, s):
        s = np.asarray(s)
        return 0.5 * self.coupling * s * s

    def grad(self, s):
        return self.coupling * np.asarray(s)

    def curv(self, s):
        s = np.asarray(s)
        return np.full(s.shape, self.coupling)


def quadratic_pair(coupling: float) -> PairPotential:
    a = float(coupling)
    if not math.isfinite(a) or a < 0:
        raise InvalidParameterError(f"Le couplage de paire doit être >= 0 (reçu {coupling}).")
    return PairPotential(a)


# ═══════════════════════════════════════════════════════════════════════════════
# MESURE DE GIBBS
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class GibbsSpec:
    graph: Graph
    site: Potential
    pair: PairPotential | None = None

    @property
    def is_product(self) -> bool:
        return self.pair is None

    def require_product(self, operation: str) -> None:
        if self.pair is not None:
            raise InvalidInputError(
                f"{operation} n'accepte que des potentiels à un site (paire fournie)."
            )

    def hamiltonian(self, eta) -> np.ndarray:
        eta = np.asarray(eta)
        h = self.site.eval(eta).sum(axis=-1)
        if self.pair is not None:
            s = eta[..., self.graph.tails] + eta[..., self.graph.heads]
            h = h + self.pair.eval(s).sum(axis=-1)
        return h

    def grad_H(self, eta) -> np.ndarray:
        """∂_x H pour chaque sommet, forme (..., |V|)."""
        eta = np.asarray(eta)
        out = self.site.grad(eta)
        if self.pair is not None:
            idx, sgn_ = self.graph.vertex_edges
            s = eta[..., self.graph.tails] + eta[..., self.graph.heads]
            pg = self.pair.grad(s)
            out = out + (pg[..., idx] * (sgn_ != 0)).sum(axis=-1)
        return out

    def edge_drift(self, eta) -> np.ndarray:
        """∂_b H = ∂_tail H - ∂_head H pour b ∈ B⃗, forme (..., |E|)."""
        gh = self.grad_H(eta)
        return gh[..., self.graph.tails] - gh[..., self.graph.heads]

    def hessian_matrix(self, eta) -> np.ndarray:
        """Hessienne de H en une configuration (matrice |V|×|V|)."""
        eta = np.asarray(eta, dtype=float)
        q = np.diag(self.site.curv(eta))
        if self.pair is not None:
            tails, heads = self.graph.tails, self.graph.heads
            a = self.pair.curv(eta[tails] + eta[heads])
            np.add.at(q, (tails, tails), a)
            np.add.at(q, (heads, heads), a)
            np.add.at(q, (tails, heads), a)
            np.add.at(q, (heads, tails), a)
        return q

    def label(self) -> str:
        if self.pair is None:
            return self.site.label()
        return f"{self.site.label()}+pair({self.pair.coupling:g})"


# ═══════════════════════════════════════════════════════════════════════════════
# ÉCHANTILLONNAGE (rejet depuis l'enveloppe gaussienne)
# ═══════════════════════════════════════════════════════════════════════════════

def _rejection(p: Potential, rng: np.random.Generator, size: int) -> np.ndarray:
    loc = -float(p.grad(0.0)) / p.c_minus
    scale = 1.0 / math.sqrt(p.c_minus)
    out = np.empty(size)
    pending = np.arange(size)
    proposals = 0
    accepted = 0
    while pending.size:
        proposals += 1
        if proposals > MAX_PROPOSALS:
            raise SamplerExhaustedError(
                f"Échantillonneur épuisé : {MAX_PROPOSALS} propositions sans acceptation."
            )
        t = rng.normal(loc, scale, size=pending.size)
        log_acc = -(p.eval(t) - p.minorant(t))
        u = rng.random(pending.size)
        ok = np.log(u) < log_acc
        out[pending[ok]] = t[ok]
        accepted += int(ok.sum())
        pending = pending[~ok]
    logger.debug("rejet %s : %d tirages, %d tours", p.label(), accepted, proposals)
    return out


def sample_site(p: Potential, rng: np.random.Generator) -> float:
    """Un tirage exact de la densité e^{-V}."""
    return float(_rejection(p, rng, 1)[0])


def sample_product(spec: GibbsSpec, rng: np.random.Generator, n_replicas: int) -> np.ndarray:
    """n_replicas environnements i.i.d. sous la mesure produit, forme (R, |V|)."""
    n = spec.graph.n_vertices
    return _rejection(spec.site, rng, n_replicas * n).reshape(n_replicas, n)


# ═══════════════════════════════════════════════════════════════════════════════
# CRITÈRES D'ORDRE
# ═══════════════════════════════════════════════════════════════════════════════

class OrderCondition(NamedTuple):
    holds: bool
    margin: float


def order_preservation_condition(
    c1m: float, c1p: float, c2m: float, c2p: float, g: Graph
) -> OrderCondition:
    """inf_x inf_{y∼x} [Σ_{z∼y} C₂₋] - C₂₊ + C₁₋ ≥ 0 et C₂₋ ≥ 0."""
    if c1m > c1p or c2m > c2p:
        raise InvalidParameterError("Bornes incohérentes : il faut c1m <= c1p et c2m <= c2p.")
    margin = min(
        g.degrees[y] * c2m for x in range(g.n_vertices) for y in g.adjacency[x]
    ) - c2p + c1m
    margin = float(margin)
    return OrderCondition(bool(margin >= 0 and c2m >= 0), margin)


def holley_defect(spec: GibbsSpec, eta, sigma) -> float:
    """H(η∨σ) + H(η∧σ) - H(η) - H(σ) ; le critère de Holley demande ≤ 0."""
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if eta.shape != sigma.shape or eta.shape[-1] != spec.graph.n_vertices:
        raise InvalidInputError("η et σ doivent avoir une entrée par sommet.")
    hi, lo = np.maximum(eta, sigma), np.minimum(eta, sigma)
    v = spec.site.eval
    site = math.fsum((v(hi) + v(lo) - (v(eta) + v(sigma))).ravel())
    if spec.pair is None:
        return site
    t, h = spec.graph.tails, spec.graph.heads
    w = spec.pair.eval
    pair = math.fsum(
        (w(hi[t] + hi[h]) + w(lo[t] + lo[h]) - w(eta[t] + eta[h]) - w(sigma[t] + sigma[h])).ravel()
    )
    return site + pair
