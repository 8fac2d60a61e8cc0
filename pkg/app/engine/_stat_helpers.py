"""
Primitives statistiques pour les estimateurs Monte Carlo.

Moyennes par lots (√n lots contigus), covariances centrées empiriquement,
marges en écarts-types. Les réductions passent par numpy (sommation par
paires) et ne dépendent pas de l'ordre d'exécution des lots.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from app.engine.errors import InsufficientReplicasError

SIGMA_BAND = 3.0


class BatchMeans(NamedTuple):
    mean: float
    stderr: float
    n: int
    n_batches: int


# ═══════════════════════════════════════════════════════════════════════════════
# MOYENNES PAR LOTS
# ═══════════════════════════════════════════════════════════════════════════════

def n_batches_for(n: int) -> int:
    return max(2, math.isqrt(n))


def batch_means(values, n_batches: int | None = None) -> BatchMeans:
    """Moyenne et erreur standard par lots contigus (√n lots par défaut)."""
    v = np.asarray(values, dtype=float).ravel()
    n = v.size
    if n < 2:
        raise InsufficientReplicasError(f"Au moins 2 valeurs sont requises (reçu {n}).")
    k = min(n, n_batches or n_batches_for(n))
    means = np.array([chunk.mean() for chunk in np.array_split(v, k)])
    stderr = float(means.std(ddof=1) / math.sqrt(k))
    return BatchMeans(float(v.mean()), stderr, n, k)


def centered_products(a, b) -> np.ndarray:
    """(a - ā)(b - b̄) par réplique ; moyennes empiriques soustraites."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (a - a.mean()) * (b - b.mean())


def batch_covariance(a, b) -> BatchMeans:
    return batch_means(centered_products(a, b))


def binomial_stderr(hits) -> BatchMeans:
    """Moyenne d'indicatrices avec erreur √(p(1-p)/n)."""
    h = np.asarray(hits, dtype=float).ravel()
    n = h.size
    if n < 2:
        raise InsufficientReplicasError(f"Au moins 2 valeurs sont requises (reçu {n}).")
    p = float(h.mean())
    return BatchMeans(p, math.sqrt(max(p * (1.0 - p), 0.0) / n), n, n)


# ═══════════════════════════════════════════════════════════════════════════════
# MARGES
# ═══════════════════════════════════════════════════════════════════════════════

def sigma_margin(slack: float, sigma: float) -> float:
    """Marge signée en écarts-types ; slack ≥ 0 signifie « dans la borne »."""
    if sigma == 0:
        return math.inf if slack >= 0 else -math.inf
    return slack / sigma
