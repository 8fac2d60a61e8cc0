"""
Plan de flux aléatoires : dérivation par compteur (SeedSequence + Philox).

Chaque lot de répliques possède ses propres sous-flux, indexés par
(graine maître, indice de lot, sous-flux). La dérivation est pure : le même
plan redonne les mêmes nombres quel que soit le nombre de workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

from app.engine.errors import InvalidParameterError

logger = logging.getLogger(__name__)

T = TypeVar("T")

SUBSTREAMS = {
    "init": 0,
    "env": 1,
    "walker": 2,
    "probe": 3,
}

_SEED_MAX = 2**64


@dataclass(frozen=True)
class RngPlan:
    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _SEED_MAX:
            raise InvalidParameterError(
                f"La graine doit être un entier 64 bits positif (reçu {self.master_seed})."
            )

    def seed_sequence(self, index: int, substream: str) -> np.random.SeedSequence:
        try:
            tag = SUBSTREAMS[substream]
        except KeyError:
            raise InvalidParameterError(f"Sous-flux inconnu : {substream}")
        if index < 0:
            raise InvalidParameterError("L'indice de flux doit être >= 0.")
        return np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(index), tag)
        )

    def generator(self, index: int, substream: str) -> np.random.Generator:
        """Générateur Philox du couple (indice, sous-flux)."""
        return np.random.Generator(np.random.Philox(self.seed_sequence(index, substream)))


def batch_sizes(n_replicas: int, batch_size: int) -> list[int]:
    """Découpage fixe des répliques en lots (le dernier peut être plus court)."""
    if batch_size <= 0:
        raise InvalidParameterError("La taille de lot doit être > 0.")
    full, rest = divmod(int(n_replicas), int(batch_size))
    sizes = [int(batch_size)] * full
    if rest:
        sizes.append(rest)
    return sizes


def map_batches(fn: Callable[[int], T], n_batches: int, workers: int = 1) -> list[T]:
    """Applique `fn` à chaque indice de lot ; résultats dans l'ordre des lots."""
    if workers <= 1 or n_batches <= 1:
        return [fn(i) for i in range(n_batches)]
    logger.debug("map_batches : %d lots sur %d workers", n_batches, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_batches)))
