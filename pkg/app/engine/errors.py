"""
Hiérarchie d'exceptions du moteur.

Les erreurs de paramètres héritent de ValueError : la couche HTTP les traduit
en 422 comme n'importe quelle variable invalide. Les erreurs numériques ou
internes héritent de RuntimeError.
"""

from __future__ import annotations

from typing import Any


class GLHSError(Exception):
    """Racine de toutes les erreurs du laboratoire."""


# ─────────────────────────────────────────────────────────────────────────────
# Entrées invalides
# ─────────────────────────────────────────────────────────────────────────────

class InvalidSizeError(GLHSError, ValueError):
    pass


class InvalidParameterError(GLHSError, ValueError):
    pass


class InvalidInputError(GLHSError, ValueError):
    pass


class QueryError(GLHSError, ValueError):
    pass


class DimensionCapError(GLHSError, ValueError):
    pass


class InsufficientReplicasError(GLHSError, ValueError):
    pass


class DegenerateEstimateError(GLHSError, ValueError):
    pass


class InsufficientSignalError(GLHSError, ValueError):
    pass


class ConfigError(GLHSError, ValueError):
    """Configuration rejetée ; porte le chemin du champ ou la position."""

    def __init__(
        self,
        message: str,
        *,
        field_path: str | None = None,
        line: int | None = None,
        column: int | None = None,
    ):
        super().__init__(message)
        self.field_path = field_path
        self.line = line
        self.column = column

    def location(self) -> str:
        if self.line is not None:
            return f"ligne {self.line}, colonne {self.column}"
        if self.field_path:
            return self.field_path
        return "<racine>"


# ─────────────────────────────────────────────────────────────────────────────
# Erreurs numériques / internes
# ─────────────────────────────────────────────────────────────────────────────

class NumericalBlowupError(GLHSError, RuntimeError):
    """Dérive non finie pendant l'intégration ; `state` garde le diagnostic."""

    def __init__(self, message: str, state: dict[str, Any] | None = None):
        super().__init__(message)
        self.state = state or {}


class SamplerExhaustedError(GLHSError, RuntimeError):
    pass


class RateBoundViolationError(GLHSError, RuntimeError):
    pass
