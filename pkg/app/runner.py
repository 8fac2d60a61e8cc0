"""
Chargement de la configuration et orchestration d'une expérience.

Codes de sortie : 0 si tous les verdicts passent, 1 si l'un échoue (une
estimation refusée compte comme un échec), 2 sur erreur de configuration
(aucun fichier écrit dans ce cas).
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from app import config
from app.engine.errors import ConfigError
from app.engine.logic import EXPERIMENTS, STATISTICAL_REFUSALS, refusal_result
from app.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "experiment", "graph", "side", "dim", "potential", "epsilon", "t", "x", "y",
    "quantity", "value", "stderr", "replicas", "oracle", "verdict", "margin_sigmas", "seed",
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION
# ═══════════════════════════════════════════════════════════════════════════════

def _parse(source: str | Path | dict) -> dict:
    if isinstance(source, dict):
        return dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise ConfigError(f"Fichier de configuration introuvable : {text}")
        text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON invalide : {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(raw, dict):
        raise ConfigError("La configuration doit être un objet JSON.")
    return raw


def load_config(source: str | Path | dict, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Configuration validée, défauts remplis.

    Priorité de la graine : fichier < GLHS_SEED < option --seed (dans overrides).
    """
    raw = _parse(source)
    try:
        env_seed = config.env_seed()
    except ValueError:
        raise ConfigError("GLHS_SEED doit être un entier.", field_path="GLHS_SEED")
    if env_seed is not None:
        raw["seed"] = env_seed
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        path = ".".join(str(p) for p in err["loc"]) or "<racine>"
        if err["type"] == "extra_forbidden":
            message = f"Clé inconnue : {err['loc'][-1]}"
        else:
            message = err["msg"]
        raise ConfigError(message, field_path=path)


# ═══════════════════════════════════════════════════════════════════════════════
# SORTIES
# ═══════════════════════════════════════════════════════════════════════════════

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    return str(obj)


def render_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, ensure_ascii=False, default=_json_default) + "\n"


@dataclass
class RunOutcome:
    exit_code: int
    summary: dict = field(default_factory=dict)
    csv_text: str = ""
    csv_path: Path | None = None
    summary_path: Path | None = None
    error: str | None = None


# ═══════════════════════════════════════════════════════════════════════════════
# EXÉCUTION
# ═══════════════════════════════════════════════════════════════════════════════

def run(cfg: ExperimentConfig, write: bool = True) -> RunOutcome:
    """Exécute l'expérience ; écrit <output>.csv et <output>.summary.json."""
    v = cfg.model_dump()
    name = v["experiment"]
    logger.info("expérience %s (graine %d, %d répliques)", name, v["seed"], v["replicas"])
    try:
        result = EXPERIMENTS[name](v)
    except STATISTICAL_REFUSALS as exc:
        logger.warning("expérience %s : estimation refusée (%s)", name, exc)
        result = refusal_result(v, exc)
    except ConfigError as exc:
        return RunOutcome(EXIT_CONFIG, error=f"{exc.location()} : {exc}")
    except ValueError as exc:
        # combinaison de paramètres refusée par le moteur
        return RunOutcome(EXIT_CONFIG, error=str(exc))

    verdicts = result["verdicts"]
    # les verdicts informatifs (gating faux) ne décident pas du code de sortie
    failed = [vd for vd in verdicts if not vd["pass"] and vd.get("gating", True)]
    all_pass = not failed
    exit_code = EXIT_OK if all_pass else EXIT_FAILED
    csv_text = render_csv(result["rows"])
    summary = {
        "experiment": name,
        "config": v,
        "verdicts": verdicts,
        "all_pass": all_pass,
        "n_failed": len(failed),
        "exit_code": exit_code,
    }
    outcome = RunOutcome(exit_code, summary, csv_text)
    if write:
        prefix = Path(v["output"])
        if prefix.parent and not prefix.parent.exists():
            prefix.parent.mkdir(parents=True, exist_ok=True)
        outcome.csv_path = prefix.with_name(prefix.name + ".csv")
        outcome.summary_path = prefix.with_name(prefix.name + ".summary.json")
        outcome.csv_path.write_text(csv_text, encoding="utf-8", newline="")
        outcome.summary_path.write_text(render_summary(summary), encoding="utf-8", newline="")
    logger.info("expérience %s terminée : code %d", name, exit_code)
    return outcome


def run_source(source, overrides: dict[str, Any] | None = None, write: bool = True) -> RunOutcome:
    try:
        cfg = load_config(source, overrides)
    except ConfigError as exc:
        return RunOutcome(EXIT_CONFIG, error=f"{exc.location()} : {exc}")
    return run(cfg, write=write)

