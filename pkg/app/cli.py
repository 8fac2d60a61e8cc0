"""Commande `glhs <expérience> --config <fichier> [--seed N] [--replicas N] [--out PRÉFIXE]`."""

from __future__ import annotations

import argparse
import logging
import sys

from app import config
from app.engine.errors import GLHSError
from app.runner import EXIT_CONFIG, EXIT_FAILED, run_source
from app.schemas import EXPERIMENT_NAMES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glhs",
        description="Laboratoire de vérification pour la dynamique de Ginzburg–Landau.",
    )
    parser.add_argument("experiment", nargs="?", choices=EXPERIMENT_NAMES,
                        help="expérience (sinon celle du fichier de configuration)")
    parser.add_argument("--config", help="fichier JSON ou JSON en ligne")
    parser.add_argument("--seed", type=int, help="graine maître (prioritaire sur GLHS_SEED)")
    parser.add_argument("--replicas", type=int, help="nombre de répliques")
    parser.add_argument("--out", dest="output", help="préfixe des fichiers de sortie")
    parser.add_argument("--workers", type=int, help="taille du pool de threads")
    parser.add_argument("--log-level", default=config.GLHS_LOG_LEVEL, help="niveau de journalisation")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s : %(message)s",
        stream=sys.stderr,
    )
    overrides = {
        "experiment": args.experiment,
        "seed": args.seed,
        "replicas": args.replicas,
        "output": args.output,
        "workers": args.workers,
    }
    try:
        outcome = run_source(args.config or "{}", overrides)
    except GLHSError as exc:
        print(f"Erreur : {exc}", file=sys.stderr)
        return EXIT_FAILED
    if outcome.exit_code == EXIT_CONFIG:
        print(f"Erreur de configuration ({outcome.error})", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{outcome.csv_path} ; {outcome.summary_path} ; "
          f"{outcome.summary['n_failed']} verdict(s) en échec")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
