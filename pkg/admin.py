#!/usr/bin/env python3
"""Script d'administration CLI pour le registre des exécutions GLHS."""

import json
import sys

from app.database import init_db, session_scope
from app.models import Run


def list_runs():
    """Afficher toutes les exécutions."""
    with session_scope() as db:
        runs = db.query(Run).order_by(Run.id).all()
        if not runs:
            print("Aucune exécution enregistrée.")
            return
        print(f"{'ID':<5} {'Expérience':<16} {'Graine':<22} {'Code':<6} {'Date'}")
        print("-" * 75)
        for r in runs:
            print(f"{r.id:<5} {r.experiment:<16} {r.seed:<22} {r.exit_code:<6} {r.created_at:%Y-%m-%d %H:%M}")


def show_run(run_id: int) -> bool:
    """Verdicts puis configuration effective d'une exécution."""
    with session_scope() as db:
        r = db.get(Run, run_id)
        if r is None:
            print(f"Erreur : exécution #{run_id} introuvable.")
            return False
        print(f"Exécution #{r.id} : {r.experiment} (graine {r.seed}), code {r.exit_code}")
        for vd in r.summary_dict().get("verdicts", []):
            etat = "OK   " if vd["pass"] else "ÉCHEC"
            print(f"  {etat} {vd['claim']:<22} marge {vd['margin_sigmas']:.3g}")
        print()
        print(json.dumps(r.config_dict(), indent=2, ensure_ascii=False))
    return True


def delete_run(run_id: int) -> bool:
    with session_scope() as db:
        r = db.get(Run, run_id)
        if r is None:
            print(f"Erreur : exécution #{run_id} introuvable.")
            return False
        db.delete(r)
    print(f"Exécution #{run_id} supprimée.")
    return True


def print_usage():
    print("Usage : python admin.py <commande> [arguments]")
    print()
    print("Commandes :")
    print("  list          Lister les exécutions")
    print("  show <id>     Afficher les verdicts d'une exécution")
    print("  delete <id>   Supprimer une exécution")


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    init_db()

    if not args:
        print_usage()
        return 1

    command = args[0]
    if command == "list":
        list_runs()
        return 0

    if command in ("show", "delete"):
        if len(args) < 2 or not args[1].isdigit():
            print("Erreur : ID numérique de l'exécution requis.")
            return 1
        action = show_run if command == "show" else delete_run
        return 0 if action(int(args[1])) else 1

    print(f"Commande inconnue : {command}")
    print_usage()
    return 1


if __name__ == "__main__":
    sys.exit(main())
