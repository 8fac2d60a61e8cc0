import json

from fastapi import Depends, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from fastapi.routing import APIRouter
from sqlalchemy.orm import Session

from app.database import get_db, init_db
from app.engine.errors import ConfigError
from app.engine.logic import EXPERIMENT_META
from app.models import Run
from app.runner import EXIT_CONFIG, load_config, render_summary, run
from app.schemas import RunInfo, RunRequest, RunSummary

# ─────────────────────────────────────────────────────────────────────────────
# API Router : toutes les routes sous /api
# ─────────────────────────────────────────────────────────────────────────────
api = APIRouter(prefix="/api")


@api.get("/health")
def health():
    return {"status": "ok"}


@api.get("/experiments")
def list_experiments():
    return {"experiments": EXPERIMENT_META}


def _run_summary(r: Run) -> dict:
    return {
        "id": r.id,
        "experiment": r.experiment,
        "seed": int(r.seed),
        "exit_code": r.exit_code,
        "created_at": r.created_at.isoformat(),
    }


def _run_info(r: Run) -> dict:
    out = _run_summary(r)
    out["config"] = r.config_dict()
    out["summary"] = r.summary_dict()
    return out


def _get_run(db: Session, run_id: int) -> Run:
    r = db.query(Run).filter(Run.id == run_id).first()
    if not r:
        raise HTTPException(status_code=404, detail="Exécution introuvable.")
    return r


@api.post("/run", response_model=RunInfo, status_code=201)
def create_run(payload: RunRequest, db: Session = Depends(get_db)):
    try:
        cfg = load_config(payload.config)
    except ConfigError as exc:
        raise HTTPException(
            status_code=422,
            detail=f"Erreur de configuration ({exc.location()}) : {exc}",
        )

    outcome = run(cfg, write=False)
    if outcome.exit_code == EXIT_CONFIG:
        raise HTTPException(status_code=422, detail=f"Erreur dans la configuration : {outcome.error}")

    r = Run(
        experiment=cfg.experiment,
        seed=str(cfg.seed),
        config=json.dumps(cfg.model_dump()),
        summary=render_summary(outcome.summary),
        csv_text=outcome.csv_text,
        exit_code=outcome.exit_code,
    )
    db.add(r)
    db.commit()
    db.refresh(r)
    return _run_info(r)


@api.get("/runs")
def list_runs(db: Session = Depends(get_db)):
    runs = db.query(Run).order_by(Run.id.desc()).all()
    return {"runs": [RunSummary(**_run_summary(r)).model_dump() for r in runs]}


@api.get("/runs/{run_id}", response_model=RunInfo)
def get_run(run_id: int, db: Session = Depends(get_db)):
    return _run_info(_get_run(db, run_id))


@api.get("/runs/{run_id}/csv", response_class=PlainTextResponse)
def get_run_csv(run_id: int, db: Session = Depends(get_db)):
    return PlainTextResponse(_get_run(db, run_id).csv_text, media_type="text/csv")


@api.delete("/runs/{run_id}", status_code=204)
def delete_run(run_id: int, db: Session = Depends(get_db)):
    r = _get_run(db, run_id)
    db.delete(r)
    db.commit()


# ─────────────────────────────────────────────────────────────────────────────
# Application FastAPI
# ─────────────────────────────────────────────────────────────────────────────
app = FastAPI(
    title="GLHS : laboratoire Ginzburg–Landau",
    description=(
        "Simulation de la dynamique conservative et vérification numérique "
        "des identités de covariance. Chaque exécution est enregistrée."
    ),
    version="1.0.0",
    docs_url="/api/docs",
    openapi_url="/api/openapi.json",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
def on_startup():
    init_db()


app.include_router(api)
