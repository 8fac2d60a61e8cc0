from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

EXPERIMENT_NAMES = (
    "theorem", "lemma-equality", "fkg", "corollary", "order",
    "negcorr", "kite", "gap", "intertwining", "all",
)


class GraphConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cycle", "torus"] = "cycle"
    side: int = Field(8, ge=3, description="n pour un cycle, côté pour un tore")
    dim: int | None = Field(None, description="1 ou 2 ; déduit du type si absent")

    @model_validator(mode="after")
    def _resolve_dim(self):
        if self.dim is None:
            self.dim = 1 if self.kind == "cycle" else 2
        if self.kind == "cycle" and self.dim != 1:
            raise ValueError("un cycle est de dimension 1")
        if self.dim not in (1, 2):
            raise ValueError("dim doit valoir 1 ou 2")
        return self

    @property
    def n_vertices(self) -> int:
        return self.side ** self.dim


class PotentialConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["gaussian", "smoothed_gaussian"] = "gaussian"
    epsilon: float = Field(0.0, ge=0.0, le=10.0)
    pair_coupling: float | None = Field(None, ge=0.0, description="a dans V_{x,y}(s) = a·s²/2")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: Literal[EXPERIMENT_NAMES] = "theorem"  # type: ignore[valid-type]
    graph: GraphConfig = Field(default_factory=GraphConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    t_list: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0])
    x: int = Field(0, ge=0)
    y: int = Field(1, ge=0)
    replicas: int = Field(100000, ge=100, description="minimum des estimateurs : 100")
    dt: float = Field(1e-3, gt=0.0)
    seed: int = Field(42, ge=0, lt=2**64)
    output: str = "glhs_out"
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self):
        n = self.graph.n_vertices
        if self.x >= n:
            raise ValueError(f"x={self.x} hors de 0..{n - 1}")
        if self.y >= n:
            raise ValueError(f"y={self.y} hors de 0..{n - 1}")
        if any(t < 0 for t in self.t_list):
            raise ValueError("les temps doivent être >= 0")
        self.t_list = sorted(self.t_list)
        return self


# ─────────────────────────────────────────────────────────────────────────────
# Charges utiles HTTP
# ─────────────────────────────────────────────────────────────────────────────

class RunRequest(BaseModel):
    config: dict = Field(..., description="Configuration d'expérience (mêmes clés que le fichier JSON)")

    model_config = {"json_schema_extra": {
        "examples": [
            {"config": {"experiment": "kite", "graph": {"kind": "torus", "side": 16}}},
            {"config": {"experiment": "gap"}},
            {"config": {"experiment": "theorem", "replicas": 20000, "t_list": [0.5, 1.0]}},
        ]
    }}


class RunSummary(BaseModel):
    id: int
    experiment: str
    seed: int
    exit_code: int
    created_at: str

    model_config = ConfigDict(from_attributes=True)


class RunInfo(RunSummary):
    config: dict
    summary: dict
