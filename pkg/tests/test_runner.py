"""Tests du chargement de configuration, des sorties CSV/JSON et de la commande glhs."""

import json

import pytest

from app import config
from app.cli import main
from app.engine import logic
from app.engine.errors import ConfigError, InsufficientSignalError, NumericalBlowupError
from app.runner import (
    CSV_COLUMNS,
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_OK,
    load_config,
    render_csv,
    run,
    run_source,
)

KITE = {"experiment": "kite", "graph": {"kind": "torus", "side": 8}, "t_list": [0.25, 0.5]}
SMALL_THEOREM = {"experiment": "theorem", "replicas": 300, "dt": 0.01, "t_list": [0.25]}


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("GLHS_SEED", raising=False)


# ─────────────────────────────────────────────────────────────────────────────
# Configuration
# ─────────────────────────────────────────────────────────────────────────────
def test_defaults():
    cfg = load_config({})
    assert cfg.experiment == "theorem"
    assert cfg.seed == 42
    assert cfg.replicas == 100000
    assert cfg.dt == 1e-3
    assert cfg.graph.kind == "cycle" and cfg.graph.side == 8 and cfg.graph.dim == 1
    assert cfg.potential.family == "gaussian"
    assert cfg.t_list == [0.25, 0.5, 1.0, 2.0]
    assert cfg.output == "glhs_out"


def test_torus_dim_resolved():
    assert load_config({"graph": {"kind": "torus", "side": 4}}).graph.dim == 2


def test_unknown_key_named():
    with pytest.raises(ConfigError) as exc:
        load_config({"experiment": "kite", "replica": 10})
    assert "replica" in str(exc.value)
    assert exc.value.location() == "replica"


def test_nested_field_path():
    with pytest.raises(ConfigError) as exc:
        load_config({"graph": {"kind": "cycle", "side": 2}})
    assert exc.value.field_path == "graph.side"


def test_replicas_minimum():
    with pytest.raises(ConfigError) as exc:
        load_config({"replicas": 50})
    assert exc.value.field_path == "replicas"


def test_vertex_out_of_range():
    with pytest.raises(ConfigError):
        load_config({"x": 8})


def test_epsilon_out_of_range():
    with pytest.raises(ConfigError) as exc:
        load_config({"potential": {"family": "smoothed_gaussian", "epsilon": 12}})
    assert exc.value.field_path == "potential.epsilon"


def test_invalid_json_position():
    with pytest.raises(ConfigError) as exc:
        load_config('{\n  "experiment": "kite",\n  "seed": }')
    assert exc.value.line == 3
    assert exc.value.location().startswith("ligne 3")


def test_config_file(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(KITE), encoding="utf-8")
    assert load_config(str(path)).experiment == "kite"


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.json"))


def test_non_object_json():
    with pytest.raises(ConfigError):
        load_config("[1, 2]")


def test_seed_precedence(monkeypatch):
    raw = {"seed": 1}
    assert load_config(raw).seed == 1
    monkeypatch.setenv("GLHS_SEED", "2")
    assert load_config(raw).seed == 2
    assert load_config(raw, {"seed": 3}).seed == 3


def test_invalid_env_seed(monkeypatch):
    monkeypatch.setenv("GLHS_SEED", "abc")
    with pytest.raises(ConfigError) as exc:
        load_config({})
    assert exc.value.field_path == "GLHS_SEED"


def test_full_64_bit_seed():
    assert load_config({"seed": 2**64 - 1}).seed == 2**64 - 1
    with pytest.raises(ConfigError):
        load_config({"seed": 2**64})


# ─────────────────────────────────────────────────────────────────────────────
# Sorties
# ─────────────────────────────────────────────────────────────────────────────
def test_render_csv_format():
    text = render_csv([{"experiment": "kite", "value": 0.1, "x": 3, "verdict": None}])
    header, line = text.split("\n")[:2]
    assert header == ",".join(CSV_COLUMNS)
    cells = line.split(",")
    assert cells[CSV_COLUMNS.index("value")] == "0.10000000000000001"
    assert cells[CSV_COLUMNS.index("x")] == "3"
    assert cells[CSV_COLUMNS.index("verdict")] == ""
    assert "\r" not in text


def test_run_kite_writes_outputs(tmp_path):
    cfg = load_config(KITE, {"output": str(tmp_path / "res" / "kite")})
    outcome = run(cfg)
    assert outcome.exit_code == EXIT_OK
    assert outcome.csv_path.read_text(encoding="utf-8") == outcome.csv_text
    summary = json.loads(outcome.summary_path.read_text(encoding="utf-8"))
    assert summary["all_pass"] is True
    assert summary["n_failed"] == 0
    assert summary["config"]["seed"] == 42
    assert {vd["claim"] for vd in summary["verdicts"]} == {
        "kite-edge-kernel", "kite-compensation", "kite-constancy"}
    assert outcome.csv_text.splitlines()[0].split(",") == list(CSV_COLUMNS)


def test_run_engine_refusal_writes_nothing(tmp_path):
    cfg = load_config({"experiment": "negcorr", "x": 0, "y": 4, "output": str(tmp_path / "nc")})
    outcome = run(cfg)
    assert outcome.exit_code == EXIT_CONFIG
    assert "y" in outcome.error
    assert list(tmp_path.iterdir()) == []


def test_run_source_reports_config_error():
    outcome = run_source({"graph": {"side": 1}}, write=False)
    assert outcome.exit_code == EXIT_CONFIG
    assert outcome.error.startswith("graph.side")


def test_failing_verdict_gives_exit_one(monkeypatch):
    def failing(v):
        return {"rows": [], "verdicts": [{"claim": "kite", "pass": False, "margin_sigmas": -1.0}]}

    monkeypatch.setitem(logic.EXPERIMENTS, "kite", failing)
    outcome = run(load_config(KITE), write=False)
    assert outcome.exit_code == EXIT_FAILED
    assert outcome.summary["n_failed"] == 1


def test_informational_verdict_does_not_fail_run(monkeypatch):
    def drifting(v):
        return {"rows": [], "verdicts": [
            {"claim": "kite-edge-kernel", "pass": True, "margin_sigmas": 1.0, "gating": True},
            {"claim": "kite-constancy", "pass": False, "margin_sigmas": -0.5, "gating": False},
        ]}

    monkeypatch.setitem(logic.EXPERIMENTS, "kite", drifting)
    outcome = run(load_config(KITE), write=False)
    assert outcome.exit_code == EXIT_OK
    assert outcome.summary["all_pass"] is True
    assert outcome.summary["n_failed"] == 0


def test_refused_estimate_is_a_failed_verdict(monkeypatch, tmp_path):
    def weak(v):
        raise InsufficientSignalError("Signal insuffisant à t=2.")

    monkeypatch.setitem(logic.EXPERIMENTS, "kite", weak)
    outcome = run(load_config(KITE, {"output": str(tmp_path / "weak")}))
    assert outcome.exit_code == EXIT_FAILED
    assert outcome.csv_path.is_file()
    refused = outcome.summary["verdicts"]
    assert [vd["claim"] for vd in refused] == ["kite-refused"]
    assert refused[0]["pass"] is False
    assert "Signal insuffisant" in refused[0]["inputs"]["error"]
    assert "kite-refused" in outcome.csv_text


# ─────────────────────────────────────────────────────────────────────────────
# Déterminisme
# ─────────────────────────────────────────────────────────────────────────────
def test_same_seed_same_csv():
    a = run(load_config(SMALL_THEOREM), write=False).csv_text
    b = run(load_config(SMALL_THEOREM), write=False).csv_text
    assert a == b


def test_seed_changes_csv():
    a = run(load_config(SMALL_THEOREM), write=False).csv_text
    b = run(load_config(SMALL_THEOREM, {"seed": 43}), write=False).csv_text
    assert a != b


def test_worker_count_does_not_change_csv(monkeypatch):
    monkeypatch.setattr(config, "GLHS_BATCH_SIZE", 64)
    a = run(load_config(SMALL_THEOREM, {"workers": 1}), write=False).csv_text
    b = run(load_config(SMALL_THEOREM, {"workers": 3}), write=False).csv_text
    assert a == b


# ─────────────────────────────────────────────────────────────────────────────
# Commande glhs
# ─────────────────────────────────────────────────────────────────────────────
def test_cli_kite(tmp_path, capsys):
    out = tmp_path / "cli"
    code = main(["kite", "--config", json.dumps(KITE), "--out", str(out)])
    assert code == EXIT_OK
    assert (tmp_path / "cli.csv").is_file()
    assert (tmp_path / "cli.summary.json").is_file()
    assert "0 verdict(s) en échec" in capsys.readouterr().out


def test_cli_experiment_overrides_file(tmp_path):
    code = main(["kite", "--config", json.dumps(SMALL_THEOREM),
                 "--out", str(tmp_path / "o")])
    summary = json.loads((tmp_path / "o.summary.json").read_text(encoding="utf-8"))
    assert code == EXIT_OK
    assert summary["experiment"] == "kite"


def test_cli_config_error(tmp_path, capsys):
    code = main(["--config", '{"foo": 1}', "--out", str(tmp_path / "bad")])
    assert code == EXIT_CONFIG
    assert "Clé inconnue : foo" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_cli_runtime_error(monkeypatch, capsys):
    def blowup(v):
        raise NumericalBlowupError("Dérive non finie à t=0.5.", state={"time": 0.5})

    monkeypatch.setitem(logic.EXPERIMENTS, "kite", blowup)
    assert main(["kite"]) == EXIT_FAILED
    assert "Dérive non finie" in capsys.readouterr().err
