"""
Registre des expériences : chaque fonction reçoit la configuration effective
(dict) et renvoie {"rows": [...], "verdicts": [...]}.

Les lignes suivent le schéma CSV du runner ; les verdicts sont des dicts
(Verdict.to_dict). Aucune expérience n'écrit de fichier.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from app import config
from app.engine import env_dynamics as dyn
from app.engine import estimators as est
from app.engine import exact_oracle as oracle
from app.engine import potentials as pot
from app.engine.errors import (
    ConfigError,
    DegenerateEstimateError,
    InsufficientSignalError,
    InvalidInputError,
)
from app.engine.graph_core import Graph, build_cycle, build_torus
from app.engine.rng import RngPlan, batch_sizes, map_batches

logger = logging.getLogger(__name__)

FKG_FUNCTIONALS = 10
INTERTWINING_PROBES = 100
INTERTWINING_TOL = 1e-8
KITE_TOL = 1e-9
KITE_DEFAULT_SIDE = 16
GAP_CYCLES = (16, 32, 64)
GAP_FIT_TIMES = (2.0, 2.5, 3.0, 3.5, 4.0)
NEGCORR_DEFAULT_COUPLING = 0.5
PHI_TOL = 1e-4
KITE_DRIFT_TOL = 1e-3

# refus statistiques : vérification en échec, pas configuration invalide
STATISTICAL_REFUSALS = (InsufficientSignalError, DegenerateEstimateError)


# ═══════════════════════════════════════════════════════════════════════════════
# CONSTRUCTION À PARTIR DE LA CONFIGURATION
# ═══════════════════════════════════════════════════════════════════════════════

def build_graph(v: dict) -> Graph:
    g = v["graph"]
    if g["kind"] == "cycle":
        return build_cycle(g["side"])
    return build_torus(g["side"], g["dim"])


def build_spec(v: dict, pair_coupling: float | None = None) -> pot.GibbsSpec:
    p = v["potential"]
    site = pot.make_potential(p["family"], p["epsilon"])
    coupling = p.get("pair_coupling") if pair_coupling is None else pair_coupling
    pair = pot.quadratic_pair(coupling) if coupling is not None else None
    return pot.GibbsSpec(build_graph(v), site, pair)


def _row(v: dict, spec: pot.GibbsSpec, quantity: str, value=None, *, t=None, x=None, y=None,
         stderr=None, replicas=None, oracle_value=None, verdict=None, margin=None) -> dict:
    g = v["graph"]
    return {
        "experiment": v["experiment"],
        "graph": g["kind"],
        "side": g["side"],
        "dim": g["dim"],
        "potential": spec.label(),
        "epsilon": spec.site.epsilon,
        "t": t,
        "x": x,
        "y": y,
        "quantity": quantity,
        "value": value,
        "stderr": stderr,
        "replicas": replicas,
        "oracle": oracle_value,
        "verdict": verdict,
        "margin_sigmas": margin,
        "seed": v["seed"],
    }


def _estimate_row(v, spec, e: est.Estimate) -> dict:
    x = e.x if e.x >= 0 else None
    y = e.y if e.y >= 0 else None
    return _row(v, spec, e.quantity_tag, e.value, t=e.t, x=x, y=y, stderr=e.stderr,
                replicas=e.replicas, oracle_value=e.oracle)


def _verdict_row(v, spec, vd: est.Verdict, *, t=None, x=None, y=None) -> dict:
    name = f"verdict:{vd.claim_tag}" + (f"[{vd.theorem_tag}]" if vd.theorem_tag else "")
    return _row(v, spec, name, t=t, x=x, y=y, verdict="pass" if vd.passed else "fail",
                margin=vd.margin_in_sigmas)


def _integrator(v: dict, times) -> dyn.IntegratorConfig:
    return dyn.IntegratorConfig.for_times(v["dt"], sorted({0.0, *times}), v["seed"])


def _done(rows: list, verdicts: list[est.Verdict]) -> dict:
    for vd in verdicts:
        if not vd.passed:
            log = logger.warning if vd.gating else logger.info
            log("verdict en échec : %s (marge %.3g σ)", vd.claim_tag, vd.margin_in_sigmas)
    return {"rows": rows, "verdicts": [vd.to_dict() for vd in verdicts]}


def refusal_result(v: dict, exc: Exception) -> dict:
    """Estimation refusée en cours de route : un verdict en échec, sans autre mesure."""
    spec = build_spec(v)
    vd = est.Verdict(f"{v['experiment']}-refused", False, -1.0, {"error": str(exc)})
    return _done([_verdict_row(v, spec, vd)], [vd])


# ═══════════════════════════════════════════════════════════════════════════════
# 1. THÉORÈME : (1/C₊)·W ≤ Cov(η_x ; P_tη_y) ≤ (1/C₋)·W
# ═══════════════════════════════════════════════════════════════════════════════
def experience_theorem(v: dict) -> dict:
    spec = build_spec(v)
    spec.require_product("theorem")
    x, y, n = v["x"], v["y"], v["replicas"]
    cfg = _integrator(v, v["t_list"])
    rs = est.simulate_replicas(spec, cfg, n, starts=(x,), workers=v["workers"])
    rows, verdicts = [], []
    checks = [(0.0, x)] + [(t, y) for t in v["t_list"]]
    for t, target in checks:
        vd = est.theorem_sandwich(spec, cfg, x, target, t, n, replicas=rs)
        rows.append(_estimate_row(v, spec, vd.inputs["cov"]))
        rows.append(_estimate_row(v, spec, vd.inputs["walker"]))
        rows.append(_verdict_row(v, spec, vd, t=t, x=x, y=target))
        verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 2. ÉGALITÉ : Cov(V'(η_x) ; P_tη_y) = E[P_x^η(X(t) = y)]
# ═══════════════════════════════════════════════════════════════════════════════
def experience_lemma_equality(v: dict) -> dict:
    spec = build_spec(v)
    spec.require_product("lemma-equality")
    x, y, n = v["x"], v["y"], v["replicas"]
    cfg = _integrator(v, v["t_list"])
    rs = est.simulate_replicas(spec, cfg, n, starts=(x,), workers=v["workers"])
    rows, verdicts = [], []
    for t in v["t_list"]:
        vd = est.lemma_equality_check(spec, cfg, x, y, t, n, replicas=rs)
        rows.append(_estimate_row(v, spec, vd.inputs["cov"]))
        rows.append(_estimate_row(v, spec, vd.inputs["walker"]))
        rows.append(_verdict_row(v, spec, vd, t=t, x=x, y=y))
        verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 3. FKG : Cov(f ; P_t g) ≥ 0 pour f, g croissantes
# ═══════════════════════════════════════════════════════════════════════════════
def random_increasing_functionals(n_vertices: int, count: int,
                                  rng: np.random.Generator) -> list[est.LipschitzSpec]:
    out = []
    for _ in range(count):
        k = int(rng.integers(1, min(3, n_vertices) + 1))
        support = rng.choice(n_vertices, size=k, replace=False)
        coeffs = rng.uniform(0.1, 1.0, size=k)
        out.append(est.LipschitzSpec.from_dict(
            {int(s): float(c) for s, c in zip(support, coeffs)}))
    return out


def experience_fkg(v: dict) -> dict:
    spec = build_spec(v)
    spec.require_product("fkg")
    n = v["replicas"]
    cfg = _integrator(v, v["t_list"])
    rs = est.simulate_replicas(spec, cfg, n, workers=v["workers"])
    probe = RngPlan(v["seed"]).generator(0, "probe")
    fs = random_increasing_functionals(spec.graph.n_vertices, FKG_FUNCTIONALS, probe)
    gs = random_increasing_functionals(spec.graph.n_vertices, FKG_FUNCTIONALS, probe)
    rows, verdicts = [], []
    for t in v["t_list"]:
        for i, (f, g) in enumerate(zip(fs, gs)):
            vd = est.fkg_check(spec, cfg, f, g, t, n, replicas=rs)
            e = vd.inputs["cov"]
            rows.append(_row(v, spec, f"cov_fg[{i}]", e.value, t=t, stderr=e.stderr,
                             replicas=e.replicas))
            rows.append(_verdict_row(v, spec, vd, t=t))
            verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 4. COROLLAIRE : bornes par ‖f‖² et par ‖f‖·‖g‖
# ═══════════════════════════════════════════════════════════════════════════════
def experience_corollary(v: dict) -> dict:
    spec = build_spec(v)
    spec.require_product("corollary")
    x, y, n = v["x"], v["y"], v["replicas"]
    cfg = _integrator(v, v["t_list"])
    starts = tuple(range(spec.graph.n_vertices))
    rs = est.simulate_replicas(spec, cfg, n, starts=starts, workers=v["workers"])
    single = est.LipschitzSpec.from_dict({x: 1.0})
    pair_f = est.LipschitzSpec.from_dict({x: 1.0, y: 1.0})
    g_only = est.LipschitzSpec.from_dict({y: 1.0})
    rows, verdicts = [], []
    for t in v["t_list"]:
        for label, f in (("f=eta_x", single), ("f=eta_x+eta_y", pair_f)):
            vd = est.corollary_bound_check(spec, cfg, f, t, n, replicas=rs)
            rows.append(_row(v, spec, f"cov[{label}]", vd.inputs["cov"], t=t, x=x, y=y,
                             stderr=vd.inputs["sigma"], replicas=rs.n_replicas,
                             oracle_value=vd.inputs["bound"]))
            rows.append(_verdict_row(v, spec, vd, t=t, x=x, y=y))
            verdicts.append(vd)
        vd = est.corollary_cross_check(spec, cfg, single, g_only, t, n, replicas=rs)
        rows.append(_row(v, spec, "cov[f=eta_x,g=eta_y]", vd.inputs["cov"], t=t, x=x, y=y,
                         stderr=vd.inputs["sigma"], replicas=rs.n_replicas,
                         oracle_value=vd.inputs["bound"]))
        rows.append(_verdict_row(v, spec, vd, t=t, x=x, y=y))
        verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 5. PRÉSERVATION DE L'ORDRE (couplage par bruit commun)
# ═══════════════════════════════════════════════════════════════════════════════
def coupled_replicas(spec: pot.GibbsSpec, cfg: dyn.IntegratorConfig, n: int, shift: float = 1.0,
                     workers: int = 1):
    """Par temps d'observation : (min_x φ_x, max Φ) sur toutes les répliques."""
    plan = RngPlan(cfg.seed)
    sizes = batch_sizes(n, config.GLHS_BATCH_SIZE)

    def one_batch(i: int):
        lower = pot.sample_product(spec, plan.generator(i, "init"), sizes[i])
        pair = dyn.CoupledPair(dyn.Environment(lower + shift), dyn.Environment(lower))
        out = dyn.run_coupled(spec, cfg, pair, rng=plan.generator(i, "env"))
        return [(float(p.difference.min()), float(np.max(ph))) for p, ph in out]

    per_batch = map_batches(one_batch, len(sizes), workers)
    return [
        (min(b[k][0] for b in per_batch), max(b[k][1] for b in per_batch))
        for k in range(len(cfg.steps))
    ]


def experience_order(v: dict) -> dict:
    spec = build_spec(v)
    rows, verdicts = [], []
    c2m = c2p = spec.pair.coupling if spec.pair is not None else 0.0
    cond = pot.order_preservation_condition(spec.site.c_minus, spec.site.c_plus, c2m, c2p,
                                            spec.graph)
    rows.append(_row(v, spec, "order_condition_margin", cond.margin,
                     verdict="pass" if cond.holds else "fail"))
    verdicts.append(est.Verdict("order-condition", cond.holds, cond.margin))

    eta = np.zeros(spec.graph.n_vertices)
    sigma = np.zeros(spec.graph.n_vertices)
    eta[spec.graph.origin] = 1.0
    sigma[spec.graph.adjacency[spec.graph.origin][0]] = 1.0
    rows.append(_row(v, spec, "holley_defect", pot.holley_defect(spec, eta, sigma)))

    cfg = _integrator(v, v["t_list"])
    tol = 10 * v["dt"]
    for t, (min_phi, max_big_phi) in zip(cfg.observation_times,
                                         coupled_replicas(spec, cfg, v["replicas"],
                                                          workers=v["workers"])):
        margin = min((min_phi + tol) / tol, (PHI_TOL - max_big_phi) / PHI_TOL)
        vd = est.Verdict("order", margin >= 0, margin,
                         {"min_phi": min_phi, "max_Phi": max_big_phi, "tolerance": tol})
        rows.append(_row(v, spec, "min_phi", min_phi, t=t, replicas=v["replicas"]))
        rows.append(_row(v, spec, "max_Phi", max_big_phi, t=t, replicas=v["replicas"]))
        rows.append(_verdict_row(v, spec, vd, t=t))
        verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 6. CORRÉLATION NÉGATIVE AVEC POTENTIEL DE PAIRE
# ═══════════════════════════════════════════════════════════════════════════════
def experience_negcorr(v: dict, strict: bool = True) -> dict:
    coupling = v["potential"].get("pair_coupling")
    spec = build_spec(v, coupling if coupling is not None else NEGCORR_DEFAULT_COUPLING)
    g = spec.graph
    x, y = v["x"], v["y"]
    if not g.are_neighbors(x, y):
        if strict:
            raise ConfigError(f"x={x} et y={y} doivent être voisins.", field_path="y")
        y = g.adjacency[x][0]
    cfg = dyn.IntegratorConfig.for_times(v["dt"], [0.0], v["seed"])
    vd = est.negative_correlation_check(spec, cfg, x, y, v["replicas"])
    rows = [_estimate_row(v, spec, vd.inputs["moment"]), _verdict_row(v, spec, vd, x=x, y=y)]
    verdicts = [vd]
    if spec.site.family_tag == "gaussian":
        rows.append(_row(v, spec, "grand_canonical_cov",
                         oracle.grand_canonical_covariance(spec, x, y), x=x, y=y))
        oracle_val = vd.inputs["moment"].oracle
        sign_ok = oracle_val is not None and oracle_val < 0
        verdicts.append(est.Verdict("negcorr-oracle-sign", sign_ok, 1.0 if sign_ok else -1.0))
        rows.append(_verdict_row(v, spec, verdicts[-1], x=x, y=y))
        for a in (0.05, 0.1, 0.2):
            small = pot.GibbsSpec(g, spec.site, pot.quadratic_pair(a))
            rows.append(_row(v, small, "negcorr_oracle", oracle.negcorr_oracle(small, x, y),
                             x=x, y=y))
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 7. GRAPHE CERF-VOLANT
# ═══════════════════════════════════════════════════════════════════════════════
def experience_kite(v: dict) -> dict:
    g = v["graph"]
    side = g["side"] if g["kind"] == "torus" else KITE_DEFAULT_SIDE
    kv = dict(v, graph={"kind": "torus", "side": side, "dim": 2})
    spec = pot.GibbsSpec(build_torus(side, 2), pot.gaussian())
    times = [t for t in v["t_list"] if t <= side / 8]
    if len(times) < len(v["t_list"]):
        logger.info("cerf-volant : temps > côté/8 écartés")
    report = oracle.kite_proposition_check(side, times or [0.0], tol=KITE_TOL)
    rows = []
    for t, c, k in zip(report.times, report.c_values, report.edge_kernel):
        rows.append(_row(kv, spec, "kite_c", c, t=t, oracle_value=k))
    rows.append(_row(kv, spec, "kite_compensation", report.compensation, oracle_value=4.0))
    rows.append(_row(kv, spec, "kite_limit", report.limit, oracle_value=0.5))
    rows.append(_row(kv, spec, "kite_drift", report.drift))
    identity = est.Verdict("kite-edge-kernel", report.passed,
                           -math.log10(max(report.max_residual, 1e-300) / KITE_TOL),
                           {"max_residual": report.max_residual})
    comp_err = abs(report.compensation - 4.0)
    comp = est.Verdict("kite-compensation", comp_err == 0.0, -comp_err,
                       {"compensation": report.compensation})
    # constance de c(t) : rapportée, ne décide pas du code de sortie
    constancy = est.Verdict("kite-constancy", report.drift <= KITE_DRIFT_TOL,
                            (KITE_DRIFT_TOL - report.drift) / KITE_DRIFT_TOL,
                            {"drift": report.drift, "limit": report.limit}, "info", gating=False)
    verdicts = [identity, comp, constancy]
    for vd in verdicts:
        rows.append(_verdict_row(kv, spec, vd))
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 8. TROU SPECTRAL ET DÉCROISSANCE
# ═══════════════════════════════════════════════════════════════════════════════
def experience_gap(v: dict) -> dict:
    spec = build_spec(v)
    rows, verdicts = [], []
    for n in GAP_CYCLES:
        cv = dict(v, graph={"kind": "cycle", "side": n, "dim": 1})
        cspec = pot.GibbsSpec(build_cycle(n), pot.gaussian())
        rep = oracle.spectral_report(cspec.graph, cspec)
        formula = oracle.cycle_gap_formula(n)
        ratio = oracle.cycle_gap_ratio(n)
        rows.append(_row(cv, cspec, "gap", rep.lambda_env, oracle_value=formula))
        rows.append(_row(cv, cspec, "gap_ratio_4pi2_over_n2", ratio, oracle_value=1.0))
        ok = (abs(rep.lambda_env - formula) <= 1e-12
              and abs(rep.lambda_env - rep.lambda_walk) <= 1e-12)
        if n == GAP_CYCLES[-1]:
            ok = ok and abs(ratio - 1.0) <= 0.05
        vd = est.Verdict("gap-formula", ok, 0.0 if ok else -1.0,
                         {"gap": rep.lambda_env, "ratio": ratio})
        rows.append(_verdict_row(cv, cspec, vd))
        verdicts.append(vd)

    spec.require_product("gap")
    exact = oracle.spectral_report(spec.graph).lambda_env
    cfg = _integrator(v, GAP_FIT_TIMES)
    rs = est.simulate_replicas(spec, cfg, v["replicas"], workers=v["workers"])
    series = []
    for t in GAP_FIT_TIMES:
        e = est.estimate_diag_cov_avg(spec, cfg, t, v["replicas"], replicas=rs)
        series.append((t, e))
        rows.append(_estimate_row(v, spec, e))
    # plateau du mode conservé : Var(η_x)/|V|
    floor = pot.site_variance(spec.site) / spec.graph.n_vertices
    rows.append(_row(v, spec, "decay_floor", floor))
    try:
        fit = est.decay_rate_fit(series, floor)
    except STATISTICAL_REFUSALS as exc:
        vd = est.Verdict("decay-rate", False, -1.0, {"error": str(exc), "gap": exact})
        rows.append(_verdict_row(v, spec, vd))
        verdicts.append(vd)
        return _done(rows, verdicts)
    rows.append(_row(v, spec, "decay_rate", fit.rate, oracle_value=exact))
    if spec.site.family_tag == "gaussian":
        rel = abs(fit.rate - exact) / exact
        vd = est.Verdict("decay-rate", rel <= 0.10, (0.10 - rel) / 0.10,
                         {"rate": fit.rate, "gap": exact})
    else:
        bound = 0.9 * spec.site.c_minus * exact
        vd = est.Verdict("decay-rate", fit.rate >= bound, (fit.rate - bound) / bound,
                         {"rate": fit.rate, "lower_bound": bound})
    rows.append(_verdict_row(v, spec, vd))
    verdicts.append(vd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 9. ENTRELACEMENT ET INTÉGRATION PAR PARTIES
# ═══════════════════════════════════════════════════════════════════════════════
def experience_intertwining(v: dict) -> dict:
    base = build_spec(v)
    base.require_product("intertwining")
    g = base.graph
    eps = v["potential"]["epsilon"] or 0.5
    families = [pot.gaussian(), pot.smoothed_gaussian(eps)]
    probe = RngPlan(v["seed"]).generator(0, "probe")
    rows, verdicts = [], []
    for site in families:
        spec = pot.GibbsSpec(g, site)
        for tag in ("linear", "quadratic", "product", "constant"):
            worst = 0.0
            for _ in range(INTERTWINING_PROBES):
                x = int(probe.integers(g.n_vertices))
                yy, zz = (int(i) for i in probe.integers(g.n_vertices, size=2))
                fn = oracle.make_test_function(tag, yy, zz)
                eta = probe.normal(0.0, 2.0, size=g.n_vertices)
                worst = max(worst, oracle.intertwining_check(spec, fn, x, eta))
            vd = est.Verdict("intertwining", worst <= INTERTWINING_TOL,
                             (INTERTWINING_TOL - worst) / INTERTWINING_TOL,
                             {"tag": tag, "max_residual": worst})
            rows.append(_row(v, spec, f"intertwining_residual[{tag}]", worst,
                             oracle_value=0.0))
            rows.append(_verdict_row(v, spec, vd))
            verdicts.append(vd)

            if tag == "constant":
                continue
            fn = oracle.make_test_function(tag, v["y"], (v["y"] + 1) % g.n_vertices)
            ipp = oracle.ipp_check(spec, fn, v["x"], v["replicas"], probe)
            margin = 3.0 - abs(ipp.lhs - ipp.rhs) / ipp.stderr if ipp.stderr else 0.0
            ivd = est.Verdict("ipp", ipp.passed, margin, {"tag": tag})
            rows.append(_row(v, spec, f"ipp_lhs[{tag}]", ipp.lhs, x=v["x"], y=v["y"],
                             stderr=ipp.stderr, replicas=v["replicas"], oracle_value=ipp.rhs))
            rows.append(_verdict_row(v, spec, ivd, x=v["x"], y=v["y"]))
            verdicts.append(ivd)
    return _done(rows, verdicts)


# ═══════════════════════════════════════════════════════════════════════════════
# 10. TOUT
# ═══════════════════════════════════════════════════════════════════════════════
_ALL_ORDER = ("theorem", "lemma-equality", "fkg", "corollary", "order",
              "negcorr", "kite", "gap", "intertwining")


def experience_all(v: dict) -> dict:
    rows, verdicts = [], []
    for name in _ALL_ORDER:
        sub = dict(v, experiment=name)
        try:
            if name == "negcorr":
                out = experience_negcorr(sub, strict=False)
            else:
                out = EXPERIMENTS[name](sub)
        except InvalidInputError as exc:
            # combinaison non applicable (ex. potentiel de paire et marcheur)
            logger.info("%s ignorée : %s", name, exc)
            continue
        except STATISTICAL_REFUSALS as exc:
            out = refusal_result(sub, exc)
        rows.extend(out["rows"])
        verdicts.extend(out["verdicts"])
    return {"rows": rows, "verdicts": verdicts}


# ═══════════════════════════════════════════════════════════════════════════════
# REGISTRE
# ═══════════════════════════════════════════════════════════════════════════════
EXPERIMENTS = {
    "theorem": experience_theorem,
    "lemma-equality": experience_lemma_equality,
    "fkg": experience_fkg,
    "corollary": experience_corollary,
    "order": experience_order,
    "negcorr": experience_negcorr,
    "kite": experience_kite,
    "gap": experience_gap,
    "intertwining": experience_intertwining,
    "all": experience_all,
}

EXPERIMENT_META = {
    "theorem": {
        "name": "Encadrement de la covariance",
        "description": "(1/C₊)·E[P_x(X_t=y)] ≤ Cov(η_x ; P_tη_y) ≤ (1/C₋)·E[P_x(X_t=y)], égalité dans le cas gaussien",
        "category": "Covariance",
        "parameters": ["graph", "potential", "t_list", "x", "y", "replicas", "dt", "seed"],
    },
    "lemma-equality": {
        "name": "Identité de représentation",
        "description": "Cov(V'(η_x) ; P_tη_y) = E[P_x(X_t=y)] avec nombres aléatoires communs",
        "category": "Covariance",
        "parameters": ["graph", "potential", "t_list", "x", "y", "replicas", "dt", "seed"],
    },
    "fkg": {
        "name": "Positivité FKG",
        "description": "Cov(f ; P_t g) ≥ 0 pour dix couples de fonctionnelles linéaires croissantes aléatoires",
        "category": "Covariance",
        "parameters": ["graph", "potential", "t_list", "replicas", "dt", "seed"],
    },
    "corollary": {
        "name": "Bornes par la norme de Lipschitz",
        "description": "Cov(f ; P_t f) ≤ ‖f‖²/C₋ · sup_x E[P_x(X_t=x)] et variante croisée f, g",
        "category": "Covariance",
        "parameters": ["graph", "potential", "t_list", "x", "y", "replicas", "dt", "seed"],
    },
    "order": {
        "name": "Préservation de l'ordre",
        "description": "Couplage par bruit commun depuis η = σ + 1 : min φ ≥ -10·dt, Φ ≤ 1e-4 ; critère de Holley",
        "category": "Monotonie",
        "parameters": ["graph", "potential", "t_list", "replicas", "dt", "seed"],
    },
    "negcorr": {
        "name": "Corrélation négative",
        "description": "Potentiel de paire quadratique : E[η_xη_y] < 0 pour x ∼ y après rodage",
        "category": "Monotonie",
        "parameters": ["graph", "potential", "x", "y", "replicas", "dt", "seed"],
    },
    "kite": {
        "name": "Représentation par arêtes orientées",
        "description": "c(t) = e^{κt}(p_t(b,b) - p_t(b,b̄)) sur le graphe cerf-volant du tore ℤ²",
        "category": "Oracle exact",
        "parameters": ["graph", "t_list"],
    },
    "gap": {
        "name": "Trou spectral",
        "description": "Trou du laplacien sur les cycles, échelle 4π²/n², ajustement de la décroissance",
        "category": "Oracle exact",
        "parameters": ["graph", "potential", "replicas", "dt", "seed"],
    },
    "intertwining": {
        "name": "Entrelacement",
        "description": "∂_x L_e g = L_e ∂_x g + Σ V''(η_x)(∂_z g - ∂_x g) en 100 points ; intégration par parties",
        "category": "Oracle exact",
        "parameters": ["graph", "potential", "x", "y", "replicas", "seed"],
    },
    "all": {
        "name": "Toutes les expériences",
        "description": "Enchaîne toutes les vérifications avec la même configuration",
        "category": "Global",
        "parameters": [],
    },
}
