"""Command-line harness: generate instances, run solves and sweeps, compute bounds.

    colrand generate --generate cutting_stock --params m=50,W=1000 --seed 1 --out cs.json
    colrand run --instance cs.json --method cr --K 250,1000,4000 --trials 20 --out cs.csv
    colrand bound --generate transport --bound thm1 --K 200 --trials 200 --out report.json
    colrand plotdata cs.csv --out cs_tidy.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bd
from .colgen import cold_start, pricing_for, run_cg, warm_start_from_cr
from .cr_solver import (enumerate_columns, solve_cr, solve_distributional, solve_full,
                        solve_near_feasibility)
from .lp_core import OPTIMAL, LPInstance
from .oracles import (KINDS, ChoiceOracle, ChoiceParams, CoverPackParams, CuttingStockOracle,
                      CuttingStockParams, DenseParams, ExplicitOracle, MDPOracle, MDPParams,
                      choice_instance, cover_pack_instance, cutting_stock_instance, dense_instance,
                      generate_instance, mdp_instance)
from .rng import derive_seed
from .sampling import GROUPWISE, IID, sample_groupwise, sample_iid

SCHEMA_VERSION = 1
METHODS = ("cr", "cg", "cg-warm", "exact", "distr", "feas")
COLUMNS = ("schema_version", "instance", "method", "scheme", "K", "trial", "seed", "status",
           "objective", "reference", "reference_source", "gap", "cg_iterations", "init",
           "resamples", "C", "bound_kind", "bound_term", "sampling_ms", "solve_ms")
TIMING_COLUMNS = ("sampling_ms", "solve_ms")
EXACT_COLUMN_CAP = 20_000
ZERO_REFERENCE = 1e-9  # below this the gap is reported in absolute terms


# ---------------------------------------------------------------- instance files


@dataclass
class LoadedInstance:
    kind: str
    seed: int
    sizes: dict
    params: object
    lp: LPInstance
    name: str


def _params_to_json(kind: str, params) -> tuple[dict, dict | None]:
    if kind == "cutting_stock":
        return {"W": params.W, "widths": list(params.widths), "demands": list(params.demands)}, None
    if kind == "choice":
        return {"N": params.N, "assortments": [list(S) for S in params.assortments],
                "v": [list(r) for r in params.v],
                "utilities": None if params.utilities is None else list(params.utilities)}, None
    if kind == "mdp":
        return {"theta": params.theta, "costs": params.costs.tolist(), "P": params.P.tolist()}, None
    if kind in ("covering", "packing"):
        return {}, {"A": params.A.tolist(), "b": params.b.tolist(), "c": params.c.tolist()}
    return {"tu": params.tu}, {"A": params.A.tolist(), "b": params.b.tolist(), "c": params.c.tolist(),
                               "senses": list(params.senses), "objective_sense": params.objective_sense}


def _params_from_json(kind: str, d: dict, explicit: dict | None):
    if kind == "cutting_stock":
        return CuttingStockParams(int(d["W"]), tuple(d["widths"]), tuple(d["demands"]))
    if kind == "choice":
        u = d.get("utilities")
        return ChoiceParams(int(d["N"]), tuple(tuple(S) for S in d["assortments"]),
                            tuple(tuple(r) for r in d["v"]), None if u is None else tuple(u))
    if kind == "mdp":
        return MDPParams(float(d["theta"]), np.array(d["costs"]), np.array(d["P"]))
    if explicit is None:
        raise ValueError(f"{kind} instances carry an explicit matrix")
    if kind in ("covering", "packing"):
        return CoverPackParams(kind, np.array(explicit["A"]), np.array(explicit["b"]),
                               np.array(explicit["c"]))
    return DenseParams(np.array(explicit["A"]), np.array(explicit["b"]), np.array(explicit["c"]),
                       tuple(explicit["senses"]), explicit.get("objective_sense", "min"),
                       bool(d.get("tu", False)))


def build_lp(kind: str, params, name: str) -> LPInstance:
    if kind == "cutting_stock":
        return cutting_stock_instance(params, name)
    if kind == "choice":
        return choice_instance(params, name)
    if kind == "mdp":
        return mdp_instance(params, name)
    if kind in ("covering", "packing"):
        return cover_pack_instance(params, name)
    return dense_instance(params, name)


def instance_document(kind: str, seed: int, sizes: dict, params) -> dict:
    prm, explicit = _params_to_json(kind, params)
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "seed": seed, "sizes": sizes,
           "params": prm}
    if explicit is not None:
        doc["explicit"] = explicit
    return doc


def load_instance(path: str | Path) -> LoadedInstance:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported instance schema {doc.get('schema_version')!r}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    params = _params_from_json(kind, doc["params"], doc.get("explicit"))
    name = Path(path).stem
    return LoadedInstance(kind, int(doc.get("seed", 0)), doc.get("sizes", {}), params,
                          build_lp(kind, params, name), name)


def parse_sizes(text: str | None) -> dict:
    sizes = {}
    for item in filter(None, (text or "").split(",")):
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"size parameter {item!r} is not key=value")
        sizes[key.strip()] = float(val) if "." in val else int(val)
    return sizes


def make_instance(kind: str, sizes: dict, seed: int) -> LoadedInstance:
    params, lp = generate_instance(kind, sizes, seed)
    return LoadedInstance(kind, seed, sizes, params, lp, lp.name)


def cmd_generate(kind: str, sizes: dict, seed: int, out: str | Path) -> Path:
    params, _ = generate_instance(kind, sizes, seed)
    out = Path(out)
    out.write_text(json.dumps(instance_document(kind, seed, sizes, params), sort_keys=True) + "\n")
    return out


# ---------------------------------------------------------------- experiment config


@dataclass
class ExperimentConfig:
    method: str = "cr"
    instance: str | None = None
    generate: str | None = None
    sizes: dict = field(default_factory=dict)
    K: list[int] = field(default_factory=lambda: [100])
    scheme: str = IID
    n_r: list[int] = field(default_factory=lambda: [1])
    trials: int = 1
    seed: int = 0
    delta: float = 0.1
    C: float | None = None
    resample_on_infeasible: int = 0
    out: str | None = None
    threads: int = 1
    reference: str = "auto"
    bound: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.scheme not in (IID, GROUPWISE):
            raise ValueError("scheme must be 'iid' or 'groupwise'")
        if self.method in ("cr", "cg-warm", "feas") and self.scheme == IID and not self.K:
            raise ValueError("a K list is required")
        if (self.instance is None) == (self.generate is None):
            raise ValueError("give exactly one of --instance and --generate")


def resolve(cfg: ExperimentConfig) -> LoadedInstance:
    if cfg.instance is not None:
        return load_instance(cfg.instance)
    return make_instance(cfg.generate, cfg.sizes, cfg.seed)


def default_C(inst: LoadedInstance, C: float | None) -> tuple[float, str]:
    """C = n makes C * xi = 1 under a uniform law; fall back to 1 if n is unknown."""
    if C is not None:
        return float(C), "supplied"
    n = inst.lp.num_columns
    if n:
        return float(n), "default (n)"
    return 1.0, "default (n unknown)"


def reference_value(inst: LoadedInstance, mode: str = "auto", seed: int = 0):
    """(value, source): exact enumeration first, then converged CG, else absent."""
    if mode == "none":
        return None, ""
    lp = inst.lp
    count = _column_count(lp)
    if mode in ("auto", "exact") and count is not None and count <= EXACT_COLUMN_CAP:
        res, _ = solve_full(lp)
        if res.status == OPTIMAL:
            return res.objective, "exact"
    if mode in ("auto", "cg") and lp.objective_sense == "min":
        try:
            run = run_cg(lp, pricing_for(lp), cold_start(lp, seed))
        except ValueError:
            return None, ""
        if run.converged:
            return run.objective, "cg"
    return None, ""


def _column_count(lp: LPInstance):
    oracle = lp.oracle
    if isinstance(oracle, CuttingStockOracle):
        # only the maximal patterns are enumerated; bail out early on large widths
        prm = oracle.params
        if prm.m > 20 or prm.W > 400:
            return None
        return len(enumerate_columns(lp))
    return lp.num_columns


def _gap(value, reference, sense: str):
    if value is None or reference is None or not math.isfinite(value):
        return None
    diff = value - reference if sense == "min" else reference - value
    return diff / abs(reference) if abs(reference) > ZERO_REFERENCE else diff


def _fmt(val) -> str:
    if val is None:
        return ""
    if isinstance(val, float):
        if math.isnan(val):
            return ""
        return repr(val)
    return str(val)


# ---------------------------------------------------------------- family constants


def a_max(inst: LoadedInstance) -> float:
    oracle = inst.lp.oracle
    if isinstance(oracle, ExplicitOracle):
        return float(np.max(np.abs(oracle.A)))
    if isinstance(oracle, CuttingStockOracle):
        return float(oracle.params.W // min(oracle.params.widths))
    if isinstance(oracle, ChoiceOracle):
        return 1.0
    if isinstance(oracle, MDPOracle):
        return max(col.norm_inf() for col in (oracle.materialize(i)[1] for i in oracle.enumerate()))
    raise ValueError("unknown family")


def structural_gamma(inst: LoadedInstance) -> tuple[float, str]:
    """(gamma, name) for families with a known dual bound."""
    kind, prm = inst.kind, inst.params
    if kind == "mdp":
        return bd.gamma_mdp(prm.costs, prm.theta), "gamma_mdp"
    if kind == "transport":
        return bd.gamma_tu(prm.c, prm.A.shape[0]), "gamma_tu"
    if kind == "covering":
        return bd.u_covering(prm.A, prm.c), "U_covering"
    if kind == "packing":
        return bd.u_packing(prm.A, prm.b, prm.c).U, "U_packing"
    raise ValueError(f"no structural gamma for {kind} instances")


# ---------------------------------------------------------------- run


def _trial_seed(seed: int, K, t: int) -> int:
    return derive_seed(seed, "trial", K, t)


def _draw(inst: LoadedInstance, scheme: str, size: int, seed: int):
    oracle = inst.lp.oracle
    if scheme == GROUPWISE:
        return sample_groupwise(oracle, size, seed)
    return sample_iid(oracle, size, seed)


def _cost_norm(inst: LoadedInstance) -> float:
    """||c||_2 when the column set is explicit, else 1 (terms left unscaled)."""
    if isinstance(inst.lp.oracle, (ExplicitOracle, MDPOracle)):
        return bd.normalized(inst.lp)[1]
    return 1.0


def _bound_term(cfg: ExperimentConfig, inst: LoadedInstance, run, K: int, n_r: int | None):
    """Sampling-error term in the instance's own cost units.

    The terms assume unit-norm costs, so they are evaluated on c / ||c|| and
    scaled back by ||c||.
    """
    if cfg.bound is None or run is None or run.status != OPTIMAL:
        return None
    C, _ = default_C(inst, cfg.C)
    m = inst.lp.m
    norm = _cost_norm(inst)
    if cfg.bound == "posterior":
        return norm * bd.posterior_term(C, m, a_max(inst), K, cfg.delta, run.result.p / norm)
    if cfg.bound == "thm1":
        gamma, _ = structural_gamma(inst)
        return norm * bd.thm1_term(C, m, gamma / norm, a_max(inst), K, cfg.delta)
    if cfg.bound == "thm5":
        gamma, _ = structural_gamma(inst)
        return norm * bd.thm5_term(C, 1.0 + m * gamma / norm * a_max(inst), n_r, cfg.delta)
    if cfg.bound == "prop7":
        prm = inst.params
        return bd.prop7_term(C, bd.choice_lipschitz(prm), bd.choice_column_norm(prm), K, cfg.delta)
    raise ValueError(f"unknown bound {cfg.bound!r}")


def _cr_task(cfg, inst, ref, size, t):
    K_label = size if cfg.scheme == IID else f"nr{size}"
    seed = _trial_seed(cfg.seed, K_label, t)
    draw_seed, resamples = seed, 0
    while True:
        sample = _draw(inst, cfg.scheme, size, draw_seed)
        run = solve_cr(inst.lp, sample)
        if run.status == OPTIMAL or resamples >= cfg.resample_on_infeasible:
            break
        resamples += 1
        draw_seed = derive_seed(seed, "resample", resamples)
    row = _row(cfg, inst, ref, len(sample), t, seed)
    row.update(status=run.status, objective=run.objective if run.status == OPTIMAL else None,
               gap=_gap(run.objective if run.status == OPTIMAL else None, ref[0],
                        inst.lp.objective_sense),
               resamples=resamples, sampling_ms=sample.elapsed_ms, solve_ms=run.solve_ms)
    return row, run, sample


def _row(cfg, inst, ref, K, t, seed) -> dict:
    row = {c: None for c in COLUMNS}
    row.update(schema_version=SCHEMA_VERSION, instance=inst.name, method=cfg.method,
               scheme=cfg.scheme, K=K, trial=t, seed=seed, reference=ref[0],
               reference_source=ref[1])
    return row


def _task(cfg: ExperimentConfig, inst: LoadedInstance, ref, size, t) -> dict:
    method = cfg.method
    if method == "cr":
        row, run, sample = _cr_task(cfg, inst, ref, size, t)
        if cfg.bound:
            row.update(bound_kind=cfg.bound, C=default_C(inst, cfg.C)[0],
                       bound_term=_bound_term(cfg, inst, run, len(sample), sample.n_rounds))
        return row
    if method == "cg-warm":
        row, run, sample = _cr_task(cfg, inst, ref, size, t)
        if run.status != OPTIMAL:
            row.update(init="cr")
            return row
        t0 = time.perf_counter()
        cg = run_cg(inst.lp, pricing_for(inst.lp), warm_start_from_cr(run), provenance="cr")
        row.update(status=OPTIMAL if cg.converged else "IterationLimit", objective=cg.objective,
                   gap=_gap(cg.objective, ref[0], inst.lp.objective_sense),
                   cg_iterations=cg.iterations, init="cr",
                   solve_ms=run.solve_ms + 1e3 * (time.perf_counter() - t0))
        return row
    if method == "feas":
        seed = _trial_seed(cfg.seed, size, t)
        sample = _draw(inst, cfg.scheme, size, seed)
        t0 = time.perf_counter()
        value = solve_near_feasibility(inst.lp, sample)
        row = _row(cfg, inst, (None, ""), len(sample), t, seed)
        row.update(status=OPTIMAL, objective=value, sampling_ms=sample.elapsed_ms,
                   solve_ms=1e3 * (time.perf_counter() - t0))
        return row
    if method == "cg":
        seed = derive_seed(cfg.seed, "trial", t)
        t0 = time.perf_counter()
        cg = run_cg(inst.lp, pricing_for(inst.lp), cold_start(inst.lp, seed))
        row = _row(cfg, inst, ref, len(cg.columns), t, seed)
        row.update(status=OPTIMAL if cg.converged else "IterationLimit", objective=cg.objective,
                   gap=_gap(cg.objective, ref[0], inst.lp.objective_sense),
                   cg_iterations=cg.iterations, init="cold",
                   solve_ms=1e3 * (time.perf_counter() - t0))
        return row
    raise AssertionError(method)


def _single_rows(cfg: ExperimentConfig, inst: LoadedInstance, ref) -> list[dict]:
    lp = inst.lp
    t0 = time.perf_counter()
    if cfg.method == "exact":
        res, idents = solve_full(lp)
        row = _row(cfg, inst, ref, len(idents), 0, cfg.seed)
        obj = res.objective if res.status == OPTIMAL else None
        row.update(status=res.status, objective=obj, gap=_gap(obj, ref[0], lp.objective_sense),
                   solve_ms=1e3 * (time.perf_counter() - t0))
        return [row]
    C, _ = default_C(inst, cfg.C)
    distr = solve_distributional(lp, None, C)
    row = _row(cfg, inst, ref, len(distr.xi), 0, cfg.seed)
    obj = distr.result.objective if distr.status == OPTIMAL else None
    row.update(status=distr.status, objective=obj, gap=_gap(obj, ref[0], lp.objective_sense),
               C=C, solve_ms=1e3 * (time.perf_counter() - t0))
    return [row]


def write_row(writer, row: dict):
    writer.writerow([_fmt(row[c]) for c in COLUMNS])


def cmd_run(cfg: ExperimentConfig, stream=None) -> list[dict]:
    """Run the configured experiment; rows go to cfg.out (or ``stream``) in
    (method, K, trial) order whatever the thread count."""
    inst = resolve(cfg)
    if cfg.method in ("cg", "cg-warm") or cfg.method == "cr" or cfg.method == "exact":
        ref = reference_value(inst, cfg.reference, cfg.seed)
    elif cfg.method == "distr":
        ref = reference_value(inst, "exact" if cfg.reference == "auto" else cfg.reference, cfg.seed)
    else:
        ref = (None, "")
    sizes = cfg.K if cfg.scheme == IID else cfg.n_r
    close = False
    if stream is None:
        stream = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
        close = cfg.out is not None
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COLUMNS)
    rows: list[dict] = []
    try:
        if cfg.method in ("exact", "distr"):
            rows = _single_rows(cfg, inst, ref)
            for row in rows:
                write_row(writer, row)
        else:
            if cfg.method == "cg":
                tasks = [(None, t) for t in range(cfg.trials)]
            else:
                tasks = [(s, t) for s in sizes for t in range(cfg.trials)]
            fn = lambda st: _task(cfg, inst, ref, st[0], st[1])  # noqa: E731
            if cfg.threads > 1:
                with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                    for row in pool.map(fn, tasks):
                        write_row(writer, row)
                        stream.flush()
                        rows.append(row)
            else:
                for task in tasks:
                    row = fn(task)
                    write_row(writer, row)
                    stream.flush()
                    rows.append(row)
    finally:
        if close:
            stream.close()
    return rows


def mask_timing(text: str) -> str:
    """Result CSV with timing columns blanked, for determinism comparisons."""
    reader = csv.reader(io.StringIO(text))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = next(reader)
    idx = [header.index(c) for c in TIMING_COLUMNS]
    writer.writerow(header)
    for rec in reader:
        for i in idx:
            rec[i] = ""
        writer.writerow(rec)
    return out.getvalue()


# ---------------------------------------------------------------- bound


BOUND_CHOICES = ("thm1", "thm2", "prop1", "prop2", "prop3", "thm3", "prop4", "covering",
                 "packing", "thm4", "thm5", "prop7")


def cmd_bound(inst: LoadedInstance, bound: str, *, K: int | None = None, n_r: int | None = None,
              delta: float = 0.1, C: float | None = None, trials: int = 0, seed: int = 0,
              gamma: float | None = None, chi: float | None = None, threads: int = 1) -> bd.BoundReport:
    """Assemble a BoundReport; with trials > 0 also measure the violation rate."""
    if bound not in BOUND_CHOICES:
        raise ValueError(f"bound must be one of {BOUND_CHOICES}")
    lp = inst.lp
    Cv, c_src = default_C(inst, C)
    m = lp.m
    explicit = isinstance(lp.oracle, (ExplicitOracle, MDPOracle))
    inputs: dict = {"C": Cv, "delta": delta, "m": m}
    prov: dict = {"C": c_src, "delta": "supplied", "m": "computed"}
    notes: list[str] = []
    norm = 1.0
    if explicit:
        _, norm = bd.normalized(lp)
        inputs["cost_norm"] = norm
        prov["cost_norm"] = "computed"
        notes.append("costs scaled to unit Euclidean norm; gamma, chi and gaps scaled alike")
    if bound in ("thm5",) or (bound == "thm4" and n_r is not None):
        if n_r is None:
            raise ValueError("--n-r is required")
        n_G = lp.oracle.n_groups
        if not n_G:
            raise ValueError("groupwise bounds need column groups")
        Kd, n_edges, lam = bd.clique_graph_inputs(n_G, n_r)
        inputs.update(n_r=n_r, n_G=n_G, K=Kd, n_edges=n_edges, Lambda=lam)
        prov.update(n_r="supplied", n_G="computed", K="computed", n_edges="computed",
                    Lambda="computed")
        K = Kd
    elif K is None:
        raise ValueError("--K is required")
    else:
        inputs["K"] = K
        prov["K"] = "supplied"

    def A_max():
        val = a_max(inst)
        inputs["A_max"], prov["A_max"] = val, "computed"
        return val

    def gamma_value(kind_hint=None):
        if gamma is not None:
            inputs["gamma"], prov["gamma"] = gamma / norm, "supplied"
            return gamma / norm
        val, name = structural_gamma(inst)
        inputs["gamma"], prov["gamma"] = val / norm, f"computed ({name})"
        return val / norm

    def chi_value():
        if chi is not None:
            inputs["chi"], prov["chi"] = chi / norm, "supplied"
            return chi / norm
        if not isinstance(lp.oracle, ExplicitOracle):
            raise ValueError("chi must be supplied for this family")
        val = bd.chi_enumerate(lp.oracle.A, lp.oracle.c / norm)
        inputs["chi"], prov["chi"] = val, "computed (all bases)"
        return val

    variant = "gamma"
    if bound in ("thm1", "thm3", "prop4", "covering", "packing"):
        kind = {"thm1": "Thm1", "thm3": "Thm3MDP", "prop4": "Prop4TU", "covering": "CoveringU",
                "packing": "PackingU"}[bound]
        g = gamma_value()
        term = bd.thm1_term(Cv, m, g, A_max(), K, delta)
    elif bound == "thm2":
        kind, variant = "Thm2", "chi"
        term = bd.thm2_term(Cv, chi_value(), K, delta)
    elif bound == "prop1":
        kind = "Prop1"
        term = bd.prop1_term(Cv, m, A_max(), K, delta)
    elif bound in ("prop2", "prop3"):
        target = bd.normalized(lp)[0] if explicit else lp
        run = solve_cr(target, sample_iid(target.oracle, K, seed))
        if run.status != OPTIMAL:
            raise ValueError(f"sampled LP is {run.status}; no dual available")
        if bound == "prop2":
            kind = "Prop2Posterior"
            inputs["p_inf"], prov["p_inf"] = float(np.max(np.abs(run.result.p))), "computed (dual of P_J)"
            term = bd.posterior_term(Cv, m, A_max(), K, delta, run.result.p)
        else:
            kind, variant = "Prop3Posterior", "chi"
            if not isinstance(target.oracle, ExplicitOracle):
                raise ValueError("the reduced-cost variant needs an explicit matrix")
            val = bd.reduced_cost_norm(target.oracle.A, target.oracle.c, run.result.p)
            inputs["reduced_cost_norm"], prov["reduced_cost_norm"] = val, "computed (dual of P_J)"
            term = bd.thm2_term(Cv, val, K, delta)
    elif bound == "thm4":
        kind = "Thm4Dependent"
        if "n_edges" not in inputs:
            inputs.update(n_edges=0, Lambda=float(K))
            prov.update(n_edges="computed (iid)", Lambda="computed (iid)")
        scale = 1.0 + m * gamma_value() * A_max()
        term = bd.thm4_term(Cv, scale, K, inputs["n_edges"], inputs["Lambda"], delta)
    elif bound == "thm5":
        kind = "Thm5Groupwise"
        scale = 1.0 + m * gamma_value() * A_max()
        term = bd.thm5_term(Cv, scale, n_r, delta)
    else:
        kind = "Prop7Portfolio"
        if inst.kind != "choice":
            raise ValueError("the portfolio bound is wired for choice estimation instances")
        L, H = bd.choice_lipschitz(inst.params), bd.choice_column_norm(inst.params)
        inputs.update(L=L, H=H)
        prov.update(L="computed", H="computed")
        term = bd.prop7_term(Cv, L, H, K, delta)

    delta_distr = None
    if explicit and kind != "Prop1":
        target, _ = bd.normalized(lp)
        distr = solve_distributional(target, None, Cv)
        delta_distr = distr.delta_v
        if not math.isfinite(delta_distr):
            notes.append(f"distributional counterpart is {distr.status} at this C")
    elif not explicit:
        notes.append("sampling law is implicit: delta_v(P_distr) unavailable")
    report = bd.BoundReport(kind, inputs, prov, term, delta_distr, notes)

    if trials > 0:
        if not explicit:
            raise ValueError("violation rates need an explicit sampling law")
        vk = "thm5" if kind == "Thm5Groupwise" else ("thm2" if variant == "chi" else "thm1")
        if kind in ("Prop1", "Prop2Posterior", "Prop3Posterior", "Prop7Portfolio", "Thm4Dependent"):
            raise ValueError(f"no violation experiment for {kind}")
        res = bd.empirical_violation_rate(
            vk, lp, Cv, delta, trials, seed, K=K, n_r=n_r,
            gamma=None if vk == "thm2" else inputs["gamma"] * norm,
            chi=inputs.get("chi", 0.0) * norm if vk == "thm2" else None, workers=threads)
        inputs.update(violation_rate=res.rate, violation_trials=trials, feasible_trials=res.feasible)
        prov.update(violation_rate="computed", violation_trials="supplied",
                    feasible_trials="computed")
    return report


# ---------------------------------------------------------------- plotdata


PLOT_COLUMNS = ("instance", "method", "K", "n", "mean_gap", "stderr")


def cmd_plotdata(src: str | Path, out: str | Path | None = None) -> list[dict]:
    """Aggregate result rows into (instance, method, K) -> mean gap and standard error."""
    with open(src, newline="") as fh:
        records = list(csv.DictReader(fh))
    groups: dict = {}
    for rec in records:
        key = (rec["instance"], rec["method"], rec["K"])
        groups.setdefault(key, [])
        if rec.get("gap", ""):
            groups[key].append(float(rec["gap"]))
    rows = []
    for (instance, method, K) in sorted(groups, key=lambda k: (k[0], k[1], _num(k[2]))):
        gaps = groups[(instance, method, K)]
        mean = statistics.fmean(gaps) if gaps else None
        se = statistics.stdev(gaps) / math.sqrt(len(gaps)) if len(gaps) > 1 else (0.0 if gaps else None)
        rows.append({"instance": instance, "method": method, "K": K, "n": len(gaps),
                     "mean_gap": mean, "stderr": se})
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLOT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in PLOT_COLUMNS])
    finally:
        if out:
            fh.close()
    return rows


def _num(text: str):
    try:
        return (0, float(text))
    except ValueError:
        return (1, text)


# ---------------------------------------------------------------- argument parsing


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    return max(1, int(os.environ.get("COLRAND_THREADS", "1")))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colrand", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p):
        p.add_argument("--instance", help="instance JSON file")
        p.add_argument("--generate", choices=KINDS, help="generate an instance of this kind")
        p.add_argument("--params", default="", help="generator sizes, e.g. m=50,W=1000")
        p.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("generate", help="write an instance JSON file")
    g.add_argument("--generate", choices=KINDS, required=True)
    g.add_argument("--params", default="")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run CR / CG / exact solves and write a results CSV")
    source(r)
    r.add_argument("--method", choices=METHODS, default="cr")
    r.add_argument("--K", type=_int_list, default=[100])
    r.add_argument("--scheme", choices=(IID, GROUPWISE), default=IID)
    r.add_argument("--n-r", type=_int_list, default=[1])
    r.add_argument("--trials", type=int, default=1)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--C", type=float, default=None)
    r.add_argument("--resample-on-infeasible", type=int, default=0)
    r.add_argument("--reference", choices=("auto", "exact", "cg", "none"), default="auto")
    r.add_argument("--bound", choices=("thm1", "thm5", "posterior", "prop7"), default=None)
    r.add_argument("--out")
    r.add_argument("--threads", type=int, default=None)

    b = sub.add_parser("bound", help="compute a bound report (optionally a violation rate)")
    source(b)
    b.add_argument("--bound", choices=BOUND_CHOICES, required=True)
    b.add_argument("--K", type=int, default=None)
    b.add_argument("--n-r", type=int, default=None)
    b.add_argument("--delta", type=float, default=0.1)
    b.add_argument("--C", type=float, default=None)
    b.add_argument("--gamma", type=float, default=None)
    b.add_argument("--chi", type=float, default=None)
    b.add_argument("--trials", type=int, default=0, help="violation-rate trials (0 = skip)")
    b.add_argument("--out")
    b.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("plotdata", help="aggregate a results CSV into plot-ready rows")
    p.add_argument("results")
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cmd_generate(args.generate, parse_sizes(args.params), args.seed, args.out)
        elif args.command == "run":
            cfg = ExperimentConfig(
                method=args.method, instance=args.instance, generate=args.generate,
                sizes=parse_sizes(args.params), K=args.K, scheme=args.scheme, n_r=args.n_r,
                trials=args.trials, seed=args.seed, delta=args.delta, C=args.C,
                resample_on_infeasible=args.resample_on_infeasible, out=args.out,
                threads=_threads(args.threads), reference=args.reference, bound=args.bound)
            cmd_run(cfg)
        elif args.command == "bound":
            if (args.instance is None) == (args.generate is None):
                raise ValueError("give exactly one of --instance and --generate")
            inst = load_instance(args.instance) if args.instance else \
                make_instance(args.generate, parse_sizes(args.params), args.seed)
            report = cmd_bound(inst, args.bound, K=args.K, n_r=args.n_r, delta=args.delta, C=args.C,
                               trials=args.trials, seed=args.seed, gamma=args.gamma, chi=args.chi,
                               threads=_threads(args.threads))
            print(report.table())
            if args.out:
                Path(args.out).write_text(report.to_json() + "\n")
        else:
            cmd_plotdata(args.results, args.out)
    except (ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"colrand: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
