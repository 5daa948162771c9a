"""Command-line front end.

Every subcommand writes a JSON report (and CSV curves where relevant) into
``--out`` together with ``resolved_config.json``. Exit codes: 0 ok,
1 computation error or failed ``--verify``, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analytics as an
from . import exponents as ex
from . import markov as mk
from . import oracle
from . import simulator as sim
from .probability import (
    FrequencyFileError,
    Pmf,
    ZipfSpec,
    empirical_from_counts,
    harmonic_number,
    read_frequency_file,
    shannon_entropy,
    tilt,
    truncate_top_k,
    zipf_pmf,
)

log = logging.getLogger("guesswork")

LN2 = math.log(2.0)


class InputError(Exception):
    """Bad user input: exit code 2."""


class VerificationError(Exception):
    """An oracle disagreed with an analytic value: exit code 1."""


# ------------------------------------------------------------------ helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write_json(out: Path, name: str, obj):
    (out / name).write_text(_dump(obj), encoding="utf-8")


def _write_csv(out: Path, name: str, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    (out / name).write_text(buf.getvalue(), encoding="utf-8")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _unit(args) -> str:
    return "bits" if args.bits else "nats"


def _u(x: float, args) -> float:
    """Convert a log-quantity from nats to the selected unit."""
    return x / LN2 if args.bits else x


def _pmf_json(p: Pmf) -> dict:
    return {"symbols": list(p.support), "probs": p.probs.tolist()}


def _alphabet_hash(support) -> str:
    return hashlib.sha256(json.dumps([str(s) for s in support]).encode()).hexdigest()[:16]


def _hashable(s):
    return tuple(_hashable(x) for x in s) if isinstance(s, list) else s


def load_pmf_file(path) -> Pmf:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read PMF file {path}: {e}") from e
    return pmf_from_obj(obj)


def pmf_from_obj(obj) -> Pmf:
    try:
        if "zipf" in obj:
            z = obj["zipf"]
            return zipf_pmf(ZipfSpec(int(z["m"]), float(z["s"]), z.get("variant", "pdf")))
        probs = obj["probs"]
        symbols = obj.get("symbols", list(range(len(probs))))
        return Pmf.renormalized(tuple(_hashable(s) for s in symbols), probs)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid distribution: {e}") from e


def _resolve_pmf(cfg) -> Pmf:
    if cfg.get("pmf"):
        return load_pmf_file(cfg["pmf"])
    if cfg.get("probs"):
        vals = cfg["probs"]
        if isinstance(vals, str):
            try:
                vals = [float(v) for v in vals.split(",")]
            except ValueError as e:
                raise InputError(f"--probs: {e}") from e
        return pmf_from_obj({"probs": vals})
    if cfg.get("zipf"):
        z = cfg["zipf"]
        if isinstance(z, str):
            m, s = z.split(",")
            z = {"m": int(m), "s": float(s)}
        return pmf_from_obj({"zipf": z})
    raise InputError("no distribution given: use --pmf FILE, --probs P1,P2,... or --zipf M,S")


def _grid(spec, default):
    """'lo:hi:count' (linear) or an explicit list."""
    if spec is None:
        return default
    if isinstance(spec, list):
        return np.array(spec, dtype=float)
    try:
        if ":" in spec:
            lo, hi, cnt = spec.split(":")
            return np.linspace(float(lo), float(hi), int(cnt))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError as e:
        raise InputError(f"bad grid {spec!r}: {e}") from e


def _check(name, got, want, tol, failures, rel=False):
    scale = max(abs(want), 1.0) if rel else 1.0
    ok = (math.isinf(got) and math.isinf(want)) or abs(got - want) <= tol * scale
    log.info("verify %-40s got=%r want=%r %s", name, got, want, "ok" if ok else "FAIL")
    if not ok:
        failures.append(f"{name}: {got!r} vs {want!r} (tol {tol})")
    return {"check": name, "value": got, "oracle": want, "tolerance": tol, "ok": ok}


# -------------------------------------------------------------- subcommands


def cmd_ingest(cfg, args, out: Path) -> dict:
    path = cfg.get("input")
    if not path:
        raise InputError("ingest needs an input frequency file")
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    rows = read_frequency_file(path)
    p = empirical_from_counts(rows)
    report = {"source_hash": hashlib.sha256(raw).hexdigest(), "records": len(rows)}
    top_k = cfg.get("top_k")
    if top_k:
        if int(top_k) < len(p):
            report["truncated_from"] = len(p)
            log.info("top-k truncation: kept %d of %d symbols", int(top_k), len(p))
        p = truncate_top_k(p, int(top_k))
    doc = {**_pmf_json(p), **report}
    _write_json(out, cfg.get("output_name") or "pmf.json", doc)
    return {"symbol_count": len(p), **report}


def cmd_tilt(cfg, args, out: Path) -> dict:
    p = _resolve_pmf(cfg)
    if cfg.get("theta") is not None:
        theta = float(cfg["theta"])
    elif cfg.get("rho") is not None:
        theta = 1.0 / (1.0 + float(cfg["rho"]))
    else:
        raise InputError("tilt needs --theta or --rho")
    q = tilt(p, theta)
    doc = {"theta": theta, **_pmf_json(q)}
    _write_json(out, "tilt.json", doc)
    return doc


def _moment_quantities(p: Pmf, rho: float) -> dict:
    """Analytic guesswork moments keyed like simulated cells."""
    opt, _ = an.optimal_iid_distribution(p, rho)
    return {
        "optimal_list.mean_G": an.exact_guesswork_moment(p, 1.0).value,
        f"optimal_list.mean_G_pow_rho@{rho:g}": an.exact_guesswork_moment(p, rho).value,
        "iid_tilted.mean_G": an.iid_v_moment(p, opt, 1.0).value,
        "iid_naive.mean_G": an.iid_v_moment(p, p, 1.0).value,
    }


def _v_rows(q: np.ndarray, probs: np.ndarray, rho: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(probs[None, :] > 0, probs[None, :] / q**rho, 0.0)
    return t.sum(axis=1)


def cmd_moments(cfg, args, out: Path) -> dict:
    p = _resolve_pmf(cfg)
    rho = float(cfg.get("rho") or 1.0)
    gamma = cfg.get("gamma")
    lower, upper = an.arikan_bounds(p, rho)
    opt, logv = an.optimal_iid_distribution(p, rho)
    naive = an.iid_v_moment(p, p, rho)
    doc = {
        "unit": _unit(args),
        "rho": rho,
        "alphabet_size": len(p),
        "alphabet_hash": _alphabet_hash(p.support),
        "exact_G_moment": an.exact_guesswork_moment(p, rho).value,
        "arikan_lower": lower.value,
        "arikan_upper": upper.value,
        "sync_exponent": _u(an.sync_exponent(p, rho), args),
        "shannon_entropy": _u(shannon_entropy(p), args),
        "optimal_iid": {"theta": 1.0 / (1.0 + rho), **_pmf_json(opt)},
        "log_E_V_optimal": _u(logv.log_value, args),
        "E_V_optimal": logv.value,
        "log_E_V_naive": _u(naive.log_value, args),
        "quantities": _moment_quantities(p, rho),
    }
    if gamma is not None:
        doc["gamma"] = float(gamma)
        doc["mismatch_exponent"] = _u(an.mismatch_exponent(p, rho, float(gamma)), args)

    rhos = _grid(cfg.get("rho_grid"), np.linspace(0.1, 4.0, 40))
    g_fixed = float(gamma) if gamma is not None else 1.0
    rows = []
    for r in rhos:
        rows.append(("optimal", r, _u(an.sync_exponent(p, r), args), _unit(args)))
    for r in rhos:
        rows.append((f"mismatch_gamma={g_fixed:g}", r, _u(an.mismatch_exponent(p, r, g_fixed), args), _unit(args)))
    for r in rhos:
        rows.append(("naive", r, _u(an.iid_v_moment(p, p, r).log_value, args), _unit(args)))
    _write_csv(out, "moments_curve.csv", ["series", "rho", "log_E_V", "unit"], rows)

    if args.verify:
        failures: list = []
        checks = [
            _check("exhaustive n=1 vs exact moment", oracle.exhaustive_guesswork(p, 1, rho).value,
                   doc["exact_G_moment"], 1e-9, failures, rel=True),
        ]
        if len(p) in (2, 3):
            step = 1e-6 if len(p) == 2 else 1e-3
            res = oracle.simplex_grid_min(lambda q: _v_rows(q, p.probs, rho), len(p), step)
            checks.append(_check("grid min of E[V] vs tilted optimum", res.value, logv.value, 1e-5 if len(p) == 2 else 1e-4,
                                 failures, rel=True))
        doc["verification"] = checks
        if failures:
            _write_json(out, "moments.json", doc)
            raise VerificationError("; ".join(failures))
    _write_json(out, "moments.json", doc)
    return doc


def _alpha_from(cfg, p: Pmf) -> float:
    if cfg.get("alpha_base_k") is not None:
        return float(cfg["alpha_base_k"]) * math.log(len(p))
    if cfg.get("alpha") is not None:
        return float(cfg["alpha"])
    raise InputError("exponents needs --alpha (nats) or --alpha-base-k")


def cmd_exponents(cfg, args, out: Path) -> dict:
    p = _resolve_pmf(cfg)
    alpha = _alpha_from(cfg, p)
    try:
        ex.ListGrowthRate(alpha, len(p))
    except ValueError as e:
        raise InputError(str(e)) from e
    doc = {
        "unit": _unit(args),
        "alpha_nats": alpha,
        "entropy": _u(shannon_entropy(p), args),
        "threshold_type": _pmf_json(ex.threshold_type(p, alpha)),
        "sync_success": _report(ex.sync_success_exponent(p, alpha), args),
        "min_beta_async_success": _report(ex.min_beta_async_exponent(p, alpha), args),
        "failure": _report(ex.failure_exponent(p, alpha), args),
        "j_guesswork": _u(an.j_guesswork_exponent(p, alpha), args),
    }
    if cfg.get("beta") is not None:
        doc["async_success"] = _report(
            ex.async_success_exponent(p, alpha, float(cfg["beta"]), bool(cfg.get("restrict"))), args
        )
    top = math.log(len(p))
    alphas = _grid(cfg.get("alpha_grid"), np.linspace(0.0, top, 41))
    rows = []
    for a in alphas:
        a = float(min(max(a, 0.0), top))
        rows.append(("sync_success", a, _u(ex.sync_success_exponent(p, a).value, args), _unit(args)))
        rows.append(("failure", a, _u(ex.failure_exponent(p, a).value, args), _unit(args)))
    _write_csv(out, "exponents_curve.csv", ["series", "alpha_nats", "exponent", "unit"], rows)

    if args.verify:
        failures: list = []
        checks = []
        if len(p) == 2 and not doc["sync_success"].get("tied_top"):
            probs = p.probs
            level = ex.threshold_level(p, alpha)
            res = oracle.simplex_grid_min(
                lambda q: np.where(oracle.cross_entropy_rows(q, probs) < level, oracle.kl_rows(q, probs), np.inf), 2, 1e-6
            )
            checks.append(_check("grid sync exponent", res.value, doc["sync_success"]["value_nats"], 1e-5, failures))
            checks.append(_check("async(min beta) vs sync", doc["min_beta_async_success"]["value_nats"],
                                 doc["sync_success"]["value_nats"], 1e-5, failures))
        else:
            log.info("grid oracle covers binary alphabets without tied probabilities; skipped")
        doc["verification"] = checks
        if failures:
            _write_json(out, "exponents.json", doc)
            raise VerificationError("; ".join(failures))
    _write_json(out, "exponents.json", doc)
    return doc


def _report(r: ex.ExponentReport, args) -> dict:
    d = r.to_json()
    d["value_nats"] = r.value
    d["value"] = _u(r.value, args)
    return d


def cmd_markov(cfg, args, out: Path) -> dict:
    path = cfg.get("model")
    if not path:
        raise InputError("markov needs --model FILE")
    try:
        model = mk.MarkovModel.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise InputError(f"cannot load Markov model {path}: {e}") from e
    except ValueError as e:
        raise InputError(f"invalid Markov model: {e}") from e
    rho = float(cfg.get("rho") or 1.0)
    data = mk.perron(mk.tilted_matrix(model, rho))
    guesser = mk.optimal_markov_guesser(model, rho)
    doc = {
        "unit": _unit(args),
        "rho": rho,
        "states": list(model.states),
        "stationary": model.stationary.probs.tolist(),
        "perron": {"lambda": data.lam, "left": data.left.tolist(), "right": data.right.tolist()},
        "guesser": {"transitions": guesser.transitions.tolist(), "stationary": guesser.stationary.probs.tolist()},
        "exponent": _u(mk.markov_sync_exponent(model, rho), args),
    }
    if cfg.get("n"):
        n = int(cfg["n"])
        doc["finite_n"] = {"n": n, "log_E_V_per_symbol": _u(mk.markov_iid_v_moment(model, guesser, n, rho) / n, args)}
    if args.verify:
        failures: list = []
        eig = float(np.max(np.linalg.eigvals(data.w_matrix).real))
        doc["verification"] = [_check("power iteration vs dense eigvals", data.lam, eig, 1e-9, failures, rel=True)]
        if failures:
            _write_json(out, "markov.json", doc)
            raise VerificationError("; ".join(failures))
    _write_json(out, "markov.json", doc)
    return doc


def cmd_zipf(cfg, args, out: Path) -> dict:
    try:
        m = int(cfg["m"])
        s = float(cfg["s"])
        spec = ZipfSpec(m, s, cfg.get("variant") or "pdf")
    except (KeyError, TypeError) as e:
        raise InputError("zipf needs --m and --s") from e
    except ValueError as e:
        raise InputError(str(e)) from e
    rho = float(cfg.get("rho") or 1.0)
    p = zipf_pmf(spec)
    opt, logv = an.optimal_iid_distribution(p, rho)
    doc = {
        "unit": _unit(args),
        "m": m,
        "s": s,
        "variant": spec.variant,
        "rho": rho,
        "log_E_V_optimal": _u(logv.log_value, args),
        "log_E_V_naive": _u(math.log(m), args),
        "log_E_G_sync": _u(math.log(harmonic_number(m, s - rho)) - math.log(harmonic_number(m, s)), args),
    }
    if spec.variant == "pdf":
        s_opt = s / (1.0 + rho)
        doc["optimal_guesser_s"] = s_opt
        closed = (1.0 + rho) * math.log(harmonic_number(m, s_opt)) - math.log(harmonic_number(m, s))
        doc["log_E_V_optimal_closed_form"] = _u(closed, args)
        if args.verify:
            failures: list = []
            diff = float(np.max(np.abs(opt.probs - zipf_pmf(ZipfSpec(m, s_opt)).probs)))
            doc["verification"] = [
                _check("tilt vs Zipf(s/(1+rho))", diff, 0.0, 1e-12, failures),
                _check("closed form vs Renyi", logv.log_value, closed, 1e-10, failures, rel=True),
            ]
            if failures:
                _write_json(out, "zipf.json", doc)
                raise VerificationError("; ".join(failures))
    _write_json(out, "zipf.json", doc)
    return doc


# ------------------------------------------------------------------ simulate


def _source_from(cfg_src) -> tuple:
    n = int(cfg_src.get("n", 1))
    if "markov" in cfg_src:
        m = cfg_src["markov"]
        model = mk.MarkovModel.from_json(m) if isinstance(m, dict) else mk.MarkovModel.from_json(Path(m).read_text())
        return sim.MarkovSource(model, n), None
    if "pmf_file" in cfg_src:
        p = load_pmf_file(cfg_src["pmf_file"])
    else:
        p = pmf_from_obj(cfg_src)
    return sim.IidSource(p, n), p


def _strategy_from(spec, source, rho):
    kind = spec.get("kind")
    if kind == "shared":
        return sim.SharedOptimalList()
    if kind == "replicated":
        return sim.ReplicatedOptimalList()
    if kind == "partitioned":
        return sim.PartitionedLists(spec.get("mode", "interleaved"))
    if kind == "iid":
        if isinstance(source, sim.MarkovSource):
            raise InputError("iid strategy needs an i.i.d. source; use kind=markov")
        p = source.pmf
        if "probs" in spec:
            return sim.IidSampler(pmf_from_obj({"symbols": list(p.support), "probs": spec["probs"]}))
        if spec.get("naive"):
            return sim.IidSampler(p)
        theta = spec.get("theta", 1.0 / (1.0 + float(spec.get("rho", rho))))
        return sim.IidSampler(tilt(p, float(theta)))
    if kind == "markov":
        model = source.model if isinstance(source, sim.MarkovSource) else mk.MarkovModel.iid(source.pmf)
        return sim.MarkovSampler(mk.optimal_markov_guesser(model, float(spec.get("rho", rho))))
    raise InputError(f"unknown strategy kind {kind!r}")


def _schedule_from(spec):
    spec = spec or {"kind": "round_robin"}
    kind = spec.get("kind", "round_robin")
    if kind == "round_robin":
        return sim.RoundRobin()
    if kind == "random":
        return sim.RandomInterleave(int(spec.get("seed", 0)))
    if kind == "worst_case":
        return sim.WorstCase()
    if kind == "explicit":
        return sim.ExplicitPermutation(tuple(tuple(x) for x in spec["prefix"]))
    raise InputError(f"unknown schedule kind {kind!r}")


def _analytic_for_cell(plan: sim.AttackPlan, p: Pmf | None, rho: float) -> dict:
    """Closed-form counterparts of simulated quantities, where they exist."""
    src = plan.source
    strats = plan.strategies
    out = {}
    if p is None or plan.budget is not None:
        return out
    if src.n > 1:
        from .probability import product_pmf

        if len(p) ** src.n > 10**6:
            return out
        pn = product_pmf(p, src.n)
    else:
        pn = p
    if all(isinstance(s, sim.SharedOptimalList) for s in strats) or (
        len(strats) == 1 and isinstance(strats[0], (sim.ReplicatedOptimalList, sim.PartitionedLists))
    ):
        out["mean_G"] = an.exact_guesswork_moment(pn, 1.0).value
        out["mean_G_pow_rho"] = an.exact_guesswork_moment(pn, rho).value
    elif sim.exchangeable(plan) and isinstance(strats[0], sim.IidSampler) and not strats[0].over_sequences:
        q = strats[0].pmf
        qn = product_pmf(q, src.n) if src.n > 1 else q
        out["mean_G"] = an.iid_v_moment(pn, qn, 1.0).value
        if len(pn) <= 4096:
            out["mean_G_pow_rho"] = an.iid_g_moment_numeric(pn, qn, rho).value
    return out


def cmd_simulate(cfg, args, out: Path) -> dict:
    if "source" not in cfg or "cells" not in cfg:
        raise InputError("simulate config needs 'source' and 'cells'")
    try:
        source, p = _source_from(cfg["source"])
    except (ValueError, KeyError, OSError) as e:
        raise InputError(f"bad source: {e}") from e
    rho = float(cfg.get("rho", 1.0))
    trials = int(cfg.get("trials", 10_000))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    budget = cfg.get("budget")
    workers = int(cfg.get("workers", 1))
    labels = [c.get("label") for c in cfg["cells"]]
    if len(set(labels)) != len(labels) or None in labels:
        raise InputError("every cell needs a unique label")
    curve_js = cfg.get("curve_js")
    cells = {}
    quantities = {}
    curve_rows = []
    for i, cell in enumerate(cfg["cells"]):
        label = cell["label"]
        n_agents = int(cell.get("agents", 1))
        strat = _strategy_from(cell.get("strategy", {}), source, rho)
        try:
            plan = sim.AttackPlan(tuple((f"agent{a}", strat) for a in range(n_agents)), source,
                                  int(budget) if budget else None)
            schedule = _schedule_from(cell.get("schedule"))
        except ValueError as e:
            raise InputError(f"cell {label}: {e}") from e
        cell_seed = seed + 1_000_003 * i
        st = sim.monte_carlo(plan, schedule, trials, rho=rho, master_seed=cell_seed,
                             J=cell.get("J"), method=cell.get("method", "auto"), workers=workers, keep_records=True)
        analytic = _analytic_for_cell(plan, p, rho)
        cells[label] = {"stats": st.to_json(), "analytic": analytic}
        quantities[f"{label}.mean_G"] = {"value": st.mean_G, "se": st.se_G}
        quantities[f"{label}.mean_G_pow_rho@{rho:g}"] = {"value": st.mean_G_pow_rho, "se": st.se_G_pow_rho}
        if "mean_G" in analytic:
            quantities[f"{label}.mean_G"]["analytic"] = analytic["mean_G"]
        if "mean_G_pow_rho" in analytic:
            quantities[f"{label}.mean_G_pow_rho@{rho:g}"]["analytic"] = analytic["mean_G_pow_rho"]

        js = np.array(curve_js if curve_js else _default_js(st.totals), dtype=np.int64)
        ys = st.success_curve(js)
        curve_rows.extend((label, int(j), float(y), "probability") for j, y in zip(js, ys))
        if cfg.get("trace") or args.trace:
            _write_csv(out, f"trace_{label}.csv", ["trial_index", "total_queries", "success"],
                       [(t, int(g), int(s)) for t, (g, s) in enumerate(zip(st.totals, st.successes))])
    _write_csv(out, "success_curve.csv", ["series", "queries", "p_success", "unit"], curve_rows)
    alphabet = source.alphabet
    doc = {
        "unit": _unit(args),
        "seed": seed,
        "trials": trials,
        "rho": rho,
        "n": source.n,
        "alphabet_hash": _alphabet_hash(alphabet),
        "cells": cells,
        "quantities": quantities,
    }
    if args.verify:
        failures: list = []
        checks = []
        for name, q in quantities.items():
            if "analytic" in q and q["se"] > 0:
                checks.append(_check(f"{name} within 5 SE", q["value"], q["analytic"], 5 * q["se"], failures))
        doc["verification"] = checks
        if failures:
            _write_json(out, "simulate.json", doc)
            raise VerificationError("; ".join(failures))
    _write_json(out, "simulate.json", doc)
    return doc


def _default_js(totals) -> np.ndarray:
    top = max(int(np.max(totals)), 1)
    return np.unique(np.round(np.geomspace(1, top, 60)).astype(np.int64))


# -------------------------------------------------------------------- report


def cmd_report(cfg, args, out: Path) -> dict:
    inputs = cfg.get("inputs") or []
    if not inputs:
        raise InputError("report needs at least one input JSON file")
    z = float(cfg.get("tolerance") or 3.0)
    analytic: dict = {}
    simulated: dict = {}
    hashes = set()
    for path in inputs:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read {path}: {e}") from e
        if "alphabet_hash" in doc:
            hashes.add(doc["alphabet_hash"])
        for name, q in doc.get("quantities", {}).items():
            if isinstance(q, dict):
                simulated[name] = q
                if "analytic" in q:
                    analytic.setdefault(name, q["analytic"])
            else:
                analytic[name] = q
    if len(hashes) > 1:
        raise InputError("inputs were computed over different alphabets")
    rows = []
    for name in sorted(set(analytic) & set(simulated)):
        a = float(analytic[name])
        s = simulated[name]
        diff = abs(s["value"] - a)
        tol = z * float(s["se"])
        status = "OK" if diff <= tol else "MISMATCH"
        rows.append((name, a, s["value"], s["se"], diff, status))
    _write_csv(out, "report.csv", ["quantity", "analytic", "simulated", "std_error", "abs_diff", "status"], rows)
    table = [dict(zip(["quantity", "analytic", "simulated", "std_error", "abs_diff", "status"], r)) for r in rows]
    doc = {"tolerance_se": z, "rows": table, "mismatches": sum(r[-1] == "MISMATCH" for r in rows)}
    _write_json(out, "report.json", doc)
    return doc


# ---------------------------------------------------------------------- main

COMMANDS = {
    "ingest": cmd_ingest,
    "tilt": cmd_tilt,
    "moments": cmd_moments,
    "exponents": cmd_exponents,
    "markov": cmd_markov,
    "zipf": cmd_zipf,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override)")
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--out", default=None, help="output directory (default: out)")
    common.add_argument("--bits", action="store_true", default=None, help="report logarithmic quantities in bits")
    common.add_argument("--verify", action="store_true", default=None, help="cross-check against brute-force oracles")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    dist = argparse.ArgumentParser(add_help=False)
    dist.add_argument("--pmf", help="PMF JSON file ({symbols, probs})")
    dist.add_argument("--probs", help="comma-separated probabilities")
    dist.add_argument("--zipf", help="M,S for a PDF-Zipf law")

    parser = argparse.ArgumentParser(prog="guesswork", description="Guesswork analytics and attack simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="frequency TSV -> PMF JSON")
    p.add_argument("input", nargs="?")
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--output-name", dest="output_name")

    p = sub.add_parser("tilt", parents=[common, dist], help="tilted distribution")
    p.add_argument("--theta", type=float)
    p.add_argument("--rho", type=float)

    p = sub.add_parser("moments", parents=[common, dist], help="guesswork moments and bounds")
    p.add_argument("--rho", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rho-grid", dest="rho_grid", help="lo:hi:count or comma list")

    p = sub.add_parser("exponents", parents=[common, dist], help="success/failure exponents")
    p.add_argument("--alpha", type=float, help="budget exponent in nats per symbol")
    p.add_argument("--alpha-base-k", type=float, dest="alpha_base_k", help="budget as J = |X|^(n a)")
    p.add_argument("--beta", type=float, help="tilt of the i.i.d. guesser for the async exponent")
    p.add_argument("--restrict", action="store_true", default=None, help="restrict the async minimum to list types")
    p.add_argument("--alpha-grid", dest="alpha_grid")

    p = sub.add_parser("markov", parents=[common], help="Perron-Frobenius guesser for a Markov source")
    p.add_argument("--model")
    p.add_argument("--rho", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("zipf", parents=[common], help="Zipf password model")
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--variant", choices=["pdf", "cdf"])

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo attack simulation")
    p.add_argument("--trace", action="store_true", default=None, help="dump per-trial CSV traces")

    p = sub.add_parser("report", parents=[common], help="compare analytic and simulated values")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--tolerance", type=float, help="allowed distance in standard errors (default 3)")
    return parser


def resolve_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(cfg, dict):
            raise InputError("config file must hold a JSON object")
    for k, v in vars(args).items():
        if k in ("config", "command"):
            continue
        if v is not None and not (isinstance(v, list) and not v):
            cfg[k] = v
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        for flag in ("bits", "verify", "trace"):
            setattr(args, flag, bool(cfg.get(flag, False)))
        if args.seed is None and "seed" in cfg:
            args.seed = int(cfg["seed"])
        out = Path(cfg.get("out") or "out")
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out, "resolved_config.json", {"command": args.command, **cfg})
        result = COMMANDS[args.command](cfg, args, out)
    except (InputError, FrequencyFileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, RuntimeError) as e:
        print(f"computation error: {e}", file=sys.stderr)
        return 1
    sys.stdout.write(_dump(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
