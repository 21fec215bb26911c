"""Experiment runner CLI.

    randpress <subcommand> --config <file> [--seed N] [--out DIR] [--workers K]

Subcommands dispatch to the library modules; all outputs land under --out
as a summary.json plus CSV tables.  Errors exit non-zero with a
machine-readable JSON object on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .base import sample_path
from .classify import classify_system, gibbs_ratio_extremes
from .config import OPS, ResultBundle, load_config
from .errors import RandpressError
from .fibers import QuadraticFamily, quadratic_admissible_delta
from .induce import find_expanding_set, induced_pressure_consistency, mean_example_bowen
from .julia import julia_bowen, julia_pressure
from .multifractal import legendre_spectrum, temperature_curve
from .pressure import bowen_dimension, expected_pressure
from .transfer import (
    GeometricT,
    conformal_cylinder_masses,
    constant_function,
    correlation_decay_slope,
    correlation_series,
    iterate_transfer,
)


def parallel_map(fn, items, workers):
    """Order-preserving map, threaded when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _t_grid(num):
    return np.arange(num["t_lo"], num["t_hi"] + 1e-12, num["t_step"])


def run_experiment(cfg):
    """Dispatch one validated experiment config to its module operation."""
    handler = _HANDLERS[cfg.op]
    summary, tables = handler(cfg)
    provenance = {
        "config_sha256": cfg.digest,
        "seed": cfg.seed,
        "version": __version__,
        "op": cfg.op,
    }
    return ResultBundle(summary, tables, provenance)


def _op_describe(cfg):
    fam = cfg.family
    if isinstance(fam, QuadraticFamily):
        summary = {
            "kind": "quadratic",
            "degree": fam.d,
            "delta": fam.delta,
            "delta_max": quadratic_admissible_delta(fam.d),
            "floors": [fam.expansion_floor(a) for a in range(fam.n_symbols)],
            "admissible": fam.delta < quadratic_admissible_delta(fam.d),
        }
        rows = [(r["symbol"], r["degree"], r["c"].real, r["c"].imag, r["floor"])
                for r in fam.branch_table()]
        return summary, {"branches": (("symbol", "degree", "c_re", "c_im", "floor"), rows)}
    floors = [fam.expansion_floor(a) for a in range(fam.n_symbols)]
    weights = cfg.process.symbol_weights()
    mean_log = float(np.dot(weights, np.log(floors)))
    summary = {
        "kind": fam.kind,
        "description": fam.description,
        "degrees": [fam.degree(a) for a in range(fam.n_symbols)],
        "floors": floors,
        "mean_log_expansion": mean_log,
        "uniformly_expanding": min(floors) > 1,
    }
    rows = [(r["symbol"], r["branch"], r["lo"], r["hi"],
             r["slope"] if r["slope"] is not None else "", r["min_abs_deriv"])
            for r in fam.branch_table()]
    return summary, {"branches": (("symbol", "branch", "lo", "hi", "slope",
                                   "min_abs_deriv"), rows)}


def _op_pressure(cfg):
    num = cfg.numerics
    ts = _t_grid(num)

    def one(t):
        return expected_pressure(
            cfg.family, cfg.process, GeometricT(float(t)),
            n_steps=int(num["n_steps"]), n_samples=int(num["n_samples"]),
            seed=cfg.seed,
        )

    ests = parallel_map(one, list(ts), cfg.workers)
    rows = [(float(t), e.value, e.stderr) for t, e in zip(ts, ests)]
    summary = {"points": len(rows), "method": ests[0].method}
    return summary, {"pressure": (("t", "ep", "stderr"), rows)}


def _op_bowen(cfg):
    num = cfg.numerics
    res = bowen_dimension(
        cfg.family, cfg.process, tol_t=float(num["tol_t"]),
        n_steps=int(num["n_steps"]), n_samples=int(num["n_samples"]),
        seed=cfg.seed,
    )
    summary = {
        "h": res.h,
        "bracket": list(res.bracket),
        "tolerance": res.tol,
        "samples": int(num["n_samples"]),
        "noise_limited": res.noise_limited,
        "achievable_tol": res.achievable_tol,
    }
    return summary, {}


def _op_classify(cfg):
    num = cfg.numerics
    res = bowen_dimension(
        cfg.family, cfg.process, tol_t=float(num["tol_t"]),
        n_steps=int(num["n_steps"]), n_samples=int(num["n_samples"]),
        seed=cfg.seed,
    )
    verdict = classify_system(
        cfg.family, cfg.process, res.h, n_max=int(num["n_max"]),
        n_samples=max(64, int(num["n_samples"])), seed=cfg.seed,
    )
    path = sample_path(cfg.process, seed=cfg.seed)
    extremes = gibbs_ratio_extremes(cfg.family, path, res.h, int(num["n_max"]))
    summary = {
        "h": res.h,
        "sigma2": verdict.variance.sigma2,
        "stderr": verdict.variance.stderr,
        "verdict": verdict.verdict,
        "consequences": verdict.consequences,
        "lil_max": verdict.lil_max,
        "lil_min": verdict.lil_min,
    }
    ladder = [(int(n), float(v)) for n, v in
              zip(verdict.variance.ladder_ns, verdict.variance.ladder_values)]
    exc = [(int(n), float(lo), float(hi)) for n, lo, hi in
           zip(extremes.ns, extremes.running_min, extremes.running_max)]
    return summary, {
        "variance_ladder": (("n", "var_over_n"), ladder),
        "gibbs_extremes": (("n", "min", "max"), exc),
    }


def _op_spectrum(cfg):
    num = cfg.numerics
    qs = np.arange(num["q_lo"], num["q_hi"] + 1e-12, num["q_step"])
    curve = temperature_curve(
        cfg.family, cfg.process, cfg.potential, qs, tol=float(num["tol"]),
        seed=cfg.seed,
    )
    spec = legendre_spectrum(curve)
    rows = [(float(q), float(t), float(a), float(g)) for q, t, a, g in
            zip(curve.qs, curve.ts, spec.alphas, spec.gs)]
    summary = {
        "tangency_gap": spec.tangency_gap(),
        "peak": spec.peak(),
        "t_at_1": curve.value(1.0),
        "convexity_defect": curve.convexity_defect(),
    }
    return summary, {"spectrum": (("q", "T", "alpha", "g"), rows)}


def _op_decay(cfg):
    num = cfg.numerics
    path = sample_path(cfg.process, seed=cfg.seed)
    corr = correlation_series(
        cfg.family, path, cfg.potential, lambda x: x, lambda x: x,
        int(num["n_corr"]), m=int(num["grid_m"]), depth=int(num["depth"]),
    )
    slope = correlation_decay_slope(corr, n_hi=int(num["n_corr"]))
    rows = [(int(n), float(c)) for n, c in enumerate(corr)]
    return {"fitted_log_slope": slope}, {"correlations": (("n", "corr"), rows)}


def _op_transfer(cfg):
    num = cfg.numerics
    path = sample_path(cfg.process, seed=cfg.seed)
    g = iterate_transfer(cfg.family, path, cfg.potential,
                         constant_function(1.0, int(num["grid_m"])),
                         int(num["n_steps"]) if num["n_steps"] < 64 else 8)
    grid_rows = [(float(w), float(v)) for w, v in zip(g.grid, g.materialized())]
    measure = conformal_cylinder_masses(cfg.family, path, cfg.potential,
                                        int(num["depth"]))
    mass_rows = [("".join(str(b) for b in measure.word(i)), float(m))
                 for i, m in enumerate(measure.masses)]
    summary = {"approximate_masses": measure.approximate,
               "mass_total": float(measure.masses.sum())}
    return summary, {
        "transfer_grid": (("w", "Ln1"), grid_rows),
        "cylinder_masses": (("word", "mass"), mass_rows),
    }


def _op_induce(cfg):
    num = cfg.numerics
    spec = find_expanding_set(cfg.family, cfg.process, int(num["window_depth"]))
    t = cfg.potential.t if isinstance(cfg.potential, GeometricT) else 0.0
    rep = induced_pressure_consistency(
        cfg.family, cfg.process, t, spec=spec, n_samples=int(num["n_samples"]),
        seed=cfg.seed,
    )
    h = mean_example_bowen(cfg.family, cfg.process,
                           depth_window=int(num["window_depth"]), seed=cfg.seed)
    rows = [(r["window"], r["accepted"]) for r in spec.rows()]
    summary = {
        "m_estimate": spec.m_estimate,
        "refinement_level": spec.level,
        "direct_pressure": rep.direct_value,
        "induced_pressure": rep.induced_value,
        "difference": rep.difference,
        "combined_stderr": rep.combined_stderr,
        "bowen_h": h,
    }
    return summary, {"decision_table": (("window", "accepted"), rows)}


def _op_julia(cfg):
    num = cfg.numerics
    ts = _t_grid(num)
    rows = []
    for t in ts:
        est = julia_pressure(cfg.family, cfg.process, float(t),
                             depth=int(num["depth"]),
                             n_samples=int(num["n_samples"]), seed=cfg.seed)
        rows.append((float(t), est.value, est.stderr, int(num["depth"])))
    res = julia_bowen(cfg.family, cfg.process, tol_t=float(num["tol_t"]),
                      depth=int(num["depth"]), n_samples=int(num["n_samples"]),
                      seed=cfg.seed)
    summary = {
        "h": res.h,
        "bracket": list(res.bracket),
        "depth": res.depth,
        "samples": res.n_samples,
        "noise_limited": res.noise_limited,
    }
    return summary, {"julia_pressure": (("t", "pressure", "stderr", "depth"), rows)}


_HANDLERS = {
    "describe": _op_describe,
    "pressure": _op_pressure,
    "bowen": _op_bowen,
    "classify": _op_classify,
    "spectrum": _op_spectrum,
    "decay": _op_decay,
    "transfer": _op_transfer,
    "induce": _op_induce,
    "julia": _op_julia,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="randpress",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="op", required=True)
    for op in OPS:
        p = sub.add_parser(op)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, op=args.op, seed=args.seed,
                          out=args.out, workers=args.workers)
        bundle = run_experiment(cfg)
        out_dir = bundle.write(cfg.out)
    except RandpressError as exc:
        json.dump(exc.to_json(), sys.stdout)
        sys.stdout.write("\n")
        return 1
    json.dump({"ok": True, "out": out_dir, **bundle.summary}, sys.stdout,
              default=str)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
