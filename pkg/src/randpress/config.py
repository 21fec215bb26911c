"""Experiment configuration parsing and the result bundle writer.

Configs are TOML files with the sections [run], [family], [process],
[potential], [numerics]; unknown keys are rejected with a full list of
offenders.  Results are a JSON summary plus CSV tables with 17 significant
digits, under a provenance block (config hash, seed, version).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .base import deterministic_process, iid_process, periodic_process
from .errors import ConfigError
from .fibers import (
    cantor_family,
    doubling_family,
    mean_example_family,
    quadratic_family,
    two_slope_family,
)
from .transfer import BranchConstant, GeometricT

OPS = (
    "pressure",
    "bowen",
    "classify",
    "spectrum",
    "decay",
    "induce",
    "julia",
    "transfer",
    "describe",
)

_ALLOWED = {
    "run": {"op", "seed", "out", "workers"},
    "family": {"kind", "s1", "s2", "d", "params_re", "params_im", "delta"},
    "process": {"kind", "probs", "symbol", "word"},
    "potential": {"kind", "t", "values"},
    "numerics": {
        "n_steps", "n_samples", "depth", "grid_m", "tol", "tol_t",
        "q_lo", "q_hi", "q_step", "n_max", "n_corr", "window_depth",
        "t_lo", "t_hi", "t_step",
    },
}

_NUMERIC_DEFAULTS = {
    "n_steps": 100,
    "n_samples": 50,
    "depth": 10,
    "grid_m": 2048,
    "tol": 1e-8,
    "tol_t": 1e-4,
    "q_lo": -4.0,
    "q_hi": 4.0,
    "q_step": 0.25,
    "n_max": 1024,
    "n_corr": 12,
    "window_depth": 8,
    "t_lo": 0.0,
    "t_hi": 1.0,
    "t_step": 0.25,
}


@dataclass
class ExperimentConfig:
    op: str
    seed: int
    family: object
    process: object
    potential: object
    numerics: dict
    workers: int
    raw: dict
    digest: str
    out: str = ""


def _validate_keys(raw):
    offenders = []
    for section, table in raw.items():
        if section not in _ALLOWED:
            offenders.append(section)
            continue
        for key in table:
            if key not in _ALLOWED[section]:
                offenders.append(f"{section}.{key}")
    if offenders:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(offenders))}")


def _build_family(table):
    kind = table.get("kind")
    if kind == "cantor":
        return cantor_family()
    if kind == "two-slope":
        return two_slope_family(table.get("s1", 2.0), table.get("s2", 4.0))
    if kind == "doubling":
        return doubling_family()
    if kind == "mean-example":
        return mean_example_family()
    if kind == "quadratic":
        re = table.get("params_re", [0.0])
        im = table.get("params_im", [0.0] * len(re))
        params = [complex(r, i) for r, i in zip(re, im)]
        return quadratic_family(table.get("d", 2), params, table.get("delta"))
    raise ConfigError(f"unknown family kind {kind!r}")


def _build_process(table, n_symbols):
    kind = table.get("kind", "iid")
    if kind == "iid":
        probs = table.get("probs", [1.0 / n_symbols] * n_symbols)
        return iid_process(probs)
    if kind == "deterministic":
        return deterministic_process(int(table.get("symbol", 0)), n_symbols)
    if kind == "periodic":
        return periodic_process(table.get("word", [0]), n_symbols)
    raise ConfigError(f"unknown process kind {kind!r}")


def _build_potential(table):
    kind = table.get("kind", "geometric")
    if kind == "geometric":
        return GeometricT(float(table.get("t", 1.0)))
    if kind == "branch-constant":
        values = table.get("values")
        if values is None:
            raise ConfigError("branch-constant potential needs 'values'")
        return BranchConstant(tuple(tuple(float(v) for v in row) for row in values))
    raise ConfigError(f"unknown potential kind {kind!r}")


def load_config(path, op=None, seed=None, out=None, workers=None):
    """Parse and validate a TOML experiment config file."""
    with open(path, "rb") as fh:
        data = fh.read()
    raw = tomllib.loads(data.decode("utf-8"))
    _validate_keys(raw)

    run = raw.get("run", {})
    the_op = op or run.get("op")
    if the_op not in OPS:
        raise ConfigError(f"run.op must be one of {OPS}, got {the_op!r}")
    family = _build_family(raw.get("family", {"kind": "cantor"}))
    process = _build_process(raw.get("process", {}), family.n_symbols)
    potential = _build_potential(raw.get("potential", {}))

    numerics = dict(_NUMERIC_DEFAULTS)
    numerics.update(raw.get("numerics", {}))
    errors = []
    for key in ("n_steps", "n_samples", "depth", "grid_m", "n_max", "n_corr",
                "window_depth"):
        if int(numerics[key]) < 1:
            errors.append(f"numerics.{key} must be >= 1")
    for key in ("tol", "tol_t"):
        if float(numerics[key]) <= 0:
            errors.append(f"numerics.{key} must be > 0")
    if errors:
        raise ConfigError("; ".join(errors))

    env_workers = os.environ.get("RANDPRESS_WORKERS")
    if workers is None:
        workers = int(run.get("workers", env_workers or os.cpu_count() or 1))
    digest = hashlib.sha256(data).hexdigest()
    return ExperimentConfig(
        op=the_op,
        seed=int(seed if seed is not None else run.get("seed", 0)),
        family=family,
        process=process,
        potential=potential,
        numerics=numerics,
        workers=int(workers),
        raw=raw,
        digest=digest,
        out=out or run.get("out", "results"),
    )


@dataclass
class ResultBundle:
    """JSON summary, CSV tables and a provenance block."""

    summary: dict
    tables: dict  # name -> (header tuple, rows list)
    provenance: dict

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        payload = {"summary": self.summary, "provenance": self.provenance}
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(payload, fh, indent=2, default=_json_default)
            fh.write("\n")
        for name, (header, rows) in self.tables.items():
            with open(os.path.join(out_dir, f"{name}.csv"), "w") as fh:
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_csv_cell(v) for v in row) + "\n")
        return out_dir


def _csv_cell(value):
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return str(obj)
