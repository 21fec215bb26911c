"""Fiber pressure traces, Monte-Carlo expected pressure and the Bowen root.

The per-fiber pressure is log lambda_x from the ratio extraction in
:mod:`randpress.transfer`.  For branch-constant data the per-step eigenvalue
is exact, the expected pressure reduces to an exact symbol average and the
Bowen bisection is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .base import BaseProcess, derive_seed, sample_path
from .errors import BracketError, ConfigError, ConvergenceError
from .transfer import GeometricT, MultifractalQT, fiber_lambda


@dataclass
class PressureTrace:
    """Per-step fiber pressures P_{x_j} = log lambda_hat and their prefix sums."""

    values: np.ndarray
    converged: np.ndarray
    depths: np.ndarray
    potential: str
    tol: float
    error_index: int = -1  # first non-converged step, -1 if clean

    @property
    def partial_sums(self):
        return np.cumsum(self.values)

    @property
    def n(self):
        return len(self.values)


def pressure_trace(family, path, potential, n, tol=1e-10, leaf_cap=1 << 16):
    """Realized pressure values log lambda_{x_j} for j = 0..n-1."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    values = np.empty(n)
    conv = np.ones(n, dtype=bool)
    depths = np.empty(n, dtype=int)
    err = -1
    for j in range(n):
        lam, ok, _res, depth = fiber_lambda(
            family, path, j, potential, tol=tol, leaf_cap=leaf_cap
        )
        values[j] = math.log(lam)
        conv[j] = ok
        depths[j] = depth
        if not ok and err < 0:
            err = j
    return PressureTrace(values, conv, depths, potential.describe(), tol, err)


@dataclass
class ExpectedPressureEstimate:
    """Monte-Carlo (or exact) estimate of the expected pressure."""

    value: float
    stderr: float
    n_steps: int
    n_samples: int
    potential: str
    method: str = "mc"
    failures: int = 0


def _exact_symbol_log_lambdas(family, potential):
    """Per-symbol log lambda when the potential is branch-constant, else None."""
    logs = []
    for a in range(family.n_symbols):
        bv = potential.branch_values(family, a)
        if bv is None:
            return None
        logs.append(float(logsumexp(bv)))
    return np.asarray(logs)


def expected_pressure(
    family,
    process,
    potential,
    n_steps=100,
    n_samples=50,
    seed=0,
    method="auto",
    tol=1e-10,
    leaf_cap=1 << 16,
):
    """E P(phi) as the mean of S_n P / n over independent realized paths.

    ``method="auto"`` short-circuits to the exact symbol average when the
    per-step eigenvalue is branch-constant-exact (stderr 0); ``"mc"`` forces
    the sampling estimator.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    exact_logs = _exact_symbol_log_lambdas(family, potential)

    if method == "auto" and exact_logs is not None:
        weights = process.symbol_weights()
        value = float(np.dot(weights, exact_logs))
        return ExpectedPressureEstimate(
            value, 0.0, n_steps, n_samples, potential.describe(), method="exact"
        )
    if method not in ("auto", "mc"):
        raise ConfigError(f"unknown expected_pressure method {method!r}")
    if n_steps < 10:
        raise ConfigError("n_steps must be >= 10 for the MC estimator")

    means, failures = [], 0
    for s in range(n_samples):
        path = sample_path(process, n_forward=n_steps, seed=derive_seed(seed, s))
        if exact_logs is not None:
            symbols = path.forward(n_steps)
            means.append(float(np.mean(exact_logs[symbols])))
            continue
        try:
            trace = pressure_trace(family, path, potential, n_steps, tol=tol,
                                   leaf_cap=leaf_cap)
        except ConvergenceError:
            failures += 1
            continue
        if not trace.converged.all():
            failures += 1
            continue
        means.append(float(trace.values.mean()))
    if not means:
        raise ConvergenceError("all MC pressure samples failed to converge")
    arr = np.asarray(means)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return ExpectedPressureEstimate(
        float(arr.mean()), stderr, n_steps, len(arr), potential.describe(),
        method="mc", failures=failures,
    )


@dataclass
class BowenResult:
    """Root of t -> E P(-t log|T'|) with its final bracket and diagnostics."""

    h: float
    bracket: tuple
    ep_lo: ExpectedPressureEstimate
    ep_hi: ExpectedPressureEstimate
    tol: float
    noise_limited: bool = False
    achievable_tol: float = 0.0


def bowen_dimension(
    family,
    process,
    t_lo=0.0,
    t_hi=None,
    tol_t=1e-4,
    n_steps=100,
    n_samples=50,
    seed=0,
    method="auto",
    make_potential=GeometricT,
    leaf_cap=1 << 16,
):
    """Bisection root of the expected pressure in the geometric parameter t.

    The bracket must sign-separate at 3 sigma; it is auto-expanded up to
    [0, 2 * ambient dimension] before giving up.  With exact per-step
    pressure the result is deterministic to ``tol_t``.
    """
    dim = getattr(family, "ambient_dim", 1)
    if t_hi is None:
        t_hi = float(dim)

    def ep(t):
        return expected_pressure(
            family, process, make_potential(t), n_steps=n_steps,
            n_samples=n_samples, seed=seed, method=method, leaf_cap=leaf_cap,
        )

    ep_lo, ep_hi = ep(t_lo), ep(t_hi)
    while ep_lo.value <= 3 * ep_lo.stderr and t_lo > 0:
        t_lo = max(0.0, t_lo / 2 - 0.1)
        ep_lo = ep(t_lo)
    while ep_hi.value >= -3 * ep_hi.stderr and t_hi < 2 * dim:
        t_hi = min(2.0 * dim, 2 * t_hi)
        ep_hi = ep(t_hi)
    if ep_lo.value <= 3 * ep_lo.stderr or ep_hi.value >= -3 * ep_hi.stderr:
        raise BracketError(
            f"expected pressure does not sign-separate on [{t_lo}, {t_hi}]"
        )

    noise_limited = False
    achievable = 0.0
    while t_hi - t_lo > tol_t:
        mid = 0.5 * (t_lo + t_hi)
        ep_mid = ep(mid)
        if ep_mid.stderr > 0 and abs(ep_mid.value) <= 3 * ep_mid.stderr:
            # MC noise drowns the sign at the root; report achievable precision
            slope = (ep_hi.value - ep_lo.value) / (t_hi - t_lo)
            achievable = abs(3 * ep_mid.stderr / slope) if slope != 0 else math.inf
            noise_limited = True
            break
        if ep_mid.value > 0:
            t_lo, ep_lo = mid, ep_mid
        else:
            t_hi, ep_hi = mid, ep_mid
    return BowenResult(
        h=0.5 * (t_lo + t_hi),
        bracket=(t_lo, t_hi),
        ep_lo=ep_lo,
        ep_hi=ep_hi,
        tol=tol_t,
        noise_limited=noise_limited,
        achievable_tol=achievable,
    )


@dataclass
class ConvexityReport:
    """Midpoint-convexity and smoothness diagnostics of (q,t) -> E P."""

    q_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    max_violation: float
    n_triples: int
    max_second_difference_jump: float

    @property
    def convex(self):
        return self.max_violation <= 0.0


def resolve_symbol_pressures(family, potential):
    """Per-symbol fiber pressures of a branch-constant potential, exact."""
    logs = _exact_symbol_log_lambdas(family, potential)
    if logs is None:
        raise ConfigError(
            "per-symbol pressures need branch-constant potential data; "
            "resolve a pressure trace explicitly for smooth potentials"
        )
    return tuple(float(v) for v in logs)


def pressure_convexity_probe(
    family,
    process,
    base_potential,
    q_grid,
    t_grid,
    n_steps=100,
    n_samples=50,
    seed=0,
    method="auto",
):
    """Probe midpoint convexity of E P(q(phi - P) - t log|T'|) on a grid.

    Checks every aligned triple whose midpoint is a grid node; a positive
    ``max_violation`` means convexity failed beyond 3x combined stderr.
    Also reports the largest jump of second differences along t (finite-
    difference smoothness surrogate).
    """
    q_grid = np.atleast_1d(np.asarray(q_grid, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    pressures = resolve_symbol_pressures(family, base_potential)

    values = np.empty((len(q_grid), len(t_grid)))
    errs = np.empty_like(values)
    for i, q in enumerate(q_grid):
        for j, t in enumerate(t_grid):
            est = expected_pressure(
                family, process,
                MultifractalQT(base_potential, float(q), float(t), pressures),
                n_steps=n_steps, n_samples=n_samples, seed=seed, method=method,
            )
            values[i, j] = est.value
            errs[i, j] = est.stderr

    nq, nt = values.shape
    max_violation = -math.inf
    n_triples = 0
    for i1 in range(nq):
        for j1 in range(nt):
            for i2 in range(i1, nq):
                for j2 in range(nt):
                    if (i1, j1) == (i2, j2):
                        continue
                    if (i1 + i2) % 2 or (j1 + j2) % 2:
                        continue
                    im, jm = (i1 + i2) // 2, (j1 + j2) // 2
                    noise = 3.0 * (errs[i1, j1] + errs[i2, j2] + 2 * errs[im, jm])
                    lhs = values[im, jm]
                    rhs = 0.5 * (values[i1, j1] + values[i2, j2])
                    max_violation = max(max_violation, lhs - rhs - noise)
                    n_triples += 1
    if n_triples == 0:
        max_violation = 0.0

    max_jump = 0.0
    if nt >= 4:
        second = np.diff(values, n=2, axis=1)
        max_jump = float(np.max(np.abs(np.diff(second, axis=1)))) if second.shape[1] > 1 else 0.0
    return ConvexityReport(q_grid, t_grid, values, errs, max_violation, n_triples, max_jump)
