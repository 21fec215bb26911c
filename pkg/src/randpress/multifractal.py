"""Temperature function and concave Legendre multifractal spectrum.

T(q) is the unique root in t of the expected pressure of the two-parameter
potential q*(phi - P) - t*log|T'|; the spectrum is the concave Legendre
transform evaluated at alpha = -T'(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .base import derive_seed, sample_path
from .errors import BracketError, ConfigError, ConvergenceError
from .pressure import expected_pressure, resolve_symbol_pressures
from .transfer import MultifractalQT


def _normalization_check(family, process, base_potential, pressures):
    """The base potential must have vanishing expected pressure."""
    weights = process.symbol_weights()
    ep = float(np.dot(weights, np.asarray(pressures)))
    if abs(ep) > 1e-8:
        raise ConfigError(
            f"base potential is not pressure-normalized: E P = {ep:.3g}; "
            "shift it by its per-symbol pressures first"
        )


def temperature(
    family,
    process,
    base_potential,
    q,
    t_lo=-6.0,
    t_hi=6.0,
    tol=1e-8,
    n_steps=100,
    n_samples=50,
    seed=0,
    method="auto",
    pressures=None,
):
    """T(q): the unique t with E P(q(phi - P) - t log|T'|) = 0, by bisection."""
    if pressures is None:
        pressures = resolve_symbol_pressures(family, base_potential)
    _normalization_check(family, process, base_potential, pressures)

    def ep(t):
        pot = MultifractalQT(base_potential, float(q), float(t), pressures)
        return expected_pressure(
            family, process, pot, n_steps=n_steps, n_samples=n_samples,
            seed=seed, method=method,
        )

    lo, hi = float(t_lo), float(t_hi)
    e_lo, e_hi = ep(lo), ep(hi)
    expansions = 0
    while e_lo.value <= 3 * e_lo.stderr and expansions < 8:
        lo -= (hi - lo)
        e_lo = ep(lo)
        expansions += 1
    while e_hi.value >= -3 * e_hi.stderr and expansions < 16:
        hi += (hi - lo)
        e_hi = ep(hi)
        expansions += 1
    if e_lo.value <= 0 or e_hi.value >= 0:
        raise BracketError(f"no pressure zero bracketed in t for q={q}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ep(mid).value > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class TemperatureCurve:
    """Sampled temperature function with root tolerances and base descriptor."""

    qs: np.ndarray
    ts: np.ndarray
    tol: float
    base: str

    def value(self, q):
        return float(np.interp(q, self.qs, self.ts))

    def convexity_defect(self):
        """Most negative second difference (convex curves stay >= ~0)."""
        if len(self.qs) < 3:
            return 0.0
        return float(np.min(np.diff(self.ts, n=2)))


def temperature_curve(
    family,
    process,
    base_potential,
    q_grid,
    tol=1e-8,
    seed=0,
    method="auto",
    **kwargs,
):
    qs = np.asarray(q_grid, dtype=float)
    pressures = resolve_symbol_pressures(family, base_potential)
    ts = np.array([
        temperature(family, process, base_potential, q, tol=tol, seed=seed,
                    method=method, pressures=pressures, **kwargs)
        for q in qs
    ])
    return TemperatureCurve(qs, ts, tol, base_potential.describe())


def temperature_derivative(
    family,
    process,
    base_potential,
    q,
    method="fd",
    dq=1e-2,
    tol=1e-8,
    seed=0,
    n_steps=200,
    n_samples=64,
    curve=None,
):
    """T'(q), either by central finite differences or by the Gibbs-ratio form.

    The ratio method estimates int(phi - P) dmu_q / int log|T'| dmu_q by
    sampling branch words proportionally to their Gibbs masses (exact for
    branch-constant data).  Returns (value, stderr); the finite-difference
    stderr reflects the root tolerance only.
    """
    pressures = resolve_symbol_pressures(family, base_potential)
    if method == "fd":
        t_plus = temperature(family, process, base_potential, q + dq, tol=tol,
                             seed=seed, pressures=pressures)
        t_minus = temperature(family, process, base_potential, q - dq, tol=tol,
                              seed=seed, pressures=pressures)
        value = (t_plus - t_minus) / (2 * dq)
        return value, tol / dq
    if method != "ratio":
        raise ConfigError(f"unknown derivative method {method!r}")

    t_q = temperature(family, process, base_potential, q, tol=tol, seed=seed,
                      pressures=pressures)
    # per-symbol branch sampling weights under the phi_q Gibbs measure
    weights, nums, dens = [], [], []
    for a in range(family.n_symbols):
        bv = MultifractalQT(base_potential, q, t_q, pressures).branch_values(family, a)
        base_bv = base_potential.branch_values(family, a)
        if bv is None or base_bv is None:
            raise ConfigError("ratio method needs branch-constant data")
        weights.append(np.exp(bv - logsumexp(bv)))
        nums.append(np.asarray(base_bv) - pressures[a])
        dens.append(np.array([math.log(abs(b.slope)) for b in family.branches(a)]))

    ratios = []
    for s in range(n_samples):
        path = sample_path(process, n_forward=n_steps, seed=derive_seed(seed, s))
        symbols = path.forward(n_steps)
        rng = np.random.default_rng(derive_seed(seed, 7919 + s))
        num = den = 0.0
        for a in symbols:
            b = rng.choice(len(weights[a]), p=weights[a])
            num += nums[a][b]
            den += dens[a][b]
        ratios.append(num / den)
    arr = np.asarray(ratios)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), stderr


@dataclass
class SpectrumResult:
    """Legendre pairs (alpha_i, g_i) = (-T'(q_i), q_i alpha_i + T(q_i))."""

    alphas: np.ndarray
    gs: np.ndarray
    qs: np.ndarray
    curve: TemperatureCurve
    derivative_method: str = "central-difference"

    def tangency_gap(self):
        """g(alpha(1)) - alpha(1); vanishes when T(1) = 0."""
        i = int(np.argmin(np.abs(self.qs - 1.0)))
        return float(self.gs[i] - self.alphas[i])

    def peak(self):
        return float(np.max(self.gs))


def legendre_spectrum(curve, convexity_slack=None):
    """Concave Legendre transform of a sampled convex temperature function."""
    qs, ts = curve.qs, curve.ts
    if len(qs) < 3:
        raise ConfigError("need at least 3 grid points for the spectrum")
    slack = convexity_slack if convexity_slack is not None else 10 * curve.tol + 1e-12
    if curve.convexity_defect() < -slack:
        raise ConvergenceError(
            "temperature curve is non-convex beyond noise; refine root tolerances"
        )
    alphas = -np.gradient(ts, qs)
    gs = qs * alphas + ts
    return SpectrumResult(alphas, gs, qs, curve)
