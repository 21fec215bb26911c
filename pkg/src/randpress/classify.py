"""Essential vs quasi-deterministic classification of random systems.

The dichotomy statistic is the asymptotic variance of the fiber pressure at
the Bowen parameter: positive variance means the Birkhoff pressure sums
oscillate on the law-of-the-iterated-logarithm scale (essential systems,
degenerate Hausdorff/packing measures), vanishing variance means bounded
sums (quasi-deterministic systems, geometric measures).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import derive_seed, sample_path
from .errors import ConfigError
from .pressure import _exact_symbol_log_lambdas, expected_pressure, pressure_trace
from .transfer import GeometricT

SIGMA2_THRESHOLD = 1e-4


def step_pressures(family, path, potential, n, leaf_cap=1 << 16):
    """Realized per-step pressures log lambda_{x_j}, j = 0..n-1."""
    exact = _exact_symbol_log_lambdas(family, potential)
    if exact is not None:
        return exact[path.forward(n)]
    return pressure_trace(family, path, potential, n, leaf_cap=leaf_cap).values


def _sample_pressure_matrix(family, process, potential, n, n_samples, seed):
    rows = np.empty((n_samples, n))
    for s in range(n_samples):
        path = sample_path(process, n_forward=n, seed=derive_seed(seed, s))
        rows[s] = step_pressures(family, path, potential, n)
    return rows


@dataclass
class VarianceEstimate:
    """Plateau of Var(S_n)/n over a dyadic ladder of block lengths."""

    sigma2: float
    stderr: float
    ladder_ns: np.ndarray
    ladder_values: np.ndarray
    centered_empirically: bool = False
    center: float = 0.0


def asymptotic_variance(
    family,
    process,
    potential,
    n_max=1024,
    n_samples=400,
    seed=0,
    center=None,
):
    """sigma^2 = lim Var(S_n P)/n estimated across independent path samples.

    The caller normally passes the Bowen-parameter potential (E P = 0); if
    the expected pressure is visibly non-zero the sums are centered
    empirically and the estimate flagged.
    """
    if n_max < 2 or n_samples < 8:
        raise ConfigError("need n_max >= 2 and n_samples >= 8")
    rows = _sample_pressure_matrix(family, process, potential, n_max, n_samples, seed)

    empirical = False
    if center is None:
        est = expected_pressure(family, process, potential, n_samples=max(
            8, n_samples // 4), n_steps=max(10, n_max // 4), seed=derive_seed(seed, 977))
        center = est.value
        scale = max(3 * est.stderr, 1e-10)
        if abs(center) > scale:
            empirical = True
        if est.method == "exact" and abs(center) <= 1e-12:
            center = 0.0

    centered = np.cumsum(rows - center, axis=1)
    ns = 2 ** np.arange(1, int(math.log2(n_max)) + 1)
    ns = ns[ns <= n_max]
    ladder = np.array([centered[:, n - 1].var(ddof=1) / n for n in ns])
    sigma2 = float(ladder[-1])
    stderr = sigma2 * math.sqrt(2.0 / (n_samples - 1))
    return VarianceEstimate(sigma2, stderr, ns, ladder, empirical, float(center))


@dataclass
class ClassificationVerdict:
    verdict: str  # "Essential" | "QuasiDeterministic" | "Inconclusive"
    variance: VarianceEstimate
    threshold: float
    lil_max: float
    lil_min: float
    max_abs_sum: float
    l_cap: float
    consequences: str


def classify_system(
    family,
    process,
    h,
    n_max=1024,
    n_samples=400,
    seed=0,
    threshold=SIGMA2_THRESHOLD,
):
    """Classify the system at its Bowen parameter via the variance dichotomy.

    Essential needs sigma^2 above the threshold with 3-sigma margin;
    quasi-deterministic needs sigma^2 below it and centered pressure sums
    bounded by a run-level cap.  Near-threshold runs come back Inconclusive.
    """
    potential = GeometricT(float(h))
    var = asymptotic_variance(
        family, process, potential, n_max=n_max, n_samples=n_samples, seed=seed
    )

    rows = _sample_pressure_matrix(
        family, process, potential, n_max, min(n_samples, 64), derive_seed(seed, 31)
    )
    sums = np.cumsum(rows - var.center, axis=1)
    max_abs = float(np.max(np.abs(sums)))
    a_max = float(np.max(np.abs(rows - var.center)))
    l_cap = 10.0 * max(a_max, 1e-12)

    ns = np.arange(3, rows.shape[1] + 1)
    lil_scale = np.sqrt(ns * np.log(np.log(ns)))
    lil = sums[:, 2:] / lil_scale
    lil_max, lil_min = float(np.max(lil)), float(np.min(lil))

    if var.sigma2 - 3 * var.stderr > threshold:
        verdict = "Essential"
        consequences = (
            "h-dimensional Hausdorff measure of a.e. fiber vanishes and the "
            "h-packing measure is infinite; pressure sums oscillate to +/- inf"
        )
    elif var.sigma2 + 3 * var.stderr < threshold and max_abs <= l_cap:
        verdict = "QuasiDeterministic"
        consequences = (
            "pressure is a coboundary at h: fibers carry geometric measures "
            "with exponent h"
        )
    else:
        verdict = "Inconclusive"
        consequences = "variance estimate sits in the threshold band; refine sampling"
    return ClassificationVerdict(
        verdict, var, threshold, lil_max, lil_min, max_abs, l_cap, consequences
    )


@dataclass
class GibbsExtremes:
    """Running extremes of exp(-S_n P) over an n-ladder along one path."""

    ns: np.ndarray
    running_min: np.ndarray
    running_max: np.ndarray

    @property
    def overall_min(self):
        return float(self.running_min[-1])

    @property
    def overall_max(self):
        return float(self.running_max[-1])


def gibbs_ratio_extremes(family, path, h, n_max):
    """Extremes of the Gibbs ratio mu(C_n)/diam(C_n)^h = exp(-S_n P_x).

    Essential systems show growing max / decaying min on LIL scales;
    quasi-deterministic ones stay within a fixed band.  Reported, not
    asserted pointwise.
    """
    if n_max < 10:
        raise ConfigError("n_max must be >= 10")
    p = step_pressures(family, path, GeometricT(float(h)), n_max)
    ratios = np.exp(-np.cumsum(p))
    ns = 2 ** np.arange(1, int(math.log2(n_max)) + 1)
    ns = ns[ns <= n_max]
    running_min = np.array([ratios[:n].min() for n in ns])
    running_max = np.array([ratios[:n].max() for n in ns])
    return GibbsExtremes(ns, running_min, running_max)
