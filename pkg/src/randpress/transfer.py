"""Fiberwise Ruelle transfer operators.

Grid-based operator application for interval families, inverse-branch tree
pullback sums for the ratio extraction of the fiber eigenvalue lambda_x,
conformal cylinder measures, distortion diagnostics and decay-of-correlation
series.  All iterated sums are carried in log-space once magnitudes leave the
safe floating range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .base import SymbolPath
from .errors import (
    ConfigError,
    ConvergenceError,
    NotUniformlyExpandingError,
    RepresentationError,
    ResourceLimitError,
)
from .fibers import FiberFamily, QuadraticFamily

DEFAULT_GRID = 2048
TREE_LEAF_CAP = 1 << 22
CYLINDER_CAP = 1 << 22


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


class Potential:
    """Common interface of Holder potential families.

    ``branch_values`` returns per-branch constants when the potential is
    exactly branch-constant for the given family/symbol (None otherwise);
    ``evaluate`` works pointwise at preimage points.
    """

    def branch_values(self, family, symbol):
        return None

    def evaluate(self, family, symbol, branch, z, log_deriv):
        raise NotImplementedError

    def holder_bound(self, family):
        """Lipschitz bound H0 of the potential over one branch."""
        raise NotImplementedError

    def describe(self):
        return type(self).__name__


@dataclass(frozen=True)
class GeometricT(Potential):
    """The geometric potential -t * log|T'|."""

    t: float

    def branch_values(self, family, symbol):
        if isinstance(family, QuadraticFamily):
            return None
        branches = family.branches(symbol)
        if not all(b.is_affine for b in branches):
            return None
        return np.array([-self.t * math.log(abs(b.slope)) for b in branches])

    def evaluate(self, family, symbol, branch, z, log_deriv):
        return -self.t * np.asarray(log_deriv, dtype=float)

    def holder_bound(self, family):
        return abs(self.t) * family.log_deriv_lipschitz()

    def describe(self):
        return f"geometric(t={self.t})"


@dataclass(frozen=True)
class BranchConstant(Potential):
    """Per-symbol, per-branch constant values."""

    values: tuple  # tuple (per symbol) of tuples of branch constants

    def branch_values(self, family, symbol):
        return np.asarray(self.values[symbol], dtype=float)

    def evaluate(self, family, symbol, branch, z, log_deriv):
        v = self.values[symbol][branch]
        return np.full(np.shape(np.asarray(z)), float(v))

    def holder_bound(self, family):
        return 0.0

    def describe(self):
        return f"branch-constant({self.values})"


@dataclass(frozen=True)
class Shifted(Potential):
    """A base potential minus per-symbol additive constants (phi - P)."""

    base: Potential
    shifts: tuple  # one constant per symbol

    def branch_values(self, family, symbol):
        bv = self.base.branch_values(family, symbol)
        if bv is None:
            return None
        return bv - self.shifts[symbol]

    def evaluate(self, family, symbol, branch, z, log_deriv):
        return self.base.evaluate(family, symbol, branch, z, log_deriv) - self.shifts[symbol]

    def holder_bound(self, family):
        return self.base.holder_bound(family)

    def describe(self):
        return f"shifted({self.base.describe()})"


@dataclass(frozen=True)
class MultifractalQT(Potential):
    """q*(phi - P_a) - t*log|T'| built from a resolved per-symbol pressure table."""

    base: Potential
    q: float
    t: float
    pressures: tuple  # P_a(base) per symbol

    def branch_values(self, family, symbol):
        bv = self.base.branch_values(family, symbol)
        if bv is None or isinstance(family, QuadraticFamily):
            return None
        branches = family.branches(symbol)
        if not all(b.is_affine for b in branches):
            return None
        logs = np.array([math.log(abs(b.slope)) for b in branches])
        return self.q * (bv - self.pressures[symbol]) - self.t * logs

    def evaluate(self, family, symbol, branch, z, log_deriv):
        base = self.base.evaluate(family, symbol, branch, z, log_deriv)
        return self.q * (base - self.pressures[symbol]) - self.t * np.asarray(log_deriv)

    def holder_bound(self, family):
        return abs(self.q) * self.base.holder_bound(family) + abs(
            self.t
        ) * family.log_deriv_lipschitz()

    def describe(self):
        return f"multifractal(q={self.q}, t={self.t}, base={self.base.describe()})"


def zero_potential(family):
    """Branch-constant zero potential (transfer operator counts preimages)."""
    if isinstance(family, QuadraticFamily):
        return GeometricT(0.0)
    return BranchConstant(
        tuple(tuple(0.0 for _ in family.branches(a)) for a in range(family.n_symbols))
    )


# ---------------------------------------------------------------------------
# fiber functions
# ---------------------------------------------------------------------------


@dataclass
class FiberFunction:
    """A function on one fiber: uniform grid on [0,1] with linear interpolation.

    The represented function is ``values * exp(log_scale)``; the scale factor
    keeps long operator products inside the floating range.
    """

    values: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size < 2:
            raise ConfigError("grid needs M >= 2 points")

    @property
    def m(self):
        return self.values.size

    @property
    def grid(self):
        return np.linspace(0.0, 1.0, self.values.size)

    def evaluate(self, z):
        """Linear interpolation, clamped to [0,1] (without the scale factor)."""
        z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
        return np.interp(z, self.grid, self.values)

    def materialized(self):
        """Values with the scale folded back in."""
        return self.values * math.exp(self.log_scale)

    def log_values(self):
        with np.errstate(divide="ignore"):
            return np.log(self.values) + self.log_scale

    def rescaled(self):
        peak = np.max(np.abs(self.values))
        if peak == 0.0 or 1e-300 < peak < 1e300:
            return self
        return FiberFunction(self.values / peak, self.log_scale + math.log(peak))


def constant_function(value=1.0, m=DEFAULT_GRID):
    return FiberFunction(np.full(m, float(value)))


def grid_function(fn, m=DEFAULT_GRID):
    x = np.linspace(0.0, 1.0, m)
    return FiberFunction(np.asarray(fn(x), dtype=float))


# ---------------------------------------------------------------------------
# operator application
# ---------------------------------------------------------------------------


def apply_transfer(family, symbol, potential, g):
    """(L_a g)(w) = sum over preimages z of g(z) * exp(phi(z)), on the grid."""
    if not isinstance(g, FiberFunction):
        raise RepresentationError("apply_transfer needs a grid FiberFunction")
    if isinstance(family, QuadraticFamily):
        raise RepresentationError("grid transfer is defined for interval families")
    w = g.grid
    out = np.zeros_like(w)
    for b_idx, branch in enumerate(family.branches(symbol)):
        z = branch.inverse(w)
        phi = potential.evaluate(family, symbol, b_idx, z, branch.log_deriv(z))
        out += g.evaluate(z) * np.exp(phi)
    return FiberFunction(out, g.log_scale)


def iterate_transfer(family, path, potential, g0, n):
    """L^n_x g0 over fiber x_n, composing along the path symbols x_0..x_{n-1}."""
    if n < 0:
        raise ConfigError("n must be >= 0")
    g = g0
    for a in path.forward(n):
        g = apply_transfer(family, int(a), potential, g).rescaled()
    return g


# ---------------------------------------------------------------------------
# pullback tree sums and lambda extraction
# ---------------------------------------------------------------------------


def pullback_log_sum(family, symbols, potential, anchor):
    """log L^n 1 (anchor) summed over the full inverse-branch tree.

    ``symbols`` are x_0..x_{n-1}; the pullback processes them last-to-first.
    Works for interval and complex families alike.
    """
    symbols = list(symbols)
    total_leaves = 1
    for a in symbols:
        total_leaves *= family.degree(int(a))
    if total_leaves > TREE_LEAF_CAP:
        raise ResourceLimitError(
            f"pullback tree would have {total_leaves} leaves (cap {TREE_LEAF_CAP})"
        )
    complex_family = isinstance(family, QuadraticFamily)
    pts = np.asarray([anchor], dtype=complex if complex_family else float)
    logw = np.zeros(1)
    for a in reversed(symbols):
        a = int(a)
        if complex_family:
            roots, lds = family.inverse_points(a, pts)  # (k, d)
            phi = potential.evaluate(family, a, None, roots, lds)
            pts = roots.ravel()
            logw = (logw[:, None] + phi).ravel()
        else:
            new_pts, new_logw = [], []
            for b_idx, branch in enumerate(family.branches(a)):
                z = branch.inverse(pts)
                phi = potential.evaluate(family, a, b_idx, z, branch.log_deriv(z))
                new_pts.append(z)
                new_logw.append(logw + phi)
            pts = np.concatenate(new_pts)
            logw = np.concatenate(new_logw)
    return float(logsumexp(logw))


@dataclass
class LambdaTrace:
    """Per-step eigenvalue estimates lambda_hat along a path."""

    values: np.ndarray
    converged: np.ndarray
    residuals: np.ndarray
    depths: np.ndarray

    @property
    def log_values(self):
        return np.log(self.values)

    @property
    def all_converged(self):
        return bool(np.all(self.converged))


def fiber_lambda(
    family,
    path,
    step=0,
    potential=None,
    anchor=0.5,
    tol=1e-10,
    leaf_cap=1 << 16,
):
    """Estimate lambda_{x_step} by the consecutive-pullback ratio at the anchor.

    For branch-constant potential data the depth-1 ratio is exact.  Returns
    (value, converged, residual, depth).
    """
    a0 = int(path.symbol(step))
    bv = potential.branch_values(family, a0)
    if bv is not None:
        return float(np.exp(logsumexp(bv))), True, 0.0, 1

    degree = family.degree(a0)
    max_depth = max(2, int(math.log(leaf_cap) / math.log(max(degree, 2))))
    schedule = []
    d = 2
    while d < max_depth:
        schedule.append(d)
        d *= 2
    schedule.append(max_depth)

    prev = None
    value, residual, depth_used = None, math.inf, 0
    for depth in schedule:
        syms = path.symbols(step, step + depth)
        num = pullback_log_sum(family, syms, potential, anchor)
        den = pullback_log_sum(family, syms[1:], potential, anchor)
        value = math.exp(num - den)
        depth_used = depth
        if prev is not None:
            residual = abs(value - prev)
            if residual < tol * max(abs(value), 1e-300):
                return value, True, residual, depth_used
        prev = value
    return value, False, residual, depth_used


def lambda_trace(family, path, potential, n, anchor=0.5, tol=1e-10, leaf_cap=1 << 16):
    """Per-fiber eigenvalue estimates for x_0..x_{n-1}, re-anchored each step."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    values = np.empty(n)
    conv = np.empty(n, dtype=bool)
    res = np.empty(n)
    depths = np.empty(n, dtype=int)
    for j in range(n):
        values[j], conv[j], res[j], depths[j] = fiber_lambda(
            family, path, j, potential, anchor=anchor, tol=tol, leaf_cap=leaf_cap
        )
    return LambdaTrace(values, conv, res, depths)


# ---------------------------------------------------------------------------
# invariant density
# ---------------------------------------------------------------------------


def invariant_density(family, path, potential, n_back=24, m=DEFAULT_GRID,
                      tol=1e-10, measure=None):
    """Cesaro average of normalized pullbacks: q_hat over the fiber at x_0.

    Averages L-tilde^k_{x_{-k}} 1 for k < n_back, each operator normalized by
    its ratio-extracted eigenvalue, then rescales so the conformal measure of
    q_hat is 1 (cylinder measure when exact, Lebesgue-grid otherwise).
    """
    if family.min_expansion() <= 1.0:
        raise NotUniformlyExpandingError("invariant density needs uniform expansion")
    acc = np.ones(m)  # k = 0 term
    for k in range(1, n_back):
        g = constant_function(1.0, m)
        for j in range(k, 0, -1):
            shifted = path.shift(-j)
            lam, ok, residual, _ = fiber_lambda(family, shifted, 0, potential, tol=tol)
            if not ok:
                raise ConvergenceError(
                    f"lambda ratio did not stabilize at backward step {j} "
                    f"(residual {residual:.3g})"
                )
            g = apply_transfer(family, int(shifted.symbol(0)), potential, g)
            g = FiberFunction(g.values / lam, g.log_scale)
        acc += g.materialized()
    q = acc / n_back
    fn = FiberFunction(q)
    norm = _conformal_integral(family, path, potential, fn, measure=measure)
    return FiberFunction(q / norm)


def _conformal_integral(family, path, potential, fn, depth=10, measure=None):
    """Approximate integral of a grid function against the conformal measure."""
    if measure is None:
        measure = conformal_cylinder_masses(family, path, potential, depth)
    reps = measure.midpoints
    return float(np.sum(measure.masses * fn.evaluate(reps)))


# ---------------------------------------------------------------------------
# conformal cylinder measures
# ---------------------------------------------------------------------------


@dataclass
class CylinderMeasure:
    """Masses of all depth-n symbol-branch cylinders along a realized path.

    Words are branch-index tuples in lexicographic order with the first step
    most significant; ``approximate`` flags midpoint-evaluated potentials and
    ``distortion_bound`` the multiplicative Gibbs error in that case.
    """

    symbols: np.ndarray
    masses: np.ndarray
    lows: np.ndarray
    highs: np.ndarray
    degrees: tuple
    approximate: bool = False
    distortion_bound: float = 0.0

    @property
    def midpoints(self):
        return 0.5 * (self.lows + self.highs)

    def word(self, index):
        """Branch word of the cylinder at a flat index."""
        out = []
        for d in reversed(self.degrees):
            out.append(index % d)
            index //= d
        return tuple(reversed(out))

    def as_dict(self):
        return {self.word(i): float(m) for i, m in enumerate(self.masses)}


def _cylinder_intervals(family, symbols):
    """Endpoints of all depth-n cylinders (first-step-major ordering)."""
    lo = np.array([0.0])
    hi = np.array([1.0])
    for a in reversed([int(s) for s in symbols]):
        new_lo, new_hi = [], []
        for branch in family.branches(a):
            e1 = branch.inverse(lo)
            e2 = branch.inverse(hi)
            new_lo.append(np.minimum(e1, e2))
            new_hi.append(np.maximum(e1, e2))
        lo = np.concatenate(new_lo)
        hi = np.concatenate(new_hi)
    return lo, hi


def conformal_cylinder_masses(family, path, potential, depth, cap=CYLINDER_CAP):
    """nu_x masses of depth-n cylinders, exact for branch-constant data.

    Inverts the conformality relation: mass = exp(S_n phi) / prod lambda_j
    on each cylinder.  Non-branch-constant potentials are midpoint-evaluated
    and flagged approximate with the distortion bound exp(Q * diam^alpha).
    """
    if isinstance(family, QuadraticFamily):
        raise RepresentationError("cylinder masses are defined for interval families")
    symbols = [int(s) for s in path.forward(depth)]
    degrees = tuple(family.degree(a) for a in symbols)
    total = 1
    for d in degrees:
        total *= d
    if total > cap:
        raise ResourceLimitError(f"{total} cylinders exceed cap {cap}")

    lows, highs = _cylinder_intervals(family, symbols)
    exact = all(potential.branch_values(family, a) is not None for a in symbols)
    if exact:
        weights = np.array([1.0])
        for a in symbols:
            bv = potential.branch_values(family, a)
            p = np.exp(bv - logsumexp(bv))  # e^phi_b / lambda_a
            weights = np.kron(weights, p)
        return CylinderMeasure(np.asarray(symbols), weights, lows, highs, degrees)

    # midpoint approximation of S_n phi plus ratio-extracted eigenvalues
    mids = 0.5 * (lows + highs)
    log_mass = np.zeros(total)
    z = mids.copy()
    for j, a in enumerate(symbols):
        lam, ok, residual, _ = fiber_lambda(family, path.shift(j), 0, potential)
        if not ok:
            raise ConvergenceError(f"lambda non-convergence at step {j} ({residual:.3g})")
        phi = np.empty_like(z)
        z_next = np.empty_like(z)
        for b_idx, branch in enumerate(family.branches(a)):
            inside = (z >= branch.lo - 1e-12) & (z <= branch.hi + 1e-12)
            if not np.any(inside):
                continue
            zz = z[inside]
            phi[inside] = potential.evaluate(family, a, b_idx, zz, branch.log_deriv(zz))
            z_next[inside] = branch.forward(zz)
        log_mass += phi - math.log(lam)
        z = np.clip(z_next, 0.0, 1.0)
    mass = np.exp(log_mass - logsumexp(log_mass))
    try:
        q_budget = family.holder_distortion_budget(h0=potential.holder_bound(family))
        bound = math.exp(q_budget * float(np.max(highs - lows)) ** family.alpha)
    except NotUniformlyExpandingError:
        bound = math.inf
    return CylinderMeasure(
        np.asarray(symbols), mass, lows, highs, degrees,
        approximate=True, distortion_bound=bound,
    )


# ---------------------------------------------------------------------------
# distortion diagnostics
# ---------------------------------------------------------------------------


@dataclass
class DistortionReport:
    max_log_ratio: float
    max_excess: float  # worst (log-ratio - per-pair budget)
    budget_constant: float
    violated: bool


def distortion_check(family, path, potential, n, probe_pairs, m=DEFAULT_GRID,
                     slack=1e-8):
    """Compare log-ratios of L^n 1 over probe pairs with the Holder budget."""
    q_const = family.holder_distortion_budget(h0=potential.holder_bound(family))
    g = iterate_transfer(family, path, potential, constant_function(1.0, m), n)
    logs = g.log_values()
    grid = g.grid
    max_ratio, max_excess = 0.0, -math.inf
    for w1, w2 in probe_pairs:
        l1 = float(np.interp(w1, grid, logs))
        l2 = float(np.interp(w2, grid, logs))
        ratio = abs(l1 - l2)
        budget = q_const * abs(w1 - w2) ** family.alpha
        max_ratio = max(max_ratio, ratio)
        max_excess = max(max_excess, ratio - budget)
    return DistortionReport(
        max_log_ratio=max_ratio,
        max_excess=max_excess,
        budget_constant=q_const,
        violated=max_excess > slack,
    )


# ---------------------------------------------------------------------------
# decay of correlations
# ---------------------------------------------------------------------------


def correlation_series(family, path, potential, f_spec, g_spec, n_max,
                       m=DEFAULT_GRID, depth=10, n_back=24):
    """corr(n) = mu_x((f o T^n) g) - mu_{x_n}(f) mu_x(g), n = 0..n_max.

    The invariant measure is assembled as q_hat (Cesaro backward pullbacks)
    times the conformal cylinder measure; g*q_hat is pushed through the
    lambda-normalized operator and integrated against f.
    """
    f0 = f_spec if isinstance(f_spec, FiberFunction) else grid_function(f_spec, m)
    g0 = g_spec if isinstance(g_spec, FiberFunction) else grid_function(g_spec, m)

    measures = [
        conformal_cylinder_masses(family, path.shift(n), potential, depth)
        for n in range(n_max + 1)
    ]
    qs = [
        invariant_density(family, path.shift(n), potential, n_back=n_back, m=m,
                          measure=measures[n])
        for n in range(n_max + 1)
    ]

    def integrate(measure, fn_values_at):
        reps = measure.midpoints
        return float(np.sum(measure.masses * fn_values_at(reps)))

    mu_g = integrate(measures[0], lambda z: g0.evaluate(z) * qs[0].evaluate(z))
    u = FiberFunction(g0.values * qs[0].values)
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        if n > 0:
            step = n - 1
            lam, ok, residual, _ = fiber_lambda(family, path.shift(step), 0, potential)
            if not ok:
                raise ConvergenceError(f"lambda non-convergence at step {step}")
            u = apply_transfer(family, int(path.symbol(step)), potential, u)
            u = FiberFunction(u.values / lam, u.log_scale)
        mu_f = integrate(measures[n], lambda z: f0.evaluate(z) * qs[n].evaluate(z))
        cross = integrate(measures[n], lambda z: f0.evaluate(z) * u.evaluate(z) *
                          math.exp(u.log_scale))
        out[n] = cross - mu_f * mu_g
    return out


def correlation_decay_slope(corr, n_lo=2, n_hi=12, floor=1e-15):
    """Least-squares slope of log|corr(n)| over n in [n_lo, n_hi]."""
    n = np.arange(n_lo, n_hi + 1)
    y = np.log(np.maximum(np.abs(corr[n_lo : n_hi + 1]), floor))
    slope = np.polyfit(n, y, 1)[0]
    return float(slope)
