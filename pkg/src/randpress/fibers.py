"""Concrete expanding random map families on [0,1] and on the complex plane.

Interval families carry per-symbol lists of monotone full branches (affine or
smooth, each mapping its domain onto [0,1]); complex families are the random
perturbations z -> z^d + c_a of the power map.  All values are immutable and
every operation here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    NotUniformlyExpandingError,
    OutsideRepellerError,
    SingularityError,
)


@dataclass(frozen=True)
class AffineBranch:
    """Monotone affine branch f(z) = slope*z + intercept on [lo, hi]."""

    lo: float
    hi: float
    slope: float
    intercept: float

    def forward(self, z):
        return self.slope * np.asarray(z, dtype=float) + self.intercept

    def inverse(self, w):
        return (np.asarray(w, dtype=float) - self.intercept) / self.slope

    def log_deriv(self, z):
        return np.full(np.shape(np.asarray(z)), math.log(abs(self.slope)))

    @property
    def min_abs_deriv(self):
        return abs(self.slope)

    @property
    def is_affine(self):
        return True

    # sup |d/dz log|f'|| over the branch; zero for affine maps
    @property
    def log_deriv_lipschitz(self):
        return 0.0


@dataclass(frozen=True)
class SmoothBranch:
    """Monotone smooth branch given by forward map, derivative and inverse.

    ``min_abs_deriv`` is the infimum of |f'| over the domain and
    ``log_deriv_lipschitz`` bounds |f''/f'| (used for distortion budgets).
    """

    lo: float
    hi: float
    fwd: callable
    deriv: callable
    inv: callable
    min_abs_deriv: float
    log_deriv_lipschitz: float = 0.0

    def forward(self, z):
        return self.fwd(np.asarray(z, dtype=float))

    def inverse(self, w):
        return self.inv(np.asarray(w, dtype=float))

    def log_deriv(self, z):
        return np.log(np.abs(self.deriv(np.asarray(z, dtype=float))))

    @property
    def is_affine(self):
        return False


@dataclass(frozen=True)
class PreimageSet:
    """Preimages of one target point: locations, log|T'| and branch ids."""

    points: np.ndarray
    log_derivs: np.ndarray
    branch_ids: np.ndarray

    def __len__(self):
        return len(self.points)

    def as_pairs(self):
        return list(zip(self.points.tolist(), self.log_derivs.tolist()))


_INTERVAL_KINDS = ("affine", "two-slope", "smooth")


@dataclass(frozen=True)
class FiberFamily:
    """Per-symbol branch data for an interval random map family.

    ``xi`` is the inverse-branch ball radius, ``alpha``/``h0`` the Holder
    data used for distortion budgets.  ``formal=True`` disables domain
    geometry checks for surrogate families used only through branch-constant
    pressure arithmetic.
    """

    kind: str
    branches_by_symbol: tuple  # tuple of tuples of branches
    xi: float = 0.25
    alpha: float = 1.0
    h0: float = 0.0
    formal: bool = False
    description: str = ""

    def __post_init__(self):
        if self.kind not in _INTERVAL_KINDS:
            raise ConfigError(f"unknown interval family kind {self.kind!r}")
        if not self.branches_by_symbol:
            raise ConfigError("family needs at least one symbol")
        if self.formal:
            return
        for branches in self.branches_by_symbol:
            spans = sorted((b.lo, b.hi) for b in branches)
            for (l1, r1), (l2, r2) in zip(spans, spans[1:]):
                if l2 < r1 - 1e-12:
                    raise ConfigError("branch domains overlap")

    @property
    def n_symbols(self):
        return len(self.branches_by_symbol)

    @property
    def ambient_dim(self):
        return 1

    def branches(self, symbol):
        return self.branches_by_symbol[symbol]

    def degree(self, symbol):
        return len(self.branches_by_symbol[symbol])

    @property
    def is_affine(self):
        return all(b.is_affine for bs in self.branches_by_symbol for b in bs)

    def expansion_floor(self, symbol):
        """gamma_a = inf |T'| over the symbol's branches (may be < 1)."""
        return min(b.min_abs_deriv for b in self.branches(symbol))

    def min_expansion(self):
        return min(self.expansion_floor(a) for a in range(self.n_symbols))

    def log_deriv_lipschitz(self):
        """sup |d/dz log|T'|| over all branches (0 for affine families)."""
        return max(b.log_deriv_lipschitz for bs in self.branches_by_symbol for b in bs)

    # -- maps ----------------------------------------------------------------

    def apply_map(self, symbol, z):
        """Forward image of a fiber point; errors off the branch domains."""
        for b in self.branches(symbol):
            if b.lo - 1e-12 <= z <= b.hi + 1e-12:
                return float(b.forward(z))
        raise OutsideRepellerError(
            f"point {z} is in a gap between branch domains of symbol {symbol}"
        )

    def inverse_images(self, symbol, w):
        """All preimages of ``w`` under the symbol's map, with log|T'|."""
        if not self.formal and not (-1e-12 <= w <= 1 + 1e-12):
            raise DomainError(f"target {w} outside [0,1]")
        pts, lds, ids = [], [], []
        for i, b in enumerate(self.branches(symbol)):
            z = float(b.inverse(w))
            pts.append(z)
            lds.append(float(b.log_deriv(z)))
            ids.append(i)
        return PreimageSet(np.asarray(pts), np.asarray(lds), np.asarray(ids))

    def holder_distortion_budget(self, h0=None, alpha=None):
        """Uniform distortion constant Q = H0*g^-a / (1 - g^-a), g = min floor."""
        gamma = self.min_expansion()
        if gamma <= 1.0:
            raise NotUniformlyExpandingError(
                f"minimal expansion {gamma} <= 1; induce before using distortion bounds"
            )
        h0 = self.h0 if h0 is None else h0
        alpha = self.alpha if alpha is None else alpha
        r = gamma ** (-alpha)
        return h0 * r / (1.0 - r)

    def branch_table(self):
        """Human-readable branch data for the describe subcommand."""
        rows = []
        for a, branches in enumerate(self.branches_by_symbol):
            for i, b in enumerate(branches):
                slope = b.slope if b.is_affine else None
                rows.append(
                    {
                        "symbol": a,
                        "branch": i,
                        "lo": b.lo,
                        "hi": b.hi,
                        "slope": slope,
                        "min_abs_deriv": b.min_abs_deriv,
                    }
                )
        return rows


# -- built-in interval families ---------------------------------------------


def _full_affine(lo, hi, increasing=True):
    """Affine branch mapping [lo,hi] onto [0,1]."""
    slope = 1.0 / (hi - lo) if increasing else -1.0 / (hi - lo)
    intercept = -slope * lo if increasing else -slope * hi
    return AffineBranch(lo, hi, slope, intercept)


def cantor_family():
    """Random Cantor maps: 3x mod 1 on [0,1/3]u[2/3,1], 4x mod 1 on [0,1/4]u[3/4,1]."""
    b0 = (
        AffineBranch(0.0, 1.0 / 3.0, 3.0, 0.0),
        AffineBranch(2.0 / 3.0, 1.0, 3.0, -2.0),
    )
    b1 = (
        AffineBranch(0.0, 0.25, 4.0, 0.0),
        AffineBranch(0.75, 1.0, 4.0, -3.0),
    )
    return FiberFamily("affine", (b0, b1), description="random Cantor 3x/4x family")


def two_slope_family(s1=2.0, s2=4.0):
    """Single-symbol map with two full branches of slopes s1 and s2."""
    if s1 <= 1 or s2 <= 1:
        raise ConfigError("two-slope family needs slopes > 1")
    w1, w2 = 1.0 / s1, 1.0 / s2
    if w1 + w2 > 1 + 1e-12:
        raise ConfigError("branch widths exceed the unit interval")
    branches = (
        AffineBranch(0.0, w1, s1, 0.0),
        AffineBranch(w1, w1 + w2, s2, -s2 * w1),
    )
    return FiberFamily("two-slope", (branches,), description=f"two-slope ({s1},{s2})")


def doubling_family():
    """Deterministic doubling map as a single-symbol affine family."""
    branches = (
        AffineBranch(0.0, 0.5, 2.0, 0.0),
        AffineBranch(0.5, 1.0, 2.0, -1.0),
    )
    return FiberFamily("affine", (branches,), description="doubling map")


def mean_example_family():
    """The expanding-in-the-mean example: f0 = {x/2 + 15x^2/2, 8x-7}, f1 = 8x mod 1."""

    def fwd_a(x):
        return 0.5 * x + 7.5 * x * x

    def deriv_a(x):
        return 0.5 + 15.0 * x

    def inv_a(w):
        return (np.sqrt(1.0 + 120.0 * np.asarray(w, dtype=float)) - 1.0) / 30.0

    b0 = (
        SmoothBranch(0.0, 1.0 / 3.0, fwd_a, deriv_a, inv_a,
                     min_abs_deriv=0.5, log_deriv_lipschitz=30.0),
        AffineBranch(7.0 / 8.0, 1.0, 8.0, -7.0),
    )
    b1 = (
        AffineBranch(0.0, 1.0 / 8.0, 8.0, 0.0),
        AffineBranch(7.0 / 8.0, 1.0, 8.0, -7.0),
    )
    return FiberFamily("smooth", (b0, b1), description="expanding-in-the-mean example")


def mean_example_affine_surrogate():
    """Formal affine stand-in for the mean example: slopes (1/2, 8) and (8, 8).

    Only usable through branch-constant pressure arithmetic; its slope-1/2
    branch cannot be realized as a full branch of [0,1], so geometry checks
    are disabled.
    """
    b0 = (
        AffineBranch(0.0, 1.0, 0.5, 0.0),
        AffineBranch(0.0, 1.0, 8.0, 0.0),
    )
    b1 = (
        AffineBranch(0.0, 1.0, 8.0, 0.0),
        AffineBranch(0.0, 1.0, 8.0, -7.0),
    )
    return FiberFamily("affine", (b0, b1), formal=True,
                       description="affine surrogate of the mean example")


# -- complex polynomial families ---------------------------------------------


def quadratic_admissible_delta(d):
    """Largest admissible parameter radius for z -> z^d + c (1/4 for d=2)."""
    eps0 = (1.0 / d) ** (1.0 / (d - 1))
    return eps0 - eps0**d


def _trap_radius(d, delta):
    """Largest eps in (eps0, 1) with eps - eps^d >= delta (bisection)."""
    eps0 = (1.0 / d) ** (1.0 / (d - 1))
    lo, hi = eps0, 1.0
    # g(eps) = eps - eps^d - delta decreases on (eps0, 1); find its zero
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - mid**d >= delta:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class QuadraticFamily:
    """Random degree-d polynomial maps z -> z^d + c_a with |c_a| <= delta < delta(d)."""

    d: int
    params: tuple  # complex parameter per symbol
    delta: float = None
    description: str = ""

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError("polynomial degree must be >= 2")
        delta = self.delta
        if delta is None:
            delta = max((abs(c) for c in self.params), default=0.0)
            object.__setattr__(self, "delta", delta)
        dmax = quadratic_admissible_delta(self.d)
        if delta >= dmax:
            raise ConfigError(
                f"parameter radius {delta} >= delta({self.d}) = {dmax:.6g}"
            )
        for c in self.params:
            if abs(c) > delta + 1e-15:
                raise ConfigError(f"|c| = {abs(c)} exceeds declared radius {delta}")

    @property
    def n_symbols(self):
        return len(self.params)

    @property
    def ambient_dim(self):
        return 2

    def degree(self, symbol):
        return self.d

    def expansion_floor(self, symbol):
        """The annulus bound d * eps^(d-1) with the largest trapped radius eps."""
        eps = _trap_radius(self.d, self.delta)
        return self.d * eps ** (self.d - 1)

    def min_expansion(self):
        return min(self.expansion_floor(a) for a in range(self.n_symbols))

    def apply_map(self, symbol, z):
        return complex(z) ** self.d + self.params[symbol]

    def inverse_points(self, symbol, w):
        """All d-th roots of w - c_a with their log|T'|, as complex arrays.

        Roots are enumerated as the principal root times the d roots of unity
        so branch labelling is deterministic.
        """
        w = np.asarray(w, dtype=complex)
        base = w - self.params[symbol]
        if np.any(np.abs(base) < 1e-12):
            raise SingularityError(
                f"d-th root degenerate at the critical value of symbol {symbol}"
            )
        principal = np.abs(base) ** (1.0 / self.d) * np.exp(
            1j * np.angle(base) / self.d
        )
        units = np.exp(2j * np.pi * np.arange(self.d) / self.d)
        roots = principal[..., None] * units
        log_derivs = math.log(self.d) + (self.d - 1) * np.log(np.abs(roots))
        return roots, log_derivs

    def inverse_images(self, symbol, w):
        roots, lds = self.inverse_points(symbol, np.asarray([w]))
        return PreimageSet(roots.ravel(), lds.ravel(), np.arange(self.d))

    def anchor_point(self, symbol):
        """Fixed point of z -> z^d + c_a of largest modulus (lies in the fiber)."""
        coeffs = np.zeros(self.d + 1, dtype=complex)
        coeffs[0] = 1.0
        coeffs[-2] = -1.0
        coeffs[-1] = self.params[symbol]
        roots = np.roots(coeffs)
        return complex(roots[np.argmax(np.abs(roots))])

    def branch_table(self):
        return [
            {"symbol": a, "degree": self.d, "c": self.params[a],
             "floor": self.expansion_floor(a)}
            for a in range(self.n_symbols)
        ]


def quadratic_family(d, params, delta=None, description=""):
    return QuadraticFamily(int(d), tuple(complex(c) for c in params), delta,
                           description or f"random z^{d}+c family")
