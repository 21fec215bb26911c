"""Random polynomial Julia systems: pressure and dimension on complex fibers.

Everything is computed on exact dense inverse-branch trees pulled back from
a fixed-point anchor; no pruning, log-space accumulation, deterministic
branch labelling via roots of unity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .base import derive_seed, sample_path
from .errors import BracketError, ConfigError, ResourceLimitError
from .fibers import QuadraticFamily
from .pressure import ExpectedPressureEstimate

TREE_LEAF_CAP = 1 << 22


@dataclass
class InverseTree:
    """Dense depth-n backward orbit tree of one anchor point."""

    anchor: complex
    symbols: tuple
    points: np.ndarray  # d^n leaves
    log_weights: np.ndarray  # accumulated S_n(-t log|T'|) per leaf
    t: float

    @property
    def depth(self):
        return len(self.symbols)

    def log_sum(self):
        return float(logsumexp(self.log_weights))

    def forward_consistency(self, family):
        """Max relative defect of re-applying the word to every leaf."""
        z = self.points.copy()
        for a in self.symbols:
            z = z ** family.d + family.params[int(a)]
        scale = max(abs(self.anchor), 1.0)
        return float(np.max(np.abs(z - self.anchor)) / scale)


def inverse_tree(family, symbols, anchor, t):
    """Pull the anchor back through the symbol word (x_0..x_{n-1})."""
    if not isinstance(family, QuadraticFamily):
        raise ConfigError("inverse trees are defined for polynomial families")
    symbols = tuple(int(a) for a in symbols)
    if family.d ** len(symbols) > TREE_LEAF_CAP:
        raise ResourceLimitError(
            f"depth {len(symbols)} tree exceeds the leaf cap {TREE_LEAF_CAP}"
        )
    pts = np.asarray([anchor], dtype=complex)
    logw = np.zeros(1)
    for a in reversed(symbols):
        roots, lds = family.inverse_points(a, pts)
        logw = (logw[:, None] - t * lds).ravel()
        pts = roots.ravel()
    return InverseTree(complex(anchor), symbols, pts, logw, float(t))


def julia_pressure(
    family,
    process,
    t,
    depth=16,
    n_samples=8,
    seed=0,
    burn_fraction=0.5,
):
    """Expected pressure of -t log|T'| from tree-sum growth rates.

    Per sample the estimate is (log S_n - log S_m)/(n - m) with both sums
    anchored at the largest-modulus fixed point over the terminal fiber;
    the shared trailing window cancels most of the anchor bias.
    """
    if depth < 4:
        raise ConfigError("depth must be >= 4")
    burn = max(2, int(depth * burn_fraction))
    if process.kind == "deterministic":
        n_samples = 1
    values = []
    for s in range(n_samples):
        path = sample_path(process, seed=derive_seed(seed, s))
        symbols = [int(a) for a in path.forward(depth)]
        anchor = family.anchor_point(int(path.symbol(depth)))
        hi = inverse_tree(family, symbols, anchor, t).log_sum()
        lo = inverse_tree(family, symbols[depth - burn :], anchor, t).log_sum()
        values.append((hi - lo) / (depth - burn))
    arr = np.asarray(values)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return ExpectedPressureEstimate(
        float(arr.mean()), stderr, depth, len(arr),
        f"geometric(t={t}) on z^{family.d}+c", method="tree",
    )


@dataclass
class JuliaBowenResult:
    h: float
    bracket: tuple
    depth: int
    n_samples: int
    noise_limited: bool = False
    achievable_tol: float = 0.0


def julia_bowen(
    family,
    process,
    t_lo=0.5,
    t_hi=2.0,
    tol_t=5e-3,
    depth=16,
    n_samples=8,
    seed=0,
):
    """Bisection of the Julia-fiber pressure in t; flags MC-limited precision."""

    def ep(t):
        return julia_pressure(family, process, t, depth=depth,
                              n_samples=n_samples, seed=seed)

    e_lo, e_hi = ep(t_lo), ep(t_hi)
    while e_lo.value <= 3 * e_lo.stderr and t_lo > 1e-3:
        t_lo /= 2
        e_lo = ep(t_lo)
    while e_hi.value >= -3 * e_hi.stderr and t_hi < 4.0:
        t_hi *= 1.5
        e_hi = ep(t_hi)
    if e_lo.value <= 3 * e_lo.stderr or e_hi.value >= -3 * e_hi.stderr:
        raise BracketError(f"no sign change of the pressure on [{t_lo}, {t_hi}]")

    noise_limited, achievable = False, 0.0
    while t_hi - t_lo > tol_t:
        mid = 0.5 * (t_lo + t_hi)
        e_mid = ep(mid)
        if e_mid.stderr > 0 and abs(e_mid.value) <= 3 * e_mid.stderr:
            slope = (e_hi.value - e_lo.value) / (t_hi - t_lo)
            achievable = abs(3 * e_mid.stderr / slope) if slope else math.inf
            noise_limited = True
            break
        if e_mid.value > 0:
            t_lo, e_lo = mid, e_mid
        else:
            t_hi, e_hi = mid, e_mid
    return JuliaBowenResult(
        0.5 * (t_lo + t_hi), (t_lo, t_hi), depth, n_samples,
        noise_limited, achievable,
    )
