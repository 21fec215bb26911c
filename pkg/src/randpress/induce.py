"""Inducing machinery for maps that expand only in the mean.

The measurable expanding set A is approximated by a decision table over
finite symbol windows built from per-symbol worst-case expansion floors.
First-return blocks over A give the induced map and potential; pressure per
unit original time computed through the induced system must agree with the
direct computation on the original system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .base import derive_seed, sample_path
from .errors import (
    ConfigError,
    DepthInsufficientError,
    NotMeanExpandingError,
    ResourceLimitError,
)
from .fibers import FiberFamily, SmoothBranch
from .transfer import GeometricT, pullback_log_sum

WINDOW_CAP = 1 << 22


@dataclass
class ExpandingSetSpec:
    """Finite-window approximation of the expanding return set A.

    ``table`` maps every length-``depth`` symbol window to accept/reject;
    ``level`` is the refinement iteration at which the table stabilized.
    """

    depth: int
    table: dict
    level: int
    gammas: tuple
    m_estimate: float

    def accepts(self, window):
        return self.table.get(tuple(int(s) for s in window), False)

    def accepted_windows(self):
        return [w for w, ok in self.table.items() if ok]

    def rows(self):
        return [
            {"window": "".join(str(s) for s in w), "accepted": int(ok)}
            for w, ok in sorted(self.table.items())
        ]


def _window_probability(process, window):
    if process.kind == "iid":
        p = np.asarray(process.probs)
        out = 1.0
        for s in window:
            out *= p[s]
        return float(out)
    # periodic / deterministic: frequency of the window along the word
    word = process.word
    n = len(word)
    hits = sum(
        all(word[(i + j) % n] == window[j] for j in range(len(window)))
        for i in range(n)
    )
    return hits / n


def find_expanding_set(family, process, depth):
    """Iterate the window-algebra refinement of the expanding set.

    Acceptance of a window requires a decidable first return inside the
    window whose block expansion product exceeds 1; unresolved windows are
    rejected (conservative shrink of A).  Uniformly expanding families get
    the trivial accept-all table.
    """
    if depth < 1 or depth > 24:
        raise ConfigError("window depth must be in 1..24")
    k = family.n_symbols
    if k**depth > WINDOW_CAP:
        raise ResourceLimitError(f"{k**depth} windows exceed cap {WINDOW_CAP}")
    gammas = tuple(family.expansion_floor(a) for a in range(k))
    weights = process.symbol_weights()
    mean_log = float(np.dot(weights, np.log(gammas)))
    if mean_log <= 0:
        raise NotMeanExpandingError(
            f"mean expansion integral {mean_log:.4g} <= 0; inducing cannot help"
        )

    windows = list(itertools.product(range(k), repeat=depth))
    if all(g > 1 for g in gammas):
        table = {w: True for w in windows}
        return ExpandingSetSpec(depth, table, 0, gammas, 1.0)

    log_g = np.log(gammas)
    table = {w: True for w in windows}
    level = 0
    for level in range(1, 2**depth + 1):
        # prefix acceptance: does SOME extension of this suffix sit in A_k?
        prefix_ok = {(): True}
        for w, ok in table.items():
            if not ok:
                continue
            for j in range(1, depth + 1):
                prefix_ok[w[:j]] = True

        new_table = {}
        for w in windows:
            if not table[w]:
                new_table[w] = False
                continue
            accepted = False
            acc = 0.0
            for j in range(1, depth):
                acc += log_g[w[j - 1]]
                if prefix_ok.get(w[j:], False):
                    accepted = acc > 0
                    break
            new_table[w] = accepted
        if new_table == table:
            break
        table = new_table

    m_est = sum(_window_probability(process, w) for w, ok in table.items() if ok)
    if m_est <= 0:
        raise DepthInsufficientError(
            f"no window of depth {depth} resolves an expanding return"
        )
    return ExpandingSetSpec(depth, table, level, gammas, m_est)


@dataclass
class InducedBlock:
    """One first-return block: symbol word, return time and expansion floor."""

    word: tuple
    start: int

    @property
    def tau(self):
        return len(self.word)

    def expansion_product(self, gammas):
        out = 1.0
        for s in self.word:
            out *= gammas[s]
        return out


def induced_potential_sum(family, potential, z, word):
    """phi-bar(z): the Birkhoff sum of phi along a block's forward orbit."""
    total = 0.0
    for a in word:
        hit = None
        for b_idx, branch in enumerate(family.branches(int(a))):
            if branch.lo - 1e-12 <= z <= branch.hi + 1e-12:
                hit = (b_idx, branch)
                break
        if hit is None:
            raise ConfigError(f"point {z} leaves the repeller inside the block")
        b_idx, branch = hit
        total += float(
            potential.evaluate(family, int(a), b_idx, np.asarray([z]),
                               branch.log_deriv(np.asarray([z])))[0]
        )
        z = float(branch.forward(z))
    return total


def induced_path(family, spec, path, n_blocks, max_scan=None):
    """Partition the path into consecutive first-return blocks over A.

    Starts at the first A-visit; each block runs to the next accepted window
    position, extended greedily until the accumulated expansion product
    exceeds 1 (safeguard for the finite-window approximation of A).
    """
    if max_scan is None:
        max_scan = max(200, 50 * spec.depth * n_blocks)
    w = spec.depth
    symbols = path.forward(max_scan + w)
    accepted = np.array(
        [spec.accepts(symbols[i : i + w]) for i in range(max_scan)], dtype=bool
    )
    visits = np.flatnonzero(accepted)
    if visits.size == 0:
        raise ConfigError("no visit to the expanding set within the scan horizon")

    gammas = spec.gammas
    blocks = []
    i = int(visits[0])
    vi = 1
    while len(blocks) < n_blocks and vi < visits.size:
        j = int(visits[vi])
        vi += 1
        if j <= i:
            continue
        word = tuple(int(s) for s in symbols[i:j])
        block = InducedBlock(word, i)
        if block.expansion_product(gammas) <= 1.0:
            continue  # extend to the next accepted visit
        blocks.append(block)
        i = j
    if len(blocks) < n_blocks:
        raise ConfigError(
            f"only {len(blocks)} blocks found within the scan horizon {max_scan}"
        )
    return blocks


def induced_interval_family(family, word, xi=0.25):
    """The induced map of one block as a single-symbol interval family.

    Branches are all compositions of branch choices along the word; Holder
    metadata is estimated numerically on a fine grid (with margin), which is
    safe for budget inequalities.
    """
    choices = itertools.product(*[range(family.degree(int(a))) for a in word])
    branches = []
    for combo in choices:
        def make(combo=combo):
            chain = [(int(a), family.branches(int(a))[b]) for a, b in zip(word, combo)]

            def fwd(z):
                z = np.asarray(z, dtype=float)
                for _a, br in chain:
                    z = br.forward(z)
                return z

            def deriv(z):
                z = np.asarray(z, dtype=float)
                out = np.ones_like(z)
                for _a, br in chain:
                    out = out * np.exp(br.log_deriv(z))
                    z = br.forward(z)
                return out

            def inv(wv):
                wv = np.asarray(wv, dtype=float)
                for _a, br in reversed(chain):
                    wv = br.inverse(wv)
                return wv

            lo, hi = float(inv(0.0)), float(inv(1.0))
            lo, hi = min(lo, hi), max(lo, hi)
            grid = np.linspace(lo, hi, 512)
            d = deriv(grid)
            min_deriv = float(np.min(np.abs(d)))
            logd = np.log(np.abs(d))
            lip = float(np.max(np.abs(np.gradient(logd, grid)))) * 2.0
            return SmoothBranch(lo, hi, fwd, deriv, inv, min_deriv, lip)

        branches.append(make())
    return FiberFamily("smooth", (tuple(branches),), xi=xi,
                       description=f"induced block {word}")


@dataclass
class InducedConsistencyReport:
    direct_value: float
    direct_stderr: float
    induced_value: float
    induced_stderr: float

    @property
    def difference(self):
        return self.direct_value - self.induced_value

    @property
    def combined_stderr(self):
        return math.sqrt(self.direct_stderr**2 + self.induced_stderr**2)


def _window_pressure(family, symbols, t, anchor, n0):
    """(log L^n 1 - log L^{n0} 1) / (n - n0), tree sums at the anchor."""
    pot = GeometricT(t)
    n = len(symbols)
    hi = pullback_log_sum(family, symbols, pot, anchor)
    lo = pullback_log_sum(family, symbols[:n0], pot, anchor) if n0 else 0.0
    return (hi - lo) / (n - n0)


def induced_pressure_consistency(
    family,
    process,
    t,
    spec=None,
    depth_window=8,
    n_tree=18,
    n_samples=24,
    seed=0,
    anchor=0.5,
):
    """Expected pressure per unit original time, direct vs induced.

    Direct: tree-sum growth rate along raw paths.  Induced: the same growth
    rate aligned to first-return blocks over the expanding set, divided by
    the consumed original time.  Both carry MC error bars.
    """
    if spec is None:
        spec = find_expanding_set(family, process, depth_window)
    n0 = n_tree // 2

    direct, induced = [], []
    for s in range(n_samples):
        path = sample_path(process, seed=derive_seed(seed, s))
        symbols = [int(a) for a in path.forward(n_tree)]
        direct.append(_window_pressure(family, symbols, t, anchor, n0))

        blocks = induced_path(family, spec, path, n_blocks=max(2, n_tree), max_scan=40 * n_tree)
        words, total = [], 0
        for b in blocks:
            if total + b.tau > n_tree:
                break
            words.append(b.word)
            total += b.tau
        if len(words) < 2:
            continue
        concat = [s for wd in words for s in wd]
        half = max(1, len(words) // 2)
        head = [s for wd in words[:half] for s in wd]
        pot = GeometricT(t)
        hi = pullback_log_sum(family, concat, pot, anchor)
        lo = pullback_log_sum(family, head, pot, anchor)
        induced.append((hi - lo) / (len(concat) - len(head)))

    d = np.asarray(direct)
    i = np.asarray(induced)
    return InducedConsistencyReport(
        float(d.mean()), float(d.std(ddof=1) / math.sqrt(len(d))),
        float(i.mean()), float(i.std(ddof=1) / math.sqrt(len(i))),
    )


def mean_example_pressure(family, process, t, spec, n_tree=18, n_samples=24, seed=0):
    """Induced-route expected pressure estimate at parameter t."""
    rep = induced_pressure_consistency(
        family, process, t, spec=spec, n_tree=n_tree, n_samples=n_samples, seed=seed
    )
    return rep.induced_value, rep.induced_stderr


def mean_example_bowen(
    family=None,
    process=None,
    depth_window=8,
    t_lo=0.0,
    t_hi=1.0,
    tol_t=5e-3,
    n_tree=18,
    n_samples=24,
    seed=0,
):
    """Bowen root of the expanding-in-the-mean example through inducing."""
    from .fibers import mean_example_family
    from .base import iid_process

    if family is None:
        family = mean_example_family()
    if process is None:
        process = iid_process([0.5, 0.5])
    spec = find_expanding_set(family, process, depth_window)

    def ep(t):
        return mean_example_pressure(
            family, process, t, spec, n_tree=n_tree, n_samples=n_samples, seed=seed
        )[0]

    lo, hi = t_lo, t_hi
    if ep(lo) <= 0 or ep(hi) >= 0:
        raise ConfigError(f"pressure does not sign-separate on [{lo}, {hi}]")
    while hi - lo > tol_t:
        mid = 0.5 * (lo + hi)
        if ep(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
