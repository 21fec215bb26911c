"""Base symbol process: two-sided orbits, shifts and Birkhoff statistics.

The driving system is realized as a process on dense integer symbol ids.
Every symbol of a realized orbit is O(1)-addressable from ``(seed, index)``
through a splitmix64 counter hash, so two-sided orbits extend lazily in any
order without changing already-emitted entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(z):
    """Vectorized splitmix64 finalizer on uint64 arrays (wrapping mod 2^64)."""
    with np.errstate(over="ignore"):
        z = (z + _GOLDEN).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(30))) * _MIX1).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(27))) * _MIX2).astype(np.uint64)
        return z ^ (z >> np.uint64(31))


def _uniform01(seed, indices):
    """Deterministic uniforms in [0,1) addressed by (seed, signed index)."""
    idx = np.asarray(indices, dtype=np.int64)
    # fold Z into N so forward and backward indices use disjoint counters
    enc = np.where(idx >= 0, 2 * idx, -2 * idx - 1).astype(np.uint64)
    with np.errstate(over="ignore"):
        base = _splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)) + enc
    h = _splitmix64(base)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def derive_seed(seed, stream):
    """Derive an independent 64-bit substream seed, reproducibly."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + np.uint64(2 * stream + 1)
    return int(_splitmix64(z))


@dataclass(frozen=True)
class BaseProcess:
    """A law on symbol ids: i.i.d. finite, deterministic, or a periodic word.

    Symbol ids are dense integers 0..K-1.  For the i.i.d. kind ``probs`` must
    be a probability vector (sum 1 within 1e-12, entries >= 0).
    """

    kind: str  # "iid" | "deterministic" | "periodic"
    n_symbols: int
    probs: tuple = ()
    word: tuple = ()
    description: str = ""

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ConfigError("process needs a non-empty symbol set")
        if self.kind == "iid":
            p = np.asarray(self.probs, dtype=float)
            if len(p) != self.n_symbols:
                raise ConfigError("probs length must equal number of symbols")
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ConfigError("probs must be non-negative and sum to 1")
        elif self.kind == "deterministic":
            if len(self.word) != 1:
                raise ConfigError("deterministic process takes a single symbol")
        elif self.kind == "periodic":
            if not self.word:
                raise ConfigError("periodic process needs a non-empty word")
        else:
            raise ConfigError(f"unknown process kind {self.kind!r}")
        bad = [s for s in self.word if not (0 <= s < self.n_symbols)]
        if bad:
            raise ConfigError(f"word symbols out of range: {bad}")

    # -- symbol addressing ---------------------------------------------------

    def symbols_at(self, seed, indices):
        """Symbols at the given signed indices, as an int array."""
        idx = np.asarray(indices, dtype=np.int64)
        if self.kind == "deterministic":
            return np.full(idx.shape, self.word[0], dtype=np.int64)
        if self.kind == "periodic":
            w = np.asarray(self.word, dtype=np.int64)
            return w[np.mod(idx, len(w))]
        u = _uniform01(seed, idx)
        cum = np.cumsum(np.asarray(self.probs, dtype=float))
        return np.minimum(np.searchsorted(cum, u, side="right"), self.n_symbols - 1)

    def symbol_weights(self):
        """Long-run symbol frequencies (exact for all three kinds)."""
        if self.kind == "iid":
            return np.asarray(self.probs, dtype=float)
        w = np.zeros(self.n_symbols)
        for s in self.word:
            w[s] += 1.0 / len(self.word)
        return w


def iid_process(probs, description=""):
    probs = tuple(float(p) for p in probs)
    return BaseProcess("iid", len(probs), probs=probs, description=description)


def deterministic_process(symbol, n_symbols=None, description=""):
    n = n_symbols if n_symbols is not None else symbol + 1
    return BaseProcess("deterministic", n, word=(symbol,), description=description)


def periodic_process(word, n_symbols=None, description=""):
    word = tuple(int(s) for s in word)
    if not word:
        raise ConfigError("periodic word must be non-empty")
    n = n_symbols if n_symbols is not None else max(word) + 1
    return BaseProcess("periodic", n, word=word, description=description)


@dataclass(frozen=True)
class SymbolPath:
    """A realized two-sided symbol orbit, addressable at any signed index.

    Shifting produces a view with an index offset; the underlying addressing
    is purely functional, so paths are immutable and trivially thread-safe.
    """

    process: BaseProcess
    seed: int
    offset: int = 0

    def symbol(self, i):
        return int(self.process.symbols_at(self.seed, np.asarray([i + self.offset]))[0])

    def symbols(self, start, stop):
        """Symbols at indices start..stop-1 (path coordinates)."""
        idx = np.arange(start, stop, dtype=np.int64) + self.offset
        return self.process.symbols_at(self.seed, idx)

    def forward(self, n):
        return self.symbols(0, n)

    def backward(self, n):
        """x_{-1}, x_{-2}, ..., x_{-n}."""
        idx = -np.arange(1, n + 1, dtype=np.int64) + self.offset
        return self.process.symbols_at(self.seed, idx)

    def shift(self, k):
        return SymbolPath(self.process, self.seed, self.offset + k)

    def dump_forward(self, n):
        """Whitespace-separated forward symbols, for debugging."""
        return " ".join(str(int(s)) for s in self.forward(n))


def sample_path(process, n_forward=1, n_backward=0, seed=0):
    """Realize a path for ``process``; entries are fixed by (process, seed).

    ``n_forward``/``n_backward`` only pre-materialize nothing here -- the
    path is lazily addressable -- but they are validated as a usage contract.
    """
    if n_forward < 1:
        raise ConfigError("n_forward must be >= 1")
    return SymbolPath(process, int(seed))


@dataclass
class RunningStats:
    """Streaming Welford accumulator with associative merge."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    def push(self, value):
        if not math.isfinite(value):
            raise NumericError(f"non-finite value {value!r}", index=self.count)
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)
        self.min = min(self.min, value)
        self.max = max(self.max, value)

    @property
    def variance(self):
        """Sample variance (n-1 denominator); 0 for fewer than two points."""
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def stderr(self):
        if self.count < 2:
            return 0.0
        return math.sqrt(self.variance / self.count)

    def merge(self, other):
        """Combine two accumulators (Chan's parallel update)."""
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            self.min, self.max = other.min, other.max
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.mean += delta * other.count / n
        self.count = n
        self.min = min(self.min, other.min)
        self.max = max(self.max, other.max)
        return self


def birkhoff_stats(series):
    """Single-pass mean/variance/extremes of a realized observable series."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise ConfigError("series must be non-empty")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NumericError(f"non-finite entry at index {bad[0]}", index=int(bad[0]))
    stats = RunningStats()
    stats.count = int(arr.size)
    stats.mean = float(arr.mean())
    stats.m2 = float(((arr - arr.mean()) ** 2).sum())
    stats.min = float(arr.min())
    stats.max = float(arr.max())
    return stats
