"""Deterministic, splittable random streams and the sampling primitives.

A :class:`RandomStream` is identified by a 64-bit root seed and a path of
64-bit indices. The generator behind a stream is seeded by hashing
``(root_seed, path)`` through :class:`numpy.random.SeedSequence`, so a child
stream's output never depends on the order in which siblings were created or
consumed. Parallel code derives one child per task instead of sharing a stream.

The geometric law used throughout has support ``{0, 1, 2, ...}`` with mass
``p (1 - p)**y``. With that convention the sum of ``n`` iid draws is negative
binomial ``NegBin(n, p)``, which the Poisson/geometric oracles rely on. The
shifted convention (support starting at 1) would break them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from abclab.errors import DomainError

_U64 = 2**64


@dataclass(frozen=True)
class RandomStream:
    """Immutable descriptor of a random substream.

    Drawing advances a private generator created on first use; the descriptor
    itself (seed and path) never changes. Two streams with equal descriptors
    produce identical sequences from a fresh start.
    """

    root_seed: int
    stream_path: tuple[int, ...] = ()
    _rng: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        seed = int(self.root_seed)
        if not 0 <= seed < _U64:
            raise DomainError(f"root_seed must be a 64-bit unsigned integer, got {seed}")
        path = tuple(int(i) for i in self.stream_path)
        for i in path:
            if not 0 <= i < _U64:
                raise DomainError(f"stream path index out of range: {i}")
        object.__setattr__(self, "root_seed", seed)
        object.__setattr__(self, "stream_path", path)

    def child(self, *indices: int) -> RandomStream:
        """Substream whose path is this path extended by ``indices``."""
        return RandomStream(self.root_seed, self.stream_path + tuple(indices))

    def fresh(self) -> RandomStream:
        """Same descriptor, cursor reset to the start of the sequence."""
        return RandomStream(self.root_seed, self.stream_path)

    @property
    def generator(self) -> np.random.Generator:
        if self._rng is None:
            seq = np.random.SeedSequence(self.root_seed, spawn_key=self.stream_path)
            object.__setattr__(self, "_rng", np.random.Generator(np.random.PCG64(seq)))
        return self._rng


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return arr


def sample_poisson(stream: RandomStream, lam, size=None):
    _check_positive("lambda", lam)
    return stream.generator.poisson(lam, size=size)


def sample_geometric(stream: RandomStream, p, size=None):
    """Geometric draws on ``{0, 1, ...}`` with mass ``p (1 - p)**y``."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0)) or np.any(~(arr < 1)):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    # numpy counts trials up to and including the first success
    return stream.generator.geometric(p, size=size) - 1


def sample_normal(stream: RandomStream, mu, sigma, size=None):
    _check_positive("sigma", sigma)
    return stream.generator.normal(mu, sigma, size=size)


def sample_exponential(stream: RandomStream, rate, size=None):
    rate = _check_positive("rate", rate)
    return stream.generator.exponential(1.0 / rate, size=size)


def sample_uniform(stream: RandomStream, a, b, size=None):
    if not np.all(np.asarray(a, dtype=float) < np.asarray(b, dtype=float)):
        raise DomainError(f"uniform bounds must satisfy a < b, got ({a!r}, {b!r})")
    return stream.generator.uniform(a, b, size=size)


def sample_categorical(stream: RandomStream, weights, size=None):
    """Index draws proportional to ``weights`` (normalised internally)."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a non-empty vector")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or not w.sum() > 0:
        raise DomainError(f"weights must be nonnegative and not all zero, got {weights!r}")
    cdf = np.cumsum(w / w.sum())
    cdf[-1] = 1.0
    u = stream.generator.random(size=size)
    idx = np.searchsorted(cdf, u, side="right")
    # zero-weight trailing categories can never be selected
    last = int(np.flatnonzero(w > 0)[-1])
    return np.minimum(idx, last)


def logsumexp(values, axis=None):
    """Log of the sum of exponentials, safe for ``-inf`` entries."""
    a = np.asarray(values, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def log_add(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))
