"""Exact and Monte-Carlo distances between two tree models over the same nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DimensionMismatch, ModelError, TreeModel

__all__ = [
    "EXACT_LIMIT",
    "TooLargeForExact",
    "TvEstimate",
    "HellingerValue",
    "all_assignments",
    "tv_exact",
    "hellinger_exact",
    "tv_mc",
]

EXACT_LIMIT = 22
_CHUNK_BITS = 16


class TooLargeForExact(ModelError):
    pass


@dataclass(frozen=True)
class TvEstimate:
    value: float
    stderr: float
    samples_used: int


@dataclass(frozen=True)
class HellingerValue:
    h: float
    h2: float


def _assignment_block(n: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of ``all_assignments(n)``."""
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def all_assignments(n: int) -> np.ndarray:
    """Every element of {+1,-1}^n, shape (2**n, n).

    Row order is lexicographic with +1 before -1 and node 0 most significant,
    so for n=2 the rows are (+,+), (+,-), (-,+), (-,-).
    """
    if n > EXACT_LIMIT:
        raise TooLargeForExact(f"n={n} exceeds the enumeration cap {EXACT_LIMIT}")
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return _assignment_block(n, 0, 1 << n)


def _check_pair(p: TreeModel, q: TreeModel) -> int:
    if p.n != q.n:
        raise DimensionMismatch(f"models have n={p.n} and n={q.n}")
    if p.n > EXACT_LIMIT:
        raise TooLargeForExact(f"n={p.n} exceeds the enumeration cap {EXACT_LIMIT}")
    return p.n


def _enumerate(p: TreeModel, q: TreeModel):
    """Yield ``(p(x), q(x))`` arrays over all assignments, in chunks."""
    n = _check_pair(p, q)
    total = 1 << n
    step = 1 << _CHUNK_BITS
    for lo in range(0, total, step):
        x = _assignment_block(n, lo, min(total, lo + step))
        yield np.exp(p.log_density(x)), np.exp(q.log_density(x))


def tv_exact(p: TreeModel, q: TreeModel) -> float:
    """Total variation by enumerating all ``2**n`` assignments."""
    acc = math.fsum(float(np.abs(a - b).sum()) for a, b in _enumerate(p, q))
    return min(1.0, 0.5 * acc)


def hellinger_exact(p: TreeModel, q: TreeModel) -> HellingerValue:
    """Hellinger distance and its square by enumeration."""
    bc = math.fsum(float(np.sqrt(a * b).sum()) for a, b in _enumerate(p, q))
    h2 = min(1.0, max(0.0, 1.0 - bc))
    return HellingerValue(h=math.sqrt(h2), h2=h2)


def tv_mc(p: TreeModel, q: TreeModel, mc_samples: int, rng_seed) -> TvEstimate:
    """Monte-Carlo TV: ``x ~ p`` and the mean of ``|1 - q(x)/p(x)| / 2``.

    The ratio is formed in log space.  Where ``q(x) = 0`` the term is 1/2.
    The estimate is unbiased when ``q`` is absolutely continuous w.r.t. ``p``;
    otherwise it misses the mass ``q`` puts outside ``p``'s support.
    """
    if p.n != q.n:
        raise DimensionMismatch(f"models have n={p.n} and n={q.n}")
    if mc_samples < 1:
        raise ValueError("mc_samples must be at least 1")
    x = p.sample(rng_seed, mc_samples)
    lp = p.log_density(x)
    lq = q.log_density(x)
    with np.errstate(over="ignore"):
        terms = 0.5 * np.abs(1.0 - np.exp(lq - lp))
    value = float(terms.mean())
    stderr = float(terms.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else 0.0
    return TvEstimate(value=value, stderr=stderr, samples_used=mc_samples)

