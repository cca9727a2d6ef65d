"""Distances between small discrete distributions and pairwise strength measures.

Everything here works on explicit probability vectors: a ``DiscreteDist``
over tuples of +/-1 values, or a ``PairwiseMarginal``.  Conventions:
``0 * ln(0) = 0``, and a conditional probability given a zero-mass event is 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import PairwiseMarginal

__all__ = [
    "OutcomeMismatch",
    "SharedMarginalMismatch",
    "DiscreteDist",
    "PairMeasures",
    "tv",
    "hellinger_sq",
    "hellinger",
    "kl",
    "mutual_information",
    "conditional_mi",
    "chain3",
    "chain4",
    "make_independent",
    "minmrg",
    "mindiag",
    "mindisc",
    "i_h2",
    "i_h",
    "alpha_value",
    "pair_measures",
    "symmetric_constructions",
]

SHARED_TOL = 1e-9


class OutcomeMismatch(ValueError):
    pass


class SharedMarginalMismatch(ValueError):
    pass


def binary_labels(k: int) -> tuple[tuple[int, ...], ...]:
    """All of {+1,-1}^k in the row-major order used by ``as_array``."""
    return tuple(itertools.product((1, -1), repeat=k))


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Probability vector over explicitly labelled outcomes."""

    probs: np.ndarray
    labels: tuple

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        labels = tuple(tuple(lab) for lab in self.labels)
        if len(labels) != len(p):
            raise ValueError(f"{len(p)} probabilities for {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be distinct")
        if np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability vector (sum {p.sum()!r})")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_array(cls, arr) -> "DiscreteDist":
        """Wrap a ``(2,)*k`` table indexed by state (0 is +1, 1 is -1)."""
        a = np.asarray(arr, dtype=float)
        return cls(a.ravel(), binary_labels(a.ndim))

    @property
    def arity(self) -> int:
        return len(self.labels[0]) if self.labels else 0

    def as_array(self) -> np.ndarray:
        """The ``(2,)*k`` table; only valid for the standard binary layout."""
        k = self.arity
        if self.labels != binary_labels(k):
            raise ValueError("as_array needs the standard binary outcome order")
        return self.probs.reshape((2,) * k)

    def permute(self, order) -> "DiscreteDist":
        """Reorder variables: new variable ``t`` is old variable ``order[t]``."""
        return DiscreteDist.from_array(np.transpose(self.as_array(), order))

    def marginal(self, axes) -> "DiscreteDist":
        """Marginal on the listed variables, kept in the listed order."""
        axes = list(axes)
        arr = self.as_array()
        drop = tuple(a for a in range(arr.ndim) if a not in axes)
        sub = arr.sum(axis=drop)
        kept = sorted(axes)
        return DiscreteDist.from_array(np.transpose(sub, [kept.index(a) for a in axes]))

    def pair(self, a: int, b: int) -> PairwiseMarginal:
        return PairwiseMarginal(self.marginal([a, b]).as_array())


@dataclass(frozen=True)
class PairMeasures:
    minmrg: float
    mindiag: float
    mindisc: float
    i_h2: float
    alpha: float
    mi: float


def _vectors(p, q):
    if isinstance(p, DiscreteDist) and isinstance(q, DiscreteDist):
        if p.labels != q.labels:
            raise OutcomeMismatch("distributions are over different outcome sets")
        return p.probs, q.probs
    a, b = _probs(p), _probs(q)
    if a.shape != b.shape:
        raise OutcomeMismatch(f"outcome sets differ in size: {a.shape} vs {b.shape}")
    return a, b


def _probs(x) -> np.ndarray:
    if isinstance(x, DiscreteDist):
        return x.probs
    if isinstance(x, PairwiseMarginal):
        return x.table.ravel()
    return np.asarray(x, dtype=float).ravel()


def _table(m) -> np.ndarray:
    if isinstance(m, PairwiseMarginal):
        return m.table
    return PairwiseMarginal(m).table


def tv(p, q) -> float:
    """Total variation: half the l1 distance."""
    a, b = _vectors(p, q)
    return float(0.5 * np.abs(a - b).sum())


def hellinger_sq(p, q) -> float:
    """Squared Hellinger distance ``1 - sum(sqrt(p * q))``, clipped to [0, 1]."""
    a, b = _vectors(p, q)
    return float(min(1.0, max(0.0, 1.0 - np.sqrt(a * b).sum())))


def hellinger(p, q) -> float:
    return math.sqrt(hellinger_sq(p, q))


def kl(p, q) -> float:
    """KL divergence of ``q`` from ``p`` in nats; ``inf`` if p is not dominated."""
    a, b = _vectors(p, q)
    pos = a > 0
    if np.any(b[pos] == 0):
        return math.inf
    return float(max(0.0, np.sum(a[pos] * np.log(a[pos] / b[pos]))))


def mutual_information(m) -> float:
    """MI of a pairwise table in nats."""
    t = _table(m)
    prod = np.outer(t.sum(axis=1), t.sum(axis=0))
    pos = t > 0
    return float(max(0.0, np.sum(t[pos] * np.log(t[pos] / prod[pos]))))


def conditional_mi(joint3) -> float:
    """``I(X_u; X_v | X_w)`` for a joint over ``(u, v, w)``, as the
    ``P(w)``-weighted average of the conditional pairwise MI."""
    arr = joint3.as_array() if isinstance(joint3, DiscreteDist) else np.asarray(joint3, float).reshape(2, 2, 2)
    total = 0.0
    for w in range(2):
        pw = arr[:, :, w].sum()
        if pw > 0:
            total += pw * mutual_information(PairwiseMarginal(arr[:, :, w] / pw))
    return float(total)


def _conditional(t: np.ndarray) -> np.ndarray:
    """Row-normalise ``t[b, c]`` into ``P(c | b)``; zero rows stay zero."""
    rows = t.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rows > 0, t / rows, 0.0)


def _check_shared(left: np.ndarray, right: np.ndarray, what: str):
    if np.max(np.abs(left - right)) > SHARED_TOL:
        raise SharedMarginalMismatch(f"{what}: {left.tolist()} vs {right.tolist()}")


def chain3(m_ab, m_bc) -> DiscreteDist:
    """Markov chain a - b - c with the two given pairwise marginals.

    Other orderings are obtained by passing transposed marginals and
    permuting the result, e.g. the chain i - k - j over (i, j, k) is
    ``chain3(P_ik, P_kj).permute([0, 2, 1])``.
    """
    ab, bc = _table(m_ab), _table(m_bc)
    _check_shared(ab.sum(axis=0), bc.sum(axis=1), "marginal of the shared node")
    joint = ab[:, :, None] * _conditional(bc)[None, :, :]
    return DiscreteDist.from_array(joint / joint.sum())


def chain4(m_ab, m_bc, m_cd) -> DiscreteDist:
    """Markov chain a - b - c - d."""
    ab, bc, cd = _table(m_ab), _table(m_bc), _table(m_cd)
    _check_shared(ab.sum(axis=0), bc.sum(axis=1), "marginal of the second node")
    _check_shared(bc.sum(axis=0), cd.sum(axis=1), "marginal of the third node")
    joint = ab[:, :, None, None] * _conditional(bc)[None, :, :, None] * _conditional(cd)[None, None, :, :]
    return DiscreteDist.from_array(joint / joint.sum())


def make_independent(m) -> PairwiseMarginal:
    """Product of the two single-node marginals of ``m``."""
    t = _table(m)
    return PairwiseMarginal(np.outer(t.sum(axis=1), t.sum(axis=0)))


def minmrg(*marginals) -> float:
    """Smallest single-node probability among the variables involved.

    Accepts pairwise marginals (both variables count) and single-node
    vectors ``[P(+1), P(-1)]``.
    """
    vals = []
    for m in marginals:
        if isinstance(m, PairwiseMarginal):
            vals.extend(m.first.tolist() + m.second.tolist())
        else:
            arr = np.asarray(m, dtype=float)
            if arr.shape == (2, 2):
                vals.extend(arr.sum(axis=1).tolist() + arr.sum(axis=0).tolist())
            else:
                vals.extend(arr.ravel().tolist())
    return float(min(vals))


def mindiag(m) -> float:
    """``min(P(X_i = X_j), P(X_i = -X_j))``."""
    t = _table(m)
    return float(min(t[0, 0] + t[1, 1], t[0, 1] + t[1, 0]))


def mindisc(m) -> float:
    """Smaller of the two conditional discrepancies
    ``|P(i=+1 | j=+1) - P(i=+1 | j=-1)|`` and the same with i, j swapped."""
    t = _table(m)
    j_given_i = _conditional(t)
    i_given_j = _conditional(t.T)
    d1 = abs(j_given_i[0, 0] - j_given_i[1, 0])
    d2 = abs(i_given_j[0, 0] - i_given_j[1, 0])
    return float(min(d1, d2))


def i_h2(m) -> float:
    """Squared Hellinger distance from ``m`` to its independent coupling."""
    return hellinger_sq(_table(m), make_independent(m).table)


def i_h(m) -> float:
    return math.sqrt(i_h2(m))


def alpha_value(m) -> float:
    t = _table(m)
    return float(2.0 * (t[0, 0] + t[1, 1]) - 1.0)


def pair_measures(m) -> PairMeasures:
    m = m if isinstance(m, PairwiseMarginal) else PairwiseMarginal(m)
    return PairMeasures(
        minmrg=minmrg(m),
        mindiag=mindiag(m),
        mindisc=mindisc(m),
        i_h2=i_h2(m),
        alpha=alpha_value(m),
        mi=mutual_information(m),
    )


def symmetric_constructions(alpha: float, alpha_hat: float | None = None):
    """Comparison tables for a symmetric pair with alpha-value ``alpha``.

    Returns ``(ind, det, est)``: the independent uniform pair, the
    deterministic pair with alpha-value ``sign(alpha)`` (sign(0) = +1), and
    the symmetric pair with alpha-value ``alpha_hat`` (None when not given).
    """
    ind = PairwiseMarginal.symmetric(0.0)
    det = PairwiseMarginal.symmetric(1.0 if alpha >= 0 else -1.0)
    est = None if alpha_hat is None else PairwiseMarginal.symmetric(alpha_hat)
    return ind, det, est
