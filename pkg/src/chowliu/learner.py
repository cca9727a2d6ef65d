"""Empirical pair statistics and the two Chow-Liu learners.

``chow_liu`` weights every pair by its plug-in mutual information and keeps
the empirical pair tables on the tree edges.  ``chow_liu_symmetric`` weights
pairs by ``|alpha_hat|`` with ``alpha_hat = 2 P_hat(X_i = X_j) - 1`` and keeps
``alpha_hat`` on the tree edges.  Both use ``kruskal_max_st``, whose tie-break
(sort by ``(-weight, i, j)``) makes the output a function of the weights only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._graph import UnionFind, orient, tree_path
from .model import (
    DimensionMismatch,
    PairwiseMarginal,
    SymmetricTreeModel,
    TreeModel,
)

__all__ = [
    "EmptySample",
    "RaggedRows",
    "NotSymmetricModel",
    "PairCountTable",
    "LearnedModel",
    "Violation",
    "ConsistencyReport",
    "as_sample_matrix",
    "count_pairs",
    "plugin_mi",
    "mi_matrix",
    "alpha_hat",
    "alpha_matrix",
    "kruskal_max_st",
    "chow_liu",
    "chow_liu_symmetric",
    "subset_marginal",
    "check_consistency",
]

_BLOCK = 1 << 16
EXHAUSTIVE_MAX_N = 12
RANDOM_EVENTS = 10_000
MAX_REPORTED = 100


class EmptySample(ValueError):
    pass


class RaggedRows(ValueError):
    pass


class NotSymmetricModel(ValueError):
    pass


def as_sample_matrix(samples) -> np.ndarray:
    """Coerce samples to an int8 matrix of +/-1 with shape (m, n)."""
    if isinstance(samples, np.ndarray):
        arr = samples
    else:
        rows = list(samples)
        if not rows:
            raise EmptySample("no samples given")
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise RaggedRows(f"rows have differing lengths {sorted(lengths)}")
        arr = np.asarray(rows)
    if arr.ndim != 2:
        raise RaggedRows(f"samples must form a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptySample("no samples given")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("samples must contain only +1 and -1")
    return arr.astype(np.int8, copy=False)


@dataclass(frozen=True, eq=False)
class PairCountTable:
    """Co-occurrence counts for every ordered pair of nodes.

    ``counts[i, j]`` is the 2x2 table of ``(X_i, X_j)`` counts (index 0 is +1);
    ``counts[j, i]`` is its transpose.  Diagonal entries hold the node's own
    counts on the diagonal of the 2x2 table.
    """

    n: int
    m: int
    counts: np.ndarray
    node_counts: np.ndarray

    def table(self, i: int, j: int) -> np.ndarray:
        return self.counts[i, j]

    def pair(self, i: int, j: int) -> PairwiseMarginal:
        return PairwiseMarginal(self.counts[i, j] / self.m)

    def node_probs(self) -> np.ndarray:
        """Empirical ``P_hat(X_i = +1)`` per node."""
        return self.node_counts / self.m


def count_pairs(samples) -> PairCountTable:
    """Exact pair counts via blocked ``B.T @ B`` on the +1 indicator matrix."""
    x = as_sample_matrix(samples)
    m, n = x.shape
    pp = np.zeros((n, n), dtype=np.int64)
    for lo in range(0, m, _BLOCK):
        b = (x[lo : lo + _BLOCK] == 1).astype(np.float64)
        # float64 sums of 0/1 stay exact far beyond any block size used here
        pp += np.rint(b.T @ b).astype(np.int64)
    c = np.diag(pp).copy()
    counts = np.empty((n, n, 2, 2), dtype=np.int64)
    counts[:, :, 0, 0] = pp
    counts[:, :, 0, 1] = c[:, None] - pp
    counts[:, :, 1, 0] = c[None, :] - pp
    counts[:, :, 1, 1] = m - c[:, None] - c[None, :] + pp
    counts.setflags(write=False)
    c.setflags(write=False)
    return PairCountTable(n=n, m=m, counts=counts, node_counts=c)


def _mi_from_counts(t: np.ndarray, m: int) -> np.ndarray:
    """Plug-in MI for a stack of 2x2 count tables (last two axes)."""
    p = t / m
    prod = p.sum(axis=-1, keepdims=True) * p.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p / prod), 0.0)
    return np.maximum(terms.sum(axis=(-2, -1)), 0.0)


def plugin_mi(table: PairCountTable, i: int, j: int) -> float:
    """Mutual information (nats) of the empirical pair distribution."""
    return float(_mi_from_counts(table.counts[i, j], table.m))


def mi_matrix(table: PairCountTable) -> np.ndarray:
    """Symmetric n x n matrix of plug-in MI values (zero diagonal)."""
    n = table.n
    iu, ju = np.triu_indices(n, k=1)
    vals = _mi_from_counts(table.counts[iu, ju], table.m)
    out = np.zeros((n, n))
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def alpha_hat(table: PairCountTable, i: int, j: int) -> float:
    t = table.counts[i, j]
    return float(2.0 * (t[0, 0] + t[1, 1]) / table.m - 1.0)


def alpha_matrix(table: PairCountTable) -> np.ndarray:
    """Symmetric matrix of ``alpha_hat``; the diagonal is 1."""
    c = table.counts
    return 2.0 * (c[:, :, 0, 0] + c[:, :, 1, 1]) / table.m - 1.0


def kruskal_max_st(n: int, weights) -> list[tuple[int, int]]:
    """Maximum-weight spanning tree of the complete graph on ``n`` nodes.

    ``weights`` is an ``n x n`` array (upper triangle used) or a mapping from
    pairs ``(i, j)`` to values.  Pairs are scanned in order of decreasing
    weight, ties broken by the lexicographically smallest ``(i, j)`` with
    ``i < j``; the returned edges are in acceptance order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    iu, ju = np.triu_indices(n, k=1)
    if isinstance(weights, Mapping):
        w = np.empty(len(iu))
        for k, (i, j) in enumerate(zip(iu.tolist(), ju.tolist())):
            w[k] = weights[(i, j)] if (i, j) in weights else weights[(j, i)]
    else:
        warr = np.asarray(weights, dtype=float)
        if warr.shape != (n, n):
            raise DimensionMismatch(f"weight matrix has shape {warr.shape}, expected ({n}, {n})")
        w = warr[iu, ju]
    order = np.lexsort((ju, iu, -w))
    uf = UnionFind(n)
    tree: list[tuple[int, int]] = []
    for k in order:
        i, j = int(iu[k]), int(ju[k])
        if uf.union(i, j):
            tree.append((i, j))
            if len(tree) == n - 1:
                break
    return tree


@dataclass(frozen=True, eq=False)
class LearnedModel:
    """Output of a learner.

    Attributes
    ----------
    mode : {"general", "symmetric"}
    n : int
    tree : list of (i, j)
        Learned edges with ``i < j``, in the order the spanning tree accepted them.
    edge_marginals : tuple of PairwiseMarginal
        Empirical ``(X_i, X_j)`` table for each tree edge.
    weights : ndarray, shape (n, n)
        Weight of every pair (MI or ``|alpha_hat|``); diagonal is meaningless.
    node_probs : ndarray, shape (n,)
        Empirical ``P_hat(X_i = +1)``.
    """

    mode: str
    n: int
    tree: tuple
    edge_marginals: tuple
    weights: np.ndarray
    node_probs: np.ndarray

    @classmethod
    def from_model(cls, model) -> "LearnedModel":
        """Rebuild learner output from a stored model (e.g. a model file).

        Edge tables are the model's exact edge marginals.  Weights are known
        only on tree edges (MI or ``|alpha|``) and are NaN elsewhere.
        """
        n = model.n
        w = np.full((n, n), np.nan)
        if isinstance(model, SymmetricTreeModel):
            mode = "symmetric"
            tree = [(min(i, j), max(i, j)) for i, j in model.edges]
            marginals = tuple(PairwiseMarginal.symmetric(a) for a in model.alpha)
            probs = np.full(n, 0.5)
        else:
            mode = "general"
            tree, tables = [], []
            for k, (p, c) in enumerate(model.edges):
                t = model.edge_marginal(k)
                tree.append((min(p, c), max(p, c)))
                tables.append(t if p < c else t.transpose())
            marginals = tuple(tables)
            probs = model.node_marginals()[:, 0].copy()
        for (i, j), m in zip(tree, marginals):
            t = m.table
            if mode == "symmetric":
                val = abs(m.alpha)
            else:
                prod = np.outer(t.sum(axis=1), t.sum(axis=0))
                pos = t > 0
                val = float(np.sum(t[pos] * np.log(t[pos] / prod[pos])))
            w[i, j] = w[j, i] = val
        w.setflags(write=False)
        return cls(mode, n, tuple(tree), marginals, w, probs)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([m.alpha for m in self.edge_marginals])

    def to_symmetric(self) -> SymmetricTreeModel:
        if self.mode != "symmetric":
            raise NotSymmetricModel("only symmetric-mode output carries alpha-values")
        return SymmetricTreeModel(self.n, self.tree, np.clip(self.alphas, -1.0, 1.0))

    def to_tree_model(self) -> TreeModel:
        """Distribution Q as a rooted model at node 0.

        Symmetric mode gives the uniform-marginal model with the learned
        alpha-values.  General mode derives each conditional from the edge's
        empirical table (0 when the parent state never occurs).
        """
        if self.mode == "symmetric":
            return self.to_symmetric().to_tree_model()
        directed = orient(self.n, list(self.tree), root=0)
        cond = np.zeros((len(directed), 2))
        for k, ((i, j), (p, _)) in enumerate(zip(self.tree, directed)):
            t = self.edge_marginals[k].table
            if p != i:
                t = t.T
            rows = t.sum(axis=1)
            cond[k] = [t[s, 0] / rows[s] if rows[s] > 0 else 0.0 for s in (0, 1)]
        return TreeModel(self.n, directed, float(self.node_probs[0]) if self.n else 0.5, cond)


def _learn(samples, mode: str) -> LearnedModel:
    table = count_pairs(samples)
    if mode == "general":
        weights = mi_matrix(table)
    else:
        weights = np.abs(alpha_matrix(table))
    tree = kruskal_max_st(table.n, weights)
    marginals = tuple(table.pair(i, j) for i, j in tree)
    w = weights.copy()
    w.setflags(write=False)
    probs = table.node_probs()
    return LearnedModel(mode, table.n, tuple(tree), marginals, w, probs)


def chow_liu(samples) -> LearnedModel:
    """Tree of maximum total plug-in MI, empirical pair tables on its edges."""
    return _learn(samples, "general")


def chow_liu_symmetric(samples) -> LearnedModel:
    """Tree of maximum total ``|alpha_hat|``, ``alpha_hat`` on its edges."""
    return _learn(samples, "symmetric")


# -- consistency diagnostics ---------------------------------------------------


def subset_marginal(model: TreeModel, nodes: Sequence[int]) -> np.ndarray:
    """Exact joint of ``X_nodes`` as a ``(2,)*k`` table, in the listed order.

    Sums out the non-listed nodes of the minimal subtree containing ``nodes``
    by passing messages towards its node closest to the root.
    """
    nodes = [int(v) for v in nodes]
    k = len(nodes)
    adj = model.adjacency()
    hull = set(nodes)
    for v in nodes[1:]:
        hull.update(tree_path(adj, nodes[0], v))
    marg = model.node_marginals()
    parent = model.parent
    pos = {v: t for t, v in enumerate(nodes)}
    factors = {}
    for u in hull:
        f = np.ones((2,) + (1,) * k)
        if u in pos:
            shape = (2,) + tuple(2 if s == pos[u] else 1 for s in range(k))
            f = f * np.eye(2).reshape(shape)
        factors[u] = f
    topo = model._cache["topo"]
    for e in topo[::-1]:
        p, c = model.edges[e]
        if p in hull and c in hull:
            msg = np.tensordot(model.transition(e), factors[c], axes=([1], [0]))
            factors[p] = factors[p] * msg
    top = next(u for u in hull if parent[u] < 0 or parent[u] not in hull)
    out = np.tensordot(marg[top], factors[top], axes=([0], [0]))
    return np.broadcast_to(out, (2,) * k).copy()


@dataclass(frozen=True)
class Violation:
    nodes: tuple
    event: int
    p_hat: float
    p_true: float
    excess: float


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of a consistency scan.

    ``event`` in a violation is a bitmask over the ``2**k`` cells of
    ``X_nodes`` in ``all_assignments`` order (bit ``c`` set means cell ``c``
    belongs to W).  ``excess`` is how far the failing inequality overshoots.
    """

    order: int
    strong: bool
    eps: float
    checked: int
    n_violations: int
    partial: bool
    worst: tuple

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def _event_matrix(k: int) -> np.ndarray:
    cells = 1 << k
    masks = np.arange(1 << cells, dtype=np.int64)
    return ((masks[:, None] >> np.arange(cells)[None, :]) & 1).astype(np.float64)


def _excess(p_hat, p_true, bound_scale, const, strong):
    """Overshoot of each (p_hat, p_true) pair; positive means violated."""
    base = const * np.maximum(np.sqrt(np.clip(p_true, 0, None) * bound_scale), bound_scale)
    ex = np.abs(p_hat - p_true) - base
    if strong:
        small = p_true < bound_scale
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p_true > 0, bound_scale / p_true, np.inf)
            lhs = np.where(p_hat > 0, p_hat * np.log(ratio), 0.0)
        ex2 = np.where(small, lhs - bound_scale, -np.inf)
        ex = np.maximum(ex, ex2)
    return ex


def check_consistency(
    model: TreeModel,
    source,
    order: int | str = 3,
    eps: float = 0.1,
    *,
    constant: float | None = None,
    max_exhaustive_n: int = EXHAUSTIVE_MAX_N,
    random_events: int = RANDOM_EVENTS,
    seed: int = 0,
    max_reported: int = MAX_REPORTED,
) -> ConsistencyReport:
    """Check 3-consistency or strong 4-consistency of ``P_hat`` against ``model``.

    Parameters
    ----------
    model : TreeModel
        The true distribution P.
    source
        ``P_hat`` given as a sample matrix (m, n), as another ``TreeModel``
        (e.g. ``model`` itself as an infinite-sample surrogate), or as a
        length ``2**n`` probability vector in ``all_assignments`` order.
    order : 3, 4 or "4-strong"
        3 checks ``|P_hat(W) - P(W)| <= c max(sqrt(P(W) e), e)`` with
        ``e = eps**2 / n`` and ``c = 1/10``.  4 uses ``c = 1e-20`` and adds the
        small-probability clause ``P_hat(W) ln(e / P(W)) <= e`` whenever
        ``P(W) < e``.
    constant : float, optional
        Override ``c``.
    max_exhaustive_n : int
        All subsets and events are scanned when ``n`` is at most this;
        otherwise ``random_events`` random ``(S, W)`` pairs are drawn with
        ``seed`` and the report is flagged partial.
    """
    strong = order in (4, "4", "4-strong")
    k = 4 if strong else 3
    if not strong and order not in (3, "3"):
        raise ValueError(f"order must be 3 or 4-strong, got {order!r}")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    n = model.n
    if n < k:
        raise DimensionMismatch(f"need at least {k} nodes, model has n={n}")
    const = constant if constant is not None else (1e-20 if strong else 0.1)
    scale = eps * eps / n

    hat_marg = _hat_marginals(model, source, k)
    true_marg = _true_marginals(model, k, max_exhaustive_n)
    events = _event_matrix(k)

    checked = 0
    count = 0
    worst: list[Violation] = []
    if n <= max_exhaustive_n:
        partial = False
        for s in itertools.combinations(range(n), k):
            ph = events @ hat_marg(s)
            pt = events @ true_marg(s)
            ex = _excess(ph, pt, scale, const, strong)
            checked += len(ex)
            bad = np.flatnonzero(ex > 0)
            count += len(bad)
            worst.extend(Violation(s, int(w), float(ph[w]), float(pt[w]), float(ex[w])) for w in bad)
            if len(worst) > 4 * max_reported:
                worst = _top(worst, max_reported)
    else:
        partial = True
        rng = np.random.default_rng(seed)
        for _ in range(random_events):
            s = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
            w = int(rng.integers(0, 1 << (1 << k)))
            row = events[w]
            ph = np.array([row @ hat_marg(s)])
            pt = np.array([row @ true_marg(s)])
            ex = _excess(ph, pt, scale, const, strong)
            checked += 1
            if ex[0] > 0:
                count += 1
                worst.append(Violation(s, w, float(ph[0]), float(pt[0]), float(ex[0])))
    return ConsistencyReport(
        order=k,
        strong=strong,
        eps=float(eps),
        checked=checked,
        n_violations=count,
        partial=partial,
        worst=tuple(_top(worst, max_reported)),
    )


def _top(vs: list[Violation], cap: int) -> list[Violation]:
    return sorted(vs, key=lambda v: (-v.excess, v.nodes, v.event))[:cap]


def _joint_marginalizer(joint: np.ndarray, n: int):
    arr = joint.reshape((2,) * n)

    def marg(s):
        drop = tuple(a for a in range(n) if a not in s)
        return arr.sum(axis=drop).ravel()

    return marg


def _true_marginals(model: TreeModel, k: int, max_exhaustive_n: int):
    if model.n <= max_exhaustive_n:
        return _joint_marginalizer(model.joint(), model.n)
    return lambda s: subset_marginal(model, s).ravel()


def _hat_marginals(model: TreeModel, source, k: int):
    n = model.n
    if isinstance(source, TreeModel):
        if source.n != n:
            raise DimensionMismatch(f"source model has n={source.n}, model has n={n}")
        if n <= EXHAUSTIVE_MAX_N:
            return _joint_marginalizer(source.joint(), n)
        return lambda s: subset_marginal(source, s).ravel()
    arr = np.asarray(source)
    if arr.ndim == 1:
        if arr.shape[0] != 1 << n:
            raise DimensionMismatch(f"joint vector has {arr.shape[0]} entries, expected 2**{n}")
        return _joint_marginalizer(arr.astype(float), n)
    x = as_sample_matrix(arr)
    if x.shape[1] != n:
        raise DimensionMismatch(f"samples have {x.shape[1]} columns, model has n={n}")
    bits = (x == -1).astype(np.int64)
    m = x.shape[0]
    weights = 1 << np.arange(k - 1, -1, -1)

    def marg(s):
        idx = bits[:, list(s)] @ weights
        return np.bincount(idx, minlength=1 << k) / m

    return marg

