"""Binary tree-structured Bayesnets.

Variables take values in {+1, -1}.  Whenever a probability table is stored as
an array, index 0 stands for +1 and index 1 for -1, so a pairwise table
``t`` holds ``t[0, 0] = P(+1, +1)``, ``t[0, 1] = P(+1, -1)`` and so on.

A general model is a rooted tree (root 0, edges directed away from it), the
root marginal ``P(X_0 = +1)`` and, per edge, the two conditionals
``q_pp = P(child=+1 | parent=+1)`` and ``q_pm = P(child=+1 | parent=-1)``.
A symmetric model is an undirected tree plus one alpha-value per edge, where
``P(X_i = X_j) = (1 + alpha) / 2`` and every node is uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._graph import UnionFind, adjacency, orient, tree_path

__all__ = [
    "ModelError",
    "CycleDetected",
    "Disconnected",
    "ProbabilityOutOfRange",
    "DimensionMismatch",
    "NodeOutOfRange",
    "NotRooted",
    "PairwiseMarginal",
    "TreeModel",
    "SymmetricTreeModel",
    "validate",
    "log_density",
    "sample",
    "pair_marginal",
    "from_symmetric",
    "state_index",
]

_LOG_CHUNK = 1 << 16


class ModelError(ValueError):
    """Base class for malformed models and invalid model queries."""


class CycleDetected(ModelError):
    pass


class Disconnected(ModelError):
    pass


class ProbabilityOutOfRange(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class NodeOutOfRange(ModelError):
    pass


class NotRooted(ModelError):
    """An edge points into the root, or a node has two parents."""


def state_index(x) -> np.ndarray:
    """Map +1 -> 0 and -1 -> 1 (array-valued)."""
    return (np.asarray(x) < 0).astype(np.intp)


@dataclass(frozen=True, eq=False)
class PairwiseMarginal:
    """Joint distribution of two binary variables as a 2x2 table."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float).reshape(2, 2)
        if np.any(~np.isfinite(t)) or np.any(t < -1e-15):
            raise ProbabilityOutOfRange(f"pairwise table has invalid entries: {t.tolist()}")
        t = np.clip(t, 0.0, None)
        if abs(t.sum() - 1.0) > 1e-12:
            raise ProbabilityOutOfRange(f"pairwise table sums to {t.sum()!r}, not 1")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def symmetric(cls, alpha: float) -> "PairwiseMarginal":
        a = float(alpha)
        if not -1.0 <= a <= 1.0:
            raise ProbabilityOutOfRange(f"alpha {a!r} outside [-1, 1]")
        eq, ne = (1 + a) / 4, (1 - a) / 4
        return cls(np.array([[eq, ne], [ne, eq]]))

    @classmethod
    def from_counts(cls, counts) -> "PairwiseMarginal":
        c = np.asarray(counts, dtype=float).reshape(2, 2)
        return cls(c / c.sum())

    @classmethod
    def independent(cls, p_first: float, p_second: float) -> "PairwiseMarginal":
        """Product table from the two probabilities of +1."""
        a = np.array([p_first, 1 - p_first])
        b = np.array([p_second, 1 - p_second])
        return cls(np.outer(a, b))

    @property
    def first(self) -> np.ndarray:
        """Marginal ``[P(+1), P(-1)]`` of the first variable."""
        return self.table.sum(axis=1)

    @property
    def second(self) -> np.ndarray:
        return self.table.sum(axis=0)

    @property
    def alpha(self) -> float:
        """``2 P(X_i = X_j) - 1``."""
        t = self.table
        return float(2.0 * (t[0, 0] + t[1, 1]) - 1.0)

    def transpose(self) -> "PairwiseMarginal":
        return PairwiseMarginal(self.table.T)

    def __repr__(self):
        return f"PairwiseMarginal({self.table.ravel().tolist()})"


def _check_tree(n: int, edges: Sequence[tuple[int, int]]) -> None:
    uf = UnionFind(n)
    for k, (i, j) in enumerate(edges):
        for v in (i, j):
            if not 0 <= v < n:
                raise NodeOutOfRange(f"edge {k} ({i}, {j}) references node outside 0..{n - 1}")
        if i == j or not uf.union(i, j):
            raise CycleDetected(f"edge {k} ({i}, {j}) closes a cycle")
    if uf.count != 1:
        raise Disconnected(f"{len(edges)} edges leave {uf.count} components on {n} nodes")


def _check_prob(value: float, name: str) -> None:
    if not (np.isfinite(value) and 0.0 <= value <= 1.0):
        raise ProbabilityOutOfRange(f"{name} = {value!r} is not a probability")


@dataclass(frozen=True, eq=False)
class TreeModel:
    """Root marginal plus directed edge conditionals on a spanning tree.

    Parameters
    ----------
    n : int
        Number of variables.
    edges : sequence of (parent, child)
        ``n - 1`` edges, directed away from node 0.
    root_prob : float
        ``P(X_0 = +1)``.
    cond : array-like, shape (n - 1, 2)
        Row ``k`` is ``(q_pp, q_pm)`` for ``edges[k]``.
    """

    n: int
    edges: tuple
    root_prob: float
    cond: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple((int(p), int(c)) for p, c in self.edges))
        object.__setattr__(self, "root_prob", float(self.root_prob))
        cond = np.array(self.cond, dtype=float).reshape(len(self.edges), 2)
        cond.setflags(write=False)
        object.__setattr__(self, "cond", cond)
        validate(self)
        self._build_order()

    def _build_order(self):
        n = self.n
        children: list[list[int]] = [[] for _ in range(n)]
        parent = np.full(n, -1, dtype=np.intp)
        parent_edge = np.full(n, -1, dtype=np.intp)
        for k, (p, c) in enumerate(self.edges):
            children[p].append(k)
            parent[c] = p
            parent_edge[c] = k
        order = []
        stack = [0]
        queue_pos = 0
        # breadth-first over nodes, children in edge-list order
        while queue_pos < len(stack):
            u = stack[queue_pos]
            queue_pos += 1
            for k in children[u]:
                order.append(k)
                stack.append(self.edges[k][1])
        self._cache["topo"] = np.array(order, dtype=np.intp)
        self._cache["parent"] = parent
        self._cache["parent_edge"] = parent_edge
        ed = np.array(self.edges, dtype=np.intp).reshape(-1, 2)
        self._cache["par"] = ed[:, 0]
        self._cache["chi"] = ed[:, 1]

    # -- derived quantities -------------------------------------------------

    @property
    def parent(self) -> np.ndarray:
        return self._cache["parent"]

    def adjacency(self) -> list[list[int]]:
        if "adj" not in self._cache:
            self._cache["adj"] = adjacency(self.n, self.edges)
        return self._cache["adj"]

    def undirected_edges(self) -> list[tuple[int, int]]:
        return [(min(p, c), max(p, c)) for p, c in self.edges]

    def transition(self, k: int) -> np.ndarray:
        """Row-stochastic ``M[parent_state, child_state]`` of edge ``k``."""
        q_pp, q_pm = self.cond[k]
        return np.array([[q_pp, 1.0 - q_pp], [q_pm, 1.0 - q_pm]])

    def node_marginals(self) -> np.ndarray:
        """Array of shape (n, 2): ``[P(X_i=+1), P(X_i=-1)]`` per node."""
        if "marg" not in self._cache:
            marg = np.zeros((self.n, 2))
            marg[0] = (self.root_prob, 1.0 - self.root_prob)
            for k in self._cache["topo"]:
                p, c = self.edges[k]
                marg[c] = marg[p] @ self.transition(k)
            marg.setflags(write=False)
            self._cache["marg"] = marg
        return self._cache["marg"]

    def edge_marginal(self, k: int) -> PairwiseMarginal:
        """Joint of (parent, child) for edge ``k``."""
        p, _ = self.edges[k]
        t = self.node_marginals()[p][:, None] * self.transition(k)
        return PairwiseMarginal(t / t.sum())

    def _log_tables(self):
        if "logs" not in self._cache:
            with np.errstate(divide="ignore"):
                log_root = np.log([self.root_prob, 1.0 - self.root_prob])
                q = self.cond
                tab = np.stack(
                    [np.stack([q[:, 0], 1 - q[:, 0]], axis=1), np.stack([q[:, 1], 1 - q[:, 1]], axis=1)],
                    axis=1,
                )
                log_cond = np.log(tab)
            self._cache["logs"] = (log_root, log_cond)
        return self._cache["logs"]

    # -- the operations ---------------------------------------------------------

    def log_density(self, x) -> np.ndarray | float:
        """Log-probability (nats) of one assignment or of each row of a matrix.

        Off-support assignments give ``-inf``.
        """
        arr = np.asarray(x)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.shape[-1] != self.n:
            raise DimensionMismatch(f"assignment has length {arr.shape[-1]}, model has n={self.n}")
        if not np.all((arr == 1) | (arr == -1)):
            raise ValueError("assignments must contain only +1 and -1")
        log_root, log_cond = self._log_tables()
        par, chi = self._cache["par"], self._cache["chi"]
        eidx = np.arange(len(self.edges))
        out = np.empty(arr.shape[0])
        for lo in range(0, arr.shape[0], _LOG_CHUNK):
            s = state_index(arr[lo : lo + _LOG_CHUNK])
            val = log_root[s[:, 0]]
            if len(self.edges):
                val = val + log_cond[eidx, s[:, par], s[:, chi]].sum(axis=1)
            out[lo : lo + _LOG_CHUNK] = val
        return float(out[0]) if single else out

    def sample(self, rng_seed, count: int) -> np.ndarray:
        """Draw ``count`` assignments as an int8 matrix of shape (count, n).

        Ancestral sampling: the root first, then each edge in breadth-first
        order, one uniform draw per row per variable.  ``rng_seed`` is anything
        ``numpy.random.default_rng`` accepts.
        """
        if count < 0:
            raise ValueError("count must be non-negative")
        rng = np.random.default_rng(rng_seed)
        out = np.empty((count, self.n), dtype=np.int8)
        out[:, 0] = np.where(rng.random(count) < self.root_prob, 1, -1)
        for k in self._cache["topo"]:
            p, c = self.edges[k]
            q_pp, q_pm = self.cond[k]
            u = rng.random(count)
            q = np.where(out[:, p] == 1, q_pp, q_pm)
            out[:, c] = np.where(u < q, 1, -1)
        return out

    def pair_marginal(self, i: int, j: int) -> PairwiseMarginal:
        """Exact joint of ``(X_i, X_j)`` by chaining conditionals along the path."""
        for v in (i, j):
            if not 0 <= v < self.n:
                raise NodeOutOfRange(f"node {v} outside 0..{self.n - 1}")
        if i == j:
            raise ValueError("pair_marginal needs two distinct nodes")
        marg = self.node_marginals()
        parent = self._cache["parent"]
        parent_edge = self._cache["parent_edge"]
        path = tree_path(self.adjacency(), i, j)
        joint = np.diag(marg[i])
        for a, b in zip(path, path[1:]):
            if parent[b] == a:
                step = self.transition(parent_edge[b])
            else:
                # a is the child: reverse the edge by Bayes' rule
                fwd = self.transition(parent_edge[a])
                back = marg[b][:, None] * fwd
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = np.where(marg[a][:, None] > 0, back.T / marg[a][:, None], 0.0)
            joint = joint @ step
        joint = np.clip(joint, 0.0, None)
        return PairwiseMarginal(joint / joint.sum())

    def joint(self) -> np.ndarray:
        """Full joint over all ``2**n`` assignments in ``all_assignments`` order."""
        from .evaluate import all_assignments, EXACT_LIMIT, TooLargeForExact

        if self.n > EXACT_LIMIT:
            raise TooLargeForExact(f"n={self.n} exceeds the enumeration cap {EXACT_LIMIT}")
        return np.exp(self.log_density(all_assignments(self.n)))


@dataclass(frozen=True, eq=False)
class SymmetricTreeModel:
    """Uniform-marginal tree model given by one alpha-value per edge."""

    n: int
    edges: tuple
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        alpha = np.array(self.alpha, dtype=float).reshape(len(self.edges))
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        if self.n < 1:
            raise ModelError("a model needs at least one node")
        _check_tree(self.n, self.edges)
        for k, a in enumerate(alpha):
            if not (np.isfinite(a) and -1.0 <= a <= 1.0):
                raise ProbabilityOutOfRange(f"alpha of edge {k} {self.edges[k]} = {a!r} outside [-1, 1]")

    def to_tree_model(self) -> TreeModel:
        return from_symmetric(self)


def validate(model: TreeModel) -> None:
    """Raise a ``ModelError`` subclass unless ``model`` is a rooted spanning tree
    with every probability in [0, 1]."""
    n, edges = model.n, model.edges
    if n < 1:
        raise ModelError("a model needs at least one node")
    _check_tree(n, edges)
    seen_child = set()
    for k, (p, c) in enumerate(edges):
        if c == 0 or c in seen_child:
            raise NotRooted(f"edge {k} ({p}, {c}) is not directed away from root 0")
        seen_child.add(c)
    _check_prob(model.root_prob, "root_prob")
    cond = np.asarray(model.cond)
    for k in range(len(edges)):
        _check_prob(cond[k, 0], f"q_pp of edge {k} {edges[k]}")
        _check_prob(cond[k, 1], f"q_pm of edge {k} {edges[k]}")


def log_density(model: TreeModel, x):
    return model.log_density(x)


def sample(model: TreeModel, rng_seed, count: int) -> np.ndarray:
    return model.sample(rng_seed, count)


def pair_marginal(model: TreeModel, i: int, j: int) -> PairwiseMarginal:
    return model.pair_marginal(i, j)


def from_symmetric(sym: SymmetricTreeModel) -> TreeModel:
    """Uniform root, ``q_pp = (1 + a) / 2`` and ``q_pm = (1 - a) / 2`` per edge."""
    directed = orient(sym.n, sym.edges, root=0)
    a = sym.alpha
    cond = np.stack([(1 + a) / 2, (1 - a) / 2], axis=1) if len(a) else np.zeros((0, 2))
    return TreeModel(sym.n, directed, 0.5, cond)
