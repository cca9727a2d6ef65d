"""Random tree models: uniform-weight spanning trees, the hard-instance mix of
normal/strong/weak edges, and fixtures for tests.

Randomness is numpy's PCG64 seeded through ``SeedSequence(seed, spawn_key=...)``.
For a given integer seed the streams are::

    (0,)      tree: one U(0,1) weight per pair of the complete graph, upper
              triangle in row-major order
    (1,)      root probability, then the three exponentials of the Dirichlet
    (2, k)    everything drawn for the k-th tree edge (Kruskal output order)

so any single edge can be regenerated in isolation and results do not depend
on platform or on how many instances are generated in one process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._graph import orient
from .learner import kruskal_max_st
from .model import SymmetricTreeModel, TreeModel

__all__ = [
    "EDGE_TYPES",
    "HardInstanceConfig",
    "HardInstance",
    "stream",
    "random_tree",
    "generate_hard",
    "generate_hard_detailed",
    "random_symmetric",
    "random_general",
]

EDGE_TYPES = ("normal", "strong", "weak")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for sub-stream ``key`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def random_tree(n: int, seed: int) -> list[tuple[int, int]]:
    """Maximum spanning tree of the complete graph under i.i.d. U(0,1) weights.

    Edges come back as ``(i, j)`` with ``i < j`` in Kruskal acceptance order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return []
    rng = stream(seed, 0)
    iu, ju = np.triu_indices(n, k=1)
    w = np.zeros((n, n))
    w[iu, ju] = rng.random(len(iu))
    return kruskal_max_st(n, w)


@dataclass(frozen=True)
class HardInstanceConfig:
    """Parameters of one hard instance.

    ``proportions`` overrides the Dirichlet(1,1,1) draw of the edge-type
    probabilities (normal, strong, weak) when given.
    """

    n: int
    m: int
    seed: int
    proportions: tuple | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("hard instances need n >= 2")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.proportions is not None:
            p = np.asarray(self.proportions, dtype=float)
            if p.shape != (3,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                raise ValueError("proportions must be three nonnegative numbers summing to 1")

    @property
    def strong_scale(self) -> float:
        return math.log(self.n) / self.m

    @property
    def weak_scale(self) -> float:
        return math.sqrt(math.log(self.n) / self.m)


@dataclass(frozen=True, eq=False)
class HardInstance:
    config: HardInstanceConfig
    model: TreeModel
    proportions: tuple
    edge_types: tuple
    n_clamped: int

    def describe(self) -> list[str]:
        """Comment lines recording how the instance was drawn."""
        c = self.config
        p1, p2, p3 = self.proportions
        return [
            f"hard instance n={c.n} m={c.m} seed={c.seed}",
            f"p1={p1!r} p2={p2!r} p3={p3!r}",
            "edge types: " + " ".join(self.edge_types),
        ]


def _lognormal(rng: np.random.Generator) -> float:
    return math.exp(rng.standard_normal())


def generate_hard_detailed(config: HardInstanceConfig) -> HardInstance:
    """Draw a hard instance and keep the bookkeeping of how it was drawn.

    Root ``P(X_0=+1) ~ U(0,1)``; edge-type probabilities ``(p1, p2, p3)`` from
    Dirichlet(1,1,1) as normalised exponentials.  For each edge
    ``(parent, child)`` with ``q_pp = P(child=+1 | parent=+1)`` and
    ``q_pm = P(child=+1 | parent=-1)``:

    * normal: both U(0,1);
    * strong, ``s = ln(n)/m``: with probability 1/2 ``q_pp = Z1 s`` and
      ``q_pm = 1 - Z2 s``, otherwise ``q_pp = 1 - Z1 s`` and ``q_pm = Z2 s``;
    * weak, ``w = sqrt(ln(n)/m)``: ``q_pp ~ U(0,1)`` and ``q_pm = q_pp + Z w``
      or ``q_pp - Z w`` with probability 1/2 each;

    where the ``Z`` are standard log-normal.  Values outside [0, 1] are clamped.
    """
    n, m, seed = config.n, config.m, config.seed
    tree = random_tree(n, seed)
    directed = orient(n, tree, root=0)
    head = stream(seed, 1)
    root_prob = head.random()
    expo = head.standard_exponential(3)
    props = np.asarray(config.proportions, dtype=float) if config.proportions is not None else expo / expo.sum()
    cum = np.cumsum(props)
    s, w = config.strong_scale, config.weak_scale
    cond = np.empty((len(directed), 2))
    types = []
    clamped = 0
    for k in range(len(directed)):
        rng = stream(seed, 2, k)
        u = rng.random()
        kind = 0 if u < cum[0] else (1 if u < cum[1] else 2)
        if kind == 0:
            q = (rng.random(), rng.random())
        elif kind == 1:
            z1, z2 = _lognormal(rng), _lognormal(rng)
            if rng.random() < 0.5:
                q = (z1 * s, 1.0 - z2 * s)
            else:
                q = (1.0 - z1 * s, z2 * s)
        else:
            base = rng.random()
            z = _lognormal(rng)
            q = (base, base + z * w if rng.random() < 0.5 else base - z * w)
        for t in (0, 1):
            if not 0.0 <= q[t] <= 1.0:
                clamped += 1
        cond[k] = np.clip(q, 0.0, 1.0)
        types.append(EDGE_TYPES[kind])
    model = TreeModel(n, directed, root_prob, cond)
    return HardInstance(config, model, tuple(float(p) for p in props), tuple(types), clamped)


def generate_hard(config: HardInstanceConfig) -> TreeModel:
    return generate_hard_detailed(config).model


def _alpha_draw(rng: np.random.Generator, law, count: int) -> np.ndarray:
    if law == "uniform":
        return rng.uniform(-1.0, 1.0, count)
    if law == "banded":
        law = (0.1, 0.9)
    if isinstance(law, (int, float)):
        return np.full(count, float(law))
    lo, hi = law
    mag = rng.uniform(lo, hi, count)
    sign = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    return sign * mag


def random_symmetric(n: int, seed: int, alpha_law="uniform", topology: str = "random") -> SymmetricTreeModel:
    """Random symmetric model.

    Parameters
    ----------
    alpha_law : "uniform", "banded", float or (lo, hi)
        "uniform" draws alpha from U(-1, 1); "banded" draws ``|alpha|`` from
        U(0.1, 0.9) with a fair random sign; a float fixes every alpha; a pair
        ``(lo, hi)`` draws ``|alpha|`` from U(lo, hi) with a random sign.
    topology : "random" or "chain"
        A uniform-weight spanning tree, or a path through a random
        permutation of the nodes.
    """
    if topology == "random":
        tree = random_tree(n, seed)
    elif topology == "chain":
        perm = stream(seed, 0).permutation(n).tolist()
        tree = [(min(a, b), max(a, b)) for a, b in zip(perm, perm[1:])]
    else:
        raise ValueError(f"unknown topology {topology!r}")
    alphas = _alpha_draw(stream(seed, 1), alpha_law, len(tree))
    return SymmetricTreeModel(n, tree, alphas)


def random_general(n: int, seed: int, low: float = 0.0, high: float = 1.0) -> TreeModel:
    """Random general model: uniform-weight tree, root probability and both
    conditionals of every edge i.i.d. U(low, high)."""
    tree = random_tree(n, seed)
    rng = stream(seed, 1)
    root = rng.uniform(low, high)
    cond = rng.uniform(low, high, (len(tree), 2))
    return TreeModel(n, orient(n, tree, root=0), root, cond)
