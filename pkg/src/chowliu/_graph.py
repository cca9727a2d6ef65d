"""Small tree/forest helpers shared by the model, learner and hierarchy code."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

Edge = tuple[int, int]


class UnionFind:
    """Disjoint-set forest with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets holding ``a`` and ``b``; False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def norm_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


def adjacency(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    return adj


def orient(n: int, edges: Sequence[Edge], root: int = 0) -> list[Edge]:
    """Direct the edges of a spanning tree away from ``root``.

    The output keeps the input edge order; only the pair orientation changes.
    """
    adj = adjacency(n, edges)
    parent = [-1] * n
    seen = [False] * n
    seen[root] = True
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                queue.append(v)
    out = []
    for i, j in edges:
        out.append((i, j) if parent[j] == i else (j, i))
    return out


def tree_path(adj: Sequence[Sequence[int]], i: int, j: int) -> list[int]:
    """Node sequence of the unique path from ``i`` to ``j``."""
    if i == j:
        return [i]
    prev = {i: -1}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if u == j:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if j not in prev:
        raise ValueError(f"nodes {i} and {j} are not connected")
    path = [j]
    while path[-1] != i:
        path.append(prev[path[-1]])
    return path[::-1]


def components(n: int, edges: Iterable[Edge]) -> list[frozenset[int]]:
    """Connected components, ordered by their smallest node."""
    uf = UnionFind(n)
    for i, j in edges:
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def is_connected_subset(adj: Sequence[Sequence[int]], nodes: Iterable[int]) -> bool:
    """True iff the induced subgraph on ``nodes`` is connected (empty counts)."""
    nodes = set(nodes)
    if not nodes:
        return True
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in nodes and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(nodes)
