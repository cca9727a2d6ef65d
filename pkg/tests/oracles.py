"""Straight-line reference computations that share no code with the package.

Everything works on plain Python lists/dicts with ``math`` and ``itertools``
so a bug in the vectorised implementation cannot hide in its own oracle.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

STATES = (1, -1)


def joint_by_enumeration(n, edges, root_prob, cond):
    """Dict assignment -> probability from the root marginal and conditionals."""
    out = {}
    for x in itertools.product(STATES, repeat=n):
        p = root_prob if x[0] == 1 else 1.0 - root_prob
        for (par, ch), (qpp, qpm) in zip(edges, cond):
            q = qpp if x[par] == 1 else qpm
            p *= q if x[ch] == 1 else 1.0 - q
        out[x] = p
    return out


def marginal(joint, nodes):
    out = {}
    for x, p in joint.items():
        key = tuple(x[v] for v in nodes)
        out[key] = out.get(key, 0.0) + p
    return out


def pair_table(joint, i, j):
    m = marginal(joint, (i, j))
    return [[m.get((a, b), 0.0) for b in STATES] for a in STATES]


def tv(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def hellinger_sq(p, q):
    keys = set(p) | set(q)
    return 1.0 - sum(math.sqrt(p.get(k, 0.0) * q.get(k, 0.0)) for k in keys)


def mi_four_term(t):
    """MI of a 2x2 table written out term by term."""
    r = [t[0][0] + t[0][1], t[1][0] + t[1][1]]
    c = [t[0][0] + t[1][0], t[0][1] + t[1][1]]
    total = 0.0
    for a in range(2):
        for b in range(2):
            if t[a][b] > 0:
                total += t[a][b] * math.log(t[a][b] / (r[a] * c[b]))
    return total


def conditional_mi_sum(j3):
    """I(U;V|W) = sum p(u,v,w) ln[p(u,v,w) p(w) / (p(u,w) p(v,w))] for a
    nested-list 2x2x2 joint."""
    pw = [sum(j3[u][v][w] for u in range(2) for v in range(2)) for w in range(2)]
    puw = [[sum(j3[u][v][w] for v in range(2)) for w in range(2)] for u in range(2)]
    pvw = [[sum(j3[u][v][w] for u in range(2)) for w in range(2)] for v in range(2)]
    total = 0.0
    for u, v, w in itertools.product(range(2), repeat=3):
        p = j3[u][v][w]
        if p > 0:
            total += p * math.log(p * pw[w] / (puw[u][w] * pvw[v][w]))
    return total


def is_spanning_tree(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i, j in edges:
        a, b = find(i), find(j)
        if a == b:
            return False
        parent[a] = b
    return len(edges) == n - 1


def all_spanning_trees(n):
    pairs = list(itertools.combinations(range(n), 2))
    for subset in itertools.combinations(pairs, n - 1):
        if is_spanning_tree(n, subset):
            yield subset


def _neighbours(edges):
    nb = {}
    for i, j in edges:
        nb.setdefault(i, []).append(j)
        nb.setdefault(j, []).append(i)
    return nb


def path(edges, a, b):
    nb = _neighbours(edges)
    prev = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for v in nb.get(u, []):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    out = [b]
    while out[-1] != a:
        out.append(prev[out[-1]])
    return out[::-1]


def hull_by_paths(edges, s):
    s = list(s)
    out = set(s)
    for a, b in itertools.combinations(s, 2):
        out.update(path(edges, a, b))
    return out


def induced_connected(edges, nodes):
    nodes = set(nodes)
    if not nodes:
        return True
    nb = _neighbours(edges)
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in nb.get(u, []):
            if v in nodes and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == nodes
