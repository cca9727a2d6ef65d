"""Edge layering of a learned tree and the node groups it induces.

Symmetric mode bands every learned edge by ``|alpha_hat|`` into roads,
highways, railways and airways; cities, countries and continents are the
connected components after adding each band in turn.

General mode bands learned edges by pairwise measures of the empirical table
into avenues, highways, railways and tunnels (checked in that priority order);
the components are broken-cities, broken-countries and broken-continents.
When the true model is supplied, broken-cities whose convex hulls in the true
tree overlap are merged into cities, cities joined by learned highways form
countries, and countries joined by learned railways form continents.  The
report then also lists biased nodes, T-trails and the parallel matching of
learned and true highways/railways.

All numeric thresholds scale with ``eps**2 / n`` (or ``eps / sqrt(n)``) and
their coefficients are configurable; the defaults are the proof constants,
which at practical sample sizes leave most bands empty.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from ._graph import UnionFind, adjacency, components, is_connected_subset, norm_edge
from .learner import LearnedModel, NotSymmetricModel
from .measures import minmrg, pair_measures
from .model import SymmetricTreeModel, TreeModel

__all__ = [
    "SYMMETRIC_LABELS",
    "GENERAL_LABELS",
    "CityNotConnected",
    "SymmetricThresholds",
    "GeneralThresholds",
    "EdgeLayer",
    "NodePartition",
    "ParallelPair",
    "ParallelReport",
    "HierarchyReport",
    "classify_symmetric",
    "classify_general",
    "convex_hull",
    "merge_cities",
    "select_t_trails",
    "biased_nodes",
    "match_parallel",
    "report_text",
    "report_csv",
]

SYMMETRIC_LABELS = ("road", "highway", "railway", "airway")
GENERAL_LABELS = ("avenue", "highway", "railway", "tunnel")


class CityNotConnected(ValueError):
    pass


@dataclass(frozen=True)
class SymmetricThresholds:
    """Band edges: road if ``|a| >= 1 - road * e2n``, highway if ``|a| >= highway``,
    railway if ``|a| >= railway * eps / sqrt(n)``, airway otherwise."""

    road: float = 10.0
    highway: float = 0.5
    railway: float = 2.0

    def resolve(self, eps: float, n: int) -> dict:
        e2n = eps * eps / n
        return {
            "road": 1.0 - self.road * e2n,
            "highway": self.highway,
            "railway": self.railway * eps / math.sqrt(n),
        }


@dataclass(frozen=True)
class GeneralThresholds:
    """Coefficients of ``eps**2 / n`` (``highway_mindisc`` is absolute).

    avenue: ``minmrg >= avenue_minmrg`` and ``mindiag <= avenue_mindiag``;
    highway: ``minmrg >= highway_minmrg`` and ``mindisc >= highway_mindisc``;
    railway: ``i_h2 >= railway_ih2``; biased node: ``minmrg(P_i) < biased``.
    """

    avenue_minmrg: float = 1e6
    avenue_mindiag: float = 1e5
    highway_minmrg: float = 1e8
    highway_mindisc: float = 0.5
    railway_ih2: float = 1e10
    biased: float = 1e7

    def resolve(self, eps: float, n: int) -> dict:
        e2n = eps * eps / n
        return {
            "avenue_minmrg": self.avenue_minmrg * e2n,
            "avenue_mindiag": self.avenue_mindiag * e2n,
            "highway_minmrg": self.highway_minmrg * e2n,
            "highway_mindisc": self.highway_mindisc,
            "railway_ih2": self.railway_ih2 * e2n,
            "biased": self.biased * e2n,
        }


@dataclass(frozen=True)
class EdgeLayer:
    edge: tuple
    label: str
    trigger: str
    measures: dict
    thresholds: dict


@dataclass(frozen=True)
class NodePartition:
    level: str
    groups: tuple

    def group_of(self) -> dict:
        return {v: g for g, members in enumerate(self.groups) for v in members}


@dataclass(frozen=True)
class ParallelPair:
    """Learned and true edges of one kind between one pair of groups."""

    kind: str
    groups: tuple
    learned: tuple
    true: tuple
    same_fine_pair: bool

    @property
    def ok(self) -> bool:
        return len(self.learned) == 1 and len(self.true) == 1 and self.same_fine_pair


@dataclass(frozen=True)
class ParallelReport:
    pairs: tuple

    @property
    def matched(self) -> tuple:
        return tuple(p for p in self.pairs if p.ok)

    @property
    def mismatches(self) -> tuple:
        return tuple(p for p in self.pairs if not p.ok)


@dataclass(frozen=True)
class HierarchyReport:
    mode: str
    n: int
    eps: float
    edge_layers: tuple
    partitions: dict
    thresholds: dict
    true_layers: dict | None = None
    biased_nodes: frozenset | None = None
    t_trails: tuple | None = None
    parallel: ParallelReport | None = None
    extra: dict = field(default_factory=dict)

    @property
    def labels(self) -> dict:
        return {layer.edge: layer.label for layer in self.edge_layers}

    def label_counts(self) -> dict:
        names = SYMMETRIC_LABELS if self.mode == "symmetric" else GENERAL_LABELS
        counts = {name: 0 for name in names}
        for layer in self.edge_layers:
            counts[layer.label] += 1
        return counts

    def empty_bands(self) -> list[str]:
        return [name for name, c in self.label_counts().items() if c == 0]


# -- tree helpers ---------------------------------------------------------------


def _edges_of(tree) -> list[tuple[int, int]]:
    if isinstance(tree, (TreeModel, SymmetricTreeModel)):
        return [norm_edge(i, j) for i, j in tree.edges]
    return [norm_edge(int(i), int(j)) for i, j in tree]


def _partition(level: str, n: int, edges: Iterable[tuple[int, int]]) -> NodePartition:
    return NodePartition(level, tuple(components(n, edges)))


def convex_hull(tree, s: Iterable[int], n: int | None = None) -> frozenset:
    """Smallest subtree-connected node set containing ``s``.

    Prunes leaves outside ``s`` until none remain.
    """
    edges = _edges_of(tree)
    n = len(edges) + 1 if n is None else n
    s = set(int(v) for v in s)
    if len(s) <= 1:
        return frozenset(s)
    adj = adjacency(n, edges)
    deg = [len(a) for a in adj]
    alive = [True] * n
    stack = [v for v in range(n) if deg[v] <= 1 and v not in s]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for u in adj[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] == 1 and u not in s:
                    stack.append(u)
    return frozenset(v for v in range(n) if alive[v])


def merge_cities(true_tree, broken_cities: Sequence[Iterable[int]], n: int | None = None) -> NodePartition:
    """Merge broken-cities whose convex hulls in the true tree intersect,
    transitively."""
    edges = _edges_of(true_tree)
    n = len(edges) + 1 if n is None else n
    groups = [frozenset(g) for g in broken_cities]
    uf = UnionFind(len(groups))
    owner = [-1] * n
    for g, members in enumerate(groups):
        for v in convex_hull(edges, members, n):
            if owner[v] >= 0:
                uf.union(owner[v], g)
            else:
                owner[v] = g
    merged: dict[int, set] = {}
    for g, members in enumerate(groups):
        merged.setdefault(uf.find(g), set()).update(members)
    return NodePartition("city", tuple(sorted((frozenset(m) for m in merged.values()), key=min)))


def select_t_trails(true_tree, city: Iterable[int], avenues_in_city: Iterable[tuple[int, int]], n: int | None = None):
    """Greedy T-trail choice inside one city.

    Scans the true-tree edges with both ends in ``city`` in ascending
    ``(i, j)`` order and keeps each one that is not an avenue and closes no
    cycle with the avenues plus the edges kept so far.
    """
    edges = _edges_of(true_tree)
    n = len(edges) + 1 if n is None else n
    city = set(int(v) for v in city)
    adj = adjacency(n, edges)
    if not is_connected_subset(adj, city):
        raise CityNotConnected(f"city {sorted(city)} is not connected in the true tree")
    avenues = {norm_edge(i, j) for i, j in avenues_in_city}
    uf = UnionFind(n)
    for i, j in avenues:
        uf.union(i, j)
    chosen = []
    for e in sorted(e for e in edges if e[0] in city and e[1] in city):
        if e in avenues:
            continue
        if uf.union(*e):
            chosen.append(e)
    return tuple(chosen)


def biased_nodes(model: TreeModel, eps: float, coefficient: float = GeneralThresholds.biased) -> frozenset:
    """Nodes with ``min(P(X_i = +1), P(X_i = -1)) < coefficient * eps**2 / n``."""
    cut = coefficient * eps * eps / model.n
    marg = model.node_marginals()
    return frozenset(i for i in range(model.n) if minmrg(marg[i]) < cut)


def _true_layers(true_edges, partitions: dict, names: tuple) -> dict:
    city = partitions["city"].group_of()
    country = partitions["country"].group_of()
    continent = partitions["continent"].group_of()
    out = {}
    for i, j in true_edges:
        if city[i] == city[j]:
            out[(i, j)] = names[0]
        elif country[i] == country[j]:
            out[(i, j)] = names[1]
        elif continent[i] == continent[j]:
            out[(i, j)] = names[2]
        else:
            out[(i, j)] = names[3]
    return out


def match_parallel(true_layers: dict, report: HierarchyReport) -> ParallelReport:
    """Pair learned and true highways (between cities) and railways (between
    countries) that join the same pair of groups.

    A pair is ``ok`` when exactly one edge of each side crosses it and, in
    general mode, both cross between the same broken-cities (highways) or
    broken-countries (railways).
    """
    pairs = []
    learned = report.labels
    for kind, level, fine in (("highway", "city", "broken-city"), ("railway", "country", "broken-country")):
        grp = report.partitions[level].group_of()
        fine_grp = report.partitions[fine].group_of() if fine in report.partitions else None
        buckets: dict[tuple, tuple[list, list]] = {}
        for source, labels in ((0, learned), (1, true_layers)):
            for (i, j), lab in labels.items():
                if lab != kind or grp[i] == grp[j]:
                    continue
                key = tuple(sorted((grp[i], grp[j])))
                buckets.setdefault(key, ([], []))[source].append((i, j))
        for key in sorted(buckets):
            lrn, tru = buckets[key]
            same = True
            if fine_grp is not None and len(lrn) == 1 and len(tru) == 1:
                a = sorted((fine_grp[lrn[0][0]], fine_grp[lrn[0][1]]))
                b = sorted((fine_grp[tru[0][0]], fine_grp[tru[0][1]]))
                same = a == b
            pairs.append(ParallelPair(kind, key, tuple(sorted(lrn)), tuple(sorted(tru)), same))
    return ParallelReport(tuple(pairs))


# -- symmetric mode ---------------------------------------------------------------


def classify_symmetric(
    learned: LearnedModel,
    eps: float,
    thresholds: SymmetricThresholds | None = None,
    true_tree=None,
) -> HierarchyReport:
    """Band the learned edges by ``|alpha_hat|`` and group nodes.

    Parameters
    ----------
    learned : LearnedModel
        Output of ``chow_liu_symmetric``.
    eps : float
        Accuracy parameter in (0, 1].
    thresholds : SymmetricThresholds, optional
    true_tree : TreeModel, SymmetricTreeModel or edge list, optional
        Enables labelling of true edges and the parallel matching.
    """
    if learned.mode != "symmetric":
        raise NotSymmetricModel("classify_symmetric needs symmetric-mode output")
    _check_eps(eps)
    n = learned.n
    th = (thresholds or SymmetricThresholds()).resolve(eps, n)
    layers = []
    for (i, j), marg in zip(learned.tree, learned.edge_marginals):
        a = marg.alpha
        mag = abs(a)
        if mag >= th["road"]:
            label = "road"
        elif mag >= th["highway"]:
            label = "highway"
        elif mag >= th["railway"]:
            label = "railway"
        else:
            label = "airway"
        layers.append(EdgeLayer((i, j), label, "abs_alpha_hat", {"alpha_hat": a, "abs_alpha_hat": mag}, th))
    partitions = _nested(n, layers, SYMMETRIC_LABELS, ("city", "country", "continent"))
    report = HierarchyReport("symmetric", n, float(eps), tuple(layers), partitions, th)
    if true_tree is None:
        return report
    true_layers = _true_layers(_edges_of(true_tree), partitions, SYMMETRIC_LABELS)
    report = replace(report, true_layers=true_layers)
    return replace(report, parallel=match_parallel(true_layers, report))


def _nested(n: int, layers, labels: tuple, levels: tuple) -> dict:
    out = {}
    included: list[tuple[int, int]] = []
    for lab, level in zip(labels, levels):
        included += [layer.edge for layer in layers if layer.label == lab]
        out[level] = _partition(level, n, included)
    return out


def _check_eps(eps: float):
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")


# -- general mode ---------------------------------------------------------------


def _general_label(pm, th) -> tuple[str, str]:
    if pm.minmrg >= th["avenue_minmrg"] and pm.mindiag <= th["avenue_mindiag"]:
        return "avenue", "minmrg,mindiag"
    if pm.minmrg >= th["highway_minmrg"] and pm.mindisc >= th["highway_mindisc"]:
        return "highway", "minmrg,mindisc"
    if pm.i_h2 >= th["railway_ih2"]:
        return "railway", "i_h2"
    return "tunnel", "none"


def classify_general(
    learned: LearnedModel,
    eps: float,
    thresholds: GeneralThresholds | None = None,
    true_model: TreeModel | None = None,
) -> HierarchyReport:
    """Band the learned edges by ``minmrg``/``mindiag``/``mindisc``/``I_H2``.

    Without ``true_model`` the report holds the broken-city, broken-country
    and broken-continent partitions.  With it, the report adds cities,
    countries, continents, true-edge labels, biased nodes, T-trails and the
    parallel matching.
    """
    _check_eps(eps)
    n = learned.n
    cfg = thresholds or GeneralThresholds()
    th = cfg.resolve(eps, n)
    layers = []
    for (i, j), marg in zip(learned.tree, learned.edge_marginals):
        pm = pair_measures(marg)
        label, trigger = _general_label(pm, th)
        measures = {k: v for k, v in asdict(pm).items() if k != "alpha"}
        layers.append(EdgeLayer((i, j), label, trigger, measures, th))
    partitions = _nested(n, layers, GENERAL_LABELS, ("broken-city", "broken-country", "broken-continent"))
    report = HierarchyReport("general", n, float(eps), tuple(layers), partitions, th)
    if true_model is None:
        return report
    if true_model.n != n:
        raise ValueError(f"true model has n={true_model.n}, learned model has n={n}")

    true_edges = _edges_of(true_model)
    cities = merge_cities(true_edges, partitions["broken-city"].groups, n)
    by_label = {lab: [layer.edge for layer in layers if layer.label == lab] for lab in GENERAL_LABELS}
    countries = _merge_groups("country", n, cities.groups, by_label["highway"])
    continents = _merge_groups("continent", n, countries.groups, by_label["railway"])
    partitions = dict(partitions, city=cities, country=countries, continent=continents)
    true_layers = _true_layers(true_edges, partitions, ("road", "highway", "railway", "airway"))

    trails = []
    avenue_set = by_label["avenue"]
    for city in cities.groups:
        inside = [e for e in avenue_set if e[0] in city and e[1] in city]
        trails.extend(select_t_trails(true_edges, city, inside, n))

    report = replace(
        report,
        partitions=partitions,
        true_layers=true_layers,
        biased_nodes=biased_nodes(true_model, eps, cfg.biased),
        t_trails=tuple(sorted(trails)),
    )
    return replace(report, parallel=match_parallel(true_layers, report))


def _merge_groups(level: str, n: int, groups, edges) -> NodePartition:
    uf = UnionFind(n)
    for g in groups:
        members = sorted(g)
        for v in members[1:]:
            uf.union(members[0], v)
    for i, j in edges:
        uf.union(i, j)
    out: dict[int, list] = {}
    for v in range(n):
        out.setdefault(uf.find(v), []).append(v)
    return NodePartition(level, tuple(sorted((frozenset(g) for g in out.values()), key=min)))


# -- serialisation ---------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def report_csv(report: HierarchyReport) -> str:
    """One row per learned edge: endpoints, label, trigger, measures, thresholds."""
    mkeys = list(report.edge_layers[0].measures) if report.edge_layers else []
    tkeys = list(report.thresholds)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "label", "trigger", *mkeys, *(f"threshold_{k}" for k in tkeys)])
    for layer in report.edge_layers:
        w.writerow(
            [layer.edge[0], layer.edge[1], layer.label, layer.trigger]
            + [_fmt(layer.measures[k]) for k in mkeys]
            + [_fmt(layer.thresholds[k]) for k in tkeys]
        )
    return buf.getvalue()


def _groups_line(part: NodePartition) -> str:
    return " ".join("{" + ",".join(str(v) for v in sorted(g)) + "}" for g in part.groups)


def report_text(report: HierarchyReport) -> str:
    """Readable summary: thresholds, band counts (empty bands named), groups."""
    lines = [f"layering mode={report.mode} n={report.n} eps={_fmt(report.eps)}", "", "thresholds:"]
    lines += [f"  {k} = {_fmt(v)}" for k, v in report.thresholds.items()]
    lines += ["", "bands:"]
    for name, c in report.label_counts().items():
        lines.append(f"  {name}: {c}")
    empty = report.empty_bands()
    lines.append("  empty bands: " + (", ".join(empty) if empty else "(none)"))
    lines += ["", "edges:"]
    for layer in report.edge_layers:
        lines.append(f"  {layer.edge[0]}-{layer.edge[1]} {layer.label}")
    lines += ["", "partitions:"]
    for level, part in report.partitions.items():
        lines.append(f"  {level} ({len(part.groups)}): {_groups_line(part)}")
    if report.true_layers is not None:
        lines += ["", "true edges:"]
        for (i, j), lab in sorted(report.true_layers.items()):
            lines.append(f"  {i}-{j} {lab}")
    if report.biased_nodes is not None:
        lines += ["", "biased nodes: " + (" ".join(str(v) for v in sorted(report.biased_nodes)) or "(none)")]
    if report.t_trails is not None:
        lines.append("t-trails: " + (" ".join(f"{i}-{j}" for i, j in report.t_trails) or "(none)"))
    if report.parallel is not None:
        lines += ["", "parallel matching:"]
        if not report.parallel.pairs:
            lines.append("  (no highways or railways between groups)")
        for p in report.parallel.pairs:
            status = "ok" if p.ok else "MISMATCH"
            lrn = ",".join(f"{i}-{j}" for i, j in p.learned) or "-"
            tru = ",".join(f"{i}-{j}" for i, j in p.true) or "-"
            lines.append(f"  {p.kind} groups {p.groups[0]}|{p.groups[1]} learned={lrn} true={tru} {status}")
    return "\n".join(lines) + "\n"
