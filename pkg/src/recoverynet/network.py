"""Directed weighted dependency network, flow-cutoff sub-networks, and
structural statistics.

Metric conventions (also recorded in run manifests):
  - density uses the directed formula size / (order * (order - 1));
  - transitivity is computed on the undirected simple projection as
    3 * triangles / connected triples;
  - avg_degree / avg_strength average the per-node totals (in + out).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from recoverynet.errors import DatasetError
from recoverynet.ingest import FlowRecord, PoiRecord, PoiTable, validate_dataset


class DependencyNetwork:
    """Immutable directed weighted graph over POIs.

    Nodes are indexed 0..order-1 in POI-table row order. Edge arrays keep the
    flow-file order; a CSR view over incoming edges (grouped by destination)
    backs the cascade kernels. Degree and strength vectors are cached at
    construction.
    """

    def __init__(self, pois: Sequence[PoiRecord], edge_src, edge_dst, edge_weight):
        self.pois = tuple(pois)
        self.poi_ids = tuple(r.poi_id for r in self.pois)
        self.index = {p: i for i, p in enumerate(self.poi_ids)}
        n = len(self.pois)

        self.edge_src = np.asarray(edge_src, dtype=np.int64)
        self.edge_dst = np.asarray(edge_dst, dtype=np.int64)
        self.edge_weight = np.asarray(edge_weight, dtype=np.float64)

        self.in_degree = np.bincount(self.edge_dst, minlength=n).astype(np.int64)
        self.out_degree = np.bincount(self.edge_src, minlength=n).astype(np.int64)
        self.in_strength = np.bincount(self.edge_dst, weights=self.edge_weight, minlength=n)
        self.out_strength = np.bincount(self.edge_src, weights=self.edge_weight, minlength=n)

        # CSR over incoming edges: in_src[in_indptr[i]:in_indptr[i+1]] are the
        # origins of edges pointing at node i (stable edge order).
        order_by_dst = np.argsort(self.edge_dst, kind="stable")
        self.in_src = self.edge_src[order_by_dst]
        self.in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.in_degree, out=self.in_indptr[1:])

        for arr in (
            self.edge_src,
            self.edge_dst,
            self.edge_weight,
            self.in_degree,
            self.out_degree,
            self.in_strength,
            self.out_strength,
            self.in_src,
            self.in_indptr,
        ):
            arr.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.pois)

    @property
    def size(self) -> int:
        return int(self.edge_src.shape[0])

    def edge_triples(self) -> list[tuple[str, str, float]]:
        return [
            (self.poi_ids[s], self.poi_ids[d], float(w))
            for s, d, w in zip(self.edge_src, self.edge_dst, self.edge_weight)
        ]

    def same_as(self, other: "DependencyNetwork") -> bool:
        return (
            self.poi_ids == other.poi_ids
            and np.array_equal(self.edge_src, other.edge_src)
            and np.array_equal(self.edge_dst, other.edge_dst)
            and np.array_equal(self.edge_weight, other.edge_weight)
        )


@dataclass(frozen=True)
class GraphSummary:
    order: int
    size: int
    density: float
    transitivity: float
    avg_degree: float
    avg_strength: float

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "size": self.size,
            "density": self.density,
            "transitivity": self.transitivity,
            "avg_degree": self.avg_degree,
            "avg_strength": self.avg_strength,
        }


@dataclass
class DegreeProfile:
    poi_ids: tuple[str, ...]
    in_degree: np.ndarray
    out_degree: np.ndarray
    in_strength: np.ndarray
    out_strength: np.ndarray
    # nan where the node has no in- (resp. out-) neighbors
    avg_in_neighbor_in_degree: np.ndarray
    avg_out_neighbor_out_degree: np.ndarray
    histograms: dict[str, list[tuple[float, float, int]]]


def build_network(pois: PoiTable, flows: Sequence[FlowRecord]) -> DependencyNetwork:
    """One node per POI (isolates included), one directed edge per flow record."""
    report = validate_dataset(pois, flows, None)
    if not report.ok:
        raise DatasetError(f"network: inconsistent dataset: {report}")
    src = np.array([pois.index[f.origin] for f in flows], dtype=np.int64)
    dst = np.array([pois.index[f.destination] for f in flows], dtype=np.int64)
    weight = np.array([f.avg_weekly_visits for f in flows], dtype=np.float64)
    return DependencyNetwork(pois.records, src, dst, weight)


def filter_subnetwork(net: DependencyNetwork, epsilon: float) -> DependencyNetwork:
    """Sub-network of edges with weight strictly greater than epsilon.

    Ties at exactly epsilon are dropped, and nodes left without any incident
    edge are removed. Node attributes and relative order are preserved.
    """
    if epsilon < 0:
        raise ValueError("network: epsilon must be >= 0")
    keep = net.edge_weight > epsilon
    src, dst, weight = net.edge_src[keep], net.edge_dst[keep], net.edge_weight[keep]
    touched = np.zeros(net.order, dtype=bool)
    touched[src] = True
    touched[dst] = True
    kept_nodes = np.flatnonzero(touched)
    remap = np.full(net.order, -1, dtype=np.int64)
    remap[kept_nodes] = np.arange(kept_nodes.shape[0], dtype=np.int64)
    pois = [net.pois[i] for i in kept_nodes]
    return DependencyNetwork(pois, remap[src], remap[dst], weight)


def graph_summary(net: DependencyNetwork) -> GraphSummary:
    n, m = net.order, net.size
    density = m / (n * (n - 1)) if n >= 2 else 0.0
    avg_degree = float(np.mean(net.in_degree + net.out_degree)) if n else 0.0
    avg_strength = float(np.mean(net.in_strength + net.out_strength)) if n else 0.0
    return GraphSummary(
        order=n,
        size=m,
        density=float(density),
        transitivity=_transitivity(net),
        avg_degree=avg_degree,
        avg_strength=avg_strength,
    )


def _undirected_adjacency(net: DependencyNetwork) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(net.order)]
    for s, d in zip(net.edge_src, net.edge_dst):
        adj[s].add(int(d))
        adj[d].add(int(s))
    return adj


def _transitivity(net: DependencyNetwork) -> float:
    """3 * triangles / connected triples on the undirected simple projection."""
    adj = _undirected_adjacency(net)
    triples = sum(len(nbrs) * (len(nbrs) - 1) // 2 for nbrs in adj)
    if triples == 0:
        return 0.0
    closed = 0  # sums |N(u) & N(v)| over undirected edges u<v, i.e. 3 * triangles
    for u, nbrs in enumerate(adj):
        for v in nbrs:
            if v > u:
                closed += len(adj[u] & adj[v])
    return closed / triples


def _log_histogram(values: np.ndarray, bins: int) -> list[tuple[float, float, int]]:
    """Log-spaced histogram over the positive entries of `values`."""
    positive = values[values > 0].astype(np.float64)
    if positive.size == 0:
        return []
    lo, hi = float(positive.min()), float(positive.max())
    if lo == hi:
        return [(lo, hi, int(positive.size))]
    edges = np.logspace(np.log10(lo), np.log10(hi), bins + 1)
    edges[0], edges[-1] = lo, hi  # pin ends exactly so boundary values bin
    counts, _ = np.histogram(positive, bins=edges)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]


def degree_profile(net: DependencyNetwork, bins: int = 30) -> DegreeProfile:
    """Per-node degree/strength records plus log-binned histograms.

    Average-neighbor degrees follow the edge direction: the in-variant of a
    node averages the in-degrees of its in-neighbors, the out-variant averages
    the out-degrees of its out-neighbors; nodes without such neighbors get nan
    (omitted in CSV output).
    """
    n = net.order
    in_deg = net.in_degree.astype(np.float64)
    out_deg = net.out_degree.astype(np.float64)

    in_nbr_sum = np.bincount(net.edge_dst, weights=in_deg[net.edge_src], minlength=n)
    out_nbr_sum = np.bincount(net.edge_src, weights=out_deg[net.edge_dst], minlength=n)
    avg_in = np.full(n, np.nan)
    avg_out = np.full(n, np.nan)
    np.divide(in_nbr_sum, in_deg, out=avg_in, where=net.in_degree > 0)
    np.divide(out_nbr_sum, out_deg, out=avg_out, where=net.out_degree > 0)

    quantities = {
        "in_degree": net.in_degree,
        "out_degree": net.out_degree,
        "in_strength": net.in_strength,
        "out_strength": net.out_strength,
    }
    histograms = {name: _log_histogram(vals, bins) for name, vals in quantities.items()}

    return DegreeProfile(
        poi_ids=net.poi_ids,
        in_degree=net.in_degree.copy(),
        out_degree=net.out_degree.copy(),
        in_strength=net.in_strength.copy(),
        out_strength=net.out_strength.copy(),
        avg_in_neighbor_in_degree=avg_in,
        avg_out_neighbor_out_degree=avg_out,
        histograms=histograms,
    )
