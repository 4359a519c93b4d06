import numpy as np
import pytest

from recoverynet import ingest, network


def make_pois(ids, sector="retail", income=50000.0):
    records = []
    for i, poi_id in enumerate(ids):
        sec = sector[i] if isinstance(sector, (list, tuple)) else sector
        inc = income[i] if isinstance(income, (list, tuple)) else income
        records.append(
            ingest.PoiRecord(poi_id, sec, 29.5 + 0.001 * i, -90.0, f"BG{i:03d}", float(inc))
        )
    return ingest.PoiTable(records)


def make_net(ids, edges, sector="retail", income=50000.0):
    """edges: list of (origin_id, destination_id, weight)."""
    pois = make_pois(ids, sector=sector, income=income)
    flows = [ingest.FlowRecord(o, d, float(w)) for o, d, w in edges]
    return network.build_network(pois, flows)


def random_edge_list(rng, n, p):
    """Random directed simple graph as (src, dst) index pairs."""
    edges = []
    for s in range(n):
        for d in range(n):
            if s != d and rng.random() < p:
                edges.append((s, d))
    return edges


def net_from_indices(n, edges, weights=None):
    ids = [f"n{i}" for i in range(n)]
    if weights is None:
        weights = [1.0] * len(edges)
    return make_net(ids, [(ids[s], ids[d], w) for (s, d), w in zip(edges, weights)])


@pytest.fixture
def chain_net():
    """a -> b -> c with thresholds 0.5 on b and c."""
    net = make_net(["a", "b", "c"], [("a", "b", 5.0), ("b", "c", 7.0)])
    theta = np.array([0.5, 0.5, 0.5])
    return net, theta


@pytest.fixture
def triangle_feedforward():
    """a -> b, b -> c, a -> c with theta_b = 0.5, theta_c = 0.6."""
    net = make_net(["a", "b", "c"], [("a", "b", 5.0), ("b", "c", 12.0), ("a", "c", 25.0)])
    theta = np.array([0.9, 0.5, 0.6])
    return net, theta
