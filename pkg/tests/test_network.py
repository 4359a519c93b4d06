import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recoverynet import ingest, network
from recoverynet.errors import DatasetError

from conftest import make_net, make_pois, net_from_indices, random_edge_list
from oracles import brute_force_summary


class TestBuildNetwork:
    def test_pois_only_edgeless(self):
        net = network.build_network(make_pois(["a", "b", "c"]), [])
        assert net.order == 3 and net.size == 0

    def test_hand_adjacency(self):
        net = make_net(
            ["a", "b", "c", "d"],
            [("a", "b", 5.0), ("b", "c", 12.0), ("a", "c", 25.0)],
        )
        assert net.order == 4 and net.size == 3
        assert net.in_degree[net.index["c"]] == 2
        assert net.out_degree[net.index["a"]] == 2
        assert net.in_strength[net.index["c"]] == 37.0

    def test_validation_failure_propagates(self):
        pois = make_pois(["a"])
        flows = [ingest.FlowRecord("a", "ghost", 1.0)]
        with pytest.raises(DatasetError, match="unknown_endpoint"):
            network.build_network(pois, flows)

    def test_degree_strength_sums(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            edges = random_edge_list(rng, n, 0.3)
            weights = rng.uniform(0.1, 9.0, size=len(edges)).tolist()
            net = net_from_indices(n, edges, weights)
            assert net.in_degree.sum() == net.size == net.out_degree.sum()
            assert net.in_strength.sum() == pytest.approx(net.edge_weight.sum(), abs=1e-9)
            assert net.out_strength.sum() == pytest.approx(net.edge_weight.sum(), abs=1e-9)


class TestFilter:
    def test_epsilon_zero_identity(self):
        net = make_net(["a", "b"], [("a", "b", 5.0), ("b", "a", 1.0)])
        filtered = network.filter_subnetwork(net, 0.0)
        assert filtered.same_as(net)

    def test_strict_inequality_and_isolate_drop(self):
        net = make_net(
            ["a", "b", "c", "d"],
            [("a", "b", 5.0), ("b", "c", 10.0), ("a", "c", 25.0)],
        )
        filtered = network.filter_subnetwork(net, 10.0)
        assert filtered.poi_ids == ("a", "c")  # b lost its edges, d was an isolate
        assert filtered.edge_triples() == [("a", "c", 25.0)]

    def test_attributes_preserved(self):
        pois = make_pois(["a", "b"], sector=["mining", "wholesale"], income=[1.0, 2.0])
        net = network.build_network(pois, [ingest.FlowRecord("a", "b", 9.0)])
        filtered = network.filter_subnetwork(net, 1.0)
        assert filtered.pois == net.pois

    def test_idempotent_and_monotone_random(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(2, 14))
            edges = random_edge_list(rng, n, 0.3)
            weights = rng.uniform(0, 30, size=len(edges)).tolist()
            net = net_from_indices(n, edges, weights)
            e1, e2 = sorted(rng.uniform(0, 30, size=2))
            f1 = network.filter_subnetwork(net, e1)
            f2 = network.filter_subnetwork(net, e2)
            assert network.filter_subnetwork(f1, e1).same_as(f1)
            assert set(f2.edge_triples()) <= set(f1.edge_triples())
            assert set(f2.poi_ids) <= set(f1.poi_ids)

    @given(st.lists(st.floats(min_value=0.01, max_value=99.0), min_size=1, max_size=12),
           st.floats(min_value=0.0, max_value=100.0))
    @settings(max_examples=60, deadline=None)
    def test_filter_keeps_exactly_strictly_heavier_edges(self, weights, epsilon):
        ids = [f"n{i}" for i in range(len(weights) + 1)]
        edges = [(ids[i], ids[i + 1], w) for i, w in enumerate(weights)]
        net = make_net(ids, edges)
        filtered = network.filter_subnetwork(net, epsilon)
        assert sorted(w for _, _, w in filtered.edge_triples()) == sorted(
            w for w in weights if w > epsilon
        )


class TestGraphSummary:
    def test_edgeless(self):
        summary = network.graph_summary(network.build_network(make_pois(list("abcde")), []))
        assert summary.density == 0.0
        assert summary.transitivity == 0.0
        assert summary.avg_degree == 0.0

    def test_directed_three_cycle(self):
        net = make_net(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
        summary = network.graph_summary(net)
        assert summary.order == 3 and summary.size == 3
        assert summary.density == 0.5
        assert summary.transitivity == 1.0
        assert summary.avg_degree == 2.0
        assert summary.avg_strength == 2.0

    def test_fully_filtered_network_degenerate_summary(self):
        net = make_net(["a", "b"], [("a", "b", 1.0)])
        empty = network.filter_subnetwork(net, 100.0)
        summary = network.graph_summary(empty)
        assert summary.order == 0 and summary.size == 0
        assert summary.density == 0.0 and summary.avg_strength == 0.0

    def test_against_brute_force_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 16))
            edges = random_edge_list(rng, n, 0.25)
            weights = rng.uniform(0.5, 5.0, size=len(edges)).tolist()
            net = net_from_indices(n, edges, weights)
            summary = network.graph_summary(net)
            expected = brute_force_summary(n, [(s, d, w) for (s, d), w in zip(edges, weights)])
            for key, value in expected.items():
                assert getattr(summary, key) == pytest.approx(value, abs=1e-12), key


class TestDegreeProfile:
    def test_single_isolate(self):
        net = network.build_network(make_pois(["only"]), [])
        profile = network.degree_profile(net)
        assert profile.in_degree[0] == 0 and profile.out_degree[0] == 0
        assert np.isnan(profile.avg_in_neighbor_in_degree[0])
        assert np.isnan(profile.avg_out_neighbor_out_degree[0])
        assert profile.histograms["in_degree"] == []

    def test_in_star(self):
        leaves = ["l1", "l2", "l3", "l4"]
        net = make_net(leaves + ["center"], [(l, "center", 1.0) for l in leaves])
        profile = network.degree_profile(net)
        c = net.index["center"]
        assert profile.in_degree[c] == 4
        for leaf in leaves:
            i = net.index[leaf]
            # the single out-neighbor (center) has out-degree 0
            assert profile.avg_out_neighbor_out_degree[i] == 0.0
            assert np.isnan(profile.avg_in_neighbor_in_degree[i])
        assert profile.avg_in_neighbor_in_degree[c] == 0.0
        assert np.isnan(profile.avg_out_neighbor_out_degree[c])

    def test_histogram_counts_sum_to_positive_nodes(self):
        rng = np.random.default_rng(5)
        n = 40
        edges = random_edge_list(rng, n, 0.1)
        net = net_from_indices(n, edges, rng.uniform(0.5, 20, len(edges)).tolist())
        profile = network.degree_profile(net, bins=7)
        for name, values in (
            ("in_degree", net.in_degree),
            ("out_degree", net.out_degree),
            ("in_strength", net.in_strength),
            ("out_strength", net.out_strength),
        ):
            total = sum(count for _, _, count in profile.histograms[name])
            assert total == int((values > 0).sum()), name

    def test_single_distinct_value_single_bin(self):
        net = make_net(["a", "b"], [("a", "b", 3.0)])
        profile = network.degree_profile(net)
        assert profile.histograms["in_degree"] == [(1.0, 1.0, 1)]
