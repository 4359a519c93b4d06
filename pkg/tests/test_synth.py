import numpy as np
import pytest

from recoverynet import calibration, ingest, network, synth
from recoverynet.errors import ConfigError


class TestParams:
    def test_defaults_valid(self):
        params = synth.SynthParams()
        assert abs(sum(params.sector_mix.values()) - 1.0) <= 1e-9

    def test_m_must_be_below_n(self):
        with pytest.raises(ConfigError, match="smaller than n_pois"):
            synth.SynthParams(n_pois=3, m=3)

    def test_bad_mix_rejected(self):
        mix = dict(synth.DEFAULT_SECTOR_MIX)
        mix["retail"] += 0.5
        with pytest.raises(ConfigError, match="sum to 1"):
            synth.SynthParams(sector_mix=mix)

    def test_seed_fraction_bounds(self):
        with pytest.raises(ConfigError):
            synth.SynthParams(seed_fraction=1.5)

    def test_param_file_parsing(self, tmp_path):
        path = tmp_path / "params.txt"
        path.write_text(
            "n_pois = 50\nm = 2\nrng_seed = 9\nmix_mining = 0.05\nmix_retail = 0.3778\n"
            "theta_mean_mining = 0.9\nseed_fraction = 0.2\n",
            encoding="utf-8",
        )
        params = synth.load_params(path)
        assert params.n_pois == 50 and params.m == 2 and params.rng_seed == 9
        assert params.sector_mix["mining"] == 0.05
        assert params.theta_means["mining"] == 0.9
        assert params.seed_fraction == 0.2

    def test_unknown_param_key(self, tmp_path):
        path = tmp_path / "params.txt"
        path.write_text("bogus = 1\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unknown parameter key"):
            synth.load_params(path)


class TestGenerateScenario:
    def test_single_poi_degenerate(self):
        scenario = synth.generate_scenario(
            synth.SynthParams(n_pois=1, m=1, horizon=4, seed_fraction=1.0)
        )
        assert len(scenario.pois) == 1
        assert scenario.flows == []
        # panel repeats the seed state
        assert scenario.panel.states.tolist() == [[1, 1, 1, 1]]

    def test_deterministic_given_seed(self):
        params = synth.SynthParams(n_pois=80, rng_seed=5)
        one = synth.generate_scenario(params)
        two = synth.generate_scenario(params)
        assert one.pois == two.pois
        assert one.flows == two.flows
        assert np.array_equal(one.theta_true, two.theta_true)
        assert one.panel == two.panel
        assert np.array_equal(one.seeds, two.seeds)

    def test_panel_is_model_realizable(self):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=70, rng_seed=12))
        net = network.build_network(scenario.pois, scenario.flows)
        score = calibration.score_thresholds(
            net, scenario.panel, scenario.theta_true, seeds=scenario.seeds
        )
        assert score == 0.0

    def test_panel_row_monotone_and_validates(self):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=60, rng_seed=3))
        states = scenario.panel.states
        assert np.all(states[:, 1:] >= states[:, :-1])
        report = ingest.validate_dataset(scenario.pois, scenario.flows, scenario.panel)
        assert report.ok

    def test_no_self_loops_or_duplicate_edges(self):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=150, rng_seed=8))
        pairs = [(f.origin, f.destination) for f in scenario.flows]
        assert len(pairs) == len(set(pairs))
        assert all(o != d for o, d in pairs)

    def test_every_node_has_an_edge(self):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=100, rng_seed=2))
        net = network.build_network(scenario.pois, scenario.flows)
        assert int(((net.in_degree + net.out_degree) == 0).sum()) == 0

    def test_heavy_tail_small(self):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=1500, m=3, rng_seed=1))
        net = network.build_network(scenario.pois, scenario.flows)
        total = net.in_degree + net.out_degree
        assert total.max() >= 10 * np.median(total)

    def test_sector_shares_match_mix(self):
        params = synth.SynthParams(n_pois=10_000, rng_seed=77)
        scenario = synth.generate_scenario(params)
        sectors = scenario.pois.sectors()
        for sector, share in params.sector_mix.items():
            got = sectors.count(sector) / len(sectors)
            assert abs(got - share) <= 0.02, sector


class TestWriteScenario:
    def test_round_trip_field_identical(self, tmp_path):
        scenario = synth.generate_scenario(synth.SynthParams(n_pois=40, rng_seed=6))
        synth.write_scenario(scenario, tmp_path)
        pois = ingest.load_pois(tmp_path / "pois.csv")
        flows = ingest.load_flows(tmp_path / "flows.csv")
        panel = ingest.load_recovery(tmp_path / "recovery.csv", scenario.params.horizon)
        ids, theta = ingest.load_thresholds(tmp_path / "theta_true.csv")
        assert pois == scenario.pois
        assert flows == scenario.flows
        assert panel == scenario.panel
        assert ids == scenario.pois.poi_ids
        assert np.array_equal(theta, scenario.theta_true)

    def test_regeneration_from_manifest_byte_identical(self, tmp_path):
        import json

        scenario = synth.generate_scenario(synth.SynthParams(n_pois=30, rng_seed=14))
        first = tmp_path / "first"
        synth.write_scenario(scenario, first)
        with open(first / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        regenerated = synth.generate_scenario(synth.params_from_dict(manifest["params"]))
        second = tmp_path / "second"
        synth.write_scenario(regenerated, second)
        for name in ("pois.csv", "flows.csv", "recovery.csv", "theta_true.csv", "manifest.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
