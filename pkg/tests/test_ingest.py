import numpy as np
import pytest

from recoverynet import ingest
from recoverynet.errors import ConfigError, DatasetError, IngestError

from conftest import make_pois

POIS_HEADER = "poi_id,sector,latitude,longitude,block_group_id,median_income\n"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadPois:
    def test_header_only_gives_empty_table(self, tmp_path):
        table = ingest.load_pois(write(tmp_path, "pois.csv", POIS_HEADER))
        assert len(table) == 0

    def test_three_row_fixture(self, tmp_path):
        text = POIS_HEADER + (
            "p1,retail,29.5,-90.1,BG001,52000.5\n"
            "p2,services,29.6,-90.2,BG002,48000.0\n"
            "p3,mining,29.7,-90.3,BG003,61000.0\n"
        )
        table = ingest.load_pois(write(tmp_path, "pois.csv", text))
        assert table.records == (
            ingest.PoiRecord("p1", "retail", 29.5, -90.1, "BG001", 52000.5),
            ingest.PoiRecord("p2", "services", 29.6, -90.2, "BG002", 48000.0),
            ingest.PoiRecord("p3", "mining", 29.7, -90.3, "BG003", 61000.0),
        )

    def test_duplicate_poi_id_reports_line(self, tmp_path):
        text = POIS_HEADER + (
            "p1,retail,29.5,-90.1,BG001,52000\n"
            "p1,retail,29.5,-90.1,BG001,52000\n"
        )
        with pytest.raises(IngestError, match=r"line 3.*duplicate poi_id 'p1'"):
            ingest.load_pois(write(tmp_path, "pois.csv", text))

    def test_unknown_sector(self, tmp_path):
        text = POIS_HEADER + "p1,bakery,29.5,-90.1,BG001,52000\n"
        with pytest.raises(IngestError, match=r"line 2.*unknown sector 'bakery'"):
            ingest.load_pois(write(tmp_path, "pois.csv", text))

    def test_negative_income(self, tmp_path):
        text = POIS_HEADER + "p1,retail,29.5,-90.1,BG001,-5\n"
        with pytest.raises(IngestError, match="negative median_income"):
            ingest.load_pois(write(tmp_path, "pois.csv", text))

    def test_malformed_row_and_nonfinite(self, tmp_path):
        text = POIS_HEADER + ("p1,retail,29.5,-90.1,BG001\n" "p2,retail,nan,-90.1,BG001,5\n")
        with pytest.raises(IngestError) as err:
            ingest.load_pois(write(tmp_path, "pois.csv", text))
        assert "2 invalid row(s)" in str(err.value)

    def test_wrong_header_rejected(self, tmp_path):
        with pytest.raises(IngestError, match="header"):
            ingest.load_pois(write(tmp_path, "pois.csv", "a,b,c\n"))


class TestLoadFlows:
    def test_zero_rows(self, tmp_path):
        path = write(tmp_path, "flows.csv", "origin,destination,avg_weekly_visits\n")
        assert ingest.load_flows(path) == []

    def test_duplicate_pair_named(self, tmp_path):
        text = "origin,destination,avg_weekly_visits\n" "a,b,5\n" "a,b,6\n"
        with pytest.raises(IngestError, match=r"duplicate edge 'a' -> 'b'"):
            ingest.load_flows(write(tmp_path, "flows.csv", text))

    def test_self_loop_and_negative_weight(self, tmp_path):
        text = "origin,destination,avg_weekly_visits\n" "a,a,5\n" "a,b,-2\n"
        with pytest.raises(IngestError) as err:
            ingest.load_flows(write(tmp_path, "flows.csv", text))
        message = str(err.value)
        assert "self-loop" in message and "negative avg_weekly_visits" in message

    def test_reverse_edge_is_not_a_duplicate(self, tmp_path):
        text = "origin,destination,avg_weekly_visits\n" "a,b,5\n" "b,a,6\n"
        flows = ingest.load_flows(write(tmp_path, "flows.csv", text))
        assert len(flows) == 2


class TestLoadRecovery:
    def test_all_zero_panel_column_sums(self, tmp_path):
        lines = ["poi_id,week,state"]
        for p in ("p1", "p2", "p3", "p4"):
            for w in (1, 2, 3):
                lines.append(f"{p},{w},0")
        panel = ingest.load_recovery(write(tmp_path, "r.csv", "\n".join(lines) + "\n"), 3)
        assert panel.states.shape == (4, 3)
        assert panel.states.sum(axis=0).tolist() == [0, 0, 0]

    def test_two_by_two_matches_hand_pivot(self, tmp_path):
        text = "poi_id,week,state\n" "p1,1,1\np2,1,0\np1,2,1\np2,2,1\n"
        panel = ingest.load_recovery(write(tmp_path, "r.csv", text), 2)
        assert panel.poi_ids == ("p1", "p2")
        assert panel.states.tolist() == [[1, 1], [0, 1]]

    def test_bad_state(self, tmp_path):
        text = "poi_id,week,state\n" "p1,1,2\n"
        with pytest.raises(IngestError, match=r"state '2' outside"):
            ingest.load_recovery(write(tmp_path, "r.csv", text), 1)

    def test_week_out_of_range(self, tmp_path):
        text = "poi_id,week,state\n" "p1,3,1\n"
        with pytest.raises(IngestError, match="week 3 outside 1..2"):
            ingest.load_recovery(write(tmp_path, "r.csv", text), 2)

    def test_missing_cell(self, tmp_path):
        text = "poi_id,week,state\n" "p1,1,1\n"
        with pytest.raises(IngestError, match="missing cell"):
            ingest.load_recovery(write(tmp_path, "r.csv", text), 2)

    def test_duplicate_cell(self, tmp_path):
        text = "poi_id,week,state\n" "p1,1,1\np1,1,0\n"
        with pytest.raises(IngestError, match="duplicate cell"):
            ingest.load_recovery(write(tmp_path, "r.csv", text), 1)


class TestValidateDataset:
    def make_panel(self, ids, horizon=2):
        n = len(ids)
        return ingest.RecoveryPanel(tuple(ids), horizon, np.zeros((n, horizon), np.uint8))

    def test_consistent_fixture_empty_report(self):
        pois = make_pois(["a", "b"])
        flows = [ingest.FlowRecord("a", "b", 1.0)]
        report = ingest.validate_dataset(pois, flows, self.make_panel(["a", "b"]))
        assert report.ok

    def test_unknown_endpoint(self):
        pois = make_pois(["a", "b"])
        flows = [ingest.FlowRecord("a", "X", 1.0)]
        report = ingest.validate_dataset(pois, flows, None)
        assert [str(i) for i in report.issues] == ["unknown_endpoint('X')"]

    def test_missing_panel_row(self):
        pois = make_pois(["a", "b"])
        flows = [ingest.FlowRecord("a", "b", 1.0)]
        report = ingest.validate_dataset(pois, flows, self.make_panel(["a"]))
        assert [i.kind for i in report.issues] == ["missing_panel_row"]
        assert report.issues[0].subject == "b"

    def test_unknown_panel_row(self):
        pois = make_pois(["a"])
        report = ingest.validate_dataset(pois, [], self.make_panel(["a", "zz"]))
        assert ("unknown_panel_row", "zz") in [(i.kind, i.subject) for i in report.issues]

    def test_empty_poi_table_raises(self):
        with pytest.raises(DatasetError, match="empty"):
            ingest.validate_dataset(ingest.PoiTable([]), [], None)


class TestRoundTrips:
    def test_pois_round_trip(self, tmp_path):
        table = make_pois(["a", "b"], sector=["retail", "mining"], income=[1234.5, 0.0])
        ingest.write_pois(tmp_path / "pois.csv", table)
        assert ingest.load_pois(tmp_path / "pois.csv") == table

    def test_flows_round_trip(self, tmp_path):
        flows = [ingest.FlowRecord("a", "b", 0.1), ingest.FlowRecord("b", "a", 25.25)]
        ingest.write_flows(tmp_path / "flows.csv", flows)
        assert ingest.load_flows(tmp_path / "flows.csv") == flows

    def test_recovery_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        panel = ingest.RecoveryPanel(
            ("a", "b", "c"), 4, rng.integers(0, 2, size=(3, 4)).astype(np.uint8)
        )
        ingest.write_recovery(tmp_path / "r.csv", panel)
        assert ingest.load_recovery(tmp_path / "r.csv", 4) == panel

    def test_thresholds_round_trip(self, tmp_path):
        theta = np.array([0.0, 0.25, 1.0, 0.1234567890123])
        ingest.write_thresholds(tmp_path / "t.csv", ("a", "b", "c", "d"), theta)
        ids, values = ingest.load_thresholds(tmp_path / "t.csv")
        assert ids == ("a", "b", "c", "d")
        assert np.array_equal(values, theta)


class TestPanelRestriction:
    def test_restrict_reorders(self):
        panel = ingest.RecoveryPanel(
            ("a", "b", "c"), 2, np.array([[1, 1], [0, 1], [0, 0]], np.uint8)
        )
        sub = panel.restricted_to(["c", "a"])
        assert sub.poi_ids == ("c", "a")
        assert sub.states.tolist() == [[0, 0], [1, 1]]

    def test_restrict_missing_raises(self):
        panel = ingest.RecoveryPanel(("a",), 1, np.zeros((1, 1), np.uint8))
        with pytest.raises(DatasetError, match="missing"):
            panel.restricted_to(["a", "zz"])


class TestConfig:
    def test_defaults(self):
        config = ingest.load_config(None, None)
        assert config.baseline_samples == 500
        assert config.gamma_list == (0.03, 0.05, 0.1)

    def test_file_and_overrides(self, tmp_path):
        path = write(
            tmp_path,
            "config.txt",
            "# comment\nepsilon = 10\nga_population = 10\ngamma_list = 0.03, 0.1\nrng_seed = 42\n",
        )
        config = ingest.load_config(path, {"ga_population": 20})
        assert config.epsilon == 10.0
        assert config.ga_population == 20  # flag beats file
        assert config.gamma_list == (0.03, 0.1)
        assert config.rng_seed == 42

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            ingest.load_config(write(tmp_path, "c.txt", "nope = 1\n"), None)

    def test_invariants(self):
        with pytest.raises(ConfigError):
            ingest.StudyConfig(gamma_list=(1.5,))
        with pytest.raises(ConfigError):
            ingest.StudyConfig(epsilon=-1)
        with pytest.raises(ConfigError):
            ingest.StudyConfig(ga_population=1)
