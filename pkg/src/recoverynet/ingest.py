"""Input datasets: POI table, OD flows, recovery panel, run configuration.

All files are UTF-8 RFC-4180 CSV with mandatory headers:
    pois.csv:     poi_id,sector,latitude,longitude,block_group_id,median_income
    flows.csv:    origin,destination,avg_weekly_visits
    recovery.csv: poi_id,week,state          (week numbering starts at 1)

Parsing is strict: rows are rejected, never coerced, and every violation is
reported with its line number. Loaders collect all row errors before raising.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np

from recoverynet.errors import ConfigError, DatasetError, IngestError

SECTORS = (
    "retail",
    "finance",
    "services",
    "manufacturing",
    "transport",
    "wholesale",
    "public_administration",
    "agriculture",
    "construction",
    "mining",
)

POI_HEADER = ["poi_id", "sector", "latitude", "longitude", "block_group_id", "median_income"]
FLOW_HEADER = ["origin", "destination", "avg_weekly_visits"]
RECOVERY_HEADER = ["poi_id", "week", "state"]
THETA_HEADER = ["poi_id", "theta"]
SEED_HEADER = ["poi_id"]


@dataclass(frozen=True)
class PoiRecord:
    poi_id: str
    sector: str
    latitude: float
    longitude: float
    block_group_id: str
    median_income: float


@dataclass(frozen=True)
class FlowRecord:
    origin: str
    destination: str
    avg_weekly_visits: float


class PoiTable:
    """Ordered, uniquely-keyed collection of PoiRecord (row order preserved)."""

    def __init__(self, records: Sequence[PoiRecord]):
        self.records = tuple(records)
        self.index = {r.poi_id: i for i, r in enumerate(self.records)}
        if len(self.index) != len(self.records):
            raise IngestError("ingest: duplicate poi_id in PoiTable")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, poi_id: str) -> PoiRecord:
        return self.records[self.index[poi_id]]

    def __eq__(self, other):
        return isinstance(other, PoiTable) and self.records == other.records

    @property
    def poi_ids(self) -> tuple[str, ...]:
        return tuple(r.poi_id for r in self.records)

    def incomes(self) -> np.ndarray:
        return np.array([r.median_income for r in self.records], dtype=np.float64)

    def sectors(self) -> list[str]:
        return [r.sector for r in self.records]


@dataclass
class RecoveryPanel:
    """Dense binary observed-recovery matrix: states[i, t-1] is POI i at week t."""

    poi_ids: tuple[str, ...]
    horizon: int
    states: np.ndarray  # (n, horizon) uint8

    def __post_init__(self):
        self.poi_ids = tuple(self.poi_ids)
        self.states = np.asarray(self.states, dtype=np.uint8)
        n = len(self.poi_ids)
        if len(set(self.poi_ids)) != n:
            raise IngestError("ingest: duplicate poi_id in recovery panel")
        if self.horizon < 1:
            raise IngestError("ingest: panel horizon must be >= 1")
        if self.states.shape != (n, self.horizon):
            raise IngestError(
                f"ingest: panel state matrix has shape {self.states.shape}, "
                f"expected {(n, self.horizon)}"
            )
        if not np.isin(self.states, (0, 1)).all():
            raise IngestError("ingest: panel states must be 0 or 1")
        self._index = {p: i for i, p in enumerate(self.poi_ids)}

    def __eq__(self, other):
        return (
            isinstance(other, RecoveryPanel)
            and self.poi_ids == other.poi_ids
            and self.horizon == other.horizon
            and np.array_equal(self.states, other.states)
        )

    def row_index(self, poi_id: str) -> int:
        return self._index[poi_id]

    def restricted_to(self, poi_ids: Sequence[str]) -> "RecoveryPanel":
        """Panel rows reordered/subset to `poi_ids`; raises if any id is missing."""
        missing = [p for p in poi_ids if p not in self._index]
        if missing:
            raise DatasetError(
                f"ingest: recovery panel is missing {len(missing)} poi_id(s), "
                f"e.g. {missing[:5]}"
            )
        rows = np.array([self._index[p] for p in poi_ids], dtype=np.int64)
        return RecoveryPanel(tuple(poi_ids), self.horizon, self.states[rows])


@dataclass(frozen=True)
class StudyConfig:
    """Run configuration; flat key/value config files mirror these fields."""

    epsilon: float = 0.0
    ga_population: int = 20
    ga_iterations: int = 1000
    horizon: int = 18
    gamma_list: tuple[float, ...] = (0.03, 0.05, 0.1)
    rng_seed: int = 0
    baseline_samples: int = 500

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError("config: epsilon must be >= 0")
        if self.ga_population < 2:
            raise ConfigError("config: ga_population must be >= 2")
        if self.ga_iterations < 1:
            raise ConfigError("config: ga_iterations must be >= 1")
        if self.horizon < 1:
            raise ConfigError("config: horizon must be >= 1")
        if not self.gamma_list:
            raise ConfigError("config: gamma_list must not be empty")
        for g in self.gamma_list:
            if not 0 < g <= 1:
                raise ConfigError(f"config: gamma {g} outside (0, 1]")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("config: rng_seed must fit in 64 unsigned bits")
        if self.baseline_samples < 1:
            raise ConfigError("config: baseline_samples must be >= 1")


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # unknown_endpoint | unknown_panel_row | missing_panel_row
    subject: str

    def __str__(self):
        return f"{self.kind}({self.subject!r})"


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self):
        if self.ok:
            return "dataset consistent"
        return "; ".join(str(i) for i in self.issues)


def _open_reader(path):
    handle = open(path, "r", encoding="utf-8", newline="")
    return handle, csv.reader(handle)


def _check_header(path, row, expected):
    if row != expected:
        raise IngestError(
            f"ingest: {os.path.basename(path)} header is {row!r}, expected {expected!r}"
        )


def _parse_finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("non-finite value")
    return value


def _raise_collected(path, problems):
    if problems:
        listing = "\n".join(f"  line {ln}: {msg}" for ln, msg in problems)
        raise IngestError(
            f"ingest: {len(problems)} invalid row(s) in {os.path.basename(path)}:\n{listing}"
        )


def load_pois(path) -> PoiTable:
    """Load and validate a POI table; row order is preserved."""
    handle, reader = _open_reader(path)
    with handle:
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"ingest: {os.path.basename(path)} is empty (no header)")
        _check_header(path, header, POI_HEADER)

        records: list[PoiRecord] = []
        seen: set[str] = set()
        problems: list[tuple[int, str]] = []
        for row in reader:
            ln = reader.line_num
            if len(row) != len(POI_HEADER):
                problems.append((ln, f"expected {len(POI_HEADER)} fields, got {len(row)}"))
                continue
            poi_id, sector, lat_s, lon_s, block_group, income_s = row
            if not poi_id:
                problems.append((ln, "empty poi_id"))
                continue
            if poi_id in seen:
                problems.append((ln, f"duplicate poi_id {poi_id!r}"))
                continue
            if sector not in SECTORS:
                problems.append((ln, f"unknown sector {sector!r}"))
                continue
            try:
                lat = _parse_finite(lat_s)
                lon = _parse_finite(lon_s)
                income = _parse_finite(income_s)
            except ValueError:
                problems.append((ln, "malformed numeric field"))
                continue
            if income < 0:
                problems.append((ln, f"negative median_income {income_s}"))
                continue
            seen.add(poi_id)
            records.append(PoiRecord(poi_id, sector, lat, lon, block_group, income))
        _raise_collected(path, problems)
    return PoiTable(records)


def load_flows(path) -> list[FlowRecord]:
    """Load OD flow records; duplicate pairs are rejected, not summed."""
    handle, reader = _open_reader(path)
    with handle:
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"ingest: {os.path.basename(path)} is empty (no header)")
        _check_header(path, header, FLOW_HEADER)

        flows: list[FlowRecord] = []
        seen: set[tuple[str, str]] = set()
        problems: list[tuple[int, str]] = []
        for row in reader:
            ln = reader.line_num
            if len(row) != len(FLOW_HEADER):
                problems.append((ln, f"expected {len(FLOW_HEADER)} fields, got {len(row)}"))
                continue
            origin, destination, visits_s = row
            if not origin or not destination:
                problems.append((ln, "empty endpoint"))
                continue
            if origin == destination:
                problems.append((ln, f"self-loop on {origin!r}"))
                continue
            pair = (origin, destination)
            if pair in seen:
                problems.append((ln, f"duplicate edge {origin!r} -> {destination!r}"))
                continue
            try:
                visits = _parse_finite(visits_s)
            except ValueError:
                problems.append((ln, "malformed avg_weekly_visits"))
                continue
            if visits < 0:
                problems.append((ln, f"negative avg_weekly_visits {visits_s}"))
                continue
            seen.add(pair)
            flows.append(FlowRecord(origin, destination, visits))
        _raise_collected(path, problems)
    return flows


def load_recovery(path, horizon: int) -> RecoveryPanel:
    """Load a long-format recovery panel and pivot to a dense matrix.

    The panel must be complete: every (poi, week) cell for week 1..horizon
    present exactly once.
    """
    if horizon < 1:
        raise IngestError("ingest: horizon must be >= 1")
    handle, reader = _open_reader(path)
    with handle:
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"ingest: {os.path.basename(path)} is empty (no header)")
        _check_header(path, header, RECOVERY_HEADER)

        cells: dict[str, dict[int, int]] = {}
        order: list[str] = []
        problems: list[tuple[int, str]] = []
        for row in reader:
            ln = reader.line_num
            if len(row) != len(RECOVERY_HEADER):
                problems.append((ln, f"expected {len(RECOVERY_HEADER)} fields, got {len(row)}"))
                continue
            poi_id, week_s, state_s = row
            if not poi_id:
                problems.append((ln, "empty poi_id"))
                continue
            try:
                week = int(week_s)
            except ValueError:
                problems.append((ln, f"malformed week {week_s!r}"))
                continue
            if not 1 <= week <= horizon:
                problems.append((ln, f"week {week} outside 1..{horizon}"))
                continue
            if state_s not in ("0", "1"):
                problems.append((ln, f"state {state_s!r} outside {{0,1}}"))
                continue
            if poi_id not in cells:
                cells[poi_id] = {}
                order.append(poi_id)
            if week in cells[poi_id]:
                problems.append((ln, f"duplicate cell ({poi_id!r}, week {week})"))
                continue
            cells[poi_id][week] = int(state_s)
        _raise_collected(path, problems)

    missing = [
        (poi_id, week)
        for poi_id in order
        for week in range(1, horizon + 1)
        if week not in cells[poi_id]
    ]
    if missing:
        sample = ", ".join(f"({p!r}, week {w})" for p, w in missing[:5])
        raise IngestError(
            f"ingest: recovery panel incomplete, {len(missing)} missing cell(s): {sample}"
        )

    states = np.zeros((len(order), horizon), dtype=np.uint8)
    for i, poi_id in enumerate(order):
        for week, state in cells[poi_id].items():
            states[i, week - 1] = state
    return RecoveryPanel(tuple(order), horizon, states)


def validate_dataset(pois: PoiTable, flows, panel: RecoveryPanel | None) -> ValidationReport:
    """Cross-check flow endpoints and panel rows against the POI table.

    Violations are report entries, not exceptions; an empty POI table is the
    lone hard error. Pass panel=None for network-only pipelines.
    """
    if len(pois) == 0:
        raise DatasetError("ingest: POI table is empty")
    report = ValidationReport()
    known = pois.index
    for f in flows:
        if f.origin not in known:
            report.issues.append(ValidationIssue("unknown_endpoint", f.origin))
        if f.destination not in known:
            report.issues.append(ValidationIssue("unknown_endpoint", f.destination))
    if panel is not None:
        panel_ids = set(panel.poi_ids)
        for p in panel.poi_ids:
            if p not in known:
                report.issues.append(ValidationIssue("unknown_panel_row", p))
        for p in pois.poi_ids:
            if p not in panel_ids:
                report.issues.append(ValidationIssue("missing_panel_row", p))
    return report


# ---------------------------------------------------------------------------
# writers (same schemas; floats serialized with repr so reload is exact)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buffer.getvalue()


def _write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def pois_csv_text(pois: PoiTable) -> str:
    return _csv_text(
        POI_HEADER,
        (
            (r.poi_id, r.sector, r.latitude, r.longitude, r.block_group_id, r.median_income)
            for r in pois
        ),
    )


def flows_csv_text(flows: Sequence[FlowRecord]) -> str:
    return _csv_text(
        FLOW_HEADER,
        ((f.origin, f.destination, f.avg_weekly_visits) for f in flows),
    )


def recovery_csv_text(panel: RecoveryPanel) -> str:
    def rows():
        for i, poi_id in enumerate(panel.poi_ids):
            for t in range(1, panel.horizon + 1):
                yield (poi_id, t, int(panel.states[i, t - 1]))

    return _csv_text(RECOVERY_HEADER, rows())


def thresholds_csv_text(poi_ids: Sequence[str], theta: np.ndarray) -> str:
    return _csv_text(THETA_HEADER, zip(poi_ids, (float(x) for x in theta)))


def write_pois(path, pois: PoiTable):
    _write_text(path, pois_csv_text(pois))


def write_flows(path, flows: Sequence[FlowRecord]):
    _write_text(path, flows_csv_text(flows))


def write_recovery(path, panel: RecoveryPanel):
    _write_text(path, recovery_csv_text(panel))


def write_thresholds(path, poi_ids: Sequence[str], theta: np.ndarray):
    _write_text(path, thresholds_csv_text(poi_ids, theta))


def load_thresholds(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Load a thresholds.csv file: (poi_ids, theta) in file order."""
    handle, reader = _open_reader(path)
    with handle:
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"ingest: {os.path.basename(path)} is empty (no header)")
        _check_header(path, header, THETA_HEADER)
        ids: list[str] = []
        values: list[float] = []
        problems: list[tuple[int, str]] = []
        seen: set[str] = set()
        for row in reader:
            ln = reader.line_num
            if len(row) != 2:
                problems.append((ln, f"expected 2 fields, got {len(row)}"))
                continue
            poi_id, theta_s = row
            if poi_id in seen:
                problems.append((ln, f"duplicate poi_id {poi_id!r}"))
                continue
            try:
                theta = _parse_finite(theta_s)
            except ValueError:
                problems.append((ln, f"malformed theta {theta_s!r}"))
                continue
            if not 0 <= theta <= 1:
                problems.append((ln, f"theta {theta_s} outside [0, 1]"))
                continue
            seen.add(poi_id)
            ids.append(poi_id)
            values.append(theta)
        _raise_collected(path, problems)
    return tuple(ids), np.array(values, dtype=np.float64)


def load_seed_ids(path) -> tuple[str, ...]:
    """Load a single-column seed file (header: poi_id)."""
    handle, reader = _open_reader(path)
    with handle:
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"ingest: {os.path.basename(path)} is empty (no header)")
        _check_header(path, header, SEED_HEADER)
        ids: list[str] = []
        problems: list[tuple[int, str]] = []
        seen: set[str] = set()
        for row in reader:
            ln = reader.line_num
            if len(row) != 1 or not row[0]:
                problems.append((ln, "expected one non-empty poi_id"))
                continue
            if row[0] in seen:
                problems.append((ln, f"duplicate poi_id {row[0]!r}"))
                continue
            seen.add(row[0])
            ids.append(row[0])
        _raise_collected(path, problems)
    return tuple(ids)


# ---------------------------------------------------------------------------
# flat key/value config files


def _parse_kv_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for ln, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config: {os.path.basename(path)} line {ln}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ConfigError(f"config: {os.path.basename(path)} line {ln}: empty key")
            if key in values:
                raise ConfigError(f"config: {os.path.basename(path)} line {ln}: duplicate key {key!r}")
            values[key] = value
    return values


def _convert(key: str, text: str, kind):
    try:
        if kind is float:
            return _parse_finite(text)
        if kind is int:
            return int(text)
        if kind == "gamma_list":
            return tuple(_parse_finite(part.strip()) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"config: key {key!r} has malformed value {text!r}")
    raise ConfigError(f"config: no parser for key {key!r}")


_CONFIG_KINDS = {
    "epsilon": float,
    "ga_population": int,
    "ga_iterations": int,
    "horizon": int,
    "gamma_list": "gamma_list",
    "rng_seed": int,
    "baseline_samples": int,
}


def load_config(path=None, overrides: dict | None = None) -> StudyConfig:
    """Build a StudyConfig from an optional flat key/value file plus overrides.

    Override values (already typed) win over file values, which win over
    defaults. Unknown keys in the file are rejected.
    """
    kwargs = {}
    if path is not None:
        for key, text in _parse_kv_file(path).items():
            if key not in _CONFIG_KINDS:
                raise ConfigError(f"config: unknown key {key!r}")
            kwargs[key] = _convert(key, text, _CONFIG_KINDS[key])
    if overrides:
        valid = {f.name for f in fields(StudyConfig)}
        for key, value in overrides.items():
            if key not in valid:
                raise ConfigError(f"config: unknown override {key!r}")
            if value is not None:
                kwargs[key] = value
    return StudyConfig(**kwargs)


def config_as_dict(config: StudyConfig) -> dict:
    out = {}
    for f in fields(StudyConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def config_with(config: StudyConfig, **overrides) -> StudyConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
