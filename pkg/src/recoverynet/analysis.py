"""Sector- and income-stratified views of thresholds and multiplier sets.

Income percentile cutoffs use nearest-rank semantics over POI-level incomes:
the p-th percentile is the ceil(p * n)-th smallest value. A POI is high-income
when its income >= the 80th-percentile cutoff, otherwise low-income when
<= the 20th-percentile cutoff, otherwise middle, so every POI lands in exactly
one band even when the cutoffs coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from recoverynet.ingest import SECTORS, PoiTable
from recoverynet.multiplier import MultiplierScenario


@dataclass(frozen=True)
class SectorThresholdStats:
    sector: str
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float


@dataclass
class SectorStats:
    per_sector: list[SectorThresholdStats]


@dataclass(frozen=True)
class BandSummary:
    count: int
    mean: float | None
    median: float | None


@dataclass(frozen=True)
class SectorIncomeRow:
    sector: str
    slope: float | None  # None when incomes in the sector are constant
    high: BandSummary
    low: BandSummary


@dataclass
class IncomeSplit:
    low_cutoff: float
    high_cutoff: float
    per_sector: list[SectorIncomeRow]


@dataclass
class CompositionReport:
    sectors: tuple[str, ...]
    baseline_shares: dict[str, float]  # percent, sums to 100
    scenario_shares: dict[float, dict[str, float]]  # gamma -> sector -> percent
    share_deltas: dict[float, dict[str, float]]  # scenario minus baseline


def nearest_rank_percentile(values, fraction: float) -> float:
    """ceil(fraction * n)-th smallest value (1-indexed nearest-rank)."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("analysis: percentile of empty value list")
    if not 0 < fraction <= 1:
        raise ValueError("analysis: percentile fraction outside (0, 1]")
    rank = math.ceil(fraction * arr.size)
    return float(arr[rank - 1])


def ols_slope(x, y) -> float | None:
    """Least-squares slope of y on x; None when x is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.all(x == x[0]):
        return None
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def _check_alignment(theta, pois: PoiTable):
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (len(pois),):
        raise ValueError(
            f"analysis: theta has shape {theta.shape}, expected ({len(pois)},)"
        )
    return theta


def threshold_by_sector(theta, pois: PoiTable) -> SectorStats:
    """Descriptive threshold statistics per sector; empty sectors are omitted."""
    theta = _check_alignment(theta, pois)
    sectors = np.array(pois.sectors())
    rows = []
    for sector in SECTORS:
        values = theta[sectors == sector]
        if values.size == 0:
            continue
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        rows.append(
            SectorThresholdStats(
                sector=sector,
                count=int(values.size),
                mean=float(values.mean()),
                median=float(med),
                q1=float(q1),
                q3=float(q3),
                min=float(values.min()),
                max=float(values.max()),
            )
        )
    return SectorStats(rows)


def income_bands(pois: PoiTable) -> tuple[float, float, np.ndarray]:
    """(low_cutoff, high_cutoff, band labels) with bands in {high, low, middle}."""
    incomes = pois.incomes()
    low_cut = nearest_rank_percentile(incomes, 0.2)
    high_cut = nearest_rank_percentile(incomes, 0.8)
    bands = np.where(
        incomes >= high_cut, "high", np.where(incomes <= low_cut, "low", "middle")
    )
    return low_cut, high_cut, bands


def _band_summary(values: np.ndarray) -> BandSummary:
    if values.size == 0:
        return BandSummary(count=0, mean=None, median=None)
    return BandSummary(
        count=int(values.size),
        mean=float(values.mean()),
        median=float(np.median(values)),
    )


def income_analysis(theta, pois: PoiTable) -> IncomeSplit:
    """Per-sector threshold-vs-income regression plus high/low-band summaries."""
    theta = _check_alignment(theta, pois)
    incomes = pois.incomes()
    if np.unique(incomes).size < 2:
        raise ValueError("analysis: income analysis needs >= 2 distinct incomes")
    low_cut, high_cut, bands = income_bands(pois)
    sectors = np.array(pois.sectors())
    rows = []
    for sector in SECTORS:
        in_sector = sectors == sector
        if not in_sector.any():
            continue
        rows.append(
            SectorIncomeRow(
                sector=sector,
                slope=ols_slope(incomes[in_sector], theta[in_sector]),
                high=_band_summary(theta[in_sector & (bands == "high")]),
                low=_band_summary(theta[in_sector & (bands == "low")]),
            )
        )
    return IncomeSplit(low_cutoff=low_cut, high_cutoff=high_cut, per_sector=rows)


def _sector_shares(sector_list: Sequence[str]) -> dict[str, float]:
    total = len(sector_list)
    if total == 0:
        raise ValueError("analysis: share vector over zero POIs")
    return {
        sector: 100.0 * sector_list.count(sector) / total for sector in SECTORS
    }


def multiplier_composition(
    scenarios: Sequence[MultiplierScenario], pois: PoiTable
) -> CompositionReport:
    """Sector shares of each scenario's seed set against the whole-table baseline.

    All ten sectors are carried through with their true (possibly zero) shares.
    """
    baseline = _sector_shares(pois.sectors())
    scenario_shares = {}
    deltas = {}
    for scenario in scenarios:
        members = [pois[p].sector for p in scenario.omega_poi_ids]
        shares = _sector_shares(members)
        scenario_shares[scenario.gamma] = shares
        deltas[scenario.gamma] = {
            sector: shares[sector] - baseline[sector] for sector in SECTORS
        }
    return CompositionReport(
        sectors=SECTORS,
        baseline_shares=baseline,
        scenario_shares=scenario_shares,
        share_deltas=deltas,
    )


def multiplier_by_income(
    scenarios: Sequence[MultiplierScenario], pois: PoiTable
) -> dict[float, dict[str, dict[str, int]]]:
    """Multiplier counts per sector within the high and low income bands.

    Returns {gamma: {"high": {sector: count}, "low": {sector: count}}}; only
    sectors with at least one multiplier in the band are listed.
    """
    _, _, bands = income_bands(pois)
    out: dict[float, dict[str, dict[str, int]]] = {}
    for scenario in scenarios:
        tallies = {"high": {}, "low": {}}
        for poi_id in scenario.omega_poi_ids:
            row = pois.index[poi_id]
            band = bands[row]
            if band in tallies:
                sector = pois.records[row].sector
                tallies[band][sector] = tallies[band].get(sector, 0) + 1
        out[scenario.gamma] = tallies
    return out
