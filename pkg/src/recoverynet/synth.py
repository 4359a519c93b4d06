"""Synthetic scenario generation.

Produces fully-specified test scenarios (POI table, flows, planted per-node
thresholds, and a recovery panel simulated from those thresholds) so every
pipeline stage can be exercised without proprietary mobility data. The graph
is a directed preferential-attachment model: each new node draws m distinct
targets with probability proportional to in-degree + 1, and each resulting
edge's direction is randomized, which yields the heavy-tailed degree profile
typical of visitation networks. Panels are produced by the cascade model
itself, so threshold calibration has a realizable optimum by construction.

All sampling derives from one integer-seeded numpy generator; a scenario is
byte-reproducible from its manifest.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from recoverynet import diffusion, network
from recoverynet.errors import ConfigError
from recoverynet.ingest import (
    SECTORS,
    FlowRecord,
    PoiRecord,
    PoiTable,
    RecoveryPanel,
)

# default sector mix for generated tables (shares of POIs per sector)
DEFAULT_SECTOR_MIX = {
    "retail": 0.4278,
    "finance": 0.1020,
    "services": 0.1686,
    "manufacturing": 0.1354,
    "transport": 0.1129,
    "wholesale": 0.0289,
    "public_administration": 0.0185,
    "agriculture": 0.0059,
    "construction": 0.0,
    "mining": 0.0,
}

# planted threshold means: agriculture/services/retail depend strongly on
# neighbors, wholesale/finance recover more independently
DEFAULT_THETA_MEANS = {
    "retail": 0.45,
    "finance": 0.25,
    "services": 0.50,
    "manufacturing": 0.35,
    "transport": 0.30,
    "wholesale": 0.20,
    "public_administration": 0.50,
    "agriculture": 0.55,
    "construction": 0.40,
    "mining": 0.40,
}

# coordinate bounding box for uniform placement (lat, lon)
BBOX = (29.0, 30.5, -91.5, -89.5)


@dataclass(frozen=True)
class SynthParams:
    n_pois: int = 100
    m: int = 3
    weight_mu: float = 2.5
    weight_sigma: float = 1.0
    sector_mix: dict = field(default_factory=lambda: dict(DEFAULT_SECTOR_MIX))
    block_groups: int | None = None  # None -> max(1, n_pois // 25)
    income_mu: float = float(np.log(60000.0))
    income_sigma: float = 0.35
    theta_means: dict = field(default_factory=lambda: dict(DEFAULT_THETA_MEANS))
    theta_noise: float = 0.1
    seed_fraction: float = 0.1
    horizon: int = 18
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_pois < 1:
            raise ConfigError("synth: n_pois must be >= 1")
        if self.m < 1:
            raise ConfigError("synth: m must be >= 1")
        if self.n_pois > 1 and self.m >= self.n_pois:
            raise ConfigError("synth: m must be smaller than n_pois")
        if set(self.sector_mix) != set(SECTORS):
            raise ConfigError("synth: sector_mix must cover exactly the 10 sectors")
        if any(v < 0 for v in self.sector_mix.values()):
            raise ConfigError("synth: sector_mix shares must be >= 0")
        if abs(sum(self.sector_mix.values()) - 1.0) > 1e-9:
            raise ConfigError("synth: sector_mix must sum to 1")
        if set(self.theta_means) != set(SECTORS):
            raise ConfigError("synth: theta_means must cover exactly the 10 sectors")
        if not 0 <= self.seed_fraction <= 1:
            raise ConfigError("synth: seed_fraction must be in [0, 1]")
        if self.horizon < 1:
            raise ConfigError("synth: horizon must be >= 1")
        if self.theta_noise < 0:
            raise ConfigError("synth: theta_noise must be >= 0")


@dataclass
class Scenario:
    pois: PoiTable
    flows: list[FlowRecord]
    theta_true: np.ndarray
    panel: RecoveryPanel
    seeds: np.ndarray  # node indices active at week 0 of the generating cascade
    params: SynthParams


def _attachment_edges(n: int, m: int, rng) -> list[tuple[int, int]]:
    """Directed preferential-attachment edge list.

    Nodes m..n-1 each draw m distinct targets among earlier nodes with
    probability proportional to in-degree + 1; each edge's direction is then
    randomized. Unordered pairs are drawn at most once, so the result has no
    self-loops and no parallel or reciprocal duplicates.
    """
    edges: list[tuple[int, int]] = []
    if n < 2:
        return edges
    in_deg = np.zeros(n, dtype=np.float64)
    for v in range(m, n):
        weights = in_deg[:v] + 1.0
        targets = []
        draws = min(m, v)
        for _ in range(draws):
            cumulative = np.cumsum(weights)
            r = rng.random() * cumulative[-1]
            pick = int(np.searchsorted(cumulative, r, side="right"))
            pick = min(pick, v - 1)
            targets.append(pick)
            weights[pick] = 0.0
        for target in targets:
            if rng.random() < 0.5:
                src, dst = v, target
            else:
                src, dst = target, v
            edges.append((src, dst))
            in_deg[dst] += 1.0
    return edges


def generate_scenario(params: SynthParams) -> Scenario:
    """Generate a deterministic scenario from params.

    The recovery panel is the cascade of the planted thresholds from the
    sampled seed set: panel week t equals the simulated state after t weeks,
    for t = 1..horizon.
    """
    rng = np.random.default_rng(params.rng_seed)
    n = params.n_pois

    sector_names = list(SECTORS)
    mix = np.array([params.sector_mix[s] for s in sector_names])
    sectors = rng.choice(len(sector_names), size=n, p=mix / mix.sum())

    lat = rng.uniform(BBOX[0], BBOX[1], size=n)
    lon = rng.uniform(BBOX[2], BBOX[3], size=n)

    n_bg = params.block_groups if params.block_groups is not None else max(1, n // 25)
    bg_income = rng.lognormal(params.income_mu, params.income_sigma, size=n_bg)
    bg_of = rng.integers(0, n_bg, size=n)

    edges = _attachment_edges(n, params.m, rng)
    weights = rng.lognormal(params.weight_mu, params.weight_sigma, size=len(edges))

    means = np.array([params.theta_means[sector_names[s]] for s in sectors])
    theta_true = np.clip(rng.normal(means, params.theta_noise), 0.0, 1.0)

    n_seeds = int(round(params.seed_fraction * n))
    seeds = np.sort(rng.choice(n, size=n_seeds, replace=False)) if n_seeds else np.array([], dtype=np.int64)

    width = max(4, len(str(n - 1)))
    poi_ids = [f"P{i:0{width}d}" for i in range(n)]
    records = [
        PoiRecord(
            poi_id=poi_ids[i],
            sector=sector_names[sectors[i]],
            latitude=float(lat[i]),
            longitude=float(lon[i]),
            block_group_id=f"BG{bg_of[i]:04d}",
            median_income=float(bg_income[bg_of[i]]),
        )
        for i in range(n)
    ]
    pois = PoiTable(records)
    flows = [
        FlowRecord(poi_ids[s], poi_ids[d], float(w))
        for (s, d), w in zip(edges, weights)
    ]

    net = network.build_network(pois, flows)
    trace = diffusion.simulate(net, seeds, theta_true, params.horizon)
    panel = RecoveryPanel(
        poi_ids=tuple(poi_ids),
        horizon=params.horizon,
        states=trace.states[1:].T.copy(),
    )
    return Scenario(
        pois=pois,
        flows=flows,
        theta_true=theta_true,
        panel=panel,
        seeds=seeds.astype(np.int64),
        params=params,
    )


def params_to_dict(params: SynthParams) -> dict:
    return {
        "n_pois": params.n_pois,
        "m": params.m,
        "weight_mu": params.weight_mu,
        "weight_sigma": params.weight_sigma,
        "sector_mix": dict(params.sector_mix),
        "block_groups": params.block_groups,
        "income_mu": params.income_mu,
        "income_sigma": params.income_sigma,
        "theta_means": dict(params.theta_means),
        "theta_noise": params.theta_noise,
        "seed_fraction": params.seed_fraction,
        "horizon": params.horizon,
        "rng_seed": params.rng_seed,
    }


def params_from_dict(data: dict) -> SynthParams:
    return SynthParams(**data)


def scenario_file_texts(scenario: Scenario) -> dict[str, str]:
    """File name -> exact file content for a scenario directory."""
    from recoverynet.ingest import (
        flows_csv_text,
        pois_csv_text,
        recovery_csv_text,
        thresholds_csv_text,
    )

    manifest = {
        "params": params_to_dict(scenario.params),
        "rng_seed": scenario.params.rng_seed,
        "seed_poi_ids": [scenario.pois.poi_ids[i] for i in scenario.seeds],
    }
    return {
        "pois.csv": pois_csv_text(scenario.pois),
        "flows.csv": flows_csv_text(scenario.flows),
        "recovery.csv": recovery_csv_text(scenario.panel),
        "theta_true.csv": thresholds_csv_text(scenario.pois.poi_ids, scenario.theta_true),
        "manifest.json": json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    }


def write_scenario(scenario: Scenario, directory) -> list[str]:
    """Write pois.csv, flows.csv, recovery.csv, theta_true.csv, manifest.json.

    Files round-trip losslessly through the loaders, and regenerating from the
    manifest reproduces the directory byte-for-byte.
    """
    os.makedirs(directory, exist_ok=True)
    texts = scenario_file_texts(scenario)
    for name, text in texts.items():
        with open(os.path.join(directory, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return sorted(texts)


# flat key/value parsing for generator parameter files


_SCALAR_KEYS = {
    "n_pois": int,
    "m": int,
    "weight_mu": float,
    "weight_sigma": float,
    "block_groups": int,
    "income_mu": float,
    "income_sigma": float,
    "theta_noise": float,
    "seed_fraction": float,
    "horizon": int,
    "rng_seed": int,
}


def apply_param_overrides(params: SynthParams, kv: dict[str, str]) -> SynthParams:
    """Apply textual key/value overrides to a SynthParams.

    Scalar keys mirror SynthParams fields; per-sector keys `mix_<sector>` and
    `theta_mean_<sector>` override single entries of the mix/mean tables.
    """
    mix = dict(params.sector_mix)
    means = dict(params.theta_means)
    scalars: dict = {}
    for key, text in kv.items():
        try:
            if key in _SCALAR_KEYS:
                scalars[key] = _SCALAR_KEYS[key](text)
            elif key.startswith("mix_") and key[4:] in SECTORS:
                mix[key[4:]] = float(text)
            elif key.startswith("theta_mean_") and key[11:] in SECTORS:
                means[key[11:]] = float(text)
            else:
                raise ConfigError(f"synth: unknown parameter key {key!r}")
        except ValueError:
            raise ConfigError(f"synth: key {key!r} has malformed value {text!r}")
    for value in scalars.values():
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError("synth: non-finite parameter value")
    return replace(params, sector_mix=mix, theta_means=means, **scalars)


def load_params(path) -> SynthParams:
    """Parse a flat key/value generator parameter file over the defaults."""
    from recoverynet.ingest import _parse_kv_file  # shared parser

    return apply_param_overrides(SynthParams(), _parse_kv_file(path))
