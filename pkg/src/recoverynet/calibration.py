"""Threshold calibration against an observed recovery panel.

Fits one activation threshold per node by minimizing the mean absolute error
between simulated and observed weekly recovery states. Seeds are the nodes
observed recovered at week 1; the error averages weeks 1..T over all nodes,
excluding the week-0 seed state, so the denominator is exactly |V| * T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from recoverynet import diffusion, ga_core
from recoverynet.diffusion import DiffusionTrace
from recoverynet.ingest import RecoveryPanel, StudyConfig
from recoverynet.network import DependencyNetwork


@dataclass
class ThresholdReport:
    """Histogram of positive thresholds plus the count of exact zeros."""

    zero_count: int
    bin_width: float
    bins: list[tuple[float, float, int]]  # (low, high, count), low-inclusive


@dataclass
class CalibrationResult:
    theta_star: np.ndarray
    mae_star: float
    baseline_mae: float
    history: ga_core.EvolutionHistory
    seed_set_used: np.ndarray


def derive_seeds(panel: RecoveryPanel) -> np.ndarray:
    """Node indices observed recovered at week 1 (panel row order)."""
    return np.flatnonzero(panel.states[:, 0] == 1).astype(np.int64)


def mae(trace: DiffusionTrace, panel: RecoveryPanel) -> float:
    """Mean absolute error over weeks 1..T; the week-0 seed state is excluded."""
    n, horizon = panel.states.shape
    if trace.horizon != horizon or trace.states.shape[1] != n:
        raise ValueError(
            f"calibration: trace is {trace.states.shape[1]} nodes x {trace.horizon} weeks, "
            f"panel is {n} x {horizon}"
        )
    simulated = trace.states[1:]  # (T, n)
    observed = panel.states.T  # (T, n)
    return int(np.count_nonzero(simulated != observed)) / (n * horizon)


def score_thresholds(
    net: DependencyNetwork, panel: RecoveryPanel, theta, seeds=None
) -> float:
    """MAE of one simulation; seeds default to the week-1 observed recoveries."""
    if seeds is None:
        seeds = derive_seeds(panel)
    return mae(diffusion.simulate(net, seeds, theta, panel.horizon), panel)


def random_baseline(
    net: DependencyNetwork,
    panel: RecoveryPanel,
    seeds,
    samples: int = 500,
    rng_seed: int = 0,
) -> float:
    """Mean MAE of `samples` i.i.d. uniform-[0,1] threshold vectors."""
    if samples < 1:
        raise ValueError("calibration: samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    total = 0.0
    for _ in range(samples):
        theta = rng.random(net.order)
        total += mae(diffusion.simulate(net, seeds, theta, panel.horizon), panel)
    return total / samples


def calibrate_thresholds(
    net: DependencyNetwork,
    panel: RecoveryPanel,
    config: StudyConfig,
    threads: int = 1,
) -> CalibrationResult:
    """GA threshold fit plus the randomized baseline.

    The panel may cover more POIs than the (filtered) network; it is aligned
    to the network's node order first. Fitness is the negated MAE, so reported
    values are un-negated.
    """
    aligned = panel.restricted_to(net.poi_ids)
    seeds = derive_seeds(aligned)
    horizon = aligned.horizon

    def fitness(theta):
        return -mae(diffusion.simulate(net, seeds, theta, horizon), aligned)

    problem = ga_core.GaProblem(
        operators=ga_core.real_vector_operators(net.order),
        fitness=fitness,
    )
    params = ga_core.GaParams(
        population_size=config.ga_population,
        max_iterations=config.ga_iterations,
        rng_seed=config.rng_seed,
    )
    theta_star, history = ga_core.evolve(problem, params, threads=threads)
    mae_star = -max(r.best_fitness for r in history.records)
    baseline = random_baseline(
        net, aligned, seeds, samples=config.baseline_samples, rng_seed=config.rng_seed
    )
    return CalibrationResult(
        theta_star=theta_star,
        mae_star=float(mae_star),
        baseline_mae=float(baseline),
        history=history,
        seed_set_used=seeds,
    )


def threshold_report(theta, bin_width: float = 0.05) -> ThresholdReport:
    """Distribution of positive thresholds; zeros are counted separately.

    Bin edges are decimal multiples of bin_width; float fuzz within 1e-9 of an
    edge is pushed to the upper bin so e.g. 0.3 lands in [0.30, 0.35).
    """
    if not 0 < bin_width <= 1:
        raise ValueError("calibration: bin_width must be in (0, 1]")
    theta = np.asarray(theta, dtype=np.float64)
    zero_count = int(np.count_nonzero(theta == 0.0))
    positive = theta[theta > 0]
    nbins = int(np.ceil(round(1.0 / bin_width, 9)))
    counts = [0] * nbins
    for value in positive:
        idx = min(int(np.floor(value / bin_width + 1e-9)), nbins - 1)
        counts[idx] += 1
    bins = [
        (i * bin_width, min((i + 1) * bin_width, 1.0), counts[i]) for i in range(nbins)
    ]
    return ThresholdReport(zero_count=zero_count, bin_width=bin_width, bins=bins)
