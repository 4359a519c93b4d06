"""Budgeted recovery-multiplier seed selection.

Given calibrated thresholds, pick the seed set of size k = round(gamma * |V|)
that maximizes the number of recovered nodes at the horizon. Thresholds are
frozen here; the search never re-fits them. An exhaustive oracle is provided
for desk-scale verification.

Rounding note: k uses Python's round(), i.e. banker's rounding at exact .5
ties (so 10% of 3405 nodes is a budget of 340). The rule is recorded in run
manifests.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass

import numpy as np

from recoverynet import diffusion, ga_core
from recoverynet.ingest import StudyConfig
from recoverynet.network import DependencyNetwork

ORACLE_GUARD = 10**6


@dataclass
class MultiplierScenario:
    gamma: float
    k: int
    omega: np.ndarray  # sorted node indices, |omega| = k
    omega_poi_ids: tuple[str, ...]
    objective_value: int
    history: ga_core.EvolutionHistory | None
    universe_digest: str | None  # identifies the network the indices refer to


@dataclass
class OverlapReport:
    gammas: tuple[float, ...]
    intersection: tuple[str, ...]  # poi_ids common to all scenarios
    pairwise: dict[tuple[float, float], int]


def budget_size(gamma: float, order: int) -> int:
    if not 0 < gamma <= 1:
        raise ValueError(f"multiplier: gamma {gamma} outside (0, 1]")
    k = int(round(gamma * order))
    if k < 1:
        raise ValueError(
            f"multiplier: budget round({gamma} * {order}) is below 1 seed"
        )
    return k


def universe_digest(net: DependencyNetwork) -> str:
    payload = "\n".join(net.poi_ids).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def multiplier_objective(net: DependencyNetwork, theta, omega, horizon: int) -> int:
    """Recovered-node count at the horizon when `omega` is seeded."""
    return diffusion.final_active_count(diffusion.simulate(net, omega, theta, horizon))


def optimize_multipliers(
    net: DependencyNetwork,
    theta,
    gamma: float,
    config: StudyConfig,
    rng_seed: int | None = None,
    threads: int = 1,
) -> MultiplierScenario:
    """GA search for the budget-k seed set maximizing final recovery."""
    k = budget_size(gamma, net.order)
    theta = diffusion.validate_theta(net, theta)
    horizon = config.horizon

    def fitness(omega):
        return float(multiplier_objective(net, theta, omega, horizon))

    problem = ga_core.GaProblem(
        operators=ga_core.subset_operators(net.order, k),
        fitness=fitness,
    )
    params = ga_core.GaParams(
        population_size=config.ga_population,
        max_iterations=config.ga_iterations,
        rng_seed=config.rng_seed if rng_seed is None else rng_seed,
    )
    omega, history = ga_core.evolve(problem, params, threads=threads)
    omega = np.sort(omega.astype(np.int64))
    value = multiplier_objective(net, theta, omega, horizon)
    return MultiplierScenario(
        gamma=float(gamma),
        k=k,
        omega=omega,
        omega_poi_ids=tuple(net.poi_ids[i] for i in omega),
        objective_value=int(value),
        history=history,
        universe_digest=universe_digest(net),
    )


def exhaustive_optimum(
    net: DependencyNetwork, theta, k: int, horizon: int
) -> tuple[np.ndarray, int]:
    """Evaluate every k-subset; returns the lexicographically smallest argmax.

    Guarded at C(order, k) <= 10^6 evaluations.
    """
    if not 1 <= k <= net.order:
        raise ValueError(f"multiplier: k {k} outside 1..{net.order}")
    total = math.comb(net.order, k)
    if total > ORACLE_GUARD:
        raise ValueError(
            f"multiplier: C({net.order}, {k}) = {total} exceeds the oracle guard {ORACLE_GUARD}"
        )
    theta = diffusion.validate_theta(net, theta)
    best_subset: tuple[int, ...] | None = None
    best_value = -1
    for subset in itertools.combinations(range(net.order), k):
        value = multiplier_objective(net, theta, subset, horizon)
        if value > best_value:
            best_subset, best_value = subset, value
    return np.array(best_subset, dtype=np.int64), int(best_value)


def overlap(scenarios) -> OverlapReport:
    """Intersection across all scenarios' seed sets plus pairwise sizes."""
    scenarios = list(scenarios)
    if len(scenarios) < 2:
        raise ValueError("multiplier: overlap needs at least 2 scenarios")
    digests = {s.universe_digest for s in scenarios if s.universe_digest is not None}
    if len(digests) > 1:
        raise ValueError("multiplier: scenarios come from different networks")
    sets = [frozenset(s.omega_poi_ids) for s in scenarios]
    common = frozenset.intersection(*sets)
    pairwise = {}
    for i in range(len(scenarios)):
        for j in range(i + 1, len(scenarios)):
            pairwise[(scenarios[i].gamma, scenarios[j].gamma)] = len(sets[i] & sets[j])
    return OverlapReport(
        gammas=tuple(s.gamma for s in scenarios),
        intersection=tuple(sorted(common)),
        pairwise=pairwise,
    )
