"""Generic genetic-algorithm engine.

Shared by threshold calibration (real-vector genomes in [0,1]) and recovery
multiplier selection (fixed-cardinality index subsets). One "iteration" is one
full generation, so a run evaluates fitness population_size * (iterations + 1)
times minus cached elites.

Determinism: every random decision for generation g, child slot i draws from
an RNG stream keyed by (rng_seed, g, i), and fitness is required to be a pure
function of the genome, so results are identical for any evaluation schedule
or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class GaParams:
    population_size: int
    max_iterations: int
    tournament_size: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1 / genome_length
    elitism_count: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("ga: population_size must be >= 2")
        if self.max_iterations < 1:
            raise ValueError("ga: max_iterations must be >= 1")
        if self.tournament_size < 1:
            raise ValueError("ga: tournament_size must be >= 1")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("ga: crossover_rate must be in [0, 1]")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ValueError("ga: mutation_rate must be in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("ga: elitism_count must be in [0, population_size)")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float


@dataclass
class EvolutionHistory:
    records: list[GenerationRecord] = field(default_factory=list)

    def best_curve(self) -> list[float]:
        return [r.best_fitness for r in self.records]

    def rows(self):
        for r in self.records:
            yield (r.generation, r.best_fitness, r.mean_fitness)


@dataclass(frozen=True)
class GaOperators:
    """Genome-type-specific operator bundle (no objective attached)."""

    genome_length: int
    random_genome: Callable  # (rng) -> genome
    crossover: Callable  # (a, b, rng) -> child
    mutate: Callable  # (genome, rate, rng) -> genome
    repair: Callable  # (genome) -> genome


@dataclass(frozen=True)
class GaProblem:
    operators: GaOperators
    fitness: Callable  # (genome) -> float, higher is better


def _stream(seed: int, generation: int, individual: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(generation, individual))
    )


def _evaluate(fitness, genomes, threads: int) -> list[float]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return [float(f) for f in pool.map(fitness, genomes)]
    return [float(fitness(g)) for g in genomes]


def _tournament(rng, fits: Sequence[float], size: int) -> int:
    contestants = rng.integers(0, len(fits), size=size)
    best = int(contestants[0])
    for c in contestants[1:]:
        c = int(c)
        if fits[c] > fits[best]:
            best = c
    return best


def evolve(problem: GaProblem, params: GaParams, threads: int = 1):
    """Run the GA; returns (best_genome, EvolutionHistory).

    Tournament selection, single-child crossover, per-gene mutation, repair,
    elitism. The best-ever genome is tracked explicitly (first achiever wins
    ties) and the per-generation best is monotone whenever elitism_count >= 1.
    """
    ops = problem.operators
    mut_rate = (
        params.mutation_rate
        if params.mutation_rate is not None
        else 1.0 / max(ops.genome_length, 1)
    )

    population = []
    for i in range(params.population_size):
        rng = _stream(params.rng_seed, 0, i)
        population.append(ops.repair(ops.random_genome(rng)))
    fits = _evaluate(problem.fitness, population, threads)

    best_idx = int(np.argmax(fits))
    best_genome, best_fit = population[best_idx], fits[best_idx]
    history = EvolutionHistory(
        [GenerationRecord(0, float(max(fits)), float(np.mean(fits)))]
    )

    for gen in range(1, params.max_iterations + 1):
        ranked = sorted(range(params.population_size), key=lambda i: (-fits[i], i))
        elite_idx = ranked[: params.elitism_count]
        elites = [population[i] for i in elite_idx]
        elite_fits = [fits[i] for i in elite_idx]

        children = []
        for slot in range(params.population_size - params.elitism_count):
            rng = _stream(params.rng_seed, gen, slot)
            p1 = population[_tournament(rng, fits, params.tournament_size)]
            p2 = population[_tournament(rng, fits, params.tournament_size)]
            if rng.random() < params.crossover_rate:
                child = ops.crossover(p1, p2, rng)
            else:
                child = np.array(p1, copy=True)
            child = ops.repair(ops.mutate(child, mut_rate, rng))
            children.append(child)
        child_fits = _evaluate(problem.fitness, children, threads)

        population = elites + children
        fits = elite_fits + child_fits
        gen_best = int(np.argmax(fits))
        if fits[gen_best] > best_fit:
            best_genome, best_fit = population[gen_best], fits[gen_best]
        history.records.append(
            GenerationRecord(gen, float(max(fits)), float(np.mean(fits)))
        )

    return np.array(best_genome, copy=True), history


def real_vector_operators(length: int) -> GaOperators:
    """Operators for real-valued genomes confined to [0, 1] per gene.

    Random genomes are i.i.d. uniform, crossover swaps genes uniformly,
    mutation resamples flagged genes uniformly in [0, 1]; repair is the
    identity since the operators cannot leave the box.
    """
    if length < 1:
        raise ValueError("ga: genome length must be >= 1")

    def random_genome(rng):
        return rng.random(length)

    def crossover(a, b, rng):
        take_a = rng.random(length) < 0.5
        return np.where(take_a, a, b)

    def mutate(genome, rate, rng):
        flagged = rng.random(length) < rate
        resampled = rng.random(length)
        return np.where(flagged, resampled, genome)

    return GaOperators(
        genome_length=length,
        random_genome=random_genome,
        crossover=crossover,
        mutate=mutate,
        repair=lambda genome: genome,
    )


def subset_operators(universe_size: int, cardinality: int) -> GaOperators:
    """Operators for sorted k-subsets of range(universe_size).

    Crossover keeps the parents' intersection and fills the remainder from
    their symmetric difference uniformly; mutation swaps flagged members for
    uniformly chosen non-members; repair restores cardinality k without
    duplicates.
    """
    n, k = universe_size, cardinality
    if not 1 <= k <= n:
        raise ValueError(f"ga: cardinality {k} outside 1..{n}")

    def random_genome(rng):
        return np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)

    def crossover(a, b, rng):
        set_a = set(a.tolist())
        common = set_a & set(b.tolist())
        need = k - len(common)
        if need:
            pool = sorted(set_a ^ set(b.tolist()))
            for i in rng.choice(len(pool), size=need, replace=False):
                common.add(pool[int(i)])
        return np.fromiter(sorted(common), dtype=np.int64, count=k)

    def mutate(genome, rate, rng):
        flagged = rng.random(k) < rate
        if k == n or not flagged.any():
            return np.array(genome, copy=True)
        out = genome.tolist()
        members = set(out)
        non_members = [i for i in range(n) if i not in members]
        for pos in np.flatnonzero(flagged):
            slot = int(rng.integers(len(non_members)))
            incoming, outgoing = non_members[slot], out[pos]
            non_members[slot] = outgoing
            members.discard(outgoing)
            members.add(incoming)
            out[pos] = incoming
        return np.array(sorted(out), dtype=np.int64)

    def repair(genome):
        values = sorted({int(v) for v in genome})
        if values and (values[0] < 0 or values[-1] >= n):
            raise ValueError("ga: subset genome index out of range")
        if len(values) < k:
            present = set(values)
            for candidate in range(n):
                if candidate not in present:
                    values.append(candidate)
                    if len(values) == k:
                        break
            values.sort()
        return np.array(values[:k], dtype=np.int64)

    return GaOperators(
        genome_length=k,
        random_genome=random_genome,
        crossover=crossover,
        mutate=mutate,
        repair=repair,
    )
