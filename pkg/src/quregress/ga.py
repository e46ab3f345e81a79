"""Genetic search over compact circuit architectures.

Steady-state scheme: the ``elites`` best individuals survive unchanged (with
their fitness), the rest of the population is bred from elite parents by
single-point crossover followed by fractional mutation.  Fitness is -R^2 on
the training split after a short Adam run, so lower is better.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .benchmarks import RegressionDataset
from .circuits import Chromosome, decode_chromosome, random_chromosome
from .errors import DegenerateTargetError, InvalidArgument
from .training import Metrics, TrainConfig, train

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    population: int = 20
    generations: int = 15
    elites: int = 4
    mutation_genome_fraction: float = 0.10
    mutation_individual_prob: float = 0.20
    n_gates: int = 20
    n_qubits: int = 1
    fitness_epochs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise InvalidArgument("population must be >= 2")
        if not 1 <= self.elites < self.population:
            raise InvalidArgument("need 1 <= elites < population")
        if self.generations < 0 or self.fitness_epochs < 0:
            raise InvalidArgument("generations and fitness_epochs must be >= 0")
        for name in ("mutation_genome_fraction", "mutation_individual_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1]")
        if self.n_gates < 1 or self.n_qubits < 1:
            raise InvalidArgument("n_gates and n_qubits must be >= 1")


@dataclass
class GAResult:
    best_chromosome: Chromosome
    best_params: np.ndarray
    best_fitness_history: list[float]
    final_metrics: Metrics
    train_metrics: Metrics | None = None
    n_trainings: int = 0
    config: GAConfig | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "best_chromosome": self.best_chromosome.to_json(),
            "best_params": [float(v) for v in self.best_params],
            "best_fitness_history": [float(v) for v in self.best_fitness_history],
            "final_metrics": self.final_metrics.to_json(),
            "train_metrics": self.train_metrics.to_json() if self.train_metrics else None,
            "n_trainings": self.n_trainings,
            "config": asdict(self.config) if self.config else None,
        }


def crossover_single_point(p1: Chromosome, p2: Chromosome, rng, cut: int | None = None) -> Chromosome:
    if len(p1.genes) != len(p2.genes) or p1.n_qubits != p2.n_qubits:
        raise InvalidArgument("parents must share gene length and qubit count")
    n = len(p1.genes)
    if cut is None:
        cut = int(rng.integers(1, n)) if n > 1 else 0
    elif not 0 < cut < n:
        raise InvalidArgument(f"cut point must lie in 1..{n - 1}")
    return Chromosome(p1.genes[:cut] + p2.genes[cut:], p1.n_gates, p1.n_qubits)


def mutate(c: Chromosome, config: GAConfig, rng) -> Chromosome:
    if rng.random() >= config.mutation_individual_prob:
        return c
    n = len(c.genes)
    k = min(n, math.ceil(config.mutation_genome_fraction * n))
    if k == 0:
        return c
    positions = rng.choice(n, size=k, replace=False)
    genes = np.array(c.genes, dtype=np.int64)
    genes[positions] = rng.integers(0, c.segment_bounds()[positions])
    return Chromosome(tuple(int(g) for g in genes), c.n_gates, c.n_qubits)


def _individual_seed(seed: int, generation: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, generation, index]).generate_state(1)[0])


@dataclass
class _Scored:
    chromosome: Chromosome
    fitness: float
    train_seed: int

    def key(self):
        return (self.fitness, self.chromosome.genes)


def _fitness(chromosome, dataset, train_config, epochs, seed) -> float:
    circuit = decode_chromosome(chromosome)
    result = train(circuit, dataset, train_config.replace(epochs=epochs, seed=seed))
    return -result.train_metrics.r2


def run_ga(config: GAConfig, dataset: RegressionDataset,
           train_config: TrainConfig = TrainConfig()) -> GAResult:
    if np.all(dataset.y_train == dataset.y_train[0]):
        raise DegenerateTargetError("training target is constant")
    rng = np.random.default_rng([config.seed, 0x6A])
    n_trainings = 0

    def evaluate(chromosomes, generation, carried=()):
        nonlocal n_trainings
        known = {s.chromosome.genes: s for s in carried}
        scored = []
        for i, c in enumerate(chromosomes):
            hit = known.get(c.genes)
            if hit is None:
                seed = _individual_seed(config.seed, generation, i)
                fit = _fitness(c, dataset, train_config, config.fitness_epochs, seed)
                n_trainings += 1
                hit = known[c.genes] = _Scored(c, fit, seed)
            scored.append(hit)
        return scored

    population = evaluate([random_chromosome(config.n_gates, config.n_qubits, rng)
                           for _ in range(config.population)], 0)
    population.sort(key=_Scored.key)
    history = [population[0].fitness]

    for gen in range(1, config.generations + 1):
        elites = population[: config.elites]
        offspring = []
        for _ in range(config.population - config.elites):
            if len(elites) > 1:
                a, b = rng.choice(len(elites), size=2, replace=False)
            else:
                a = b = 0
            child = crossover_single_point(elites[a].chromosome, elites[b].chromosome, rng)
            offspring.append(mutate(child, config, rng))
        population = elites + evaluate(offspring, gen, carried=elites)
        population.sort(key=_Scored.key)
        history.append(population[0].fitness)
        log.debug("generation %d best fitness %.5f", gen, history[-1])

    best = population[0]
    circuit = decode_chromosome(best.chromosome)
    final = train(circuit, dataset, train_config.replace(seed=best.train_seed))
    return GAResult(
        best_chromosome=best.chromosome,
        best_params=final.final_params,
        best_fitness_history=history,
        final_metrics=final.full_metrics,
        train_metrics=final.train_metrics,
        n_trainings=n_trainings,
        config=config,
    )
