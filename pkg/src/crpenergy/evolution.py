"""Steady-state evolutionary loop shared by the GA (GRH vectors) and GP (trees).

Each step draws three distinct individuals, breeds the better two, mutates
the child with a fixed probability and lets it replace the worst of the
three.  Fitness is the total episode energy over a training set (lower is
better).
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from crpenergy import gp, grh, seeding
from crpenergy.errors import BudgetTooSmall, InfeasibleGenomeEvaluation
from crpenergy.fast import Evaluator
from crpenergy.rules import SCHEMES, GPRule, GRHRule

DEFAULT_MUTATION = {"restricted": 0.3, "unrestricted": 0.1}


@dataclass
class Individual:
    genome: object
    fitness: float
    eval_stamp: int


@dataclass(frozen=True)
class RunConfig:
    population_size: int = 1000
    max_evaluations: int = 50_000
    mutation_probability: float | None = None
    scheme: str = "restricted"
    seed: int = 0
    init_counts: bool = True
    log_interval: int = 500

    def __post_init__(self):
        if self.population_size < 3:
            raise ValueError("population_size must be >= 3")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mutation_probability is None:
            object.__setattr__(self, "mutation_probability", DEFAULT_MUTATION[self.scheme])
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation_probability must lie in [0, 1]")

    def as_dict(self):
        return asdict(self)


@dataclass
class ConvergenceLog:
    samples: list = field(default_factory=list)

    def add(self, evaluations, best_fitness, genome=None):
        if self.samples and evaluations <= self.samples[-1][0]:
            raise ValueError("evaluation counts must increase strictly")
        self.samples.append((evaluations, best_fitness, genome))

    @property
    def evaluations(self):
        return [s[0] for s in self.samples]

    @property
    def best(self):
        return [s[1] for s in self.samples]

    def to_csv(self):
        rows = ["evaluations,best_fitness"]
        rows += [f"{e},{f!r}" for e, f, _ in self.samples]
        return "\n".join(rows) + "\n"


# -- representations ----------------------------------------------------------


class GPRepresentation:
    name = "gp"

    def __init__(self, max_depth=gp.MAX_DEPTH):
        self.max_depth = max_depth

    def random(self, rng):
        return gp.random_tree(rng, self.max_depth)

    def crossover(self, a, b, rng):
        return gp.crossover(a, b, rng, self.max_depth)

    def mutate(self, g, rng):
        return gp.mutate(g, rng, self.max_depth)

    def to_pf(self, g):
        return GPRule(g)

    def dumps(self, g):
        return gp.to_sexpr(g) + "\n"

    def loads(self, text):
        return gp.parse_sexpr(text.strip())


class GARepresentation:
    name = "grh-ga"

    def __init__(self, mutate_all_genes=False):
        self.mutate_all_genes = mutate_all_genes

    def random(self, rng):
        return grh.random_params(rng)

    def crossover(self, a, b, rng):
        return grh.ga_crossover(a, b, rng)

    def mutate(self, g, rng):
        return grh.ga_mutate(g, rng, self.mutate_all_genes)

    def to_pf(self, g):
        return GRHRule(g)

    def dumps(self, g):
        return grh.format_params(g)

    def loads(self, text):
        return grh.parse_params(text)


REPRESENTATIONS = {"gp": GPRepresentation, "grh-ga": GARepresentation}


def genome_pf(genome):
    if isinstance(genome, gp.Node):
        return GPRule(genome)
    return GRHRule(genome)


# -- fitness ------------------------------------------------------------------


def fitness(genome, train_set, scheme="restricted", energy_config=None):
    """Total episode energy of ``genome``'s priority function over ``train_set``.

    ``train_set`` is a list of instances or a prepared :class:`Evaluator`.
    """
    ev = train_set if isinstance(train_set, Evaluator) else Evaluator(train_set, energy_config)
    res = ev.run(genome_pf(genome), scheme)
    if not res.ok:
        bad = next(i for i, st in enumerate(res.status) if st != 0)
        raise InfeasibleGenomeEvaluation(ev.instances[bad].id)
    return res.total


class _Counter:
    def __init__(self, fn):
        self.fn = fn
        self.count = 0

    def __call__(self, genome):
        self.count += 1
        return self.fn(genome)


def steady_state_step(population, rng, representation, evaluate, mutation_probability, op_rng=None, stamp=0):
    """One replace-worst-of-three step; returns the index that was replaced.

    Ties keep the sampling order: among equal fitnesses the earlier-drawn
    individual counts as better.
    """
    op_rng = rng if op_rng is None else op_rng
    picks = [int(i) for i in rng.choice(len(population), size=3, replace=False)]
    ranked = sorted(picks, key=lambda i: population[i].fitness)
    first, second, worst = ranked
    child = representation.crossover(population[first].genome, population[second].genome, op_rng)
    if op_rng.random() < mutation_probability:
        child = representation.mutate(child, op_rng)
    population[worst] = Individual(child, evaluate(child), stamp)
    return worst


@dataclass
class EvolutionResult:
    best: Individual
    log: ConvergenceLog
    evaluations: int
    runtime: float
    population: list


def evolve(config, representation, train_set, energy_config=None):
    """Run the steady-state loop until ``config.max_evaluations`` fitness calls."""
    if config.init_counts and config.max_evaluations < config.population_size:
        raise BudgetTooSmall(
            f"max_evaluations={config.max_evaluations} < population_size={config.population_size}"
        )
    t0 = time.perf_counter()
    ev = train_set if isinstance(train_set, Evaluator) else Evaluator(train_set, energy_config)
    evaluate = _Counter(lambda g: fitness(g, ev, config.scheme))
    init_rng = seeding.stream(config.seed, "init")
    sel_rng = seeding.stream(config.seed, "selection")
    op_rng = seeding.stream(config.seed, "operators")

    population = []
    for _ in range(config.population_size):
        g = representation.random(init_rng)
        population.append(Individual(g, evaluate(g), evaluate.count))
    offset = 0 if config.init_counts else evaluate.count

    def spent():
        return evaluate.count - offset

    best = min(population, key=lambda ind: ind.fitness)
    log = ConvergenceLog()
    log.add(spent(), best.fitness, best.genome)
    while spent() < config.max_evaluations:
        idx = steady_state_step(
            population,
            sel_rng,
            representation,
            evaluate,
            config.mutation_probability,
            op_rng,
            stamp=evaluate.count + 1,
        )
        if population[idx].fitness < best.fitness:
            best = population[idx]
        if spent() % config.log_interval == 0 or spent() == config.max_evaluations:
            log.add(spent(), best.fitness, best.genome)
    return EvolutionResult(best, log, evaluate.count, time.perf_counter() - t0, population)
