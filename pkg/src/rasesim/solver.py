"""Embedding solvers: greedy placement plus an online genetic algorithm.

Both solvers charge CPU and memory on hosts and bandwidth on links as they
embed each chain, and roll an SFCR's allocations back in full when any of its
placements or routes fails, so a rejected request leaves the network exactly
as it found it.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .catalog import Catalog, SFCRequest
from .errors import RaseSimError
from .routing import NoPathError, Path, shortest_path
from .seeding import derive_seed
from .topology import NetworkSpec, SubstrateNetwork

Chromosome = tuple[str, ...]


class SolverError(RaseSimError):
    stage = "solve"


class EmptyInputError(SolverError):
    """Aggregate asked for on an empty outcome list."""


class InvalidParamsError(SolverError):
    """GA parameters out of range."""


class GeneCountMismatchError(SolverError):
    """Crossover parents have different gene counts."""


class InconsistentSchemeError(SolverError):
    """An embedding scheme contradicts the requests or the substrate."""

    stage = "validate"


@dataclass(frozen=True)
class SfcPlacement:
    """Accepted SFCR: host per chain position plus the routed segments.

    Segments run ingress -> host(v1) -> ... -> host(vk) -> egress host, one
    Path per consecutive pair.
    """

    sfcr_id: str
    hosts: tuple[str, ...]
    segments: tuple[Path, ...]


@dataclass(frozen=True)
class SfcRejection:
    sfcr_id: str
    reason: str


@dataclass(frozen=True)
class EmbeddingScheme:
    """Per-SFCR outcomes in submission order."""

    outcomes: tuple["SfcPlacement | SfcRejection", ...]

    def accepted(self) -> list[SfcPlacement]:
        return [o for o in self.outcomes if isinstance(o, SfcPlacement)]

    def rejected(self) -> list[SfcRejection]:
        return [o for o in self.outcomes if isinstance(o, SfcRejection)]

    def accept_flags(self) -> list[bool]:
        return [isinstance(o, SfcPlacement) for o in self.outcomes]

    def acceptance_ratio(self) -> float:
        return acceptance_ratio(self.accept_flags())


def acceptance_ratio(outcomes: Sequence[bool]) -> float:
    """Accepted count over total count, as an exactly rounded decimal."""
    if len(outcomes) == 0:
        raise EmptyInputError("acceptance ratio of zero outcomes is undefined")
    return float(Fraction(sum(1 for o in outcomes if o), len(outcomes)))


@dataclass(frozen=True)
class Fitness:
    """Joint objective: maximize acceptance ratio, then minimize latency.

    Comparison is lexicographic; a candidate that accepted nothing has no
    latency and ranks below everything with a nonzero acceptance ratio.
    """

    acceptance_ratio: float
    mean_latency_ms: float | None

    def sort_key(self) -> tuple[float, float]:
        latency = -self.mean_latency_ms if self.mean_latency_ms is not None else float("-inf")
        return (self.acceptance_ratio, latency)

    def __lt__(self, other: "Fitness") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "Fitness") -> bool:
        return self.sort_key() <= other.sort_key()

    def __gt__(self, other: "Fitness") -> bool:
        return self.sort_key() > other.sort_key()

    def __ge__(self, other: "Fitness") -> bool:
        return self.sort_key() >= other.sort_key()


def compare_fitness(a: Fitness, b: Fitness) -> int:
    """-1, 0, or 1 as a is worse than, equal to, or better than b."""
    ka, kb = a.sort_key(), b.sort_key()
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


# -- greedy / chromosome embedding -------------------------------------------


class _EmbedFailure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def vnf_cpu_demand(catalog: Catalog, sfcr: SFCRequest, position: int) -> Fraction:
    """CPU charged for one VNF at admission: per-request cost times peak rate."""
    vnf = catalog.get(sfcr.chain[position])
    return Fraction(vnf.cpu_per_request) * Fraction(sfcr.offered_load.peak_rate())


def _embed_sfcr(net, sfcr, catalog, choose_host) -> SfcPlacement:
    """Place and route one SFCR, rolling back all its charges on failure."""
    undo: list[tuple[str, str, Fraction]] = []

    def rollback():
        for kind, key, amount in reversed(undo):
            if kind == "cpu":
                net.release_cpu(key, amount)
            elif kind == "mem":
                net.release_memory(key, amount)
            else:
                net.release_bandwidth(key, amount)

    placed: list[str] = []
    try:
        for position in range(len(sfcr.chain)):
            vnf = catalog.get(sfcr.chain[position])
            cpu_demand = vnf_cpu_demand(catalog, sfcr, position)
            memory_demand = Fraction(vnf.memory_mb)
            host = choose_host(position, cpu_demand, memory_demand)
            if host is None:
                raise _EmbedFailure(f"NoFeasibleHost(position={position})")
            if cpu_demand > 0:
                net.allocate_cpu(host, cpu_demand)
                undo.append(("cpu", host, cpu_demand))
            if memory_demand > 0:
                net.allocate_memory(host, memory_demand)
                undo.append(("mem", host, memory_demand))
            placed.append(host)
        waypoints = [net.spec.ingress_node, *placed, net.spec.egress_host]
        segments: list[Path] = []
        for index in range(len(waypoints) - 1):
            try:
                path = shortest_path(net, waypoints[index], waypoints[index + 1], sfcr.bandwidth_mbps)
            except NoPathError:
                raise _EmbedFailure(f"NoPath(segment={index})") from None
            for link in path.links:
                net.allocate_bandwidth(link, sfcr.bandwidth_mbps)
                undo.append(("bw", link, Fraction(sfcr.bandwidth_mbps)))
            segments.append(path)
        return SfcPlacement(sfcr.sfcr_id, tuple(placed), tuple(segments))
    except _EmbedFailure:
        rollback()
        raise


def _greedy_chooser(net: SubstrateNetwork):
    hosts = sorted(net.host_ids())

    def choose(position, cpu_demand, memory_demand):
        best = None
        best_residual = None
        for host in hosts:
            if net.residual_cpu[host] < cpu_demand or net.residual_memory[host] < memory_demand:
                continue
            residual = net.residual_cpu[host]
            if best_residual is None or residual > best_residual:
                best, best_residual = host, residual
        return best

    return choose


def solve_simple_dijkstra(net: SubstrateNetwork, sfcrs: Sequence[SFCRequest], catalog: Catalog) -> EmbeddingScheme:
    """Greedy solver: max-residual-CPU placement, shortest-path linking.

    SFCRs are processed in submission order. Each VNF goes to the feasible
    host with the most residual CPU (ties to the lowest host id); consecutive
    placements are then linked by bandwidth-filtered shortest paths. The net
    is mutated in place with the accepted chains' charges.
    """
    outcomes: list[SfcPlacement | SfcRejection] = []
    for sfcr in sfcrs:
        try:
            outcomes.append(_embed_sfcr(net, sfcr, catalog, _greedy_chooser(net)))
        except _EmbedFailure as failure:
            outcomes.append(SfcRejection(sfcr.sfcr_id, failure.reason))
    return EmbeddingScheme(tuple(outcomes))


def decode_chromosome(net: SubstrateNetwork, sfcrs: Sequence[SFCRequest], catalog: Catalog,
                      chromosome: Chromosome) -> EmbeddingScheme:
    """Charge a chromosome's placements gene by gene in fixed order.

    An SFCR whose designated host lacks capacity, or whose segments cannot be
    routed, is rejected and rolled back; later SFCRs still embed.
    """
    expected = sum(len(s.chain) for s in sfcrs)
    if len(chromosome) != expected:
        raise GeneCountMismatchError(f"chromosome has {len(chromosome)} genes, requests need {expected}")
    outcomes: list[SfcPlacement | SfcRejection] = []
    offset = 0
    for sfcr in sfcrs:
        genes = chromosome[offset:offset + len(sfcr.chain)]
        offset += len(sfcr.chain)

        def choose(position, cpu_demand, memory_demand, genes=genes):
            host = genes[position]
            if host not in net.residual_cpu:
                return None
            if net.residual_cpu[host] < cpu_demand or net.residual_memory[host] < memory_demand:
                return None
            return host

        try:
            outcomes.append(_embed_sfcr(net, sfcr, catalog, choose))
        except _EmbedFailure as failure:
            outcomes.append(SfcRejection(sfcr.sfcr_id, failure.reason))
    return EmbeddingScheme(tuple(outcomes))


def verify_scheme(spec: NetworkSpec, sfcrs: Sequence[SFCRequest], catalog: Catalog,
                  scheme: EmbeddingScheme) -> None:
    """Re-check a scheme against the spec by independent summation.

    Recomputes per-host CPU/memory and per-link bandwidth totals from the
    accepted placements and compares them against raw capacities, and checks
    that segments chain from ingress through every placement to the egress
    host over declared links. Raises InconsistentSchemeError on any violation.
    """
    by_id = {s.sfcr_id: s for s in sfcrs}
    if len(scheme.outcomes) != len(sfcrs):
        raise InconsistentSchemeError("scheme and request list differ in length")
    host_ids = {h.id for h in spec.hosts}
    links = {l.link_id: l for l in spec.links}
    cpu_used: dict[str, Fraction] = {}
    mem_used: dict[str, Fraction] = {}
    bw_used: dict[str, Fraction] = {}
    for outcome, sfcr in zip(scheme.outcomes, sfcrs):
        if outcome.sfcr_id != sfcr.sfcr_id:
            raise InconsistentSchemeError(f"outcome order mismatch at {outcome.sfcr_id!r}")
        if not isinstance(outcome, SfcPlacement):
            continue
        request = by_id[outcome.sfcr_id]
        if len(outcome.hosts) != len(request.chain):
            raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: placement length != chain length")
        for position, host in enumerate(outcome.hosts):
            if host not in host_ids:
                raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: unknown host {host!r}")
            vnf = catalog.get(request.chain[position])
            cpu_used[host] = cpu_used.get(host, Fraction(0)) + vnf_cpu_demand(catalog, request, position)
            mem_used[host] = mem_used.get(host, Fraction(0)) + Fraction(vnf.memory_mb)
        waypoints = [spec.ingress_node, *outcome.hosts, spec.egress_host]
        if len(outcome.segments) != len(waypoints) - 1:
            raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: expected {len(waypoints) - 1} segments")
        for index, segment in enumerate(outcome.segments):
            if segment.nodes[0] != waypoints[index] or segment.nodes[-1] != waypoints[index + 1]:
                raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: segment {index} endpoints do not chain")
            if len(set(segment.nodes)) != len(segment.nodes):
                raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: segment {index} repeats a node")
            for hop, link_name in enumerate(segment.links):
                link = links.get(link_name)
                if link is None:
                    raise InconsistentSchemeError(f"{outcome.sfcr_id!r}: unknown link {link_name!r}")
                endpoints = {segment.nodes[hop], segment.nodes[hop + 1]}
                if endpoints != {link.endpoint_a, link.endpoint_b}:
                    raise InconsistentSchemeError(
                        f"{outcome.sfcr_id!r}: segment {index} hop {hop} does not follow {link_name!r}"
                    )
                bw_used[link_name] = bw_used.get(link_name, Fraction(0)) + Fraction(request.bandwidth_mbps)
    for host_spec in spec.hosts:
        if cpu_used.get(host_spec.id, Fraction(0)) > Fraction(host_spec.cpus):
            raise InconsistentSchemeError(f"host {host_spec.id!r}: CPU over capacity")
        if mem_used.get(host_spec.id, Fraction(0)) > Fraction(host_spec.memory_mb):
            raise InconsistentSchemeError(f"host {host_spec.id!r}: memory over capacity")
    for link_name, used in bw_used.items():
        if used > Fraction(links[link_name].bandwidth_mbps):
            raise InconsistentSchemeError(f"link {link_name!r}: bandwidth over capacity")


# -- genetic algorithm ---------------------------------------------------------


@dataclass(frozen=True)
class GAParams:
    """Knobs of the genetic solver; mutation_rate None means 1/gene-count."""

    population: int = 20
    generations: int = 10
    tournament_k: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float | None = None
    elitism: int = 2

    def validate(self) -> None:
        if self.population < 2:
            raise InvalidParamsError("population must be >= 2")
        if self.generations < 0:
            raise InvalidParamsError("generations must be >= 0")
        if not 0 <= self.crossover_rate <= 1:
            raise InvalidParamsError("crossover_rate must be in [0, 1]")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise InvalidParamsError("mutation_rate must be in [0, 1]")
        if not 1 <= self.tournament_k <= self.population:
            raise InvalidParamsError("tournament_k must be in [1, population]")
        if not 0 <= self.elitism <= self.population:
            raise InvalidParamsError("elitism must be in [0, population]")


@dataclass(frozen=True)
class GenerationStats:
    """One evolution trace entry; generation 0 is the initial population."""

    generation: int
    fitnesses: tuple[Fitness, ...]
    mean_acceptance: float
    min_acceptance: float
    max_acceptance: float
    mean_latency_ms: float | None
    min_latency_ms: float | None
    max_latency_ms: float | None
    best: Chromosome
    best_fitness: Fitness


EvolutionTrace = tuple[GenerationStats, ...]

Evaluator = Callable[[Chromosome, int], Fitness]


@dataclass(frozen=True)
class GAResult:
    best_scheme: EmbeddingScheme
    best_chromosome: Chromosome
    best_fitness: Fitness
    trace: EvolutionTrace


def crossover(a: Chromosome, b: Chromosome, crossover_rate: float, rng: random.Random) -> tuple[Chromosome, Chromosome]:
    """Uniform crossover: with probability crossover_rate, swap each gene 50/50."""
    if len(a) != len(b):
        raise GeneCountMismatchError(f"parents have {len(a)} and {len(b)} genes")
    if rng.random() >= crossover_rate:
        return a, b
    left, right = list(a), list(b)
    for i in range(len(left)):
        if rng.random() < 0.5:
            left[i], right[i] = right[i], left[i]
    return tuple(left), tuple(right)


def mutate(chromosome: Chromosome, mutation_rate: float, hosts: Sequence[str], rng: random.Random) -> Chromosome:
    """Reassign each gene to a uniformly drawn host with the given probability."""
    genes = list(chromosome)
    for i in range(len(genes)):
        if rng.random() < mutation_rate:
            genes[i] = rng.choice(hosts)
    return tuple(genes)


def tournament_select(population: Sequence[Chromosome], fitnesses: Sequence[Fitness], k: int,
                      rng: random.Random) -> Chromosome:
    """Best of k distinct candidates drawn uniformly without replacement."""
    if not 1 <= k <= len(population):
        raise InvalidParamsError(f"tournament size {k} not in [1, {len(population)}]")
    drawn = rng.sample(range(len(population)), k)
    best = drawn[0]
    for index in drawn[1:]:
        if compare_fitness(fitnesses[index], fitnesses[best]) > 0:
            best = index
    return population[best]


def _population_stats(generation: int, population: Sequence[Chromosome],
                      fitnesses: Sequence[Fitness]) -> GenerationStats:
    ratios = [f.acceptance_ratio for f in fitnesses]
    latencies = [f.mean_latency_ms for f in fitnesses if f.mean_latency_ms is not None]
    best_index = max(range(len(population)), key=lambda i: (fitnesses[i].sort_key(), -i))
    return GenerationStats(
        generation=generation,
        fitnesses=tuple(fitnesses),
        mean_acceptance=sum(ratios) / len(ratios),
        min_acceptance=min(ratios),
        max_acceptance=max(ratios),
        mean_latency_ms=sum(latencies) / len(latencies) if latencies else None,
        min_latency_ms=min(latencies) if latencies else None,
        max_latency_ms=max(latencies) if latencies else None,
        best=population[best_index],
        best_fitness=fitnesses[best_index],
    )


def _evaluate(population: Sequence[Chromosome], evaluator: Evaluator, seed: int, generation: int,
              parallel: int, cached: Mapping[int, Fitness]) -> list[Fitness]:
    """Evaluate a population; results merge by index so parallelism is invisible."""
    pending = [i for i in range(len(population)) if i not in cached]
    seeds = {i: derive_seed(seed, "eval", generation, i) for i in pending}
    results: dict[int, Fitness] = dict(cached)
    if parallel > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            for i, fitness in zip(pending, pool.map(lambda i: evaluator(population[i], seeds[i]), pending)):
                results[i] = fitness
    else:
        for i in pending:
            results[i] = evaluator(population[i], seeds[i])
    return [results[i] for i in range(len(population))]


def random_chromosome(hosts: Sequence[str], gene_count: int, rng: random.Random) -> Chromosome:
    return tuple(rng.choice(hosts) for _ in range(gene_count))


def ga_solve(net: SubstrateNetwork, sfcrs: Sequence[SFCRequest], catalog: Catalog, params: GAParams,
             evaluator: Evaluator, seed: int, parallel: int = 1) -> GAResult:
    """Evolve placements: elitism, tournament selection, crossover, mutation.

    The initial population samples every gene uniformly over hosts. Each
    candidate evaluation receives a seed derived from (seed, generation,
    index), so traces are identical under any evaluation concurrency. The
    best chromosome ever evaluated is decoded into the caller's net and
    returned with the full per-generation trace.
    """
    params.validate()
    if not sfcrs:
        raise InvalidParamsError("ga_solve needs at least one SFCR")
    hosts = sorted(net.host_ids())
    gene_count = sum(len(s.chain) for s in sfcrs)
    mutation_rate = params.mutation_rate if params.mutation_rate is not None else 1.0 / gene_count

    init_rng = random.Random(derive_seed(seed, "ga-init"))
    population = [random_chromosome(hosts, gene_count, init_rng) for _ in range(params.population)]
    fitnesses = _evaluate(population, evaluator, seed, 0, parallel, {})
    trace = [_population_stats(0, population, fitnesses)]
    best_chromosome = trace[0].best
    best_fitness = trace[0].best_fitness

    for generation in range(1, params.generations + 1):
        rng = random.Random(derive_seed(seed, "ga-gen", generation))
        order = sorted(range(len(population)), key=lambda i: fitnesses[i].sort_key(), reverse=True)
        elites = order[:params.elitism]
        next_population = [population[i] for i in elites]
        carried = {j: fitnesses[i] for j, i in enumerate(elites)}
        while len(next_population) < params.population:
            parent_a = tournament_select(population, fitnesses, params.tournament_k, rng)
            parent_b = tournament_select(population, fitnesses, params.tournament_k, rng)
            child_a, child_b = crossover(parent_a, parent_b, params.crossover_rate, rng)
            next_population.append(mutate(child_a, mutation_rate, hosts, rng))
            if len(next_population) < params.population:
                next_population.append(mutate(child_b, mutation_rate, hosts, rng))
        population = next_population
        fitnesses = _evaluate(population, evaluator, seed, generation, parallel, carried)
        stats = _population_stats(generation, population, fitnesses)
        trace.append(stats)
        if compare_fitness(stats.best_fitness, best_fitness) > 0:
            best_chromosome, best_fitness = stats.best, stats.best_fitness

    best_scheme = decode_chromosome(net, sfcrs, catalog, best_chromosome)
    return GAResult(best_scheme, best_chromosome, best_fitness, tuple(trace))


def random_search(net: SubstrateNetwork, sfcrs: Sequence[SFCRequest], budget: int,
                  evaluator: Evaluator, seed: int) -> tuple[Chromosome, Fitness]:
    """Uniform random baseline with the same evaluation interface as the GA."""
    if budget < 1:
        raise InvalidParamsError("budget must be >= 1")
    hosts = sorted(net.host_ids())
    gene_count = sum(len(s.chain) for s in sfcrs)
    rng = random.Random(derive_seed(seed, "random-search"))
    best: tuple[Chromosome, Fitness] | None = None
    for i in range(budget):
        candidate = random_chromosome(hosts, gene_count, rng)
        fitness = evaluator(candidate, derive_seed(seed, "random-search-eval", i))
        if best is None or compare_fitness(fitness, best[1]) > 0:
            best = (candidate, fitness)
    return best
