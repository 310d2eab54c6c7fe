"""Independent reference implementations used to pin expected values.

Nothing here may call into the code paths it checks: the path oracle
enumerates simple paths exhaustively, the packing oracle does plain
sorted-list arithmetic on CPU numbers alone, and the binomial bounds come
from the exact CDF.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction


def brute_force_shortest_path(nodes, edges, src, dst, min_bandwidth):
    """Best simple path by exhaustive enumeration.

    edges: list of (a, b, delay, residual_bandwidth). Returns (node tuple,
    delay) under the order (delay, hops, node sequence), or None if no
    feasible path exists. Delay is accumulated in path order so float sums
    match an algorithm that walks the same sequence.
    """
    adjacency = {n: [] for n in nodes}
    for a, b, delay, bandwidth in edges:
        if bandwidth < min_bandwidth:
            continue
        adjacency[a].append((b, delay))
        adjacency[b].append((a, delay))

    best = None

    def visit(node, visited, sequence, delay):
        nonlocal best
        if node == dst:
            key = (delay, len(sequence) - 1, sequence)
            if best is None or key < best:
                best = key
            return
        for neighbor, edge_delay in adjacency[node]:
            if neighbor in visited:
                continue
            visit(neighbor, visited | {neighbor}, sequence + (neighbor,), delay + edge_delay)

    visit(src, {src}, (src,), 0.0)
    if best is None:
        return None
    delay, _hops, sequence = best
    return sequence, delay


def cpu_packing_outcomes(host_cpus, demands_per_sfcr):
    """Accept/reject flags from CPU arithmetic alone.

    host_cpus: {host id: capacity}; demands_per_sfcr: per SFCR, the ordered
    per-VNF CPU demands (Fractions). Each demand goes to the host with the
    most residual CPU (ties to lowest id); an SFCR that cannot place some
    demand is rolled back and rejected. Memory, bandwidth and routing are
    deliberately ignored, so agreement with the real solver also certifies
    that CPU was the only binding constraint.
    """
    residual = {host: Fraction(capacity) for host, capacity in host_cpus.items()}
    flags = []
    for demands in demands_per_sfcr:
        taken = []
        ok = True
        for demand in demands:
            candidates = [h for h in residual if residual[h] >= demand]
            if not candidates:
                ok = False
                break
            best = max(sorted(candidates), key=lambda h: residual[h])
            if demand > 0:
                residual[best] -= demand
                taken.append((best, demand))
        if not ok:
            for host, demand in taken:
                residual[host] += demand
        flags.append(ok)
    return flags


def binomial_central_interval(n: int, p: float, mass: float = 0.99) -> tuple[int, int]:
    """Smallest-quantile [lo, hi] covering the central `mass` of Binomial(n, p)."""
    tail = (1.0 - mass) / 2.0
    cdf = 0.0
    lo = hi = None
    for k in range(n + 1):
        cdf += math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
        if lo is None and cdf >= tail:
            lo = k
        if hi is None and cdf >= 1.0 - tail:
            hi = k
            break
    return lo, n if hi is None else hi


def random_connected_graph(rng: random.Random, max_nodes: int = 12):
    """Random connected graph for path-oracle comparisons.

    Returns (node ids, edges) with edges (a, b, delay, bandwidth). Delays
    come from a small exactly-representable set including zero, so distinct
    routes frequently tie and exercise the hop/lexicographic tie-breakers.
    """
    count = rng.randint(3, max_nodes)
    nodes = [f"n{i:02d}" for i in range(count)]
    shuffled = nodes[:]
    rng.shuffle(shuffled)
    delays = (0.0, 0.25, 0.5, 1.0, 2.0)
    bandwidths = (5.0, 10.0, 100.0)
    edges = []
    seen = set()
    for i in range(1, count):
        a, b = shuffled[rng.randrange(i)], shuffled[i]
        seen.add(frozenset((a, b)))
        edges.append((a, b, rng.choice(delays), rng.choice(bandwidths)))
    extras = rng.randint(0, count * 2)
    for _ in range(extras):
        a, b = rng.sample(nodes, 2)
        if frozenset((a, b)) in seen:
            continue
        seen.add(frozenset((a, b)))
        edges.append((a, b, rng.choice(delays), rng.choice(bandwidths)))
    return nodes, edges
