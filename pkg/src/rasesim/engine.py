"""Analytical traffic engine.

Replaces real HTTP load generation with a fluid-flow model: per-host CPU
utilization follows offered request rates, and each chain's round-trip
latency is link propagation plus transmission, plus per-VNF service time
inflated by the processor-sharing factor 1/(1-rho) on its host. Requests
traverse ingress -> VNFs -> egress and the response retraces the same links
in reverse; VNFs process the forward direction only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .catalog import Catalog, SFCRequest
from .errors import RaseSimError
from .solver import EmbeddingScheme, InconsistentSchemeError, SfcPlacement, verify_scheme
from .telemetry import TelemetryFrame
from .topology import SubstrateNetwork

__all__ = [
    "EngineError",
    "MalformedHeaderError",
    "NotAcceptedError",
    "InconsistentSchemeError",
    "SfcHeader",
    "EngineConfig",
    "encode_sfc_header",
    "decode_sfc_header",
    "host_utilization",
    "sfc_latency",
    "simulate",
]


class EngineError(RaseSimError):
    stage = "engine"


class MalformedHeaderError(EngineError):
    """Wire string does not parse as an SFC header."""


class NotAcceptedError(EngineError):
    """Latency requested for an SFC that was not embedded."""


@dataclass(frozen=True)
class SfcHeader:
    """SFC id plus the VNF sequence, as carried in the HTTP header."""

    sfc_id: str
    chain: tuple[str, ...]

    def __post_init__(self):
        if not self.sfc_id or ";" in self.sfc_id or "," in self.sfc_id:
            raise MalformedHeaderError(f"invalid sfc_id {self.sfc_id!r}")
        if not self.chain:
            raise MalformedHeaderError("chain must not be empty")
        for entry in self.chain:
            if not entry or "," in entry:
                raise MalformedHeaderError(f"invalid chain entry {entry!r}")


def encode_sfc_header(header: SfcHeader) -> str:
    """Wire format: `<sfc_id>;<vnf1>,<vnf2>,...` (ASCII)."""
    return f"{header.sfc_id};{','.join(header.chain)}"


def decode_sfc_header(wire: str) -> SfcHeader:
    """Inverse of encode_sfc_header; rejects anything the encoder cannot emit."""
    sfc_id, separator, rest = wire.partition(";")
    if not separator:
        raise MalformedHeaderError(f"missing ';' in header {wire!r}")
    return SfcHeader(sfc_id, tuple(rest.split(",")))


@dataclass(frozen=True)
class EngineConfig:
    duration_s: float = 60.0
    sample_interval_s: float = 1.0
    utilization_cap: float = 0.99
    jitter_sigma: float = 0.05
    idle_spike_prob: float = 0.01
    idle_spike_range: tuple[float, float] = (0.05, 0.15)
    seed: int = 0

    def __post_init__(self):
        if self.sample_interval_s <= 0 or self.sample_interval_s > self.duration_s:
            raise ValueError("need 0 < sample_interval_s <= duration_s")
        if not 0 < self.utilization_cap < 1:
            raise ValueError("utilization_cap must be in (0, 1)")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")
        if not 0 <= self.idle_spike_prob <= 1:
            raise ValueError("idle_spike_prob must be in [0, 1]")
        low, high = self.idle_spike_range
        if not 0 <= low <= high <= 1:
            raise ValueError("idle_spike_range must satisfy 0 <= low <= high <= 1")


def host_utilization(placements: Iterable[tuple[str, float]], catalog: Catalog, cpus: float,
                     cap: float = 0.99) -> tuple[float, bool]:
    """Utilization of one host from (vnf type, request rate) pairs.

    Returns (utilization capped at `cap`, saturated flag); the flag is set
    when the uncapped value reaches 1.
    """
    raw = 0.0
    for vnf_name, rate in placements:
        if rate < 0:
            raise ValueError(f"negative request rate {rate} for {vnf_name!r}")
        raw += rate * catalog.get(vnf_name).cpu_per_request
    raw /= cpus
    return min(cap, raw), raw >= 1.0


def _segment_payload_bits(sfcr: SFCRequest, catalog: Catalog) -> list[float]:
    """Payload size entering each segment; VNF bandwidth_scale compounds."""
    sizes = [float(sfcr.request_size_bits)]
    for vnf_name in sfcr.chain:
        sizes.append(sizes[-1] * catalog.get(vnf_name).bandwidth_scale)
    return sizes


def _forward_link_cost_ms(placement: SfcPlacement, sfcr: SFCRequest, net: SubstrateNetwork,
                          catalog: Catalog) -> float:
    sizes = _segment_payload_bits(sfcr, catalog)
    total = 0.0
    for index, segment in enumerate(placement.segments):
        for link in segment.links:
            # transmission at the link's full rate: bits / (Mbps * 1000) = ms
            total += net.link_delay_ms(link) + sizes[index] / (net.link_bandwidth_mbps(link) * 1000.0)
    return total


def sfc_latency(placement, sfcr: SFCRequest, net: SubstrateNetwork, catalog: Catalog,
                utilization: Mapping[str, float], jitter_sigma: float = 0.0,
                rng: random.Random | None = None) -> float:
    """Round-trip latency in ms for one embedded chain at given host loads.

    The response retraces the forward links in reverse, so link terms count
    twice; VNF service terms count once. Jitter, when enabled, multiplies the
    total by 1 + N(0, sigma) truncated at three sigmas.
    """
    if not isinstance(placement, SfcPlacement):
        raise NotAcceptedError(f"SFC {getattr(placement, 'sfcr_id', placement)!r} was not accepted")
    total = 2.0 * _forward_link_cost_ms(placement, sfcr, net, catalog)
    for position, host in enumerate(placement.hosts):
        rho = utilization[host]
        if rho >= 1.0:
            raise ValueError(f"utilization {rho} on host {host!r} must be capped below 1")
        total += catalog.get(sfcr.chain[position]).base_service_time_ms / (1.0 - rho)
    if jitter_sigma > 0 and rng is not None:
        noise = rng.gauss(0.0, jitter_sigma)
        noise = max(-3.0 * jitter_sigma, min(3.0 * jitter_sigma, noise))
        total *= 1.0 + noise
    return total


def simulate(net: SubstrateNetwork, scheme: EmbeddingScheme, sfcrs: Sequence[SFCRequest],
             catalog: Catalog, cfg: EngineConfig) -> list[TelemetryFrame]:
    """Run the fluid model and emit one telemetry frame per sampling tick.

    Per frame, in fixed order: true host utilizations from the offered rates,
    idle-spike noise for hosts at exactly zero load (hosts in declaration
    order), per-link bandwidth use counting both directions, then one latency
    sample per accepted SFC in submission order. Deterministic given cfg.seed.
    """
    verify_scheme(net.spec, sfcrs, catalog, scheme)
    by_id = {s.sfcr_id: s for s in sfcrs}
    rng = random.Random(cfg.seed)

    accepted = scheme.accepted()
    host_ids = net.host_ids()
    # host -> [(sfcr, cpu_per_request)] for utilization sums
    host_loads: dict[str, list[tuple[SFCRequest, float]]] = {h: [] for h in host_ids}
    for placement in accepted:
        sfcr = by_id[placement.sfcr_id]
        for position, host in enumerate(placement.hosts):
            host_loads[host].append((sfcr, catalog.get(sfcr.chain[position]).cpu_per_request))
    # link -> [(sfcr, payload bits per request)] per forward traversal
    link_ids = [l.link_id for l in net.spec.links]
    link_traversals: dict[str, list[tuple[SFCRequest, float]]] = {l: [] for l in link_ids}
    for placement in accepted:
        sfcr = by_id[placement.sfcr_id]
        sizes = _segment_payload_bits(sfcr, catalog)
        for index, segment in enumerate(placement.segments):
            for link in segment.links:
                link_traversals[link].append((sfcr, sizes[index]))

    cpus = {h.id: float(h.cpus) for h in net.spec.hosts}
    frames: list[TelemetryFrame] = []
    ticks = int(cfg.duration_s / cfg.sample_interval_s + 1e-9)
    low, high = cfg.idle_spike_range
    for tick in range(ticks):
        t = tick * cfg.sample_interval_s
        rates = {s.sfcr_id: s.offered_load.rate_at(t) for s in sfcrs}
        true_cpu: dict[str, float] = {}
        for host in host_ids:
            raw = sum(rates[sfcr.sfcr_id] * cost for sfcr, cost in host_loads[host]) / cpus[host]
            true_cpu[host] = min(cfg.utilization_cap, raw)
        # spikes are observation noise only; latency below uses true_cpu
        observed_cpu = dict(true_cpu)
        for host in host_ids:
            if true_cpu[host] == 0.0 and rng.random() < cfg.idle_spike_prob:
                observed_cpu[host] = rng.uniform(low, high)
        link_bw = {
            link: 2.0 * sum(rates[sfcr.sfcr_id] * bits for sfcr, bits in link_traversals[link]) / 1e6
            for link in link_ids
        }
        latencies: dict[str, float] = {}
        for placement in accepted:
            latencies[placement.sfcr_id] = sfc_latency(
                placement, by_id[placement.sfcr_id], net, catalog, true_cpu,
                cfg.jitter_sigma, rng,
            )
        frames.append(TelemetryFrame(t, observed_cpu, link_bw, latencies))
    return frames
