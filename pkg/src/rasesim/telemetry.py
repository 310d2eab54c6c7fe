"""Telemetry frames and post-hoc aggregations: histograms, series, means.

All functions here are pure; they never modify the frame list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import RaseSimError


class TelemetryError(RaseSimError):
    stage = "telemetry"


class UnknownSfcError(TelemetryError):
    """The requested SFC id never appears in the frames."""


class UnknownHostError(TelemetryError):
    """The requested host id never appears in the frames."""


class NoSamplesError(TelemetryError):
    """An aggregate was requested over zero samples."""


@dataclass(frozen=True)
class TelemetryFrame:
    """One sampling tick: per-host CPU, per-link bandwidth, per-SFC latency."""

    timestamp_s: float
    host_cpu: dict[str, float]
    link_bw_mbps: dict[str, float]
    sfc_latency_ms: dict[str, float]


@dataclass(frozen=True)
class LatencyHistogram:
    """Counts per fixed-width bin; bin k covers [k*width, (k+1)*width)."""

    bin_width_ms: float
    bins: tuple[tuple[float, int], ...]
    total: int


def bin_latencies(frames: Sequence[TelemetryFrame], sfc_id: str, bin_width_ms: float) -> LatencyHistogram:
    """Histogram one SFC's latency samples across all frames."""
    if bin_width_ms <= 0:
        raise ValueError("bin_width_ms must be positive")
    samples = [f.sfc_latency_ms[sfc_id] for f in frames if sfc_id in f.sfc_latency_ms]
    if frames and not samples:
        raise UnknownSfcError(f"SFC {sfc_id!r} has no latency samples in these frames")
    counts: dict[int, int] = {}
    for value in samples:
        index = int(math.floor(value / bin_width_ms))
        counts[index] = counts.get(index, 0) + 1
    bins = tuple((index * bin_width_ms, counts[index]) for index in sorted(counts))
    return LatencyHistogram(bin_width_ms, bins, len(samples))


def cpu_series(frames: Sequence[TelemetryFrame], host_id: str) -> list[tuple[float, float]]:
    """(timestamp, utilization) per frame for one host, order-preserving."""
    if not any(host_id in f.host_cpu for f in frames):
        raise UnknownHostError(f"host {host_id!r} has no CPU samples in these frames")
    return [(f.timestamp_s, f.host_cpu[host_id]) for f in frames if host_id in f.host_cpu]


def mean_latency(frames: Sequence[TelemetryFrame], accepted_sfc_ids: Iterable[str]) -> float:
    """Arithmetic mean over every (frame, accepted SFC) latency sample.

    math.fsum keeps the result exact under any frame ordering.
    """
    ids = list(accepted_sfc_ids)
    samples = [f.sfc_latency_ms[sfc_id] for f in frames for sfc_id in ids if sfc_id in f.sfc_latency_ms]
    if not samples:
        raise NoSamplesError("no latency samples for the requested SFCs")
    return math.fsum(samples) / len(samples)
