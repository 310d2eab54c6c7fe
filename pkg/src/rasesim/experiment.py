"""Experiment lifecycle: load config, generate, solve, validate, simulate, report.

A config is one JSON document with sections network, catalog, sfcrs,
duplicates, solver, engine, output, and seed. Unknown keys anywhere are an
error so typos fail fast. Two runs of the same config and seed produce
byte-identical report files; the wall-clock solve time is kept on the report
object (and printed by the CLI) but never serialized, precisely so files
stay reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass, field, replace
from datetime import datetime
from io import StringIO
from pathlib import Path

from .catalog import (
    Catalog,
    CatalogError,
    SFCRequest,
    generate_sfcrs,
    load_catalog,
    parse_sfcr_templates,
)
from .engine import EngineConfig, simulate
from .errors import ConfigError, IoError
from .seeding import derive_seed
from .solver import (
    EmbeddingScheme,
    EvolutionTrace,
    Fitness,
    GAParams,
    GenerationStats,
    InvalidParamsError,
    acceptance_ratio,
    decode_chromosome,
    ga_solve,
    solve_simple_dijkstra,
    verify_scheme,
)
from .telemetry import TelemetryFrame, mean_latency
from .topology import HostSpec, LinkSpec, NetworkSpec, SubstrateNetwork, TopologyError, build_network

SOLVER_KINDS = ("simple-dijkstra", "ga")
REPORT_FILENAME = "report.json"


@dataclass(frozen=True)
class SolverSettings:
    kind: str
    ga: GAParams


@dataclass(frozen=True)
class OutputSettings:
    directory: str
    formats: tuple[str, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkSpec
    catalog: Catalog
    templates: tuple[SFCRequest, ...]
    duplicates: int
    solver: SolverSettings
    engine: EngineConfig
    output: OutputSettings
    seed: int
    digest: str


@dataclass(frozen=True)
class SfcOutcome:
    sfcr_id: str
    accepted: bool
    reason: str


@dataclass(frozen=True)
class ExperimentReport:
    config_digest: str
    outcomes: tuple[SfcOutcome, ...]
    acceptance_ratio: float | None
    mean_latency_ms: float | None
    frames: tuple[TelemetryFrame, ...]
    trace: EvolutionTrace | None
    solve_seconds: float | None = field(default=None, compare=False)


def _check_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s): {', '.join(sorted(unknown))}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing key(s): {', '.join(sorted(missing))}")


def _node_id(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: node ids must be strings, got {value!r}")
    return value


def _listed(section, key: str, where: str) -> list:
    value = section.get(key, [])
    if not isinstance(value, list):
        raise ConfigError(f"{where}.{key}: expected a list")
    return value


def _parse_network(section) -> NetworkSpec:
    _check_keys(section, {"hosts", "switches", "links", "ingress_node", "egress_host"},
                {"hosts", "links", "ingress_node", "egress_host"}, "network")
    hosts = []
    for i, entry in enumerate(_listed(section, "hosts", "network")):
        _check_keys(entry, {"id", "cpus", "memory_mb"}, {"id", "cpus", "memory_mb"}, f"network.hosts[{i}]")
        try:
            hosts.append(HostSpec(_node_id(entry["id"], f"network.hosts[{i}]"),
                                  int(entry["cpus"]), float(entry["memory_mb"])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"network.hosts[{i}]: {exc}") from None
    links = []
    for i, entry in enumerate(_listed(section, "links", "network")):
        _check_keys(entry, {"endpoint_a", "endpoint_b", "bandwidth_mbps", "propagation_delay_ms"},
                    {"endpoint_a", "endpoint_b", "bandwidth_mbps", "propagation_delay_ms"},
                    f"network.links[{i}]")
        try:
            links.append(LinkSpec(_node_id(entry["endpoint_a"], f"network.links[{i}]"),
                                  _node_id(entry["endpoint_b"], f"network.links[{i}]"),
                                  float(entry["bandwidth_mbps"]), float(entry["propagation_delay_ms"])))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"network.links[{i}]: {exc}") from None
    switches = tuple(_node_id(s, "network.switches") for s in _listed(section, "switches", "network"))
    return NetworkSpec(
        hosts=tuple(hosts),
        switches=switches,
        links=tuple(links),
        ingress_node=_node_id(section["ingress_node"], "network.ingress_node"),
        egress_host=_node_id(section["egress_host"], "network.egress_host"),
    )


def _resolve_section(value, base_dir: Path, parser, what: str):
    """A section given inline as an object, or as a path relative to the config."""
    if isinstance(value, str):
        target = base_dir / value
        if not target.is_file():
            raise ConfigError(f"{what}: referenced file {target} does not exist")
        try:
            text = target.read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"{what}: cannot read {target}: {exc}") from None
        value = text
    try:
        return parser(value)
    except CatalogError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _parse_solver(section) -> SolverSettings:
    _check_keys(section, {"kind", "ga"}, {"kind"}, "solver")
    kind = section["kind"]
    if kind not in SOLVER_KINDS:
        raise ConfigError(f"solver.kind must be one of {', '.join(SOLVER_KINDS)}; got {kind!r}")
    ga_section = section.get("ga", {})
    _check_keys(ga_section, {"population", "generations", "tournament_k", "crossover_rate",
                             "mutation_rate", "elitism"}, set(), "solver.ga")
    defaults = GAParams()
    try:
        params = GAParams(
            population=int(ga_section.get("population", defaults.population)),
            generations=int(ga_section.get("generations", defaults.generations)),
            tournament_k=int(ga_section.get("tournament_k", defaults.tournament_k)),
            crossover_rate=float(ga_section.get("crossover_rate", defaults.crossover_rate)),
            mutation_rate=(None if ga_section.get("mutation_rate") is None
                           else float(ga_section["mutation_rate"])),
            elitism=int(ga_section.get("elitism", defaults.elitism)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver.ga: {exc}") from None
    try:
        params.validate()
    except InvalidParamsError as exc:
        raise ConfigError(f"solver.ga: {exc}") from None
    return SolverSettings(kind, params)


def _parse_engine(section) -> EngineConfig:
    _check_keys(section, {"duration_s", "sample_interval_s", "utilization_cap", "jitter_sigma",
                          "idle_spike_prob", "idle_spike_range"}, set(), "engine")
    defaults = EngineConfig()
    try:
        spike_range = section.get("idle_spike_range", list(defaults.idle_spike_range))
        return EngineConfig(
            duration_s=float(section.get("duration_s", defaults.duration_s)),
            sample_interval_s=float(section.get("sample_interval_s", defaults.sample_interval_s)),
            utilization_cap=float(section.get("utilization_cap", defaults.utilization_cap)),
            jitter_sigma=float(section.get("jitter_sigma", defaults.jitter_sigma)),
            idle_spike_prob=float(section.get("idle_spike_prob", defaults.idle_spike_prob)),
            idle_spike_range=(float(spike_range[0]), float(spike_range[1])),
        )
    except (TypeError, ValueError, IndexError, KeyError) as exc:
        raise ConfigError(f"engine: {exc}") from None


def _parse_output(section) -> OutputSettings:
    _check_keys(section, {"directory", "formats"}, set(), "output")
    raw_formats = section.get("formats", ["json", "csv"])
    if not isinstance(raw_formats, list):
        raise ConfigError("output.formats: expected a list")
    formats = tuple(raw_formats)
    for fmt in formats:
        if fmt not in ("json", "csv"):
            raise ConfigError(f"output.formats entries must be 'json' or 'csv'; got {fmt!r}")
    if not formats:
        raise ConfigError("output.formats must not be empty")
    directory = section.get("directory", "results")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory must be a non-empty string")
    return OutputSettings(directory, formats)


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Load and fully validate an experiment config file."""
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    _check_keys(data, {"network", "catalog", "sfcrs", "duplicates", "solver", "engine", "output", "seed"},
                {"network", "catalog", "sfcrs", "solver", "seed"}, "config")

    network = _parse_network(data["network"])
    try:
        build_network(network)
    except TopologyError as exc:
        raise ConfigError(f"network: {exc}") from None

    base_dir = path.parent
    catalog = _resolve_section(data["catalog"], base_dir, load_catalog, "catalog")
    templates = _resolve_section(data["sfcrs"], base_dir, parse_sfcr_templates, "sfcrs")
    for template in templates:
        for vnf_name in template.chain:
            if not any(v.name == vnf_name for v in catalog):
                raise ConfigError(f"sfcrs: {template.sfcr_id!r} references unknown VNF {vnf_name!r}")

    duplicates = data.get("duplicates", 1)
    if not isinstance(duplicates, int) or isinstance(duplicates, bool) or duplicates < 0:
        raise ConfigError("duplicates must be a non-negative integer")

    solver = _parse_solver(data["solver"])
    engine = _parse_engine(data.get("engine", {}))
    output = _parse_output(data.get("output", {}))

    seed = data["seed"] if seed_override is None else seed_override
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")

    digest = _config_digest(network, catalog, templates, duplicates, solver, engine, seed)
    return ExperimentConfig(network, catalog, tuple(templates), duplicates, solver, engine,
                            output, seed, digest)


def _config_digest(network, catalog, templates, duplicates, solver, engine, seed) -> str:
    """Digest of everything that determines results; output settings excluded."""
    payload = {
        "network": {
            "hosts": [{"id": h.id, "cpus": h.cpus, "memory_mb": h.memory_mb} for h in network.hosts],
            "switches": list(network.switches),
            "links": [
                {"endpoint_a": l.endpoint_a, "endpoint_b": l.endpoint_b,
                 "bandwidth_mbps": l.bandwidth_mbps, "propagation_delay_ms": l.propagation_delay_ms}
                for l in network.links
            ],
            "ingress_node": network.ingress_node,
            "egress_host": network.egress_host,
        },
        "catalog": [
            {"name": v.name, "cpu_per_request": v.cpu_per_request,
             "base_service_time_ms": v.base_service_time_ms, "memory_mb": v.memory_mb,
             "bandwidth_scale": v.bandwidth_scale}
            for v in catalog
        ],
        "sfcrs": [template_to_dict(t) for t in templates],
        "duplicates": duplicates,
        "solver": {
            "kind": solver.kind,
            "ga": {
                "population": solver.ga.population, "generations": solver.ga.generations,
                "tournament_k": solver.ga.tournament_k, "crossover_rate": solver.ga.crossover_rate,
                "mutation_rate": solver.ga.mutation_rate, "elitism": solver.ga.elitism,
            },
        },
        "engine": {
            "duration_s": engine.duration_s, "sample_interval_s": engine.sample_interval_s,
            "utilization_cap": engine.utilization_cap, "jitter_sigma": engine.jitter_sigma,
            "idle_spike_prob": engine.idle_spike_prob, "idle_spike_range": list(engine.idle_spike_range),
        },
        "seed": seed,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def template_to_dict(template: SFCRequest) -> dict:
    return {
        "id": template.sfcr_id,
        "chain": list(template.chain),
        "bandwidth_mbps": template.bandwidth_mbps,
        "request_size_bits": template.request_size_bits,
        "traffic": [
            {"start_s": seg.start_s, "end_s": seg.end_s, "rps": seg.rps}
            for seg in template.offered_load.segments
        ],
    }


def build_ga_evaluator(base_net: SubstrateNetwork, sfcrs, catalog: Catalog, engine_cfg: EngineConfig):
    """Fitness from a full engine run on a private network copy.

    The eval_seed passed by the solver seeds the engine so repeated
    evaluations of one chromosome in different generations see different
    jitter, like re-measuring a live deployment.
    """

    def evaluate(chromosome, eval_seed: int) -> Fitness:
        work = base_net.copy()
        scheme = decode_chromosome(work, sfcrs, catalog, chromosome)
        ratio = acceptance_ratio(scheme.accept_flags())
        accepted_ids = [p.sfcr_id for p in scheme.accepted()]
        if not accepted_ids:
            return Fitness(ratio, None)
        frames = simulate(work, scheme, sfcrs, catalog, replace(engine_cfg, seed=eval_seed))
        return Fitness(ratio, mean_latency(frames, accepted_ids))

    return evaluate


def generate_requests(cfg: ExperimentConfig) -> list[SFCRequest]:
    """The run's SFCR list, expanded from templates with the derived seed."""
    if cfg.duplicates == 0:
        return []
    return generate_sfcrs(cfg.templates, cfg.duplicates, derive_seed(cfg.seed, "sfcrs"))


def run_solver(cfg: ExperimentConfig, net: SubstrateNetwork, sfcrs, parallel: int = 1):
    """Solve stage only: returns (scheme, trace-or-None, wall-clock seconds)."""
    trace: EvolutionTrace | None = None
    started = time.perf_counter()
    if not sfcrs:
        scheme = EmbeddingScheme(())
    elif cfg.solver.kind == "simple-dijkstra":
        scheme = solve_simple_dijkstra(net, sfcrs, cfg.catalog)
    else:
        evaluator = build_ga_evaluator(build_network(cfg.network), sfcrs, cfg.catalog, cfg.engine)
        result = ga_solve(net, sfcrs, cfg.catalog, cfg.solver.ga, evaluator, cfg.seed, parallel)
        scheme, trace = result.best_scheme, result.trace
    return scheme, trace, time.perf_counter() - started


def run_experiment(cfg: ExperimentConfig, parallel: int = 1) -> ExperimentReport:
    """Execute the full lifecycle deterministically from cfg.seed."""
    sfcrs = generate_requests(cfg)
    net = build_network(cfg.network)
    scheme, trace, solve_seconds = run_solver(cfg, net, sfcrs, parallel)

    verify_scheme(cfg.network, sfcrs, cfg.catalog, scheme)
    engine_cfg = replace(cfg.engine, seed=derive_seed(cfg.seed, "engine"))
    frames = simulate(net, scheme, sfcrs, cfg.catalog, engine_cfg)

    outcomes = tuple(
        SfcOutcome(o.sfcr_id, accepted, "" if accepted else o.reason)
        for o, accepted in zip(scheme.outcomes, scheme.accept_flags())
    )
    ratio = acceptance_ratio(scheme.accept_flags()) if outcomes else None
    accepted_ids = [o.sfcr_id for o in outcomes if o.accepted]
    mean = mean_latency(frames, accepted_ids) if accepted_ids and frames else None
    return ExperimentReport(
        config_digest=cfg.digest,
        outcomes=outcomes,
        acceptance_ratio=ratio,
        mean_latency_ms=mean,
        frames=tuple(frames),
        trace=trace,
        solve_seconds=solve_seconds,
    )


def resolve_output_dir(cfg: ExperimentConfig, pinned: str | None) -> Path:
    """Pinned directory if given, else a timestamped subdirectory of the config's."""
    if pinned:
        return Path(pinned)
    return Path(cfg.output.directory) / datetime.now().strftime("%Y%m%d-%H%M%S")


# -- report serialization ------------------------------------------------------


def _fitness_to_dict(fitness: Fitness) -> dict:
    return {"acceptance_ratio": fitness.acceptance_ratio, "mean_latency_ms": fitness.mean_latency_ms}


def _fitness_from_dict(data: dict) -> Fitness:
    return Fitness(data["acceptance_ratio"], data["mean_latency_ms"])


def report_to_dict(report: ExperimentReport) -> dict:
    """JSON-ready form of a report; solve_seconds is deliberately omitted."""
    return {
        "config_digest": report.config_digest,
        "acceptance_ratio": report.acceptance_ratio,
        "mean_latency_ms": report.mean_latency_ms,
        "outcomes": [
            {"sfcr_id": o.sfcr_id, "accepted": o.accepted, "reason": o.reason}
            for o in report.outcomes
        ],
        "frames": [
            {"timestamp_s": f.timestamp_s, "host_cpu": f.host_cpu,
             "link_bw_mbps": f.link_bw_mbps, "sfc_latency_ms": f.sfc_latency_ms}
            for f in report.frames
        ],
        "trace": None if report.trace is None else [
            {
                "generation": g.generation,
                "fitnesses": [_fitness_to_dict(f) for f in g.fitnesses],
                "mean_acceptance": g.mean_acceptance,
                "min_acceptance": g.min_acceptance,
                "max_acceptance": g.max_acceptance,
                "mean_latency_ms": g.mean_latency_ms,
                "min_latency_ms": g.min_latency_ms,
                "max_latency_ms": g.max_latency_ms,
                "best": list(g.best),
                "best_fitness": _fitness_to_dict(g.best_fitness),
            }
            for g in report.trace
        ],
    }


def report_from_dict(data: dict) -> ExperimentReport:
    outcomes = tuple(SfcOutcome(o["sfcr_id"], o["accepted"], o["reason"]) for o in data["outcomes"])
    frames = tuple(
        TelemetryFrame(f["timestamp_s"], dict(f["host_cpu"]), dict(f["link_bw_mbps"]),
                       dict(f["sfc_latency_ms"]))
        for f in data["frames"]
    )
    trace = None
    if data["trace"] is not None:
        trace = tuple(
            GenerationStats(
                generation=g["generation"],
                fitnesses=tuple(_fitness_from_dict(f) for f in g["fitnesses"]),
                mean_acceptance=g["mean_acceptance"],
                min_acceptance=g["min_acceptance"],
                max_acceptance=g["max_acceptance"],
                mean_latency_ms=g["mean_latency_ms"],
                min_latency_ms=g["min_latency_ms"],
                max_latency_ms=g["max_latency_ms"],
                best=tuple(g["best"]),
                best_fitness=_fitness_from_dict(g["best_fitness"]),
            )
            for g in data["trace"]
        )
    return ExperimentReport(
        config_digest=data["config_digest"],
        outcomes=outcomes,
        acceptance_ratio=data["acceptance_ratio"],
        mean_latency_ms=data["mean_latency_ms"],
        frames=frames,
        trace=trace,
    )


def read_report(path) -> ExperimentReport:
    path = Path(path)
    try:
        data = json.loads(path.read_text("utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read report {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise IoError(f"{path}: invalid report JSON: {exc}") from None
    return report_from_dict(data)


def _csv_text(header: list[str], rows) -> str:
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def outcomes_csv(report: ExperimentReport) -> str:
    rows = [[o.sfcr_id, "true" if o.accepted else "false", o.reason] for o in report.outcomes]
    return _csv_text(["sfcr_id", "accepted", "reason"], rows)


def latency_csv(report: ExperimentReport) -> str:
    accepted = [o.sfcr_id for o in report.outcomes if o.accepted]
    rows = [
        [frame.timestamp_s, sfc_id, frame.sfc_latency_ms[sfc_id]]
        for frame in report.frames
        for sfc_id in accepted
    ]
    return _csv_text(["timestamp_s", "sfc_id", "latency_ms"], rows)


def cpu_csv(report: ExperimentReport) -> str:
    rows = [
        [frame.timestamp_s, host, frame.host_cpu[host]]
        for frame in report.frames
        for host in sorted(frame.host_cpu)
    ]
    return _csv_text(["timestamp_s", "host_id", "utilization"], rows)


def trace_csv(report: ExperimentReport) -> str:
    rows = [
        [g.generation, g.mean_acceptance, g.min_acceptance, g.max_acceptance,
         "" if g.mean_latency_ms is None else g.mean_latency_ms,
         "" if g.min_latency_ms is None else g.min_latency_ms,
         "" if g.max_latency_ms is None else g.max_latency_ms]
        for g in report.trace
    ]
    return _csv_text(
        ["generation", "mean_ar", "min_ar", "max_ar",
         "mean_latency_ms", "min_latency_ms", "max_latency_ms"],
        rows,
    )


def histogram_csv(report: ExperimentReport, bin_width_ms: float) -> str:
    """Binned latency counts per accepted SFC, in outcome order."""
    from .telemetry import bin_latencies

    rows = []
    for outcome in report.outcomes:
        if not outcome.accepted:
            continue
        histogram = bin_latencies(report.frames, outcome.sfcr_id, bin_width_ms)
        for lower_edge, count in histogram.bins:
            rows.append([outcome.sfcr_id, lower_edge, count])
    return _csv_text(["sfc_id", "bin_lower_ms", "count"], rows)


def write_report(report: ExperimentReport, directory, formats=("json", "csv")) -> list[Path]:
    """Write report files; every file lands atomically or not at all."""
    directory = Path(directory)
    files: dict[str, str] = {}
    if "json" in formats:
        files[REPORT_FILENAME] = json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"
    if "csv" in formats:
        files["outcomes.csv"] = outcomes_csv(report)
        files["latency.csv"] = latency_csv(report)
        files["cpu.csv"] = cpu_csv(report)
        if report.trace is not None:
            files["trace.csv"] = trace_csv(report)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, content in files.items():
            target = directory / name
            temp = directory / (name + ".tmp")
            temp.write_text(content, "utf-8")
            os.replace(temp, target)
            written.append(target)
    except OSError as exc:
        raise IoError(f"cannot write report into {directory}: {exc}") from None
    return sorted(written)
