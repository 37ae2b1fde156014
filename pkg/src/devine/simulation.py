"""Discrete-event simulation: request arrivals, embedding, departures.

The master seed splits into named streams so the generated workload
(substrate, requests, primaries) is identical no matter which embedding
algorithm runs.  Event ties resolve departures before arrivals.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field, replace

from .baselines import GrcParams, best_fit, first_fit, grc_embed
from .embedding import (
    AllocationLedger,
    allocate,
    conservation_violations,
    release,
    verify_solution,
)
from .generator import GeneratorConfig, generate_physical_network, generate_vnr, stream
from .protocol import ElectionParams, ElectionTrace, run_election
from .model import Vnr

ALGORITHMS = ("devine", "firstfit", "bestfit", "grc")

_DEPARTURE = 0  # sorts before arrivals at equal times
_ARRIVAL = 1


class SimulationError(RuntimeError):
    """Raised on invalid configuration or a broken run-time invariant."""


@dataclass
class SimConfig:
    """Everything one run needs: workload, algorithm, horizon, seed."""

    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    election: ElectionParams = field(default_factory=ElectionParams)
    grc: GrcParams = field(default_factory=GrcParams)
    algorithm: str = "devine"
    duration: float = 2000.0
    sampling_interval: float = 10.0
    seed: int = 42
    trace_sample: int = 10

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.sampling_interval <= 0:
            raise ValueError("sampling_interval must be positive")
        if self.trace_sample < 0:
            raise ValueError("trace_sample must be non-negative")
        self.generator.validate()
        self.election.validate()
        self.grc.validate()

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "duration": self.duration,
            "sampling_interval": self.sampling_interval,
            "seed": self.seed,
            "trace_sample": self.trace_sample,
            "generator": {
                "server_count": self.generator.server_count,
                "link_probability": self.generator.link_probability,
                "cpu_capacity": list(self.generator.cpu_capacity),
                "memory_capacity": list(self.generator.memory_capacity),
                "gpu_capacity": list(self.generator.gpu_capacity),
                "link_bandwidth": list(self.generator.link_bandwidth),
                "vnr_size": list(self.generator.vnr_size),
                "vnr_link_probability": self.generator.vnr_link_probability,
                "cpu_demand": list(self.generator.cpu_demand),
                "memory_demand": list(self.generator.memory_demand),
                "gpu_demand": list(self.generator.gpu_demand),
                "bandwidth_demand": list(self.generator.bandwidth_demand),
                "lifetime": list(self.generator.lifetime),
                "arrival_rate": self.generator.arrival_rate,
                "arrival_process": self.generator.arrival_process,
                "second_parameter": self.generator.second_parameter,
                "resource_floor": self.generator.resource_floor,
                "lifetime_floor": self.generator.lifetime_floor,
                "max_attempts": self.generator.max_attempts,
            },
            "election": {
                "leaders": self.election.leaders,
                "alpha": self.election.alpha,
                "beta": self.election.beta,
                "x": self.election.x,
                "y": self.election.y,
                "path_hop_limit": self.election.path_hop_limit,
                "injective": self.election.injective,
            },
            "grc": {
                "damping": self.grc.damping,
                "tolerance": self.grc.tolerance,
                "max_iterations": self.grc.max_iterations,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> SimConfig:
        cfg = cls()
        gen = dict(data.get("generator", {}))
        for pair_key in (
            "cpu_capacity", "memory_capacity", "gpu_capacity", "link_bandwidth",
            "cpu_demand", "memory_demand", "gpu_demand", "bandwidth_demand",
            "lifetime", "vnr_size",
        ):
            if pair_key in gen:
                gen[pair_key] = tuple(gen[pair_key])
        cfg.generator = replace(cfg.generator, **gen)
        cfg.election = replace(cfg.election, **data.get("election", {}))
        cfg.grc = replace(cfg.grc, **data.get("grc", {}))
        for key in ("algorithm", "duration", "sampling_interval", "seed", "trace_sample"):
            if key in data:
                setattr(cfg, key, data[key])
        return cfg


@dataclass
class SeriesSample:
    """Running metrics at one sampling epoch."""

    time: float
    arrivals: int
    acceptances: int
    acceptance_ratio: float
    revenue: float
    cost: float
    revenue_cost_ratio: float
    cpu_utilization: float
    link_utilization: float
    embedding_messages: int
    embedded_messages: int


@dataclass
class ArrivalRecord:
    """Per-request outcome, in arrival order."""

    request_id: int
    time: float
    vnr_hash: str
    accepted: bool
    acceptance_ratio: float
    revenue: float
    cost: float
    metric: float
    embedding_messages: int
    embedded_messages: int


@dataclass
class SimulationResult:
    series: list[SeriesSample]
    per_arrival: list[ArrivalRecord]
    summary: dict
    traces: list[ElectionTrace]


def build_workload(
    cfg: GeneratorConfig, duration: float, seed: int
) -> list[tuple[float, Vnr, int]]:
    """Arrival times, requests, and primary nodes for one run.

    Drawn exclusively from the vnr and primaries streams, so every
    algorithm sees the same workload under the same master seed.
    """
    vnr_rng = stream(seed, "vnr")
    primary_rng = stream(seed, "primaries")
    mean_gap = 1.0 / cfg.arrival_rate
    workload = []
    now = 0.0
    request_id = 0
    while True:
        gap = float(vnr_rng.exponential(mean_gap)) if cfg.arrival_process == "poisson" else mean_gap
        now += gap
        if now > duration:
            break
        vnr = generate_vnr(cfg, request_id, now, vnr_rng)
        primary = int(primary_rng.integers(cfg.server_count))
        workload.append((now, vnr, primary))
        request_id += 1
    return workload


def _utilization(net) -> tuple[float, float]:
    """Mean used fraction of CPU across nodes and bandwidth across links."""
    cpu = 0.0
    for node in net.nodes:
        cap = node.capacity.cpu_m
        cpu += (cap - node.residual.cpu_m) / cap
    cpu /= net.num_nodes
    if net.num_links == 0:
        return cpu, 0.0
    bw = 0.0
    for link in net.links:
        bw += (link.bw_capacity_m - link.bw_residual_m) / link.bw_capacity_m
    return cpu, bw / net.num_links


def run_simulation(cfg: SimConfig) -> SimulationResult:
    """One seeded run; returns the sampled series, per-arrival log, and summary."""
    cfg.validate()
    net = generate_physical_network(cfg.generator, stream(cfg.seed, "topology"))
    workload = build_workload(cfg.generator, cfg.duration, cfg.seed)
    leader_rng = stream(cfg.seed, "leaders")
    ledger = AllocationLedger()
    embed_params = cfg.election.embed_params()

    events: list[tuple[float, int, int, object]] = []
    for when, vnr, primary in workload:
        heapq.heappush(events, (when, _ARRIVAL, vnr.request_id, (vnr, primary)))

    series: list[SeriesSample] = []
    per_arrival: list[ArrivalRecord] = []
    traces: list[ElectionTrace] = []
    arrivals = acceptances = 0
    revenue = cost = 0.0
    embedding_messages = embedded_messages = 0
    digest = hashlib.sha256()

    def sample(now: float) -> None:
        cpu, bw = _utilization(net)
        series.append(
            SeriesSample(
                time=now,
                arrivals=arrivals,
                acceptances=acceptances,
                acceptance_ratio=acceptances / arrivals if arrivals else 0.0,
                revenue=revenue,
                cost=cost,
                revenue_cost_ratio=revenue / cost if cost > 0 else 0.0,
                cpu_utilization=cpu,
                link_utilization=bw,
                embedding_messages=embedding_messages,
                embedded_messages=embedded_messages,
            )
        )

    epoch = 0

    def flush_samples(up_to: float) -> None:
        # epochs at k*interval, covering events with time <= the epoch
        nonlocal epoch
        while True:
            next_time = (epoch + 1) * cfg.sampling_interval
            if next_time > cfg.duration or next_time >= up_to:
                break
            epoch += 1
            sample(next_time)

    # departures past the horizon stay queued; the wind-down below releases them
    while events and events[0][0] <= cfg.duration:
        when, kind, request_id, payload = heapq.heappop(events)
        flush_samples(when)
        if kind == _DEPARTURE:
            release(net, request_id, ledger)
            continue
        vnr, primary = payload
        arrivals += 1
        digest.update(vnr.fingerprint().encode())
        accepted = False
        solution = None
        req_embedding = req_embedded = 0
        if cfg.algorithm == "devine":
            result = run_election(
                net, vnr, primary, cfg.election, rng=leader_rng, ledger=ledger
            )
            accepted = result.accepted
            solution = result.solution
            req_embedding = result.trace.embedding_count
            req_embedded = result.trace.embedded_count
            embedding_messages += req_embedding
            embedded_messages += req_embedded
            if len(traces) < cfg.trace_sample:
                traces.append(result.trace)
        else:
            if cfg.algorithm == "firstfit":
                outcome = first_fit(net, vnr, embed_params)
            elif cfg.algorithm == "bestfit":
                outcome = best_fit(net, vnr, embed_params)
            else:
                outcome = grc_embed(net, vnr, cfg.grc, embed_params)
            if outcome.feasible and verify_solution(
                net, vnr, outcome.solution, injective=embed_params.injective
            ) is None:
                allocate(net, vnr, outcome.solution, ledger, injective=embed_params.injective)
                accepted = True
                solution = outcome.solution
        if accepted:
            acceptances += 1
            revenue += solution.revenue
            cost += solution.cost
            heapq.heappush(
                events, (vnr.arrival_time + vnr.lifetime, _DEPARTURE, request_id, None)
            )
        per_arrival.append(
            ArrivalRecord(
                request_id=request_id,
                time=when,
                vnr_hash=vnr.fingerprint(),
                accepted=accepted,
                acceptance_ratio=acceptances / arrivals,
                revenue=solution.revenue if accepted else 0.0,
                cost=solution.cost if accepted else 0.0,
                metric=solution.metric if accepted else 0.0,
                embedding_messages=req_embedding,
                embedded_messages=req_embedded,
            )
        )

    flush_samples(math.inf)
    if cfg.duration > 0 and (not series or series[-1].time < cfg.duration):
        sample(cfg.duration)

    summary = {
        "algorithm": cfg.algorithm,
        "seed": cfg.seed,
        "servers": net.num_nodes,
        "links": net.num_links,
        "duration": cfg.duration,
        "arrivals": arrivals,
        "acceptances": acceptances,
        "acceptance_ratio": acceptances / arrivals if arrivals else 0.0,
        "revenue": revenue,
        "cost": cost,
        "revenue_cost_ratio": revenue / cost if cost > 0 else 0.0,
        "mean_cpu_utilization": (
            sum(s.cpu_utilization for s in series) / len(series) if series else 0.0
        ),
        "mean_link_utilization": (
            sum(s.link_utilization for s in series) / len(series) if series else 0.0
        ),
        "embedding_messages": embedding_messages,
        "embedded_messages": embedded_messages,
        "workload_digest": digest.hexdigest(),
    }

    # wind down: everything still embedded leaves, and the substrate must
    # return to its exact initial capacities
    for request_id in ledger.live_requests():
        release(net, request_id, ledger)
    problems = conservation_violations(net, ledger)
    for node in net.nodes:
        if node.residual != node.capacity:
            problems.append(f"node {node.id} did not return to capacity")
    for link in net.links:
        if link.bw_residual_m != link.bw_capacity_m:
            problems.append(f"link ({link.u}, {link.v}) did not return to capacity")
    if problems:
        raise SimulationError("conservation broken: " + "; ".join(problems[:5]))
    summary["conservation_ok"] = True
    return SimulationResult(series, per_arrival, summary, traces)


def compare_algorithms(
    cfg: SimConfig, algorithms: list[str], seeds: list[int]
) -> tuple[list[dict], list[dict]]:
    """Cross product of algorithms and seeds on identical workloads.

    Returns per-run summary rows and per-algorithm aggregates. Raises if any
    two algorithms saw different workloads for the same seed.
    """
    if not algorithms or not seeds:
        raise ValueError("need at least one algorithm and one seed")
    rows = []
    for seed in seeds:
        digests = {}
        for algorithm in algorithms:
            run_cfg = replace(cfg, algorithm=algorithm, seed=seed)
            result = run_simulation(run_cfg)
            rows.append(result.summary)
            digests[algorithm] = result.summary["workload_digest"]
        if len(set(digests.values())) != 1:
            raise SimulationError(f"workload digests diverged for seed {seed}: {digests}")

    def median(values: list[float]) -> float:
        ordered = sorted(values)
        mid = len(ordered) // 2
        if len(ordered) % 2:
            return ordered[mid]
        return (ordered[mid - 1] + ordered[mid]) / 2.0

    aggregates = []
    for algorithm in algorithms:
        mine = [row for row in rows if row["algorithm"] == algorithm]
        aggregates.append(
            {
                "algorithm": algorithm,
                "runs": len(mine),
                "median_acceptance_ratio": median([r["acceptance_ratio"] for r in mine]),
                "median_revenue_cost_ratio": median([r["revenue_cost_ratio"] for r in mine]),
                "mean_revenue": sum(r["revenue"] for r in mine) / len(mine),
                "mean_cost": sum(r["cost"] for r in mine) / len(mine),
                "mean_cpu_utilization": sum(r["mean_cpu_utilization"] for r in mine) / len(mine),
                "mean_link_utilization": sum(r["mean_link_utilization"] for r in mine) / len(mine),
            }
        )
    return rows, aggregates
