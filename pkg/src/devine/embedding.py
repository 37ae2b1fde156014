"""Embedding solutions: pricing, verification, and reversible allocation.

Revenue counts CPU and bandwidth demands only; memory and GPU are
feasibility constraints.  Cost weights each link demand by the hop length
of its mapped path, so co-located endpoints contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import PhysicalNetwork, ResourceVector, Vnr, from_milli


class AllocationError(RuntimeError):
    """Raised when an allocation is attempted on an invalid solution."""


class LedgerError(RuntimeError):
    """Raised on unknown or duplicate ledger entries."""


@dataclass
class EmbeddingSolution:
    """A complete mapping of one request onto the substrate."""

    request_id: int
    node_mapping: dict[int, int]  # virtual node id -> physical node id
    path_mapping: dict[int, tuple[int, ...]]  # virtual link index -> node path
    revenue: float
    cost: float
    metric: float

    def to_json_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "node_mapping": {str(k): v for k, v in sorted(self.node_mapping.items())},
            "path_mapping": {
                str(k): list(v) for k, v in sorted(self.path_mapping.items())
            },
            "revenue": self.revenue,
            "cost": self.cost,
            "metric": self.metric,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> EmbeddingSolution:
        return cls(
            request_id=data["request_id"],
            node_mapping={int(k): v for k, v in data["node_mapping"].items()},
            path_mapping={int(k): tuple(v) for k, v in data["path_mapping"].items()},
            revenue=data["revenue"],
            cost=data["cost"],
            metric=data["metric"],
        )


@dataclass(frozen=True)
class Violation:
    """First constraint breach found by verify_solution."""

    kind: str  # node-mapping | node-capacity | path | link-capacity
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def revenue_of(vnr: Vnr) -> float:
    """Total CPU demand plus total bandwidth demand."""
    cpu_m = sum(node.demand.cpu_m for node in vnr.nodes)
    bw_m = sum(link.bw_demand_m for link in vnr.links)
    return from_milli(cpu_m + bw_m)


def cost_of(vnr: Vnr, solution: EmbeddingSolution) -> float:
    """Total CPU demand plus bandwidth demand weighted by mapped hop count."""
    cpu_m = sum(node.demand.cpu_m for node in vnr.nodes)
    weighted_m = 0
    for idx, link in enumerate(vnr.links):
        path = solution.path_mapping.get(idx)
        if path is None:
            raise ValueError(f"solution has no path for virtual link {idx}")
        weighted_m += link.bw_demand_m * (len(path) - 1)
    return from_milli(cpu_m + weighted_m)


def metric_of(revenue: float, cost: float, x: float = 1.0, y: float = 1.0) -> float:
    """Weighted profit x*revenue - y*cost used to compare candidate embeddings."""
    return x * revenue - y * cost


def verify_solution(
    net: PhysicalNetwork,
    vnr: Vnr,
    solution: EmbeddingSolution,
    injective: bool = False,
) -> Violation | None:
    """Check a solution against current residuals; None means it can be allocated.

    Checks run in a fixed order and report the first breach: mapping totality,
    aggregated node capacities, path validity, aggregated link capacities.
    """
    mapping = solution.node_mapping
    for vid in range(vnr.num_nodes):
        pid = mapping.get(vid)
        if pid is None:
            return Violation("node-mapping", f"virtual node {vid} is unmapped")
        if not 0 <= pid < net.num_nodes:
            return Violation("node-mapping", f"virtual node {vid} maps to unknown node {pid}")
    for vid in mapping:
        if not 0 <= vid < vnr.num_nodes:
            return Violation("node-mapping", f"mapping names unknown virtual node {vid}")
    if injective and len(set(mapping.values())) != vnr.num_nodes:
        return Violation("node-mapping", "node mapping is not one-to-one")

    node_load: dict[int, list[int]] = {}
    for vid in range(vnr.num_nodes):
        demand = vnr.nodes[vid].demand
        load = node_load.setdefault(mapping[vid], [0, 0, 0])
        load[0] += demand.cpu_m
        load[1] += demand.memory_m
        load[2] += demand.gpu_m
    for pid in sorted(node_load):
        residual = net.nodes[pid].residual
        cpu_m, memory_m, gpu_m = node_load[pid]
        if cpu_m > residual.cpu_m or memory_m > residual.memory_m or gpu_m > residual.gpu_m:
            return Violation("node-capacity", f"aggregate demand exceeds residual on node {pid}")

    link_load: dict[int, int] = {}
    for idx, vlink in enumerate(vnr.links):
        path = solution.path_mapping.get(idx)
        if path is None:
            return Violation("path", f"virtual link {idx} has no path")
        if len(path) < 1:
            return Violation("path", f"virtual link {idx} has an empty path")
        if len(set(path)) != len(path):
            return Violation("path", f"path for virtual link {idx} repeats a node")
        ends = {mapping[vlink.u], mapping[vlink.v]}
        if len(path) == 1:
            if ends != {path[0]}:
                return Violation("path", f"single-node path for link {idx} misses its endpoints")
            continue
        if {path[0], path[-1]} != ends:
            return Violation("path", f"path for virtual link {idx} misses its endpoints")
        for a, b in zip(path, path[1:]):
            link_idx = net.link_index(a, b) if 0 <= a < net.num_nodes and 0 <= b < net.num_nodes else None
            if link_idx is None:
                return Violation("path", f"path for virtual link {idx} uses missing link ({a}, {b})")
            link_load[link_idx] = link_load.get(link_idx, 0) + vlink.bw_demand_m
    for link_idx in sorted(link_load):
        link = net.links[link_idx]
        if link_load[link_idx] > link.bw_residual_m:
            return Violation(
                "link-capacity",
                f"aggregate bandwidth exceeds residual on link ({link.u}, {link.v})",
            )
    return None


@dataclass
class LedgerEntry:
    """Exact deltas applied for one request, for later reversal."""

    node_deltas: dict[int, tuple[int, int, int]] = field(default_factory=dict)
    link_deltas: dict[int, int] = field(default_factory=dict)


class AllocationLedger:
    """Per-request record of applied deltas so releases are exact."""

    def __init__(self):
        self.entries: dict[int, LedgerEntry] = {}

    def __contains__(self, request_id: int) -> bool:
        return request_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def live_requests(self) -> list[int]:
        return sorted(self.entries)


def _solution_deltas(vnr: Vnr, solution: EmbeddingSolution, net: PhysicalNetwork) -> LedgerEntry:
    entry = LedgerEntry()
    for vid in range(vnr.num_nodes):
        demand = vnr.nodes[vid].demand
        pid = solution.node_mapping[vid]
        cpu_m, memory_m, gpu_m = entry.node_deltas.get(pid, (0, 0, 0))
        entry.node_deltas[pid] = (
            cpu_m + demand.cpu_m,
            memory_m + demand.memory_m,
            gpu_m + demand.gpu_m,
        )
    for idx, vlink in enumerate(vnr.links):
        path = solution.path_mapping[idx]
        for a, b in zip(path, path[1:]):
            link_idx = net.link_index(a, b)
            entry.link_deltas[link_idx] = entry.link_deltas.get(link_idx, 0) + vlink.bw_demand_m
    return entry


def allocate(
    net: PhysicalNetwork,
    vnr: Vnr,
    solution: EmbeddingSolution,
    ledger: AllocationLedger,
    injective: bool = False,
) -> None:
    """Apply the solution's deltas to residuals and record them in the ledger."""
    if vnr.request_id in ledger:
        raise LedgerError(f"request {vnr.request_id} is already allocated")
    violation = verify_solution(net, vnr, solution, injective=injective)
    if violation is not None:
        raise AllocationError(str(violation))
    entry = _solution_deltas(vnr, solution, net)
    for pid, (cpu_m, memory_m, gpu_m) in entry.node_deltas.items():
        res = net.nodes[pid].residual
        net.nodes[pid].residual = ResourceVector.from_milli_units(
            res.cpu_m - cpu_m, res.memory_m - memory_m, res.gpu_m - gpu_m
        )
    for link_idx, bw_m in entry.link_deltas.items():
        net.links[link_idx].bw_residual_m -= bw_m
    ledger.entries[vnr.request_id] = entry


def release(net: PhysicalNetwork, request_id: int, ledger: AllocationLedger) -> None:
    """Return a request's deltas to the residuals; exact inverse of allocate."""
    entry = ledger.entries.pop(request_id, None)
    if entry is None:
        raise LedgerError(f"request {request_id} is not in the ledger")
    for pid, (cpu_m, memory_m, gpu_m) in entry.node_deltas.items():
        node = net.nodes[pid]
        res = node.residual
        restored = ResourceVector.from_milli_units(
            res.cpu_m + cpu_m, res.memory_m + memory_m, res.gpu_m + gpu_m
        )
        if not restored.fits_within(node.capacity):
            raise LedgerError(f"release would exceed capacity on node {pid}")
        node.residual = restored
    for link_idx, bw_m in entry.link_deltas.items():
        link = net.links[link_idx]
        link.bw_residual_m += bw_m
        if link.bw_residual_m > link.bw_capacity_m:
            raise LedgerError(f"release would exceed capacity on link ({link.u}, {link.v})")


def conservation_violations(net: PhysicalNetwork, ledger: AllocationLedger) -> list[str]:
    """Residuals that disagree with capacity minus outstanding ledger deltas."""
    problems: list[str] = []
    node_out: dict[int, list[int]] = {}
    link_out: dict[int, int] = {}
    for entry in ledger.entries.values():
        for pid, (cpu_m, memory_m, gpu_m) in entry.node_deltas.items():
            acc = node_out.setdefault(pid, [0, 0, 0])
            acc[0] += cpu_m
            acc[1] += memory_m
            acc[2] += gpu_m
        for link_idx, bw_m in entry.link_deltas.items():
            link_out[link_idx] = link_out.get(link_idx, 0) + bw_m
    for pid, node in enumerate(net.nodes):
        held = node_out.get(pid, [0, 0, 0])
        cap = node.capacity
        res = node.residual
        if (
            res.cpu_m != cap.cpu_m - held[0]
            or res.memory_m != cap.memory_m - held[1]
            or res.gpu_m != cap.gpu_m - held[2]
        ):
            problems.append(f"node {pid} residual disagrees with ledger")
    for link_idx, link in enumerate(net.links):
        held = link_out.get(link_idx, 0)
        if link.bw_residual_m != link.bw_capacity_m - held:
            problems.append(f"link ({link.u}, {link.v}) residual disagrees with ledger")
    return problems
