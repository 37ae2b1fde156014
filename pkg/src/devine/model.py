"""Substrate and virtual network domain types.

Resource amounts (CPU cores, memory GBytes, GPU cores, bandwidth Mbps) are
stored as scaled integers with 3 decimal places, so repeated allocate and
release cycles restore residual capacities exactly, with no float drift.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

SCALE = 1000  # fixed-point denominator, 3 decimal places


def to_milli(value: float) -> int:
    """Quantize an amount to integer milli-units."""
    return round(value * SCALE)


def from_milli(units: int) -> float:
    return units / SCALE


class ResourceVector:
    """Non-negative (cpu, memory, gpu) amounts with fixed-point arithmetic."""

    __slots__ = ("cpu_m", "memory_m", "gpu_m")

    def __init__(self, cpu: float = 0.0, memory: float = 0.0, gpu: float = 0.0):
        self.cpu_m = to_milli(cpu)
        self.memory_m = to_milli(memory)
        self.gpu_m = to_milli(gpu)
        if min(self.cpu_m, self.memory_m, self.gpu_m) < 0:
            raise ValueError(f"resource amounts must be non-negative, got {self!r}")

    @classmethod
    def from_milli_units(cls, cpu_m: int, memory_m: int, gpu_m: int) -> ResourceVector:
        if min(cpu_m, memory_m, gpu_m) < 0:
            raise ValueError("resource amounts must be non-negative")
        rv = cls.__new__(cls)
        rv.cpu_m = cpu_m
        rv.memory_m = memory_m
        rv.gpu_m = gpu_m
        return rv

    @property
    def cpu(self) -> float:
        return self.cpu_m / SCALE

    @property
    def memory(self) -> float:
        return self.memory_m / SCALE

    @property
    def gpu(self) -> float:
        return self.gpu_m / SCALE

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector.from_milli_units(
            self.cpu_m + other.cpu_m,
            self.memory_m + other.memory_m,
            self.gpu_m + other.gpu_m,
        )

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        # going negative is an error, never a clamp
        cpu_m = self.cpu_m - other.cpu_m
        memory_m = self.memory_m - other.memory_m
        gpu_m = self.gpu_m - other.gpu_m
        if min(cpu_m, memory_m, gpu_m) < 0:
            raise ValueError(f"subtraction would go negative: {self!r} - {other!r}")
        return ResourceVector.from_milli_units(cpu_m, memory_m, gpu_m)

    def fits_within(self, other: ResourceVector) -> bool:
        """Componentwise self <= other."""
        return (
            self.cpu_m <= other.cpu_m
            and self.memory_m <= other.memory_m
            and self.gpu_m <= other.gpu_m
        )

    def is_zero(self) -> bool:
        return self.cpu_m == 0 and self.memory_m == 0 and self.gpu_m == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResourceVector):
            return NotImplemented
        return (
            self.cpu_m == other.cpu_m
            and self.memory_m == other.memory_m
            and self.gpu_m == other.gpu_m
        )

    def __hash__(self) -> int:
        return hash((self.cpu_m, self.memory_m, self.gpu_m))

    def __repr__(self) -> str:
        return f"ResourceVector(cpu={self.cpu}, memory={self.memory}, gpu={self.gpu})"


@dataclass
class PhysicalNode:
    """Server with a static capacity and a mutable residual."""

    id: int
    capacity: ResourceVector
    residual: ResourceVector | None = None

    def __post_init__(self):
        if self.residual is None:
            self.residual = self.capacity
        if not self.residual.fits_within(self.capacity):
            raise ValueError(f"residual exceeds capacity on node {self.id}")


class PhysicalLink:
    """Undirected substrate link with fixed-point bandwidth accounting."""

    __slots__ = ("u", "v", "bw_capacity_m", "bw_residual_m")

    def __init__(self, u: int, v: int, bandwidth: float, residual: float | None = None):
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.u, self.v = (u, v) if u < v else (v, u)
        self.bw_capacity_m = to_milli(bandwidth)
        self.bw_residual_m = self.bw_capacity_m if residual is None else to_milli(residual)
        if self.bw_capacity_m < 0 or not 0 <= self.bw_residual_m <= self.bw_capacity_m:
            raise ValueError(f"bandwidth out of range on link ({self.u}, {self.v})")

    @property
    def bandwidth_capacity(self) -> float:
        return self.bw_capacity_m / SCALE

    @property
    def bandwidth_residual(self) -> float:
        return self.bw_residual_m / SCALE

    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)

    def __repr__(self) -> str:
        return (
            f"PhysicalLink({self.u}, {self.v}, bandwidth={self.bandwidth_capacity}, "
            f"residual={self.bandwidth_residual})"
        )


def _build_adjacency(num_nodes: int, links) -> list[dict[int, int]]:
    """Per-node map of neighbor id to link index; rejects duplicates."""
    adjacency: list[dict[int, int]] = [dict() for _ in range(num_nodes)]
    for idx, link in enumerate(links):
        if not (0 <= link.u < num_nodes and 0 <= link.v < num_nodes):
            raise ValueError(f"link ({link.u}, {link.v}) references an unknown node")
        if link.v in adjacency[link.u]:
            raise ValueError(f"duplicate link ({link.u}, {link.v})")
        adjacency[link.u][link.v] = idx
        adjacency[link.v][link.u] = idx
    return adjacency


def _connected(num_nodes: int, adjacency) -> bool:
    if num_nodes <= 1:
        return True
    seen = {0}
    frontier = deque([0])
    while frontier:
        here = frontier.popleft()
        for nb in adjacency[here]:
            if nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return len(seen) == num_nodes


class PhysicalNetwork:
    """Undirected substrate graph with per-node and per-link residuals."""

    def __init__(self, nodes: list[PhysicalNode], links: list[PhysicalLink]):
        ids = [node.id for node in nodes]
        if ids != list(range(len(nodes))):
            raise ValueError("node ids must be dense integers 0..n-1 in order")
        self.nodes = nodes
        self.links = links
        self.adjacency = _build_adjacency(len(nodes), links)
        self._neighbors = [sorted(nbs) for nbs in self.adjacency]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def neighbors(self, node_id: int) -> list[int]:
        """Neighbor ids in ascending order."""
        return self._neighbors[node_id]

    def link_index(self, u: int, v: int) -> int | None:
        return self.adjacency[u].get(v)

    def link_between(self, u: int, v: int) -> PhysicalLink | None:
        idx = self.adjacency[u].get(v)
        return None if idx is None else self.links[idx]

    def is_connected(self) -> bool:
        return _connected(self.num_nodes, self.adjacency)

    def clone(self) -> PhysicalNetwork:
        """Independent copy carrying the current residuals."""
        nodes = [PhysicalNode(n.id, n.capacity, n.residual) for n in self.nodes]
        links = [
            PhysicalLink(l.u, l.v, l.bandwidth_capacity, l.bandwidth_residual)
            for l in self.links
        ]
        return PhysicalNetwork(nodes, links)


@dataclass
class VirtualNode:
    """Requested node with a resource demand vector."""

    id: int
    demand: ResourceVector = field(default_factory=ResourceVector)


class VirtualLink:
    """Undirected virtual link with a fixed-point bandwidth demand."""

    __slots__ = ("u", "v", "bw_demand_m")

    def __init__(self, u: int, v: int, bandwidth: float):
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.u, self.v = (u, v) if u < v else (v, u)
        self.bw_demand_m = to_milli(bandwidth)
        if self.bw_demand_m < 0:
            raise ValueError("bandwidth demand must be non-negative")

    @property
    def bandwidth_demand(self) -> float:
        return self.bw_demand_m / SCALE

    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)

    def __repr__(self) -> str:
        return f"VirtualLink({self.u}, {self.v}, bandwidth={self.bandwidth_demand})"


class Vnr:
    """Virtual network request: node demands, link demands, arrival, lifetime."""

    def __init__(
        self,
        request_id: int,
        nodes: list[VirtualNode],
        links: list[VirtualLink],
        arrival_time: float = 0.0,
        lifetime: float = 1.0,
    ):
        ids = [node.id for node in nodes]
        if ids != list(range(len(nodes))):
            raise ValueError("virtual node ids must be dense integers 0..n-1 in order")
        if not nodes:
            raise ValueError("a request needs at least one virtual node")
        if lifetime <= 0:
            raise ValueError("lifetime must be positive")
        if arrival_time < 0:
            raise ValueError("arrival time must be non-negative")
        self.request_id = request_id
        self.nodes = nodes
        self.links = links
        self.arrival_time = arrival_time
        self.lifetime = lifetime
        self.adjacency = _build_adjacency(len(nodes), links)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def is_connected(self) -> bool:
        return _connected(self.num_nodes, self.adjacency)

    def incident_bandwidth_m(self, node_id: int) -> int:
        """Total demanded bandwidth on links touching node_id, in milli-units."""
        return sum(self.links[idx].bw_demand_m for idx in self.adjacency[node_id].values())

    def fingerprint(self) -> str:
        """Stable digest of the full request, for workload-identity checks."""
        parts = [str(self.request_id), repr(self.arrival_time), repr(self.lifetime)]
        for node in self.nodes:
            d = node.demand
            parts.append(f"n{node.id}:{d.cpu_m},{d.memory_m},{d.gpu_m}")
        for link in self.links:
            parts.append(f"l{link.u}-{link.v}:{link.bw_demand_m}")
        return hashlib.sha256("|".join(parts).encode()).hexdigest()

    def __repr__(self) -> str:
        return (
            f"Vnr(request_id={self.request_id}, nodes={self.num_nodes}, "
            f"links={self.num_links}, arrival={self.arrival_time}, lifetime={self.lifetime})"
        )
