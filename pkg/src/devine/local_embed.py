"""Bounded breadth-first local embedding.

A candidate leader walks the substrate outward from its own node, greedily
packing virtual nodes sorted by total demand, and routes each virtual link
as soon as both endpoints are placed.  The walk is capped by a node budget
(ceil(alpha * request size)) and a depth limit (beta); there is no
backtracking, so a failed request is simply reported infeasible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .embedding import EmbeddingSolution, cost_of, metric_of, revenue_of
from .model import PhysicalNetwork, Vnr

INFEASIBLE = float("-inf")


@dataclass(frozen=True)
class LocalEmbedParams:
    """Search caps and pricing weights for one local embedding attempt."""

    alpha: float = 30.0
    beta: int = 3
    x: float = 1.0
    y: float = 1.0
    path_hop_limit: int | None = None  # None means 2 * beta
    injective: bool = False

    def hop_limit(self) -> int:
        return 2 * self.beta if self.path_hop_limit is None else self.path_hop_limit

    def validate(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.path_hop_limit is not None and self.path_hop_limit < 0:
            raise ValueError("path_hop_limit must be non-negative")


@dataclass
class LocalEmbedOutcome:
    """Result of one bounded search, feasible or not."""

    feasible: bool
    solution: EmbeddingSolution | None
    inspected_count: int
    max_depth_reached: int

    def metric(self) -> float:
        """Solution metric, or the -inf sentinel when infeasible."""
        return self.solution.metric if self.feasible else INFEASIBLE


def demand_order(vnr: Vnr) -> list[int]:
    """Virtual node ids by descending cpu+memory+gpu+incident bandwidth, ties by id."""
    def key(vid: int):
        demand = vnr.nodes[vid].demand
        total = demand.cpu_m + demand.memory_m + demand.gpu_m
        return (-(total + vnr.incident_bandwidth_m(vid)), vid)

    return sorted(range(vnr.num_nodes), key=key)


def map_link(
    net: PhysicalNetwork,
    src: int,
    dst: int,
    bw_demand_m: int,
    hop_limit: int,
    reserved: dict[int, int] | None = None,
) -> tuple[int, ...] | None:
    """Shortest feasible path from src to dst, or None.

    Links must carry the demand on top of any tentative reservations
    (`reserved` maps link index to milli-units already claimed).  Among
    shortest paths the lexicographically smallest node sequence wins.
    Co-located endpoints yield the zero-hop path (src,).
    """
    if src == dst:
        return (src,)
    if hop_limit < 1:
        return None
    reserved = reserved or {}
    links = net.links
    adjacency = net.adjacency

    def usable(link_idx: int) -> bool:
        return links[link_idx].bw_residual_m - reserved.get(link_idx, 0) >= bw_demand_m

    # breadth-first levels from dst so the greedy walk below can descend
    dist = {dst: 0}
    frontier = [dst]
    level = 0
    found = False
    while frontier and level < hop_limit and not found:
        level += 1
        nxt = []
        for here in frontier:
            for nb, link_idx in adjacency[here].items():
                if nb not in dist and usable(link_idx):
                    dist[nb] = level
                    if nb == src:
                        found = True
                    nxt.append(nb)
        frontier = nxt
    if not found:
        return None

    # lexicographically smallest shortest path: always step to the
    # smallest-id neighbor one level closer to dst
    path = [src]
    here = src
    for step in range(dist[src] - 1, -1, -1):
        nxt = None
        for nb in net.neighbors(here):  # ascending ids
            if dist.get(nb) == step and usable(adjacency[here][nb]):
                nxt = nb
                break
        if nxt is None:  # cannot happen on a consistent level map
            return None
        path.append(nxt)
        here = nxt
    return tuple(path)


class _Scratch:
    """Tentative placements layered over live residuals, cheap to roll back."""

    def __init__(self, net: PhysicalNetwork, vnr: Vnr, injective: bool):
        self.net = net
        self.vnr = vnr
        self.injective = injective
        self.placement: dict[int, int] = {}
        self.paths: dict[int, tuple[int, ...]] = {}
        self.node_usage: dict[int, list[int]] = {}
        self.reserved: dict[int, int] = {}

    def node_fits(self, vid: int, pid: int) -> bool:
        if self.injective and pid in self.placement.values():
            return False
        demand = self.vnr.nodes[vid].demand
        residual = self.net.nodes[pid].residual
        used = self.node_usage.get(pid)
        if used is None:
            used = (0, 0, 0)
        return (
            demand.cpu_m <= residual.cpu_m - used[0]
            and demand.memory_m <= residual.memory_m - used[1]
            and demand.gpu_m <= residual.gpu_m - used[2]
        )

    def reserve_path(self, link_idx: int, path: tuple[int, ...], bw_m: int) -> None:
        self.paths[link_idx] = path
        for a, b in zip(path, path[1:]):
            phys_idx = self.net.adjacency[a][b]
            self.reserved[phys_idx] = self.reserved.get(phys_idx, 0) + bw_m

    def unreserve_path(self, link_idx: int, bw_m: int) -> None:
        path = self.paths.pop(link_idx)
        for a, b in zip(path, path[1:]):
            phys_idx = self.net.adjacency[a][b]
            self.reserved[phys_idx] -= bw_m

    def try_place(self, vid: int, pid: int, hop_limit: int) -> bool:
        """Place vid on pid if capacity and all links to placed peers allow it."""
        if not self.node_fits(vid, pid):
            return False
        routed: list[tuple[int, int]] = []
        for other, link_idx in sorted(self.vnr.adjacency[vid].items(), key=lambda kv: kv[1]):
            peer = self.placement.get(other)
            if peer is None:
                continue
            bw_m = self.vnr.links[link_idx].bw_demand_m
            path = map_link(self.net, peer, pid, bw_m, hop_limit, self.reserved)
            if path is None:
                for idx, bw in routed:
                    self.unreserve_path(idx, bw)
                return False
            self.reserve_path(link_idx, path, bw_m)
            routed.append((link_idx, bw_m))
        demand = self.vnr.nodes[vid].demand
        used = self.node_usage.setdefault(pid, [0, 0, 0])
        used[0] += demand.cpu_m
        used[1] += demand.memory_m
        used[2] += demand.gpu_m
        self.placement[vid] = pid
        return True


def embed(
    root: int,
    net: PhysicalNetwork,
    vnr: Vnr,
    params: LocalEmbedParams | None = None,
) -> LocalEmbedOutcome:
    """Bounded BFS embedding rooted at one substrate node.

    Does not mutate the network; the caller allocates the returned solution
    if it wins.
    """
    params = params or LocalEmbedParams()
    params.validate()
    if not 0 <= root < net.num_nodes:
        raise ValueError(f"unknown root node {root}")

    budget = math.ceil(params.alpha * vnr.num_nodes)
    hop_limit = params.hop_limit()
    remaining = deque(demand_order(vnr))
    scratch = _Scratch(net, vnr, params.injective)

    visited = {root}
    queue = deque([(root, 0)])
    inspected = 0
    max_depth = 0
    while queue and remaining and inspected < budget:
        here, depth = queue.popleft()
        inspected += 1
        if depth > max_depth:
            max_depth = depth
        # front-to-back greedy pass: skip individual misfits, keep scanning
        for vid in list(remaining):
            if scratch.try_place(vid, here, hop_limit):
                remaining.remove(vid)
        if depth < params.beta:
            for nb in net.neighbors(here):
                if nb not in visited:
                    visited.add(nb)
                    queue.append((nb, depth + 1))

    if remaining:
        return LocalEmbedOutcome(False, None, inspected, max_depth)

    revenue = revenue_of(vnr)
    solution = EmbeddingSolution(
        request_id=vnr.request_id,
        node_mapping=dict(sorted(scratch.placement.items())),
        path_mapping=dict(sorted(scratch.paths.items())),
        revenue=revenue,
        cost=0.0,
        metric=0.0,
    )
    solution.cost = cost_of(vnr, solution)
    solution.metric = metric_of(revenue, solution.cost, params.x, params.y)
    return LocalEmbedOutcome(True, solution, inspected, max_depth)
