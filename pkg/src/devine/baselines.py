"""Centralized comparison embedders.

All three share the demand-ordered virtual queue and the path mapper used
by the local embedder, but pick substrate nodes by capacity alone and give
up on the first link that cannot be routed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .embedding import EmbeddingSolution, cost_of, metric_of, revenue_of
from .local_embed import LocalEmbedOutcome, LocalEmbedParams, _Scratch, demand_order
from .model import PhysicalNetwork, Vnr


class BaselineKind(str, Enum):
    FIRST_FIT = "firstfit"
    BEST_FIT = "bestfit"
    GRC = "grc"


class ConvergenceError(RuntimeError):
    """Raised when rank iteration fails to settle within the iteration cap."""


@dataclass(frozen=True)
class GrcParams:
    damping: float = 0.85
    tolerance: float = 1e-9
    max_iterations: int = 500

    def validate(self) -> None:
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def _finish(scratch: _Scratch, vnr: Vnr, params: LocalEmbedParams, inspected: int) -> LocalEmbedOutcome:
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
    return LocalEmbedOutcome(True, solution, inspected, 0)


def _greedy_by_choice(
    net: PhysicalNetwork,
    vnr: Vnr,
    params: LocalEmbedParams,
    choose,
) -> LocalEmbedOutcome:
    """Map each queued virtual node to choose()'s pick; any link failure rejects."""
    params.validate()
    scratch = _Scratch(net, vnr, params.injective)
    hop_limit = params.hop_limit()
    inspected = 0
    for vid in demand_order(vnr):
        pid, scanned = choose(scratch, vid)
        inspected += scanned
        if pid is None:
            return LocalEmbedOutcome(False, None, inspected, 0)
        if not scratch.try_place(vid, pid, hop_limit):
            # node capacity already checked, so a link refused to route
            return LocalEmbedOutcome(False, None, inspected, 0)
    return _finish(scratch, vnr, params, inspected)


def first_fit(
    net: PhysicalNetwork, vnr: Vnr, params: LocalEmbedParams | None = None
) -> LocalEmbedOutcome:
    """Lowest-id substrate node whose residual fits, links routed as placed."""
    params = params or LocalEmbedParams()

    def choose(scratch, vid):
        for pid in range(net.num_nodes):
            if scratch.node_fits(vid, pid):
                return pid, pid + 1
        return None, net.num_nodes

    return _greedy_by_choice(net, vnr, params, choose)


def best_fit(
    net: PhysicalNetwork, vnr: Vnr, params: LocalEmbedParams | None = None
) -> LocalEmbedOutcome:
    """Fitting substrate node with maximum effective residual CPU, ties by id."""
    params = params or LocalEmbedParams()

    def choose(scratch, vid):
        best_pid = None
        best_cpu = -1
        for pid in range(net.num_nodes):
            if not scratch.node_fits(vid, pid):
                continue
            used = scratch.node_usage.get(pid)
            cpu_m = net.nodes[pid].residual.cpu_m - (used[0] if used else 0)
            if cpu_m > best_cpu:
                best_cpu = cpu_m
                best_pid = pid
        return best_pid, net.num_nodes

    return _greedy_by_choice(net, vnr, params, choose)


def _power_rank(
    weights: np.ndarray,
    edges: list[tuple[int, int, int]],
    params: GrcParams,
) -> np.ndarray:
    """Damped fixed point r = (1-d)*c + d*T*r on an undirected weighted graph.

    c is `weights` normalized to sum 1; column j of T spreads over j's
    neighbors proportionally to edge weight, or uniformly when all of j's
    incident weight is zero (keeps T column-stochastic, so ranks sum to 1).
    """
    n = len(weights)
    total = weights.sum()
    c = np.full(n, 1.0 / n) if total <= 0 else weights / total
    if n == 1:
        return c.copy()
    transition = np.zeros((n, n))
    for u, v, w in edges:
        transition[u, v] += w
        transition[v, u] += w
    col_sums = transition.sum(axis=0)
    degree = np.zeros(n)
    for u, v, _ in edges:
        degree[u] += 1
        degree[v] += 1
    for j in range(n):
        if col_sums[j] > 0:
            transition[:, j] /= col_sums[j]
        elif degree[j] > 0:
            for u, v, _ in edges:
                if u == j:
                    transition[v, j] = 1.0 / degree[j]
                elif v == j:
                    transition[u, j] = 1.0 / degree[j]
    d = params.damping
    rank = c.copy()
    for _ in range(params.max_iterations):
        updated = (1.0 - d) * c + d * (transition @ rank)
        if np.max(np.abs(updated - rank)) < params.tolerance:
            return updated
        rank = updated
    raise ConvergenceError(
        f"rank iteration did not reach {params.tolerance} within {params.max_iterations} steps"
    )


def grc_rank(net: PhysicalNetwork, params: GrcParams | None = None) -> np.ndarray:
    """Global resource-capacity rank of substrate nodes (sums to 1)."""
    params = params or GrcParams()
    params.validate()
    weights = np.array([n.residual.cpu_m for n in net.nodes], dtype=float)
    edges = [(l.u, l.v, l.bw_residual_m) for l in net.links]
    return _power_rank(weights, edges, params)


def _vnr_rank(vnr: Vnr, params: GrcParams) -> np.ndarray:
    weights = np.array([n.demand.cpu_m for n in vnr.nodes], dtype=float)
    edges = [(l.u, l.v, l.bw_demand_m) for l in vnr.links]
    return _power_rank(weights, edges, params)


def grc_embed(
    net: PhysicalNetwork,
    vnr: Vnr,
    grc_params: GrcParams | None = None,
    params: LocalEmbedParams | None = None,
) -> LocalEmbedOutcome:
    """Rank-ordered greedy mapping: high-rank demand onto high-rank capacity."""
    grc_params = grc_params or GrcParams()
    grc_params.validate()
    params = params or LocalEmbedParams()
    net_rank = grc_rank(net, grc_params)
    vnr_rank = _vnr_rank(vnr, grc_params)
    phys_order = sorted(range(net.num_nodes), key=lambda pid: (-net_rank[pid], pid))
    virt_order = sorted(range(vnr.num_nodes), key=lambda vid: (-vnr_rank[vid], vid))

    params.validate()
    scratch = _Scratch(net, vnr, params.injective)
    hop_limit = params.hop_limit()
    inspected = 0
    for vid in virt_order:
        chosen = None
        for pid in phys_order:
            inspected += 1
            if scratch.node_fits(vid, pid):
                chosen = pid
                break
        if chosen is None or not scratch.try_place(vid, chosen, hop_limit):
            return LocalEmbedOutcome(False, None, inspected, 0)
    return _finish(scratch, vnr, params, inspected)
