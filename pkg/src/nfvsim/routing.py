"""Minimum-cost routing over the transform: Dijkstra and KMB-style Steiner.

Edge weights are evaluated lazily from the live cost arrays (intra-layer edge
e costs rate * xbar[ref(e)], inter-layer proc * xtilde[ref(e)]), so only the
edges a search actually touches are priced.

Tie-breaking contract: among minimum-cost routes the one with fewer hops wins,
and among those the lexicographically least vertex-id sequence. This is
implemented exactly: a label pass computes (cost, hops) per vertex, then the
route is rebuilt over the "tight" edges (those on some optimal prefix, using
exact float comparisons) by a backward reachability sweep plus a forward walk
that always picks the smallest next vertex id. The returned route's ordered
edge-weight sum equals the label value bit-for-bit.

The hot kernels run under numba when available (set NFVSIM_NO_NUMBA=1 to
force the pure-Python twins, which implement the identical algorithm).
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass

import numpy as np

from .multilayer import INTRA, MultilayerGraph

_HOPS_INF = np.int64(1) << np.int64(60)


class Unreachable(Exception):
    pass


class CostLimitExceeded(Exception):
    """Every route to the target costs more than the given limit."""


# -- kernels (pure Python twins) ---------------------------------------------------


def _labels_py(indptr, edge_dst, kind, ref, xbar, xtilde, rate, proc,
               source, target_mask, n_targets, limit):
    n = len(indptr) - 1
    dist = np.full(n, np.inf)
    hops = np.full(n, _HOPS_INF, dtype=np.int64)
    settled = np.zeros(n, dtype=bool)
    dist[source] = 0.0
    hops[source] = 0
    heap = [(0.0, 0, source)]
    remaining = n_targets
    while heap:
        d, h, v = heapq.heappop(heap)
        if d > limit:
            break
        if settled[v]:
            continue
        settled[v] = True
        if target_mask[v]:
            remaining -= 1
            if remaining == 0:
                break
        for e in range(indptr[v], indptr[v + 1]):
            u = edge_dst[e]
            if settled[u]:
                continue
            w = rate * xbar[ref[e]] if kind[e] == INTRA else proc * xtilde[ref[e]]
            nd = d + w
            nh = h + 1
            if nd <= limit and (nd < dist[u] or (nd == dist[u] and nh < hops[u])):
                dist[u] = nd
                hops[u] = nh
                heapq.heappush(heap, (nd, nh, int(u)))
    return dist, hops


def _reconstruct_py(indptr, edge_dst, kind, ref, xbar, xtilde, rate, proc,
                    dist, hops, rindptr, redge, edge_src, source, target):
    n = len(indptr) - 1
    reach = np.zeros(n, dtype=bool)
    reach[target] = True
    stack = [target]
    while stack:
        v = stack.pop()
        dv = dist[v]
        hv = hops[v]
        for idx in range(rindptr[v], rindptr[v + 1]):
            e = redge[idx]
            u = edge_src[e]
            if reach[u]:
                continue
            w = rate * xbar[ref[e]] if kind[e] == INTRA else proc * xtilde[ref[e]]
            if dist[u] + w == dv and hops[u] + 1 == hv:
                reach[u] = True
                stack.append(int(u))
    path = np.empty(int(hops[target]), dtype=np.int64)
    u = source
    i = 0
    while u != target:
        best_v = -1
        best_e = -1
        du = dist[u]
        hu = hops[u]
        for e in range(indptr[u], indptr[u + 1]):
            v2 = edge_dst[e]
            if (best_v == -1 or v2 < best_v) and reach[v2] and hu + 1 == hops[v2]:
                w = rate * xbar[ref[e]] if kind[e] == INTRA else proc * xtilde[ref[e]]
                if du + w == dist[v2]:
                    best_v = int(v2)
                    best_e = e
        if best_e < 0:
            return path[:0]
        path[i] = best_e
        i += 1
        u = best_v
    return path[:i]


# -- numba kernels ---------------------------------------------------------------

_USE_NUMBA = os.environ.get("NFVSIM_NO_NUMBA", "") == ""
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if _USE_NUMBA:

    @njit(cache=True)
    def _labels_nb(indptr, edge_dst, kind, ref, xbar, xtilde, rate, proc,
                   source, target_mask, n_targets, limit):
        n = len(indptr) - 1
        dist = np.full(n, np.inf)
        hops = np.full(n, _HOPS_INF, dtype=np.int64)
        settled = np.zeros(n, dtype=np.bool_)
        cap = len(edge_dst) + 2
        hd = np.empty(cap)
        hh = np.empty(cap, dtype=np.int64)
        hv = np.empty(cap, dtype=np.int64)
        hd[0] = 0.0
        hh[0] = 0
        hv[0] = source
        size = 1
        dist[source] = 0.0
        hops[source] = 0
        remaining = n_targets
        while size > 0:
            d = hd[0]
            h = hh[0]
            v = hv[0]
            size -= 1
            if size > 0:
                ld = hd[size]
                lh = hh[size]
                lv = hv[size]
                i = 0
                while True:
                    l = 2 * i + 1
                    if l >= size:
                        break
                    r = l + 1
                    m = l
                    if r < size and (
                        hd[r] < hd[l]
                        or (hd[r] == hd[l] and (hh[r] < hh[l]
                            or (hh[r] == hh[l] and hv[r] < hv[l])))
                    ):
                        m = r
                    if (
                        hd[m] < ld
                        or (hd[m] == ld and (hh[m] < lh
                            or (hh[m] == lh and hv[m] < lv)))
                    ):
                        hd[i] = hd[m]
                        hh[i] = hh[m]
                        hv[i] = hv[m]
                        i = m
                    else:
                        break
                hd[i] = ld
                hh[i] = lh
                hv[i] = lv
            if d > limit:
                break
            if settled[v]:
                continue
            settled[v] = True
            if target_mask[v]:
                remaining -= 1
                if remaining == 0:
                    break
            for e in range(indptr[v], indptr[v + 1]):
                u = edge_dst[e]
                if settled[u]:
                    continue
                if kind[e] == 0:
                    w = rate * xbar[ref[e]]
                else:
                    w = proc * xtilde[ref[e]]
                nd = d + w
                nh = h + 1
                if nd <= limit and (nd < dist[u] or (nd == dist[u] and nh < hops[u])):
                    dist[u] = nd
                    hops[u] = nh
                    i = size
                    size += 1
                    while i > 0:
                        p = (i - 1) // 2
                        if (
                            nd < hd[p]
                            or (nd == hd[p] and (nh < hh[p]
                                or (nh == hh[p] and u < hv[p])))
                        ):
                            hd[i] = hd[p]
                            hh[i] = hh[p]
                            hv[i] = hv[p]
                            i = p
                        else:
                            break
                    hd[i] = nd
                    hh[i] = nh
                    hv[i] = u
        return dist, hops

    @njit(cache=True)
    def _reconstruct_nb(indptr, edge_dst, kind, ref, xbar, xtilde, rate, proc,
                        dist, hops, rindptr, redge, edge_src, source, target):
        n = len(indptr) - 1
        reach = np.zeros(n, dtype=np.bool_)
        reach[target] = True
        stack = np.empty(n, dtype=np.int64)
        stack[0] = target
        sp = 1
        while sp > 0:
            sp -= 1
            v = stack[sp]
            dv = dist[v]
            hvv = hops[v]
            for idx in range(rindptr[v], rindptr[v + 1]):
                e = redge[idx]
                u = edge_src[e]
                if reach[u]:
                    continue
                if kind[e] == 0:
                    w = rate * xbar[ref[e]]
                else:
                    w = proc * xtilde[ref[e]]
                if dist[u] + w == dv and hops[u] + 1 == hvv:
                    reach[u] = True
                    stack[sp] = u
                    sp += 1
        path = np.empty(int(hops[target]), dtype=np.int64)
        u = np.int64(source)
        i = 0
        while u != target:
            best_v = np.int64(-1)
            best_e = np.int64(-1)
            du = dist[u]
            hu = hops[u]
            for e in range(indptr[u], indptr[u + 1]):
                v2 = edge_dst[e]
                if (best_v == -1 or v2 < best_v) and reach[v2] and hu + 1 == hops[v2]:
                    if kind[e] == 0:
                        w = rate * xbar[ref[e]]
                    else:
                        w = proc * xtilde[ref[e]]
                    if du + w == dist[v2]:
                        best_v = np.int64(v2)
                        best_e = np.int64(e)
            if best_e < 0:
                return path[:0]
            path[i] = best_e
            i += 1
            u = best_v
        return path[:i]


if _USE_NUMBA:
    _labels = _labels_nb
    _reconstruct = _reconstruct_nb
else:
    _labels = _labels_py
    _reconstruct = _reconstruct_py


# -- public API --------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Route:
    """A multilayer route: ordered edge indices for paths, sorted for trees."""

    edges: tuple[int, ...]
    cost: float
    is_tree: bool = False


ROUTE_OK = 0
ROUTE_PRUNED = 1
ROUTE_UNREACHABLE = 2


class EdgeCosts:
    """Per-edge weight view over cost arrays for one request's (rate, proc).

    For synthetic weights in tests, pass explicit xbar/xtilde arrays (indexed
    by substrate link id and node id respectively).
    """

    __slots__ = ("xbar", "xtilde", "rate", "proc")

    def __init__(self, xbar: np.ndarray, xtilde: np.ndarray, rate: float = 1.0, proc: float = 1.0):
        self.xbar = xbar
        self.xtilde = xtilde
        self.rate = float(rate)
        self.proc = float(proc)

    def weight(self, mlg: MultilayerGraph, e: int) -> float:
        if mlg.edge_kind[e] == INTRA:
            return self.rate * self.xbar[mlg.edge_ref[e]]
        return self.proc * self.xtilde[mlg.edge_ref[e]]

    def total(self, mlg: MultilayerGraph, edges) -> float:
        return float(sum(self.weight(mlg, e) for e in edges))

    @classmethod
    def unit(cls, substrate) -> "EdgeCosts":
        return cls(
            np.ones(substrate.num_links), np.ones(substrate.num_nodes), 1.0, 1.0
        )


def try_shortest_path(
    mlg: MultilayerGraph,
    costs: EdgeCosts,
    source: int,
    target: int,
    cost_limit: float = np.inf,
) -> tuple[Route | None, int]:
    """shortest_path without exceptions: (route, ROUTE_OK) on success, else
    (None, ROUTE_PRUNED | ROUTE_UNREACHABLE)."""
    mask = mlg._mask_scratch
    mask[target] = True
    try:
        dist, hops = _labels(
            mlg.indptr, mlg.edge_dst, mlg.edge_kind, mlg.edge_ref,
            costs.xbar, costs.xtilde, costs.rate, costs.proc,
            source, mask, 1, cost_limit,
        )
    finally:
        mask[target] = False
    if math.isinf(dist[target]):
        if not math.isinf(cost_limit):
            return None, ROUTE_PRUNED
        return None, ROUTE_UNREACHABLE
    edges = _reconstruct(
        mlg.indptr, mlg.edge_dst, mlg.edge_kind, mlg.edge_ref,
        costs.xbar, costs.xtilde, costs.rate, costs.proc,
        dist, hops, mlg.rindptr, mlg.redge, mlg.edge_src, source, target,
    )
    if len(edges) != hops[target]:
        raise AssertionError("route reconstruction failed")
    return Route(tuple(int(e) for e in edges), float(dist[target])), ROUTE_OK


def shortest_path(
    mlg: MultilayerGraph,
    costs: EdgeCosts,
    source: int,
    target: int,
    cost_limit: float = np.inf,
) -> Route:
    """Minimum-weight source-to-target path in the transform.

    With a finite cost_limit the search is pruned once every remaining route
    provably costs more than the limit, raising CostLimitExceeded; the found
    route (when returned) is identical to the unpruned one.
    """
    route, status = try_shortest_path(mlg, costs, source, target, cost_limit)
    if status == ROUTE_PRUNED:
        raise CostLimitExceeded(
            f"all routes to vertex {target} cost more than {cost_limit}"
        )
    if status == ROUTE_UNREACHABLE:
        raise Unreachable(f"no path from vertex {source} to {target}")
    return route


def _sp_tree_within(mlg, costs, edge_subset, source):
    """Shortest-path arborescence from source restricted to an edge subset."""
    adj: dict[int, list[int]] = {}
    for e in edge_subset:
        adj.setdefault(int(mlg.edge_src[e]), []).append(e)
    for lst in adj.values():
        lst.sort(key=lambda e: (int(mlg.edge_dst[e]), e))
    dist = {source: 0.0}
    hops = {source: 0}
    pred_edge: dict[int, int] = {}
    settled = set()
    heap = [(0.0, 0, source)]
    while heap:
        d, h, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        for e in adj.get(v, ()):
            u = int(mlg.edge_dst[e])
            if u in settled:
                continue
            nd = d + costs.weight(mlg, e)
            nh = h + 1
            cur = (dist.get(u, np.inf), hops.get(u, int(_HOPS_INF)))
            if (nd, nh) < cur:
                dist[u] = nd
                hops[u] = nh
                pred_edge[u] = e
                heapq.heappush(heap, (nd, nh, u))
    return pred_edge


def steiner_tree(
    mlg: MultilayerGraph, costs: EdgeCosts, source: int, terminals
) -> Route:
    """KMB-style directed Steiner tree rooted at source spanning all terminals.

    Closure distances are directed away from the root; the closure MST is
    grown Prim-style from the root, closure edges expand to their underlying
    shortest paths, the deduplicated union is reduced to a shortest-path
    arborescence (never costlier), and non-terminal leaves are pruned. Each
    multilayer edge is charged once in the returned cost.
    """
    terminals = sorted(set(int(t) for t in terminals))
    if not terminals:
        raise ValueError("terminals must be non-empty")
    closure = [source] + [t for t in terminals if t != source]
    mask = np.zeros(mlg.num_vertices, dtype=bool)
    for v in closure:
        mask[v] = True
    labels_by: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for a in closure:
        labels_by[a] = _labels(
            mlg.indptr, mlg.edge_dst, mlg.edge_kind, mlg.edge_ref,
            costs.xbar, costs.xtilde, costs.rate, costs.proc,
            a, mask, len(closure), np.inf,
        )
    dist_s = labels_by[source][0]
    for t in terminals:
        if not np.isfinite(dist_s[t]):
            raise Unreachable(f"terminal vertex {t} unreachable from {source}")

    # Prim growth over the closure, keyed (dist, hops, new vertex, tree vertex).
    in_tree = [source]
    pending = [t for t in terminals if t != source]
    chosen: list[tuple[int, int]] = []
    while pending:
        best = None
        for u in in_tree:
            du, hu = labels_by[u]
            for v in pending:
                key = (du[v], int(hu[v]), v, u)
                if best is None or key < best:
                    best = key
        if best is None or not np.isfinite(best[0]):
            raise Unreachable("closure disconnected")
        _, _, v, u = best
        chosen.append((u, v))
        in_tree.append(v)
        pending.remove(v)

    edge_union: set[int] = set()
    for u, v in chosen:
        du, hu = labels_by[u]
        edges = _reconstruct(
            mlg.indptr, mlg.edge_dst, mlg.edge_kind, mlg.edge_ref,
            costs.xbar, costs.xtilde, costs.rate, costs.proc,
            du, hu, mlg.rindptr, mlg.redge, mlg.edge_src, u, v,
        )
        edge_union.update(int(e) for e in edges)

    pred_edge = _sp_tree_within(mlg, costs, edge_union, source)
    tree_edges: set[int] = set()
    for t in terminals:
        v = t
        while v != source:
            e = pred_edge[v]
            if e in tree_edges:
                break
            tree_edges.add(e)
            v = int(mlg.edge_src[e])
    cost = costs.total(mlg, sorted(tree_edges))
    return Route(tuple(sorted(tree_edges)), cost, is_tree=True)


def try_route_request(
    mlg: MultilayerGraph,
    costs: EdgeCosts,
    source_node: int,
    destinations,
    cost_limit: float = np.inf,
) -> tuple[Route | None, int]:
    """Route one request over its transform: Dijkstra if unicast, else Steiner.

    cost_limit applies to unicast only (multicast instances are small).
    """
    s = mlg.source_vertex(source_node)
    terminals = mlg.terminal_vertices(destinations)
    if len(terminals) == 1:
        return try_shortest_path(mlg, costs, s, terminals[0], cost_limit)
    try:
        return steiner_tree(mlg, costs, s, terminals), ROUTE_OK
    except Unreachable:
        return None, ROUTE_UNREACHABLE


def route_request(
    mlg: MultilayerGraph,
    costs: EdgeCosts,
    source_node: int,
    destinations,
    cost_limit: float = np.inf,
) -> Route:
    route, status = try_route_request(mlg, costs, source_node, destinations, cost_limit)
    if status == ROUTE_PRUNED:
        raise CostLimitExceeded("all routes cost more than the limit")
    if status == ROUTE_UNREACHABLE:
        raise Unreachable("no route to every destination")
    return route


def using_numba() -> bool:
    return _USE_NUMBA
