"""Brute-force offline integer optimum for desk-scale competitive checks.

The oracle enumerates, per request and chain variant, every simple path
(unicast) or every rooted Steiner subtree reachable as a union of simple
root-terminal paths (multicast) of the same transform the online algorithm
routes on, then searches all feasible packings by branch and bound. The
integer optimum lower-bounds the fractional offline optimum, so
OPT_int <= 2*max{phi_link,phi_node} * (online profit) is the testable form of
the competitive guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multilayer import MultilayerGraph, TransformCache
from .pricing import PricingParams, profit
from .substrate import FEAS_TOL, Embedding, Substrate
from .workload import ServiceRequest

MAX_NODES = 6
MAX_REQUESTS = 5
MAX_CHAIN = 2
MAX_DESTS = 2
_MAX_PATHS = 200_000
_MAX_SEARCH_NODES = 5_000_000


class BudgetExceeded(RuntimeError):
    pass


def _all_simple_paths(mlg: MultilayerGraph, source: int, target: int) -> list[list[int]]:
    """Every simple source->target path as an edge-index list (DFS order)."""
    paths: list[list[int]] = []
    indptr, dst = mlg.indptr, mlg.edge_dst
    visited = np.zeros(mlg.num_vertices, dtype=bool)
    visited[source] = True
    stack_edges: list[int] = []

    def dfs(v: int) -> None:
        if v == target:
            paths.append(list(stack_edges))
            if len(paths) > _MAX_PATHS:
                raise BudgetExceeded("path enumeration exceeded budget")
            return
        for e in range(indptr[v], indptr[v + 1]):
            u = int(dst[e])
            if visited[u]:
                continue
            visited[u] = True
            stack_edges.append(e)
            dfs(u)
            stack_edges.pop()
            visited[u] = False

    dfs(source)
    return paths


def _tree_unions(mlg: MultilayerGraph, source: int, terminals: list[int]) -> list[tuple[int, ...]]:
    """Edge sets of all arborescences spanning the terminals.

    Built as unions of per-terminal simple paths, keeping only unions where
    every vertex has in-degree <= 1 (exactly the rooted subtrees).
    """
    per_terminal = [_all_simple_paths(mlg, source, t) for t in terminals]
    if len(terminals) == 1:
        return [tuple(sorted(set(p))) for p in per_terminal[0]]
    if len(terminals) != 2:
        raise BudgetExceeded("oracle supports at most 2 destinations")
    # Precompute per-path head maps (vertex -> incoming edge) once.
    lhs = [(frozenset(p), {int(mlg.edge_dst[e]): e for e in p}) for p in per_terminal[0]]
    rhs = [(frozenset(p), tuple((int(mlg.edge_dst[e]), e) for e in p)) for p in per_terminal[1]]
    out: set[tuple[int, ...]] = set()
    for set1, heads1 in lhs:
        get1 = heads1.get
        for set2, heads2 in rhs:
            for v, e in heads2:
                if get1(v, e) != e:
                    break
            else:
                out.add(tuple(sorted(set1 | set2)))
                if len(out) > _MAX_PATHS:
                    raise BudgetExceeded("tree enumeration exceeded budget")
    return sorted(out)


@dataclass(frozen=True)
class _Option:
    total_profit: float
    variant: str
    link_demand: np.ndarray
    node_demand: np.ndarray
    embedding: Embedding


def _embedding_options(
    substrate: Substrate,
    req: ServiceRequest,
    include_be: bool,
    params: PricingParams,
    cache: TransformCache,
) -> list[_Option]:
    chain = req.chain_for(include_be)
    mlg = cache.get(tuple(nf.nf_type for nf in chain))
    s = mlg.source_vertex(req.source)
    terminals = list(mlg.terminal_vertices(req.destinations))
    prof = profit(req, include_be, params)
    variant = "full" if include_be else "mandatory"

    embeddings: list[Embedding] = []
    if len(terminals) == 1:
        for p in _all_simple_paths(mlg, s, terminals[0]):
            embeddings.append(mlg.project_path(p))
    else:
        for edge_set in _tree_unions(mlg, s, terminals):
            embeddings.append(mlg.project_tree(edge_set))

    # Collapse to unique demand vectors, then drop dominated ones (profit does
    # not depend on the embedding, only feasibility does).
    m, n = substrate.num_links, substrate.num_nodes
    unique: dict[bytes, tuple[np.ndarray, np.ndarray, Embedding]] = {}
    for emb in embeddings:
        link_demand = np.zeros(m)
        for l, mult in emb.link_multiplicities().items():
            link_demand[l] = req.rate * mult
        node_demand = np.zeros(n)
        for nd, cnt in emb.node_counts().items():
            node_demand[nd] = req.per_nf_proc * cnt
        key = link_demand.tobytes() + node_demand.tobytes()
        if key not in unique:
            unique[key] = (link_demand, node_demand, emb)
    vecs = list(unique.values())
    # Drop options whose demand vector is dominated componentwise by another
    # (profit is embedding-independent, so dominated options never help).
    demands = np.array([np.concatenate((ld, nd)) for ld, nd, _ in vecs])
    keep: list[tuple[np.ndarray, np.ndarray, Embedding]] = []
    for i, (ld, nd, emb) in enumerate(vecs):
        le = (demands <= demands[i]).all(axis=1)
        le[i] = False
        if not le.any():
            keep.append((ld, nd, emb))
    return [
        _Option(prof.total, variant, ld, nd, emb) for ld, nd, emb in keep
    ]


@dataclass
class OracleResult:
    best_profit: float
    chosen: list[tuple[int, str, Embedding]]   # (request id, variant, embedding)


def offline_optimum(
    substrate: Substrate,
    requests: list[ServiceRequest],
    params: PricingParams,
) -> OracleResult:
    """Exact max-profit integral packing over subsets x variants x embeddings."""
    if substrate.num_nodes > MAX_NODES:
        raise BudgetExceeded(f"substrate has more than {MAX_NODES} nodes")
    if len(requests) > MAX_REQUESTS:
        raise BudgetExceeded(f"more than {MAX_REQUESTS} requests")
    for req in requests:
        if len(req.chain) > MAX_CHAIN:
            raise BudgetExceeded("chain longer than the enumeration guard allows")
        if len(req.destinations) > MAX_DESTS:
            raise BudgetExceeded("more destinations than the enumeration guard allows")

    cache = TransformCache(substrate)
    options: list[list[_Option]] = []
    for req in requests:
        opts: list[_Option] = []
        for include_be in ([True] if req.best_effort_count == 0 else [True, False]):
            opts.extend(_embedding_options(substrate, req, include_be, params, cache))
        opts.sort(key=lambda o: -o.total_profit)
        options.append(opts)

    suffix_max = [0.0] * (len(requests) + 1)
    for i in range(len(requests) - 1, -1, -1):
        best_i = options[i][0].total_profit if options[i] else 0.0
        suffix_max[i] = suffix_max[i + 1] + best_i

    link_cap = substrate.link_capacity + FEAS_TOL
    node_cap = substrate.node_capacity + FEAS_TOL
    best = {"profit": 0.0, "chosen": []}
    nodes_visited = [0]
    chosen: list[tuple[int, str, Embedding] | None] = [None] * len(requests)

    def dfs(i: int, link_used: np.ndarray, node_used: np.ndarray, acc: float) -> None:
        nodes_visited[0] += 1
        if nodes_visited[0] > _MAX_SEARCH_NODES:
            raise BudgetExceeded("packing search exceeded budget")
        if acc + suffix_max[i] <= best["profit"]:
            return
        if i == len(requests):
            if acc > best["profit"]:
                best["profit"] = acc
                best["chosen"] = [c for c in chosen if c is not None]
            return
        for opt in options[i]:
            new_link = link_used + opt.link_demand
            if np.any(new_link > link_cap):
                continue
            new_node = node_used + opt.node_demand
            if np.any(new_node > node_cap):
                continue
            chosen[i] = (requests[i].id, opt.variant, opt.embedding)
            dfs(i + 1, new_link, new_node, acc + opt.total_profit)
            chosen[i] = None
        dfs(i + 1, link_used, node_used, acc)

    dfs(0, np.zeros(substrate.num_links), np.zeros(substrate.num_nodes), 0.0)
    return OracleResult(best["profit"], best["chosen"])


# -- tiny-instance competitive verification -------------------------------------------


def make_tiny_instance(seed: int):
    """Seeded (substrate, requests, params) triple within the oracle's budget.

    Capacities are deliberately tight relative to the capped rates so packing
    conflicts actually occur and the competitive inequality has teeth.
    """
    from .pricing import APPROXIMATION, PricingParams
    from .workload import UniformInt, WorkloadGenerator, WorkloadSpec

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 3])))
    n = 3 + int(rng.integers(0, MAX_NODES - 3 + 1))
    edges: set[tuple[int, int]] = set()
    order = list(range(n))
    for i in range(n - 1):              # random spanning tree
        j = int(rng.integers(0, i + 1))
        edges.add((min(order[j], order[i + 1]), max(order[j], order[i + 1])))
    # Sparse extras only: bottleneck-heavy instances create real packing
    # conflicts and keep the exhaustive tree enumeration tractable.
    extras = int(rng.integers(0, 3))
    for _ in range(extras * 3):
        if extras == 0:
            break
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        if a != b and (min(a, b), max(a, b)) not in edges:
            edges.add((min(a, b), max(a, b)))
            extras -= 1
    catalog = ["nf0", "nf1"]
    node_cap = [float(rng.integers(20, 61)) for _ in range(n)]
    hostable = []
    for _ in range(n):
        hosted = [t for t in range(2) if rng.integers(0, 3) < 2]
        hostable.append(hosted)
    for t in range(2):                  # every type needs at least one host
        if not any(t in h for h in hostable):
            hostable[int(rng.integers(0, n))].append(t)
    link_src, link_dst, link_cap = [], [], []
    for a, b in sorted(edges):
        for u, v in ((a, b), (b, a)):
            link_src.append(u)
            link_dst.append(v)
            link_cap.append(float(rng.integers(20, 61)))
    substrate = Substrate(node_cap, hostable, link_src, link_dst, link_cap, catalog)

    chain_budget = MAX_CHAIN
    params = PricingParams(
        alpha=1.0,
        beta=1.0,
        k=0.8,
        max_route_links=n * (chain_budget + 1),
        max_chain_len=chain_budget,
        max_dest_count=MAX_DESTS,
        eta_max=1.0,
        eta_min=1.0,
        mode=APPROXIMATION,
    )
    spec = WorkloadSpec(
        rate=UniformInt(1, 12),
        chain_len=UniformInt(1, MAX_CHAIN),
        best_effort=UniformInt(0, 1),
        dest_count=UniformInt(1, MAX_DESTS),
        eta_policy="constant",
        eta_value=1.0,
        seed=int(np.random.SeedSequence([seed, 4]).generate_state(1)[0]),
    )
    gen = WorkloadGenerator(
        spec,
        substrate,
        rate_cap=params.rate_cap(substrate),
        proc_cap=params.proc_cap(substrate),
    )
    count = 2 + int(rng.integers(0, MAX_REQUESTS - 2 + 1))
    requests = []
    for req in gen.stream():
        requests.append(req)
        if len(requests) == count:
            break
    return substrate, requests, params


def verify_instance(seed: int) -> dict:
    """Run online vs oracle on one tiny instance; returns the comparison."""
    from .admission import admit
    from .multilayer import TransformCache
    from .pricing import CostState
    from .substrate import ResidualLedger

    substrate, requests, params = make_tiny_instance(seed)
    state = CostState(substrate, params)
    ledger = ResidualLedger(substrate)
    cache = TransformCache(substrate)
    online = 0.0
    accepted = 0
    for req in requests:
        outcome = admit(req, substrate, state, ledger, params, cache, debug=True)
        if outcome.accepted:
            online += outcome.profit.total
            accepted += 1
    state.assert_consistent(ledger)
    ledger.assert_within_capacity()
    oracle = offline_optimum(substrate, requests, params)
    ratio_bound = 2.0 * params.xi
    return {
        "seed": seed,
        "online_profit": online,
        "online_accepted": accepted,
        "oracle_profit": oracle.best_profit,
        "bound": ratio_bound,
        "competitive_ok": oracle.best_profit <= ratio_bound * online + 1e-9,
        "oracle_at_least_online": oracle.best_profit >= online - 1e-9,
    }


def verify_competitive(instances: int, base_seed: int = 0) -> dict:
    """Oracle competitive-ratio suite over seeded tiny instances."""
    ok = 0
    failures = []
    for i in range(instances):
        res = verify_instance(base_seed + i)
        if res["competitive_ok"] and res["oracle_at_least_online"]:
            ok += 1
        else:
            failures.append(res)
    return {"instances": instances, "ok": ok, "failures": failures}
