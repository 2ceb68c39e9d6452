import itertools
import math

import numpy as np
import pytest

from nfvsim.multilayer import MultilayerGraph
from nfvsim.routing import (
    CostLimitExceeded,
    EdgeCosts,
    Unreachable,
    route_request,
    shortest_path,
    steiner_tree,
    using_numba,
)
from nfvsim.substrate import Substrate

from conftest import make_substrate, ring4
from test_multilayer import enumerate_simple_paths


def brute_force_best(mlg, costs, s, t):
    """(cost, hops, vertex sequence)-lexicographic best path, enumerated."""
    best = None
    for p in enumerate_simple_paths(mlg, s, t):
        cost = 0.0
        for e in p:  # forward order, same float summation order as dijkstra
            cost += costs.weight(mlg, e)
        seq = [s] + [int(mlg.edge_dst[e]) for e in p]
        key = (cost, len(p), seq)
        if best is None or key < best[0]:
            best = (key, p)
    return best


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add((j, i))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.4:
                edges.add((a, b))
    catalog = ["f0", "f1"]
    hostable = []
    for i in range(n):
        h = [t for t in range(2) if rng.random() < 0.7]
        hostable.append(h)
    for t in range(2):
        if not any(t in h for h in hostable):
            hostable[int(rng.integers(0, n))].append(t)
    sub = make_substrate([50.0] * n, hostable, sorted(edges), 50.0, catalog)
    chain_len = int(rng.integers(0, 3))
    mlg = MultilayerGraph(sub, tuple(int(rng.integers(0, 2)) for _ in range(chain_len)))
    # random nonnegative weights, occasionally zero to exercise tie-breaks
    xbar = np.round(rng.uniform(0, 3, sub.num_links), 1)
    xtilde = np.round(rng.uniform(0, 3, sub.num_nodes), 1)
    costs = EdgeCosts(xbar, xtilde, rate=1.0, proc=1.0)
    return sub, mlg, costs, rng


@pytest.mark.parametrize("seed", range(100))
def test_dijkstra_matches_brute_force(seed):
    sub, mlg, costs, rng = random_instance(seed)
    if mlg.num_vertices > 15:
        mlg = MultilayerGraph(sub, mlg.chain_types[:1])
    s = mlg.source_vertex(0)
    t = mlg.terminal_vertices((sub.num_nodes - 1,))[0]
    expected = brute_force_best(mlg, costs, s, t)
    if expected is None:
        with pytest.raises(Unreachable):
            shortest_path(mlg, costs, s, t)
        return
    route = shortest_path(mlg, costs, s, t)
    (exp_cost, exp_hops, exp_seq), _ = expected
    assert route.cost == exp_cost  # exact float equality
    assert len(route.edges) == exp_hops
    seq = [s] + [int(mlg.edge_dst[e]) for e in route.edges]
    assert seq == exp_seq  # lexicographic-least among optimal


def test_all_zero_weights_min_hop_lex_least(ring4):
    mlg = MultilayerGraph(ring4, ())
    costs = EdgeCosts(np.zeros(ring4.num_links), np.zeros(ring4.num_nodes))
    route = shortest_path(mlg, costs, 0, 2)
    seq = [0] + [int(mlg.edge_dst[e]) for e in route.edges]
    expected = brute_force_best(mlg, costs, 0, 2)
    assert route.cost == 0.0
    assert seq == expected[0][2]
    assert seq == [0, 1, 2]  # the two min-hop paths are 0-1-2 and 0-3-2


def test_unreachable_raises():
    sub = Substrate([10.0, 10.0], [[0], [0]], [0], [1], [5.0], ["f0"])
    mlg = MultilayerGraph(sub, ())
    costs = EdgeCosts(np.ones(1), np.ones(2))
    with pytest.raises(Unreachable):
        shortest_path(mlg, costs, 1, 0)  # only 0 -> 1 exists


def test_cost_limit_pruning_equivalence():
    for seed in range(40):
        sub, mlg, costs, rng = random_instance(seed + 1000)
        s = mlg.source_vertex(0)
        t = mlg.terminal_vertices((sub.num_nodes - 1,))[0]
        try:
            full = shortest_path(mlg, costs, s, t)
        except Unreachable:
            continue
        limit = full.cost * 1.5 + 1.0
        pruned = shortest_path(mlg, costs, s, t, cost_limit=limit)
        assert pruned == full
        with pytest.raises(CostLimitExceeded):
            shortest_path(mlg, costs, s, t, cost_limit=full.cost * 0.5 - 1e-9)


def test_determinism(ring4):
    mlg = MultilayerGraph(ring4, (0, 1))
    rng = np.random.default_rng(5)
    costs = EdgeCosts(rng.uniform(0, 2, ring4.num_links), rng.uniform(0, 2, ring4.num_nodes))
    s = mlg.source_vertex(0)
    t = mlg.terminal_vertices((3,))[0]
    assert shortest_path(mlg, costs, s, t) == shortest_path(mlg, costs, s, t)


def test_worked_two_nf_instance_places_both_on_node0(ring4):
    # uniform intra weight 1, inter-layer hosting weights {0: 0, 2: 5, 1: 5};
    # brute force confirms both NFs land on node 0 and the direct 0-3 link.
    mlg = MultilayerGraph(ring4, (0, 1))
    xbar = np.ones(ring4.num_links)
    xtilde = np.array([0.0, 5.0, 5.0, 0.0])
    costs = EdgeCosts(xbar, xtilde)
    s = mlg.source_vertex(0)
    t = mlg.terminal_vertices((3,))[0]
    route = shortest_path(mlg, costs, s, t)
    best = brute_force_best(mlg, costs, s, t)
    assert route.cost == best[0][0]
    emb = mlg.project_path(list(route.edges))
    assert emb.placements == ((0, 0), (1, 0))
    assert len(emb.link_traversals) == 1


# -- Steiner ------------------------------------------------------------------------


def brute_force_steiner(mlg, costs, s, terminals):
    """Exact optimal Steiner cost by enumerating unions of terminal paths
    (edge-deduplicated); covers every rooted subtree."""
    per_t = [enumerate_simple_paths(mlg, s, t) for t in terminals]
    best = math.inf
    for combo in itertools.product(*per_t):
        edges = set()
        for p in combo:
            edges.update(p)
        cost = sum(costs.weight(mlg, e) for e in edges)
        best = min(best, cost)
    return best


def test_single_terminal_equals_shortest_path(ring4):
    mlg = MultilayerGraph(ring4, (0,))
    rng = np.random.default_rng(2)
    costs = EdgeCosts(rng.uniform(0.1, 2, ring4.num_links), rng.uniform(0.1, 2, ring4.num_nodes))
    s = mlg.source_vertex(0)
    t = mlg.terminal_vertices((2,))[0]
    tree = steiner_tree(mlg, costs, s, [t])
    path = shortest_path(mlg, costs, s, t)
    assert tree.cost == pytest.approx(path.cost)
    assert set(tree.edges) == set(path.edges)


def test_star_shared_edge_charged_once():
    # hub 0 with leaves 1..4; multicast 1 -> {3, 4} shares the 1->0 link
    sub = make_substrate(
        [10.0] * 5, [[] for _ in range(5)], [(0, 1), (0, 2), (0, 3), (0, 4)],
        10.0, [],
    )
    mlg = MultilayerGraph(sub, ())
    costs = EdgeCosts(np.ones(sub.num_links), np.ones(sub.num_nodes))
    tree = steiner_tree(mlg, costs, 1, [3, 4])
    # 1->0 once plus 0->3 and 0->4: three edges, not four
    assert len(tree.edges) == 3
    assert tree.cost == pytest.approx(3.0)
    emb = mlg.project_tree(tree.edges)
    assert len(emb.link_traversals) == 3


def test_steiner_within_2x_of_optimal():
    checked = 0
    for seed in range(200):
        sub, mlg, costs, rng = random_instance(seed + 2000)
        if sub.num_nodes < 4 or len(mlg.chain_types) > 1:
            continue
        terminals = mlg.terminal_vertices((sub.num_nodes - 2, sub.num_nodes - 1))
        s = mlg.source_vertex(0)
        try:
            tree = steiner_tree(mlg, costs, s, terminals)
        except Unreachable:
            continue
        opt = brute_force_steiner(mlg, costs, s, terminals)
        assert tree.cost <= 2.0 * opt + 1e-9
        emb = mlg.project_tree(tree.edges)  # valid arborescence
        checked += 1
        if checked >= 50:
            break
    assert checked >= 50


def test_steiner_unreachable_terminal():
    sub = Substrate([10.0, 10.0, 10.0], [[], [], []], [0], [1], [5.0], [])
    mlg = MultilayerGraph(sub, ())
    costs = EdgeCosts(np.ones(1), np.ones(3))
    with pytest.raises(Unreachable):
        steiner_tree(mlg, costs, 0, [1, 2])


def test_python_twin_matches_numba():
    if not using_numba():
        pytest.skip("numba twins not active")
    import subprocess
    import sys
    import json as _json

    code = """
import json, numpy as np
from nfvsim.multilayer import MultilayerGraph
from nfvsim.routing import shortest_path, steiner_tree, EdgeCosts, using_numba
import sys
sys.path.insert(0, 'tests')
from test_routing import random_instance
assert not using_numba()
out = []
for seed in range(25):
    sub, mlg, costs, rng = random_instance(seed)
    s = mlg.source_vertex(0)
    t = mlg.terminal_vertices((sub.num_nodes - 1,))[0]
    try:
        r = shortest_path(mlg, costs, s, t)
        out.append([list(r.edges), r.cost])
    except Exception:
        out.append(None)
print(json.dumps(out))
"""
    import os

    env = dict(os.environ, NFVSIM_NO_NUMBA="1")
    res = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env,
        cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    )
    assert res.returncode == 0, res.stderr
    py_routes = _json.loads(res.stdout)
    for seed in range(25):
        sub, mlg, costs, rng = random_instance(seed)
        s = mlg.source_vertex(0)
        t = mlg.terminal_vertices((sub.num_nodes - 1,))[0]
        try:
            r = shortest_path(mlg, costs, s, t)
            got = [list(r.edges), r.cost]
        except Unreachable:
            got = None
        assert got == py_routes[seed]
