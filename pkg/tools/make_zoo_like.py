#!/usr/bin/env python3
"""Generate the bundled GraphML topologies.

Real Topology Zoo files are not redistributable here, so data/ ships synthetic
stand-ins matching the published node count, undirected edge count and
hop-diameter of Bell Canada (48 nodes, 64 edges, diameter 13) and CESNET
(52 nodes, 63 edges, diameter 6).

Construction: a backbone path realizes the diameter; every extra node attaches
to an interior backbone position (keeping all pairwise distances within the
diameter); remaining edges pair up nodes attached to the same position, which
cannot create shortcuts between backbone nodes.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


def make(n_nodes: int, n_edges: int, diameter: int) -> list[tuple[int, int]]:
    backbone = diameter + 1
    edges = [(i, i + 1) for i in range(diameter)]
    extra = n_nodes - backbone
    positions = list(range(1, diameter))          # interior positions only
    attached: dict[int, list[int]] = {p: [] for p in positions}
    node = backbone
    for i in range(extra):
        p = positions[i % len(positions)]
        edges.append((p, node))
        attached[p].append(node)
        node += 1
    sibling_needed = n_edges - len(edges)
    assert sibling_needed >= 0, "edge budget too small"
    for p in positions:
        group = attached[p]
        for i in range(len(group) - 1):
            if sibling_needed == 0:
                break
            edges.append((group[i], group[i + 1]))
            sibling_needed -= 1
        if sibling_needed == 0:
            break
    assert sibling_needed == 0, "not enough sibling pairs for the edge budget"
    assert len(edges) == n_edges
    return edges


def write_graphml(path: str, n_nodes: int, edges: list[tuple[int, int]]) -> None:
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <graph edgedefault="undirected">',
    ]
    for i in range(n_nodes):
        lines.append(f'    <node id="n{i}"/>')
    for a, b in edges:
        lines.append(f'    <edge source="n{a}" target="n{b}"/>')
    lines.append("  </graph>")
    lines.append("</graphml>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    data = os.path.join(here, "..", "data")
    os.makedirs(data, exist_ok=True)
    specs = {
        "bellcanada_like.graphml": (48, 64, 13),
        "cesnet_like.graphml": (52, 63, 6),
    }
    from nfvsim.topologies import auto_route_bound, load_graphml

    for name, (n, m, diam) in specs.items():
        path = os.path.join(data, name)
        write_graphml(path, n, make(n, m, diam))
        sub, report = load_graphml(path)
        bound = auto_route_bound(sub)
        assert report["nodes"] == n and report["undirected_edges"] == m, report
        assert bound == diam, f"{name}: diameter {bound} != {diam}"
        print(f"{name}: {n} nodes, {m} edges, diameter {bound}")


if __name__ == "__main__":
    main()
