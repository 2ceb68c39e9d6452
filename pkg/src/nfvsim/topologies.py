"""Substrate construction: linear chains, Barabasi-Albert graphs, GraphML import.

All constructors expand undirected edges to two directed links with
independently sampled capacities and randomize NF hosting per node; every
random draw comes from PCG64(seed) in a fixed documented order (node
capacities, switch selection, hosting sets, then link capacities in edge
order), so a (spec, seed) pair is fully reproducible.
"""

from __future__ import annotations

import logging
import math
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass

import numpy as np

from .substrate import Substrate

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    pass


class EmptyGraph(ValueError):
    pass


@dataclass(frozen=True)
class CapacitySpec:
    """Uniform integer capacity range (inclusive), packet/s."""

    lo: int = 1000
    hi: int = 5000

    def sample(self, rng: np.random.Generator) -> float:
        if self.lo == self.hi:
            return float(self.lo)
        return float(rng.integers(self.lo, self.hi + 1))

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, doc) -> "CapacitySpec":
        if doc is None:
            return cls()
        return cls(int(doc["lo"]), int(doc["hi"]))


@dataclass(frozen=True)
class HostingSpec:
    """NF hosting randomization: every NFV node hosts a random subset of the
    catalog of size ceil(fraction * catalog_size)."""

    catalog_size: int = 6
    fraction: float = 2.0 / 3.0
    switch_fraction: float = 0.0

    @property
    def hosted_count(self) -> int:
        return max(1, math.ceil(self.fraction * self.catalog_size))

    def to_json(self) -> dict:
        return {
            "catalog_size": self.catalog_size,
            "fraction": self.fraction,
            "switch_fraction": self.switch_fraction,
        }

    @classmethod
    def from_json(cls, doc) -> "HostingSpec":
        if doc is None:
            return cls()
        return cls(
            int(doc.get("catalog_size", 6)),
            float(doc.get("fraction", 2.0 / 3.0)),
            float(doc.get("switch_fraction", 0.0)),
        )


def _pick_distinct(rng: np.random.Generator, n: int, k: int) -> list[int]:
    pool = np.arange(n, dtype=np.int64)
    for i in range(k):
        j = i + int(rng.integers(0, n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return [int(x) for x in pool[:k]]


def _assemble(
    n: int,
    undirected_edges: list[tuple[int, int]],
    capacity: CapacitySpec,
    hosting: HostingSpec,
    seed,
) -> Substrate:
    rng = np.random.Generator(np.random.PCG64(seed))
    node_cap = [capacity.sample(rng) for _ in range(n)]
    n_switches = int(round(hosting.switch_fraction * n))
    switches = set(_pick_distinct(rng, n, n_switches)) if n_switches else set()
    hostable: list[list[int]] = []
    for node in range(n):
        if node in switches:
            node_cap[node] = 0.0
            hostable.append([])
        else:
            hostable.append(
                sorted(_pick_distinct(rng, hosting.catalog_size, hosting.hosted_count))
            )
    link_src: list[int] = []
    link_dst: list[int] = []
    link_cap: list[float] = []
    for a, b in undirected_edges:
        for u, v in ((a, b), (b, a)):
            link_src.append(u)
            link_dst.append(v)
            link_cap.append(capacity.sample(rng))
    catalog = [f"nf{i}" for i in range(hosting.catalog_size)]
    return Substrate(node_cap, hostable, link_src, link_dst, link_cap, catalog)


def linear(
    n: int,
    capacity: CapacitySpec = CapacitySpec(),
    hosting: HostingSpec = HostingSpec(),
    seed=0,
) -> Substrate:
    """Line of n nodes, both directions routable (2(n-1) directed links)."""
    if n < 2:
        raise ValueError("linear topology needs n >= 2")
    edges = [(i, i + 1) for i in range(n - 1)]
    return _assemble(n, edges, capacity, hosting, seed)


def barabasi_albert(
    n: int,
    m: int,
    capacity: CapacitySpec = CapacitySpec(),
    hosting: HostingSpec = HostingSpec(),
    seed=0,
) -> Substrate:
    """Preferential-attachment growth from an m-clique seed.

    Yields m*(n-m) + C(m,2) undirected edges: every newcomer attaches to m
    distinct existing nodes with probability proportional to degree.
    """
    if not (1 <= m < n):
        raise ValueError("need 1 <= m < n")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    growth_ss, assemble_ss = ss.spawn(2)
    rng = np.random.Generator(np.random.PCG64(growth_ss))
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    for a in range(m):
        for b in range(a + 1, m):
            edges.append((a, b))
            repeated.extend((a, b))
    for source in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            if repeated:
                cand = repeated[int(rng.integers(0, len(repeated)))]
            else:
                cand = int(rng.integers(0, source))
            targets.add(cand)
        for t in sorted(targets):
            edges.append((t, source))
            repeated.extend((t, source))
    # Hosting/capacity draws use a separate spawned stream so the growth draws
    # above stay stable if the assembly recipe changes.
    return _assemble(n, edges, capacity, hosting, assemble_ss)


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_graphml(path: str) -> tuple[list[str], list[tuple[str, str]], bool]:
    """Node ids, edge endpoint pairs and directedness from a GraphML file."""
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"{path}: malformed XML ({exc})") from exc
    root = tree.getroot()
    graph = None
    for el in root.iter():
        if _local_name(el.tag) == "graph":
            graph = el
            break
    if graph is None:
        raise ParseError(f"{path}: no <graph> element")
    directed = graph.get("edgedefault", "undirected") == "directed"
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    for el in graph.iter():
        name = _local_name(el.tag)
        if name == "node":
            nid = el.get("id")
            if nid is None:
                raise ParseError(f"{path}: <node> without id")
            nodes.append(nid)
        elif name == "edge":
            s, t = el.get("source"), el.get("target")
            if s is None or t is None:
                raise ParseError(f"{path}: <edge> without source/target")
            edges.append((s, t))
    if not nodes:
        raise EmptyGraph(f"{path}: graph has no nodes")
    return nodes, edges, directed


def load_graphml(
    path: str,
    capacity: CapacitySpec = CapacitySpec(),
    hosting: HostingSpec = HostingSpec(),
    seed=0,
) -> tuple[Substrate, dict]:
    """Import a GraphML topology; returns (substrate, report).

    GraphML capacity attributes are ignored; capacities always come from the
    capacity spec. The report carries the imported node and undirected edge
    counts for validation against published topology figures.
    """
    nodes, raw_edges, directed = parse_graphml(path)
    index = {nid: i for i, nid in enumerate(nodes)}
    if len(index) != len(nodes):
        raise ParseError(f"{path}: duplicate node ids")
    edges: list[tuple[int, int]] = []
    for s, t in raw_edges:
        if s not in index or t not in index:
            raise ParseError(f"{path}: edge endpoint {s!r}->{t!r} not declared")
        if s == t:
            continue
        edges.append((index[s], index[t]))
    report = {
        "nodes": len(nodes),
        "undirected_edges": len(edges) if not directed else None,
        "directed_edges": len(edges) if directed else None,
    }
    if directed:
        # Directed input: honor the stated directions, one link per edge.
        rng_seed = seed
        rng = np.random.Generator(np.random.PCG64(rng_seed))
        cap = capacity
        node_cap = [cap.sample(rng) for _ in range(len(nodes))]
        hostable = [
            sorted(_pick_distinct(rng, hosting.catalog_size, hosting.hosted_count))
            for _ in range(len(nodes))
        ]
        link_cap = [cap.sample(rng) for _ in edges]
        catalog = [f"nf{i}" for i in range(hosting.catalog_size)]
        sub = Substrate(
            node_cap,
            hostable,
            [e[0] for e in edges],
            [e[1] for e in edges],
            link_cap,
            catalog,
        )
        return sub, report
    return _assemble(len(nodes), edges, capacity, hosting, seed), report


def auto_route_bound(substrate: Substrate) -> int:
    """Max hop-count shortest path over all ordered reachable node pairs."""
    n = substrate.num_nodes
    best = 0
    disconnected = False
    for s in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        dq = deque([s])
        while dq:
            v = dq.popleft()
            for l in substrate.out_links(v):
                u = int(substrate.link_dst[l])
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    dq.append(u)
        if np.any(dist < 0):
            disconnected = True
        far = int(dist.max())
        if far > best:
            best = far
    if disconnected:
        logger.warning("substrate not strongly connected; bound over reachable pairs")
    return best


def build(spec: dict, seed) -> Substrate:
    """Topology dispatcher used by the harness and CLI."""
    capacity = CapacitySpec.from_json(spec.get("capacity"))
    hosting = HostingSpec.from_json(spec.get("hosting"))
    kind = spec.get("kind")
    if kind == "linear":
        return linear(int(spec["n"]), capacity, hosting, seed)
    if kind == "ba":
        return barabasi_albert(int(spec["n"]), int(spec.get("m", 2)), capacity, hosting, seed)
    if kind == "graphml":
        sub, _ = load_graphml(spec["path"], capacity, hosting, seed)
        return sub
    raise ValueError(f"unknown topology kind {kind!r}")
