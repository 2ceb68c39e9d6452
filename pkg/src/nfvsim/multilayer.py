"""Layered auxiliary graph turning joint routing + NF placement into routing.

For a chain of |V| NFs the transform stacks |V|+1 copies of the substrate.
Intra-layer edges replicate substrate links (transmission); an inter-layer
edge (n^i -> n^(i+1)) exists iff node n can host the i-th NF of the chain and
encodes placing that NF on n. Any source-to-last-layer route therefore fixes
both the substrate routing and the placement of every NF, in chain order.

Edge weights are evaluated on demand from the live cost state (intra: d·x̄(l),
inter: C(f)·x̃(n)), so one transform instance is reused across requests with
the same chain signature without rebuilding.
"""

from __future__ import annotations

import numpy as np

from .substrate import Embedding, Substrate

INTRA = 0
INTER = 1


class UnplaceableNf(ValueError):
    def __init__(self, position: int, nf_type: int):
        super().__init__(f"chain position {position}: NF type {nf_type} has no host")
        self.position = position
        self.nf_type = nf_type


class MalformedRoute(ValueError):
    pass


class MultilayerGraph:
    """Immutable layered transform for one chain signature over a substrate."""

    def __init__(self, substrate: Substrate, chain_types: tuple[int, ...]):
        self.substrate = substrate
        self.chain_types = tuple(chain_types)
        self.n_layers = len(self.chain_types) + 1
        self.num_vertices = substrate.num_nodes * self.n_layers
        self._build()

    @classmethod
    def build(cls, substrate: Substrate, chain_types) -> "MultilayerGraph":
        return cls(substrate, tuple(chain_types))

    def _build(self) -> None:
        sub = self.substrate
        n = sub.num_nodes
        for pos, nf_type in enumerate(self.chain_types):
            if len(sub.hosts(nf_type)) == 0:
                raise UnplaceableNf(pos, nf_type)

        srcs: list[np.ndarray] = []
        dsts: list[np.ndarray] = []
        kinds: list[np.ndarray] = []
        refs: list[np.ndarray] = []
        for layer in range(self.n_layers):
            off = layer * n
            srcs.append(sub.link_src.astype(np.int64) + off)
            dsts.append(sub.link_dst.astype(np.int64) + off)
            kinds.append(np.full(sub.num_links, INTRA, dtype=np.int8))
            refs.append(np.arange(sub.num_links, dtype=np.int32))
            if layer < len(self.chain_types):
                hosts = sub.hosts(self.chain_types[layer]).astype(np.int64)
                srcs.append(hosts + off)
                dsts.append(hosts + off + n)
                kinds.append(np.full(len(hosts), INTER, dtype=np.int8))
                refs.append(hosts.astype(np.int32))

        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
        kind = np.concatenate(kinds)
        ref = np.concatenate(refs)
        # CSR sorted by (src, dst, ref) for deterministic traversal order.
        order = np.lexsort((ref, dst, src))
        self.edge_src = src[order].astype(np.int32)
        self.edge_dst = dst[order].astype(np.int32)
        self.edge_kind = kind[order]
        self.edge_ref = ref[order]
        counts = np.bincount(self.edge_src, minlength=self.num_vertices)
        self.indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int32)

        # Reverse CSR (edge indices into the arrays above), for backward walks.
        rorder = np.lexsort((self.edge_src, self.edge_dst))
        self.redge = rorder.astype(np.int32)
        rcounts = np.bincount(self.edge_dst, minlength=self.num_vertices)
        self.rindptr = np.concatenate(([0], np.cumsum(rcounts))).astype(np.int32)

        # Split index arrays for fast per-request weight evaluation, and a
        # reusable target-mask scratch buffer for the routing kernels.
        intra = np.nonzero(self.edge_kind == INTRA)[0]
        inter = np.nonzero(self.edge_kind == INTER)[0]
        self._intra_pos = intra.astype(np.int64)
        self._intra_ref = self.edge_ref[intra].astype(np.int64)
        self._inter_pos = inter.astype(np.int64)
        self._inter_ref = self.edge_ref[inter].astype(np.int64)
        self._mask_scratch = np.zeros(self.num_vertices, dtype=bool)

    # -- vertex helpers ------------------------------------------------------------

    def vertex(self, layer: int, node: int) -> int:
        return layer * self.substrate.num_nodes + node

    def layer_of(self, vertex: int) -> int:
        return vertex // self.substrate.num_nodes

    def node_of(self, vertex: int) -> int:
        return vertex % self.substrate.num_nodes

    def source_vertex(self, source_node: int) -> int:
        return self.vertex(0, source_node)

    def terminal_vertices(self, destinations) -> tuple[int, ...]:
        last = len(self.chain_types)
        return tuple(self.vertex(last, d) for d in destinations)

    # -- weights -------------------------------------------------------------------

    def edge_weights(self, xbar: np.ndarray, xtilde: np.ndarray, rate: float, proc: float) -> np.ndarray:
        """Per-edge weights from the current cost state for one request."""
        w = np.empty(len(self.edge_src), dtype=np.float64)
        w[self._intra_pos] = rate * xbar[self._intra_ref]
        w[self._inter_pos] = proc * xtilde[self._inter_ref]
        return w

    # -- projection back to the substrate --------------------------------------------

    def project_path(self, edges: list[int]) -> Embedding:
        """Project an s^0-to-terminal edge sequence onto the substrate."""
        expect_pos = 0
        traversals: list[int] = []
        placements: list[tuple[int, int]] = []
        prev_dst = None
        for e in edges:
            u, v = int(self.edge_src[e]), int(self.edge_dst[e])
            if prev_dst is not None and u != prev_dst:
                raise MalformedRoute("edge sequence is not a path")
            prev_dst = v
            if self.edge_kind[e] == INTRA:
                traversals.append(int(self.edge_ref[e]))
            else:
                pos = self.layer_of(u)
                if pos != expect_pos:
                    raise MalformedRoute(
                        f"inter-layer edge at layer {pos}, expected {expect_pos}"
                    )
                expect_pos += 1
                placements.append((pos, int(self.edge_ref[e])))
        if edges:
            if self.layer_of(int(self.edge_src[edges[0]])) != 0:
                raise MalformedRoute("path must start in layer 0")
        if expect_pos != len(self.chain_types):
            raise MalformedRoute("path skips an inter-layer crossing")
        return Embedding(tuple(traversals), tuple(placements))

    def project_tree(self, edges) -> Embedding:
        """Project a root arborescence (edge index set) onto the substrate.

        Every multilayer edge is charged once; the same substrate link reached
        in two layers still yields two traversals.
        """
        edges = sorted(set(int(e) for e in edges))
        indeg: dict[int, int] = {}
        for e in edges:
            v = int(self.edge_dst[e])
            indeg[v] = indeg.get(v, 0) + 1
            if indeg[v] > 1:
                raise MalformedRoute(f"vertex {v} has in-degree > 1")
            u = int(self.edge_src[e])
            if self.edge_kind[e] == INTER and self.layer_of(v) != self.layer_of(u) + 1:
                raise MalformedRoute("inter-layer edge skips a layer")
        traversals: list[int] = []
        placements: list[tuple[int, int]] = []
        for e in edges:
            if self.edge_kind[e] == INTRA:
                traversals.append(int(self.edge_ref[e]))
            else:
                placements.append(
                    (self.layer_of(int(self.edge_src[e])), int(self.edge_ref[e]))
                )
        return Embedding(tuple(sorted(traversals)), tuple(sorted(placements)))

    # -- debug export ----------------------------------------------------------------

    def to_dot(self, weights: np.ndarray | None = None) -> str:
        lines = ["digraph multilayer {"]
        n = self.substrate.num_nodes
        for v in range(self.num_vertices):
            lines.append(
                f'  v{v} [label="n{v % n}^{v // n}"];'
            )
        for e in range(len(self.edge_src)):
            kind = "intra" if self.edge_kind[e] == INTRA else "inter"
            label = kind
            if weights is not None:
                label += f" {weights[e]:.6g}"
            lines.append(
                f'  v{self.edge_src[e]} -> v{self.edge_dst[e]} [label="{label}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


class TransformCache:
    """Per-trial cache of transforms keyed by chain signature."""

    def __init__(self, substrate: Substrate):
        self.substrate = substrate
        self._cache: dict[tuple[int, ...], MultilayerGraph] = {}

    def get(self, chain_types) -> MultilayerGraph:
        key = tuple(chain_types)
        mlg = self._cache.get(key)
        if mlg is None:
            mlg = MultilayerGraph(self.substrate, key)
            self._cache[key] = mlg
        return mlg
