"""Capacitated network substrate: nodes, directed links, residuals, NF hosting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Absolute slack for feasibility comparisons; workloads are integral so this is
# safely below resource granularity.
FEAS_TOL = 1e-9


class SubstrateError(ValueError):
    pass


class CapacityViolation(RuntimeError):
    """A commit would exceed a link or node capacity.

    Under approximation-mode parameters this signals an algorithm bug; the
    heuristic/greedy baselines avoid it by pre-checking feasibility.
    """


@dataclass(frozen=True)
class Embedding:
    """A concrete routing + placement solution for one service request.

    link_traversals holds one substrate link id per traversal: a link used by
    the multilayer route in two layers appears twice and is charged twice.
    placements holds (chain position, node id) pairs; for multicast trees the
    same chain position may be instantiated on several nodes (one per branch),
    and a node hosting several NFs is charged once per instance.
    """

    link_traversals: tuple[int, ...]
    placements: tuple[tuple[int, int], ...]

    def link_multiplicities(self) -> dict[int, int]:
        mult: dict[int, int] = {}
        for l in self.link_traversals:
            mult[l] = mult.get(l, 0) + 1
        return mult

    def node_counts(self) -> dict[int, int]:
        cnt: dict[int, int] = {}
        for _, n in self.placements:
            cnt[n] = cnt.get(n, 0) + 1
        return cnt


class Substrate:
    """Immutable directed capacitated graph with per-node NF hosting sets.

    Node and link ids are dense integers. A node with capacity 0 is a pure
    switch and must not host any NF type.
    """

    def __init__(
        self,
        node_capacity: Sequence[float],
        hostable: Sequence[Iterable[int]],
        link_src: Sequence[int],
        link_dst: Sequence[int],
        link_capacity: Sequence[float],
        nf_catalog: Sequence[str],
    ):
        self.node_capacity = np.asarray(node_capacity, dtype=np.float64)
        self.hostable = [frozenset(h) for h in hostable]
        self.link_src = np.asarray(link_src, dtype=np.int32)
        self.link_dst = np.asarray(link_dst, dtype=np.int32)
        self.link_capacity = np.asarray(link_capacity, dtype=np.float64)
        self.nf_catalog = tuple(nf_catalog)
        self._validate()
        self._build_adjacency()
        self._hosts = [
            np.array(sorted(n for n in range(self.num_nodes) if i in self.hostable[n]),
                     dtype=np.int32)
            for i in range(len(self.nf_catalog))
        ]
        self._min_link_capacity = float(self.link_capacity.min()) if self.num_links else 0.0
        nfv_caps = self.node_capacity[self.node_capacity > 0]
        self._min_nfv_capacity = float(nfv_caps.min()) if len(nfv_caps) else None

    # -- construction / validation -------------------------------------------------

    def _validate(self) -> None:
        n = self.num_nodes
        if n == 0:
            raise SubstrateError("substrate has no nodes")
        if len(self.hostable) != n:
            raise SubstrateError("hostable list length mismatch")
        if np.any(self.node_capacity < 0):
            raise SubstrateError("negative node capacity")
        if not (len(self.link_src) == len(self.link_dst) == len(self.link_capacity)):
            raise SubstrateError("link array length mismatch")
        if len(self.link_src) and (
            self.link_src.min() < 0 or self.link_src.max() >= n
            or self.link_dst.min() < 0 or self.link_dst.max() >= n
        ):
            raise SubstrateError("link endpoint out of range")
        if np.any(self.link_capacity <= 0):
            raise SubstrateError("links must have positive capacity")
        catalog = set(range(len(self.nf_catalog)))
        for node, hosted in enumerate(self.hostable):
            if not hosted <= catalog:
                raise SubstrateError(f"node {node} hosts unknown NF type")
            if self.node_capacity[node] == 0 and hosted:
                raise SubstrateError(f"switch node {node} cannot host NFs")

    def _build_adjacency(self) -> None:
        # CSR of outgoing link ids per node, link ids sorted for determinism.
        order = np.lexsort((self.link_dst, self.link_src))
        self.adj_links = np.asarray(order, dtype=np.int32)
        counts = np.bincount(self.link_src, minlength=self.num_nodes)
        self.adj_indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int32)

    # -- basic accessors -----------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return len(self.node_capacity)

    @property
    def num_links(self) -> int:
        return len(self.link_src)

    def hosts(self, nf_type: int) -> np.ndarray:
        """F_i: node ids able to host the given NF type."""
        return self._hosts[nf_type]

    def out_links(self, node: int) -> np.ndarray:
        return self.adj_links[self.adj_indptr[node]:self.adj_indptr[node + 1]]

    def nfv_nodes(self) -> np.ndarray:
        return np.nonzero(self.node_capacity > 0)[0].astype(np.int32)

    def min_link_capacity(self) -> float:
        return self._min_link_capacity

    def min_nfv_capacity(self) -> float:
        if self._min_nfv_capacity is None:
            raise SubstrateError("substrate has no NFV nodes")
        return self._min_nfv_capacity

    # -- serialization (canonical on-disk JSON form) -------------------------------

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "id": i,
                    "capacity": float(self.node_capacity[i]),
                    "hostable": sorted(self.nf_catalog[t] for t in self.hostable[i]),
                }
                for i in range(self.num_nodes)
            ],
            "links": [
                {
                    "id": j,
                    "from": int(self.link_src[j]),
                    "to": int(self.link_dst[j]),
                    "capacity": float(self.link_capacity[j]),
                }
                for j in range(self.num_links)
            ],
            "nf_catalog": list(self.nf_catalog),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Substrate":
        catalog = list(doc["nf_catalog"])
        index = {name: i for i, name in enumerate(catalog)}
        nodes = sorted(doc["nodes"], key=lambda d: d["id"])
        if [d["id"] for d in nodes] != list(range(len(nodes))):
            raise SubstrateError("node ids must be dense 0..n-1")
        links = sorted(doc["links"], key=lambda d: d["id"])
        if [d["id"] for d in links] != list(range(len(links))):
            raise SubstrateError("link ids must be dense 0..m-1")
        return cls(
            node_capacity=[d["capacity"] for d in nodes],
            hostable=[[index[t] for t in d["hostable"]] for d in nodes],
            link_src=[d["from"] for d in links],
            link_dst=[d["to"] for d in links],
            link_capacity=[d["capacity"] for d in links],
            nf_catalog=catalog,
        )

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Substrate":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


class ResidualLedger:
    """Allocated transmission/processing rates; 0 <= allocation <= capacity."""

    def __init__(self, substrate: Substrate):
        self.substrate = substrate
        self.rate = np.zeros(substrate.num_links, dtype=np.float64)
        self.proc = np.zeros(substrate.num_nodes, dtype=np.float64)

    def copy(self) -> "ResidualLedger":
        out = ResidualLedger(self.substrate)
        out.rate[:] = self.rate
        out.proc[:] = self.proc
        return out

    def link_utilization(self) -> np.ndarray:
        return self.rate / self.substrate.link_capacity

    def node_utilization(self) -> np.ndarray:
        caps = self.substrate.node_capacity
        out = np.zeros_like(self.proc)
        nfv = caps > 0
        out[nfv] = self.proc[nfv] / caps[nfv]
        return out

    def assert_within_capacity(self) -> None:
        sub = self.substrate
        bad_l = np.nonzero(self.rate > sub.link_capacity + FEAS_TOL)[0]
        if len(bad_l):
            l = int(bad_l[0])
            raise CapacityViolation(
                f"link {l}: allocated {self.rate[l]} > capacity {sub.link_capacity[l]}"
            )
        bad_n = np.nonzero(self.proc > sub.node_capacity + FEAS_TOL)[0]
        if len(bad_n):
            n = int(bad_n[0])
            raise CapacityViolation(
                f"node {n}: allocated {self.proc[n]} > capacity {sub.node_capacity[n]}"
            )


def check_feasible(ledger: ResidualLedger, emb: Embedding, req) -> bool:
    """True iff committing emb for req would not violate any capacity."""
    sub = ledger.substrate
    for l, mult in emb.link_multiplicities().items():
        if ledger.rate[l] + req.rate * mult > sub.link_capacity[l] + FEAS_TOL:
            return False
    for n, cnt in emb.node_counts().items():
        if ledger.proc[n] + req.per_nf_proc * cnt > sub.node_capacity[n] + FEAS_TOL:
            return False
    return True


def commit_embedding(ledger: ResidualLedger, emb: Embedding, req) -> ResidualLedger:
    """Charge req's rate per link traversal and processing per NF placement.

    Raises CapacityViolation if any post-commit allocation exceeds capacity.
    """
    sub = ledger.substrate
    for l, mult in emb.link_multiplicities().items():
        new = ledger.rate[l] + req.rate * mult
        if new > sub.link_capacity[l] + FEAS_TOL:
            raise CapacityViolation(
                f"link {l}: allocated {new} > capacity {sub.link_capacity[l]}"
            )
        ledger.rate[l] = new
    for n, cnt in emb.node_counts().items():
        new = ledger.proc[n] + req.per_nf_proc * cnt
        if new > sub.node_capacity[n] + FEAS_TOL:
            raise CapacityViolation(
                f"node {n}: allocated {new} > capacity {sub.node_capacity[n]}"
            )
        ledger.proc[n] = new
    return ledger
