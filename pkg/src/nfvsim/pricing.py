"""Exponential cost functions, profit functions and primal/dual ledgers.

Link cost x̄(l) and node cost x̃(n) follow the closed forms

    x̄(l) = (1/L) (e^(φ·u(l)) − 1),   u(l) = allocated_rate(l) / B(l)
    x̃(n) = (1/K) (e^(ϕ·v(n)) − 1),   v(n) = allocated_proc(n) / C(n)

and are maintained by the equivalent multiplicative recursion, one update per
link traversal / NF placement of each accepted request. The primal ledger J
(capacity terms plus per-request slack z) and dual ledger D (accepted profit)
certify the competitive bookkeeping: D <= J and per-acceptance
dJ <= 2·max{φ,ϕ}·dD whenever the route respects the L/K accounting bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .substrate import Embedding, ResidualLedger, Substrate
from .workload import ServiceRequest

APPROXIMATION = "approximation"
HEURISTIC = "heuristic"

# Relative tolerance for recursive-vs-closed-form agreement checks.
CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class PricingParams:
    """Admission parameters; phi_link/phi_node derive from the chosen mode."""

    alpha: float = 1.0
    beta: float = 1.0
    k: float = 0.8
    max_route_links: int = 4       # L
    max_chain_len: int = 4         # K
    max_dest_count: int = 1        # |D|_max
    eta_max: float = 1.0
    eta_min: float = 1.0
    mode: str = APPROXIMATION

    def __post_init__(self):
        if self.alpha < 1 or self.beta < 1:
            raise ValueError("scalarization coefficients must be >= 1")
        if self.max_route_links < 1 or self.max_chain_len < 1 or self.max_dest_count < 1:
            raise ValueError("L, K and |D|_max must be >= 1")
        if not (1 <= self.eta_min <= self.eta_max):
            raise ValueError("need 1 <= eta_min <= eta_max")
        if self.mode not in (APPROXIMATION, HEURISTIC):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def phi_link(self) -> float:
        base = self.alpha * self.max_route_links * self.max_dest_count ** self.k
        if self.mode == APPROXIMATION:
            return math.log(2.0 * base + 2.0)
        return math.log(base + 1.0)

    @property
    def phi_node(self) -> float:
        base = self.beta * self.max_chain_len * self.eta_max / self.eta_min
        if self.mode == APPROXIMATION:
            return math.log(2.0 * base + 2.0)
        return math.log(base + 1.0)

    @property
    def xi(self) -> float:
        return max(self.phi_link, self.phi_node)

    def rate_cap(self, substrate: Substrate) -> float:
        return substrate.min_link_capacity() / self.phi_link

    def proc_cap(self, substrate: Substrate) -> float:
        return substrate.min_nfv_capacity() / self.phi_node

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "max_route_links": self.max_route_links,
            "max_chain_len": self.max_chain_len,
            "max_dest_count": self.max_dest_count,
            "eta_max": self.eta_max,
            "eta_min": self.eta_min,
            "mode": self.mode,
            "phi_link": self.phi_link,
            "phi_node": self.phi_node,
        }


@dataclass(frozen=True)
class Profit:
    transmission: float   # ϱ = d · |D|^k
    processing: float     # ρ = η · C(f), 0 when the variant places no NFs
    alpha: float
    beta: float

    @property
    def total(self) -> float:
        return self.alpha * self.transmission + self.beta * self.processing


def profit(req: ServiceRequest, include_best_effort: bool, params: PricingParams) -> Profit:
    """Profit of the full or mandatory-only variant of a request.

    Processing profit is incentive times per-NF processing; a variant whose
    effective chain is empty accrues no processing profit.
    """
    varrho = req.rate * len(req.destinations) ** params.k
    chain = req.chain_for(include_best_effort)
    if chain:
        eta = req.eta_b if include_best_effort else req.eta_m
        rho = eta * req.per_nf_proc
    else:
        rho = 0.0
    return Profit(varrho, rho, params.alpha, params.beta)


class CostState:
    """Per-trial mutable cost state with primal (J) and dual (D) ledgers."""

    def __init__(self, substrate: Substrate, params: PricingParams):
        self.substrate = substrate
        self.params = params
        self.xbar = np.zeros(substrate.num_links, dtype=np.float64)
        self.xtilde = np.zeros(substrate.num_nodes, dtype=np.float64)
        self.primal = 0.0   # J
        self.dual = 0.0     # D
        self.z_history: list[tuple[int, float]] = []
        # Largest observed dJ / (2*xi*dD), overall and with the route inside
        # the L/K accounting premise; diagnostics for the step-bound property.
        self.step_ratio_all = 0.0
        self.step_ratio_premise = 0.0
        # Smallest observed J - D (negative means weak duality was broken).
        self.duality_margin_min = math.inf

    # -- admission left-hand sides ---------------------------------------------------

    def link_cost_sum(self, emb: Embedding, rate: float) -> float:
        """Sum of d·x̄(l) over the embedding's link traversals (with multiplicity)."""
        total = 0.0
        for l in emb.link_traversals:
            total += rate * self.xbar[l]
        return total

    def node_cost_sum(self, emb: Embedding, per_nf_proc: float) -> float:
        """Sum of C(f)·x̃(n) over the embedding's NF placements."""
        total = 0.0
        for _, n in emb.placements:
            total += per_nf_proc * self.xtilde[n]
        return total

    # -- acceptance commit -----------------------------------------------------------

    def commit_costs(self, emb: Embedding, req: ServiceRequest, prof: Profit) -> tuple[float, float, float]:
        """Apply the multiplicative cost updates for an accepted embedding.

        z is evaluated against the pre-update costs on the chosen route, as in
        the admission procedure's statement order; this keeps z >= 0 given the
        admission conditions. Returns (z, dJ, dD).
        """
        params = self.params
        sub = self.substrate
        link_lhs = self.link_cost_sum(emb, req.rate)
        node_lhs = self.node_cost_sum(emb, req.per_nf_proc)
        z = max(
            params.alpha * prof.transmission - link_lhs,
            params.beta * prof.processing - node_lhs,
        )

        d_j = z
        phi_l = params.phi_link
        inv_l = 1.0 / params.max_route_links
        for l, mult in emb.link_multiplicities().items():
            old = self.xbar[l]
            growth = math.exp(phi_l * req.rate / sub.link_capacity[l])
            new = old
            for _ in range(mult):
                new = new * growth + inv_l * (growth - 1.0)
            self.xbar[l] = new
            d_j += sub.link_capacity[l] * (new - old)

        phi_n = params.phi_node
        inv_k = 1.0 / params.max_chain_len
        for n, cnt in emb.node_counts().items():
            old = self.xtilde[n]
            growth = math.exp(phi_n * req.per_nf_proc / sub.node_capacity[n])
            new = old
            for _ in range(cnt):
                new = new * growth + inv_k * (growth - 1.0)
            self.xtilde[n] = new
            d_j += sub.node_capacity[n] * (new - old)

        d_d = prof.total
        self.primal += d_j
        self.dual += d_d
        self.z_history.append((req.id, z))
        margin = self.primal - self.dual
        if margin < self.duality_margin_min:
            self.duality_margin_min = margin
        if d_d > 0:
            ratio = d_j / (2.0 * params.xi * d_d)
            if ratio > self.step_ratio_all:
                self.step_ratio_all = ratio
            if (
                len(emb.link_traversals) <= params.max_route_links
                and len(emb.placements) <= params.max_chain_len
                and ratio > self.step_ratio_premise
            ):
                self.step_ratio_premise = ratio
        return z, d_j, d_d

    # -- diagnostics -------------------------------------------------------------

    def closed_form_xbar(self, ledger: ResidualLedger) -> np.ndarray:
        u = ledger.rate / self.substrate.link_capacity
        return (np.exp(self.params.phi_link * u) - 1.0) / self.params.max_route_links

    def closed_form_xtilde(self, ledger: ResidualLedger) -> np.ndarray:
        caps = self.substrate.node_capacity
        v = np.zeros_like(caps)
        nfv = caps > 0
        v[nfv] = ledger.proc[nfv] / caps[nfv]
        return (np.exp(self.params.phi_node * v) - 1.0) / self.params.max_chain_len

    def assert_consistent(self, ledger: ResidualLedger) -> None:
        """Recursive costs must match the closed forms within 1e-9 relative."""
        cf = self.closed_form_xbar(ledger)
        err = np.abs(self.xbar - cf) - CONSISTENCY_RTOL * (1.0 + self.xbar)
        if np.any(err > 0):
            l = int(np.argmax(err))
            raise AssertionError(
                f"link {l}: recursive x̄={self.xbar[l]!r} vs closed form {cf[l]!r}"
            )
        cf = self.closed_form_xtilde(ledger)
        err = np.abs(self.xtilde - cf) - CONSISTENCY_RTOL * (1.0 + self.xtilde)
        if np.any(err > 0):
            n = int(np.argmax(err))
            raise AssertionError(
                f"node {n}: recursive x̃={self.xtilde[n]!r} vs closed form {cf[n]!r}"
            )

    def snapshot(self, ledger: Optional[ResidualLedger] = None) -> dict:
        doc = {
            "params": self.params.to_json(),
            "links": [
                {"id": i, "xbar": float(self.xbar[i])} for i in range(len(self.xbar))
            ],
            "nodes": [
                {"id": i, "xtilde": float(self.xtilde[i])} for i in range(len(self.xtilde))
            ],
            "primal_J": self.primal,
            "dual_D": self.dual,
        }
        if ledger is not None:
            lu = ledger.link_utilization()
            nu = ledger.node_utilization()
            for i, entry in enumerate(doc["links"]):
                entry["utilization"] = float(lu[i])
            for i, entry in enumerate(doc["nodes"]):
                entry["utilization"] = float(nu[i])
        return doc

    def dump(self, path: str, ledger: Optional[ResidualLedger] = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.snapshot(ledger), fh, indent=1, sort_keys=True)
            fh.write("\n")
