"""Experiment orchestration: trials, sweeps, aggregation and result files.

A trial feeds one seeded request stream to one algorithm until the stopping
policy fires (a run of consecutive rejections, or a hard request budget —
the practical stand-in for "no further request can be accepted" against an
unbounded random stream). Paired seeding: every algorithm at a given seed
sees the identical stream, with the rate support truncated by the
approximation-mode caps for all algorithms so comparisons stay paired.
"""

from __future__ import annotations

import csv
import dataclasses
import gc
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import __version__
from .admission import ACCEPTED_FULL, ACCEPTED_MANDATORY, AdmissionOutcome, admit
from .baselines import GREEDY_WEIGHTS_EXPONENTIAL, admit_greedy, admit_heuristic
from .multilayer import TransformCache
from .pricing import APPROXIMATION, HEURISTIC, CostState, PricingParams
from .substrate import Embedding, ResidualLedger, Substrate
from .topologies import auto_route_bound, build as build_topology
from .workload import ServiceRequest, WorkloadGenerator, WorkloadSpec

ALGORITHMS = ("approximation", "heuristic", "greedy")

CSV_COLUMNS = [
    "axis",
    "algorithm",
    "seed",
    "accepted_full",
    "accepted_mand",
    "rejected",
    "profit",
    "profit_norm",
    "mean_link_util",
    "mean_node_util",
    "J",
    "D",
]


@dataclass(frozen=True)
class Termination:
    max_consecutive_rejections: int = 200
    max_requests: int = 50_000

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, doc) -> "Termination":
        if doc is None:
            return cls()
        return cls(
            int(doc.get("max_consecutive_rejections", 200)),
            int(doc.get("max_requests", 50_000)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    topology: dict
    workload: WorkloadSpec
    algorithm: str = "approximation"
    alpha: float = 1.0
    beta: float = 1.0
    k: float = 0.8
    route_links: object = "auto"    # L, or "auto" for the max shortest-path bound
    chain_budget: Optional[int] = None   # K; defaults to the workload max chain length
    termination: Termination = Termination()
    greedy_weights: str = GREEDY_WEIGHTS_EXPONENTIAL
    debug_checks: bool = True
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")

    def to_json(self) -> dict:
        return {
            "topology": self.topology,
            "workload": self.workload.to_json(),
            "algorithm": self.algorithm,
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "route_links": self.route_links,
            "chain_budget": self.chain_budget,
            "termination": self.termination.to_json(),
            "greedy_weights": self.greedy_weights,
            "debug_checks": self.debug_checks,
            "seeds": list(self.seeds),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        return cls(
            topology=doc["topology"],
            workload=WorkloadSpec.from_json(doc.get("workload", {})),
            algorithm=doc.get("algorithm", "approximation"),
            alpha=float(doc.get("alpha", 1.0)),
            beta=float(doc.get("beta", 1.0)),
            k=float(doc.get("k", 0.8)),
            route_links=doc.get("route_links", "auto"),
            chain_budget=doc.get("chain_budget"),
            termination=Termination.from_json(doc.get("termination")),
            greedy_weights=doc.get("greedy_weights", GREEDY_WEIGHTS_EXPONENTIAL),
            debug_checks=bool(doc.get("debug_checks", True)),
            seeds=tuple(doc.get("seeds", [0])),
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class TrialResult:
    algorithm: str
    seed: int
    accepted_full: int = 0
    accepted_mandatory: int = 0
    rejected: int = 0
    rejected_by_reason: dict = field(default_factory=dict)
    profit: float = 0.0
    transmission_profit: float = 0.0
    processing_profit: float = 0.0
    offered_profit: float = 0.0
    mean_link_util: float = 0.0
    max_link_util: float = 0.0
    mean_node_util: float = 0.0
    max_node_util: float = 0.0
    primal_j: float = 0.0
    dual_d: float = 0.0
    step_ratio_all: float = 0.0
    step_ratio_premise: float = 0.0
    duality_margin_min: float = math.inf
    max_rate_seen: float = 0.0
    requests_seen: int = 0
    params: Optional[PricingParams] = None
    trace: Optional[list[dict]] = None

    @property
    def accepted(self) -> int:
        return self.accepted_full + self.accepted_mandatory

    def to_json(self) -> dict:
        doc = dataclasses.asdict(self)
        doc.pop("trace")
        doc["params"] = self.params.to_json() if self.params else None
        if math.isinf(self.duality_margin_min):
            doc["duality_margin_min"] = None
        return doc


def derive_seed(seed: int, stream: int) -> int:
    """Stable child seed for (trial seed, stream tag); PCG64/SeedSequence based."""
    return int(np.random.SeedSequence([int(seed), int(stream)]).generate_state(1)[0])

TOPOLOGY_STREAM = 1
WORKLOAD_STREAM = 2


def build_params(
    config: ExperimentConfig, substrate: Substrate, mode: str
) -> PricingParams:
    spec = config.workload
    if config.route_links == "auto":
        route_links = auto_route_bound(substrate)
    else:
        route_links = int(config.route_links)
    chain_budget = config.chain_budget or spec.max_chain_len()
    eta_min, eta_max = spec.eta_support()
    return PricingParams(
        alpha=config.alpha,
        beta=config.beta,
        k=config.k,
        max_route_links=max(1, route_links),
        max_chain_len=max(1, chain_budget),
        max_dest_count=spec.max_dest_count(),
        eta_max=eta_max,
        eta_min=eta_min,
        mode=mode,
    )


def _admit_callable(config: ExperimentConfig, params: PricingParams, prune: bool) -> Callable:
    if config.algorithm == "approximation":
        return lambda req, sub, state, ledger, cache: admit(
            req, sub, state, ledger, params, cache,
            debug=config.debug_checks, prune=prune,
        )
    if config.algorithm == "heuristic":
        return lambda req, sub, state, ledger, cache: admit_heuristic(
            req, sub, state, ledger, params, cache,
            debug=config.debug_checks, prune=prune,
        )
    return lambda req, sub, state, ledger, cache: admit_greedy(
        req, sub, state, ledger, params, cache, weights_mode=config.greedy_weights
    )


class _SharedRun:
    """Substrate, capped request stream and transform cache shared across the
    paired algorithm runs of one (sweep point, seed)."""

    def __init__(self, config: ExperimentConfig, seed: int):
        self.substrate = build_topology(
            config.topology, np.random.SeedSequence([seed, TOPOLOGY_STREAM])
        )
        # Caps always come from the approximation-mode parameters so that all
        # compared algorithms see the identical stream.
        cap_params = build_params(config, self.substrate, APPROXIMATION)
        spec = replace(config.workload, seed=derive_seed(seed, WORKLOAD_STREAM))
        gen = WorkloadGenerator(
            spec,
            self.substrate,
            rate_cap=cap_params.rate_cap(self.substrate),
            proc_cap=cap_params.proc_cap(self.substrate),
        )
        self.truncated_rate_hi = gen.truncated_rate_hi
        self._source = gen.stream()
        self._buffer: list[ServiceRequest] = []
        self.transforms = TransformCache(self.substrate)

    def requests(self):
        i = 0
        while True:
            if i == len(self._buffer):
                self._buffer.append(next(self._source))
            yield self._buffer[i]
            i += 1


def run_trial(
    config: ExperimentConfig,
    seed: int,
    collect_trace: bool = False,
    shared: Optional[_SharedRun] = None,
) -> TrialResult:
    """One seeded online run of the configured algorithm on a fresh substrate."""
    if shared is None:
        shared = _SharedRun(config, seed)
    substrate = shared.substrate
    mode = APPROXIMATION if config.algorithm == "approximation" else HEURISTIC
    params = build_params(config, substrate, mode)

    state = CostState(substrate, params)
    ledger = ResidualLedger(substrate)
    cache = shared.transforms
    # Exact per-pass diagnostics when tracing; pruned rejections otherwise
    # (identical decisions either way).
    admit_fn = _admit_callable(config, params, prune=not collect_trace)
    result = TrialResult(algorithm=config.algorithm, seed=seed, params=params)
    if collect_trace:
        result.trace = []

    consecutive = 0
    stop = config.termination
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for req in shared.requests():
            if result.requests_seen >= stop.max_requests:
                break
            result.requests_seen += 1
            outcome = admit_fn(req, substrate, state, ledger, cache)
            _tally(result, req, outcome, params)
            if collect_trace:
                entry = outcome.to_trace_entry(req)
                entry["algorithm"] = config.algorithm
                result.trace.append(entry)
            if outcome.accepted:
                consecutive = 0
            else:
                consecutive += 1
                if consecutive >= stop.max_consecutive_rejections:
                    break
    finally:
        if gc_was_enabled:
            gc.enable()

    lu = ledger.link_utilization()
    nu = ledger.node_utilization()
    nfv = substrate.node_capacity > 0
    result.mean_link_util = float(lu.mean())
    result.max_link_util = float(lu.max()) if len(lu) else 0.0
    result.mean_node_util = float(nu[nfv].mean()) if nfv.any() else 0.0
    result.max_node_util = float(nu[nfv].max()) if nfv.any() else 0.0
    result.primal_j = state.primal
    result.dual_d = state.dual
    result.step_ratio_all = state.step_ratio_all
    result.step_ratio_premise = state.step_ratio_premise
    result.duality_margin_min = state.duality_margin_min
    if config.debug_checks:
        state.assert_consistent(ledger)
        ledger.assert_within_capacity()
        if abs(result.profit - state.dual) > 1e-9 * (1.0 + abs(state.dual)):
            raise AssertionError("aggregate profit does not match the dual ledger")
    return result


def _tally(result, req, outcome: AdmissionOutcome, params: PricingParams) -> None:
    if req.rate > result.max_rate_seen:
        result.max_rate_seen = req.rate
    if outcome.passes:
        first = outcome.passes[0]
        result.offered_profit += first.link_rhs + first.node_rhs
    else:
        from .pricing import profit as _profit

        result.offered_profit += _profit(req, True, params).total
    if outcome.decision == ACCEPTED_FULL:
        result.accepted_full += 1
    elif outcome.decision == ACCEPTED_MANDATORY:
        result.accepted_mandatory += 1
    else:
        result.rejected += 1
        reason = outcome.reason or "unknown"
        result.rejected_by_reason[reason] = result.rejected_by_reason.get(reason, 0) + 1
        return
    result.profit += outcome.profit.total
    result.transmission_profit += params.alpha * outcome.profit.transmission
    result.processing_profit += params.beta * outcome.profit.processing


# -- sweeps --------------------------------------------------------------------------


def apply_axis(config: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    """Named sweep axes: n, dest_count_hi, eta_policy, graphml_path."""
    if axis == "n":
        topo = dict(config.topology)
        topo["n"] = int(value)
        return replace(config, topology=topo)
    if axis == "dest_count_hi":
        from .workload import UniformInt

        wl = replace(config.workload, dest_count=UniformInt(1, int(value)))
        return replace(config, workload=wl)
    if axis == "eta_policy":
        value = str(value)
        if value == "counted":
            wl = replace(config.workload, eta_policy="counted")
        else:
            wl = replace(config.workload, eta_policy="constant", eta_value=float(value))
        return replace(config, workload=wl)
    if axis == "graphml_path":
        topo = dict(config.topology)
        topo["kind"] = "graphml"
        topo["path"] = str(value)
        return replace(config, topology=topo)
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    values: list,
    algorithms: tuple[str, ...] = ALGORITHMS,
    n_jobs: int = 1,
) -> list[dict]:
    """Grid of (axis value, algorithm, seed) trials as CSV-ready row dicts.

    profit_norm divides each trial's profit by the max profit across the
    compared algorithms at the same (axis value, seed), i.e. paired
    normalization; the convention is recorded in the run metadata.
    """
    groups = [(value, seed) for value in values for seed in config.seeds]

    def run_group(value, seed):
        point_config = apply_axis(config, axis, value)
        shared = _SharedRun(point_config, seed)
        out = []
        for algorithm in algorithms:
            cfg = replace(point_config, algorithm=algorithm)
            out.append((value, algorithm, seed, run_trial(cfg, seed, shared=shared)))
        return out

    if n_jobs > 1:
        from joblib import Parallel, delayed

        grouped = Parallel(n_jobs=n_jobs)(
            delayed(run_group)(value, seed) for value, seed in groups
        )
    else:
        grouped = [run_group(value, seed) for value, seed in groups]
    flat = [item for group in grouped for item in group]

    by_point_seed: dict[tuple, float] = {}
    rows = []
    for value, algorithm, seed, res in flat:
        key = (str(value), seed)
        by_point_seed[key] = max(by_point_seed.get(key, 0.0), res.profit)
        rows.append(
            {
                "axis": value,
                "algorithm": algorithm,
                "seed": seed,
                "accepted_full": res.accepted_full,
                "accepted_mand": res.accepted_mandatory,
                "rejected": res.rejected,
                "profit": res.profit,
                "profit_norm": None,
                "mean_link_util": res.mean_link_util,
                "mean_node_util": res.mean_node_util,
                "J": res.primal_j,
                "D": res.dual_d,
                # diagnostics beyond the CSV contract (write_csv drops them)
                "step_ratio_premise": res.step_ratio_premise,
                "duality_margin_min": res.duality_margin_min,
            }
        )
    for row in rows:
        denom = by_point_seed[(str(row["axis"]), row["seed"])]
        row["profit_norm"] = row["profit"] / denom if denom > 0 else 0.0
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row[c] for c in CSV_COLUMNS})


def sweep_metadata(config: ExperimentConfig, axis: str, values: list, extra=None) -> dict:
    doc = {
        "version": __version__,
        "config": config.to_json(),
        "axis": axis,
        "values": list(values),
        "normalization": (
            "profit_norm = profit / max profit across compared algorithms at the "
            "same (axis value, seed); paired seeds"
        ),
        "stopping_policy": config.termination.to_json(),
        "rng": "numpy PCG64; topology stream tag 1, workload stream tag 2",
    }
    if extra:
        doc.update(extra)
    return doc


def write_metadata(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def aggregate(rows: list[dict], field_name: str = "profit") -> dict[tuple, tuple[float, float]]:
    """(axis, algorithm) -> (mean, stddev) over seeds."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault((str(row["axis"]), row["algorithm"]), []).append(
            float(row[field_name])
        )
    return {
        key: (float(np.mean(vals)), float(np.std(vals))) for key, vals in groups.items()
    }


# -- trace replay (dump-state support) ------------------------------------------------


def replay_trace(metadata: dict, trace_entries: list[dict]) -> tuple[CostState, ResidualLedger]:
    """Rebuild cost state and residuals by re-committing a decision log."""
    config = ExperimentConfig.from_json(metadata["config"])
    seed = int(metadata["seed"])
    shared = _SharedRun(config, seed)
    substrate = shared.substrate
    mode = APPROXIMATION if config.algorithm == "approximation" else HEURISTIC
    params = build_params(config, substrate, mode)
    state = CostState(substrate, params)
    ledger = ResidualLedger(substrate)
    from .pricing import profit as _profit
    from .substrate import commit_embedding

    by_id = {e["r"]: e for e in trace_entries}
    max_id = max(by_id) if by_id else -1
    for req in shared.requests():
        if req.id > max_id:
            break
        entry = by_id.get(req.id)
        if entry is None or entry["decision"] == "rejected":
            continue
        emb = Embedding(
            tuple(entry["route_links"]),
            tuple((p[0], p[1]) for p in entry["placements"]),
        )
        include_be = entry["variant"] == "full"
        commit_embedding(ledger, emb, req)
        state.commit_costs(emb, req, _profit(req, include_be, params))
    return state, ledger
