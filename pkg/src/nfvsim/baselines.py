"""Comparison algorithms: unprotected heuristic and greedy admit-if-feasible.

The heuristic runs the same two-pass condition flow as the admission mechanism
but with the weaker cost parameters, so resources are not protected; an
admitted-by-conditions solution that would violate any capacity is removed
(rejected with capacity_post_check, no state change). Greedy skips the
conditions entirely and accepts whenever the routed solution fits, falling
back to the mandatory-only chain when the full chain does not fit.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .admission import (
    ACCEPTED_FULL,
    ACCEPTED_MANDATORY,
    REASON_CAPACITY,
    REASON_CONDITIONS,
    REASON_UNREACHABLE,
    REJECTED,
    AdmissionOutcome,
    PassInfo,
    commit_acceptance,
    evaluate_pass,
    passes_to_try,
)
from .multilayer import TransformCache
from .pricing import HEURISTIC, CostState, PricingParams, profit
from .routing import ROUTE_OK, EdgeCosts, try_route_request
from .substrate import ResidualLedger, Substrate, check_feasible
from .workload import ServiceRequest

GREEDY_WEIGHTS_EXPONENTIAL = "exponential"
GREEDY_WEIGHTS_UNIT = "unit"


def admit_heuristic(
    req: ServiceRequest,
    substrate: Substrate,
    cost_state: CostState,
    residuals: ResidualLedger,
    params: PricingParams,
    cache: Optional[TransformCache] = None,
    debug: bool = True,
    prune: bool = False,
) -> AdmissionOutcome:
    """Heuristic-parameter admission with a final capacity post-check."""
    if params.mode != HEURISTIC:
        raise ValueError("admit_heuristic requires heuristic-mode parameters")
    if cache is None:
        cache = TransformCache(substrate)
    passes: list[PassInfo] = []
    for include_be in passes_to_try(req):
        info = evaluate_pass(req, include_be, cost_state, params, cache, prune=prune)
        passes.append(info)
        if not info.conditions_met:
            continue
        if not check_feasible(residuals, info.embedding, req):
            # Admitted by the conditions but physically infeasible: removed.
            return AdmissionOutcome(
                decision=REJECTED, reason=REASON_CAPACITY, passes=passes
            )
        outcome = commit_acceptance(
            info, req, include_be, cost_state, residuals, params, debug
        )
        outcome.passes = passes
        return outcome
    reason = (
        REASON_UNREACHABLE if all(p.unreachable for p in passes) else REASON_CONDITIONS
    )
    return AdmissionOutcome(decision=REJECTED, reason=reason, passes=passes)


def admit_greedy(
    req: ServiceRequest,
    substrate: Substrate,
    cost_state: CostState,
    residuals: ResidualLedger,
    params: PricingParams,
    cache: Optional[TransformCache] = None,
    debug: bool = False,
    weights_mode: str = GREEDY_WEIGHTS_EXPONENTIAL,
) -> AdmissionOutcome:
    """Accept any request whose routed solution fits the residual capacities.

    Routing still uses the exponential cost weights (load awareness) unless
    weights_mode is "unit"; the admission conditions are never consulted, so
    the z/step-bound invariants do not apply and debug defaults to off.
    """
    if cache is None:
        cache = TransformCache(substrate)
    passes: list[PassInfo] = []
    for include_be in passes_to_try(req):
        variant = "full" if include_be else "mandatory"
        chain = req.chain_for(include_be)
        prof = profit(req, include_be, params)
        info = PassInfo(
            variant=variant,
            embedding=None,
            route=None,
            link_rhs=params.alpha * prof.transmission,
            node_rhs=params.beta * prof.processing,
            prof=prof,
        )
        mlg = cache.get(tuple(nf.nf_type for nf in chain))
        if weights_mode == GREEDY_WEIGHTS_UNIT:
            costs = EdgeCosts.unit(substrate)
        else:
            costs = EdgeCosts(
                cost_state.xbar, cost_state.xtilde, req.rate, req.per_nf_proc
            )
        route, status = try_route_request(mlg, costs, req.source, req.destinations)
        if status != ROUTE_OK:
            info.unreachable = True
            passes.append(info)
            continue
        emb = mlg.project_tree(route.edges) if route.is_tree else mlg.project_path(list(route.edges))
        info.route = route
        info.embedding = emb
        info.link_lhs = cost_state.link_cost_sum(emb, req.rate)
        info.node_lhs = cost_state.node_cost_sum(emb, req.per_nf_proc)
        passes.append(info)
        if check_feasible(residuals, emb, req):
            outcome = commit_acceptance(
                info, req, include_be, cost_state, residuals, params, debug=False
            )
            outcome.decision = ACCEPTED_FULL if include_be else ACCEPTED_MANDATORY
            outcome.passes = passes
            return outcome
    reason = (
        REASON_UNREACHABLE if passes and all(p.unreachable for p in passes) else REASON_CAPACITY
    )
    return AdmissionOutcome(decision=REJECTED, reason=reason, passes=passes)
