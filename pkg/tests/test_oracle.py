import numpy as np
import pytest

from nfvsim.admission import admit
from nfvsim.baselines import admit_greedy, admit_heuristic
from nfvsim.multilayer import TransformCache
from nfvsim.oracle import (
    BudgetExceeded,
    make_tiny_instance,
    offline_optimum,
    verify_competitive,
    verify_instance,
)
from nfvsim.pricing import APPROXIMATION, HEURISTIC, CostState, PricingParams, profit
from nfvsim.substrate import ResidualLedger
from nfvsim.workload import ChainNf, ServiceRequest

from conftest import make_substrate


def params(**kw):
    base = dict(
        alpha=1.0, beta=1.0, k=0.8, max_route_links=6, max_chain_len=2,
        max_dest_count=2, eta_min=1.0, eta_max=1.0, mode=APPROXIMATION,
    )
    base.update(kw)
    return PricingParams(**base)


def test_zero_requests_zero_profit():
    sub = make_substrate([50.0, 50.0], [[0], [0]], [(0, 1)], 50.0, ["f0", "f1"])
    res = offline_optimum(sub, [], params())
    assert res.best_profit == 0.0 and res.chosen == []


def test_single_request_ample_capacity():
    sub = make_substrate([50.0, 50.0], [[0, 1], [0, 1]], [(0, 1)], 50.0, ["f0", "f1"])
    r = ServiceRequest(0, 0, (1,), (ChainNf(0, True), ChainNf(1, False)), 5.0, 5.0, 1.0, 2.0)
    p = params()
    res = offline_optimum(sub, [r], p)
    # full variant with eta_b: 5*1 + 2*5 = 15
    assert res.best_profit == pytest.approx(profit(r, True, p).total)
    assert res.chosen[0][0] == 0 and res.chosen[0][1] == "full"


def test_two_mutually_exclusive_requests_picks_larger():
    # 3-node line with a shared bottleneck link that fits only one request
    sub = make_substrate([100.0, 100.0, 100.0], [[0], [0], [0]], [(0, 1), (1, 2)], 10.0, ["f0"])
    p = params()
    small = ServiceRequest(0, 0, (2,), (), 6.0, 0.0, 1.0, 1.0)
    large = ServiceRequest(1, 0, (2,), (), 9.0, 0.0, 1.0, 1.0)
    res = offline_optimum(sub, [small, large], p)
    assert res.best_profit == pytest.approx(9.0)
    assert [c[0] for c in res.chosen] == [1]


def test_oracle_variant_choice_under_pressure():
    # full chain cannot fit the node, mandatory-only can
    sub = make_substrate([8.0, 100.0], [[0, 1], []], [(0, 1)], 100.0, ["f0", "f1"])
    p = params()
    r = ServiceRequest(0, 0, (1,), (ChainNf(0, True), ChainNf(1, False)), 5.0, 5.0, 1.0, 2.0)
    res = offline_optimum(sub, [r], p)
    assert res.chosen[0][1] == "mandatory"
    assert res.best_profit == pytest.approx(5.0 + 1.0 * 5.0)


def test_budget_guards():
    sub = make_substrate([50.0] * 7, [[0]] * 7, [(i, i + 1) for i in range(6)], 50.0, ["f0"])
    with pytest.raises(BudgetExceeded):
        offline_optimum(sub, [], params())
    sub2 = make_substrate([50.0, 50.0], [[0], [0]], [(0, 1)], 50.0, ["f0"])
    reqs = [ServiceRequest(i, 0, (1,), (), 1.0, 0.0, 1.0, 1.0) for i in range(6)]
    with pytest.raises(BudgetExceeded):
        offline_optimum(sub2, reqs, params())
    long_chain = ServiceRequest(0, 0, (1,), tuple(ChainNf(0, True) for _ in range(3)), 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(BudgetExceeded):
        offline_optimum(sub2, [long_chain], params())


def test_oracle_at_least_any_online_algorithm():
    for seed in range(25):
        sub, reqs, p = make_tiny_instance(seed)
        oracle = offline_optimum(sub, reqs, p)
        ph = PricingParams(
            alpha=p.alpha, beta=p.beta, k=p.k,
            max_route_links=p.max_route_links, max_chain_len=p.max_chain_len,
            max_dest_count=p.max_dest_count, eta_max=p.eta_max, eta_min=p.eta_min,
            mode=HEURISTIC,
        )
        for admit_fn, pp in ((admit, p), (admit_heuristic, ph), (admit_greedy, ph)):
            state = CostState(sub, pp)
            ledger = ResidualLedger(sub)
            cache = TransformCache(sub)
            online = 0.0
            for r in reqs:
                out = admit_fn(r, sub, state, ledger, pp, cache, debug=False)
                if out.accepted:
                    online += out.profit.total
            assert oracle.best_profit >= online - 1e-9, (seed, admit_fn.__name__)


def test_verify_instance_fields():
    res = verify_instance(0)
    assert res["competitive_ok"] and res["oracle_at_least_online"]
    assert res["oracle_profit"] >= res["online_profit"] - 1e-9
    assert res["bound"] == pytest.approx(2.0 * make_tiny_instance(0)[2].xi)


def test_verify_competitive_summary():
    summary = verify_competitive(10, 0)
    assert summary["instances"] == 10
    assert summary["ok"] == 10
    assert summary["failures"] == []
