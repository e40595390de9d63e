# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import cfmimo


def small_network(seed=1, K=8, L=16, N=2):
    cfg = cfmimo.NetworkConfig()
    cfg.K, cfg.L, cfg.N, cfg.seed = K, L, N, seed
    return cfmimo.generate_network(cfg)


def test_network_shapes():
    net = small_network()
    assert net.beta.shape == (8, 16)
    assert np.all(net.beta > 0)
    r = net.corr(0, 0)
    assert r.shape == (2, 2)
    assert np.allclose(r, r.conj().T)
    assert len(net.ue_positions) == 8


def test_access_and_pilots():
    net = small_network()
    m = cfmimo.initial_access(net.beta, 4)
    m.check_invariants()
    assert all(len(d) <= 4 for d in m.D)
    plan = cfmimo.assign_user_group(net.beta, m, 4)
    assert sorted(set(plan.t)) <= [0, 1, 2, 3]
    assert len(cfmimo.assign_random(8, 4, 3).t) == 8
    assert len(cfmimo.assign_ib_km(net, m, 4).t) == 8
    assert len(cfmimo.assign_gb_km(net, 4).t) == 8


def test_infeasible_access_raises():
    net = small_network(K=8, L=4)
    with pytest.raises(ValueError):
        cfmimo.initial_access(net.beta, 1)


def test_closed_form_close_to_monte_carlo():
    net = small_network(seed=3)
    m = cfmimo.initial_access(net.beta, 4)
    plan = cfmimo.assign_random(8, 4, 3)
    pilot = [0.1] * 8
    data = cfmimo.fractional_power(net.beta, m, 1.0, 0.1)
    pre = cfmimo.prelog(4, 200)
    cf = cfmimo.se_closed_form_mr(net, m, plan, pilot, data, cfmimo.Decoder.p_lsfd, pre)
    mc = cfmimo.se_monte_carlo(net, m, plan, cfmimo.Combiner.mr, pilot, data,
                               cfmimo.Decoder.p_lsfd, pre, 5000, 11)
    assert np.allclose(mc, cf, rtol=0.05)
    sw = cfmimo.se_closed_form_switching(net, m, 4, pilot, data, cfmimo.Decoder.lsfd, pre)
    assert all(x >= 0 for x in sw)


def test_worked_values():
    assert cfmimo.dis_metric([75, 50, 70, 45], [0, 1, 0, 1],
                             [45, 60, 55, 65], [1, 0, 1, 0]) == pytest.approx(9575)
    assert cfmimo.lsfd_cost(20, 40)[0] == 321200
    assert cfmimo.percentile_linear(list(range(1, 101)), 0.05) == pytest.approx(5.95)
    assert cfmimo.prelog(10, 200) == pytest.approx(0.95)


def test_run_experiment():
    cols = cfmimo.run_experiment({
        "network": {"K": 12, "L": 16, "N": 2, "seed": 5},
        "tau_p": 4,
        "trials": 50,
        "schemes": ["random", "user_group"],
        "combiners": ["MR"],
        "decoders": ["P-LSFD"],
        "theta_values": [0.0],
    })
    assert len(cols["se"]) == 24
    assert set(cols["scheme"]) == {"random", "user_group"}
    assert all(math.isfinite(x) and x >= 0 for x in cols["se"])
    with pytest.raises(ValueError):
        cfmimo.run_experiment({"network": {"K": 12}, "bogus": 1})
