# SPDX-License-Identifier: Apache-2.0
"""Cell-free massive MIMO uplink simulator."""

import json

from ._cfmimo import (
    Combiner,
    Decoder,
    KMeansOptions,
    Network,
    NetworkConfig,
    PilotPlan,
    PilotScheme,
    ServiceMap,
    assign_gb_km,
    assign_ib_km,
    assign_random,
    assign_switching,
    assign_user_group,
    dis_metric,
    fractional_power,
    generate_network,
    initial_access,
    lsfd_cost,
    percentile_linear,
    prelog,
    run_experiment_json,
    se_closed_form_mr,
    se_closed_form_switching,
    se_monte_carlo,
)


def run_experiment(config):
    """Runs an experiment from a config dict; returns a dict of result columns."""
    return run_experiment_json(json.dumps(config))


__all__ = [name for name in dir() if not name.startswith("_")]
