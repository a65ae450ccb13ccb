"""Two-cell co-primary spectrum sharing simulator."""

import json as _json

from cpss._core import (
    __version__,
    assign,
    count_feasible_groups,
    draw_rayleigh,
    run_experiment,
    run_experiment_csv,
    run_sample,
)

__all__ = [
    "__version__",
    "assign",
    "count_feasible_groups",
    "draw_rayleigh",
    "run_experiment",
    "run_experiment_csv",
    "run_sample",
    "run_experiment_config",
    "run_sample_config",
]


def run_experiment_config(config):
    """run_experiment for a config given as a dict instead of a JSON string."""
    return run_experiment(_json.dumps(config))


def run_sample_config(config, sample_index=0, method="gs"):
    """run_sample for a config given as a dict instead of a JSON string."""
    return run_sample(_json.dumps(config), sample_index, method)
