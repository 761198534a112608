"""Reuse-factor optimization for FPGA neural network deployment.

Networks and sweeps may be passed as dicts or JSON strings.
"""

import json

from . import _core
from ._core import ReuseoptError, block_factor, run_cli, solve_table, valid_reuse_factors

__all__ = [
    "ReuseoptError",
    "block_factor",
    "gen_synthetic_csv",
    "network_geometry",
    "network_workload",
    "optimize",
    "run_cli",
    "solve_table",
    "valid_reuse_factors",
]


def _as_json(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def network_geometry(network):
    return _core.network_geometry(_as_json(network))


def network_workload(network):
    return _core.network_workload(_as_json(network))


def gen_synthetic_csv(sweep=None, noise_pct=5.0, seed=0):
    return _core.gen_synthetic_csv("" if sweep is None else _as_json(sweep), noise_pct, seed)


def optimize(network, models_dir=None, **kwargs):
    """Picks one reuse factor per layer. Without `models_dir` the noise-free synthetic cost forms are used."""
    return _core.optimize(_as_json(network), "" if models_dir is None else str(models_dir), **kwargs)
