"""Monte Carlo advantage estimation for PUF populations."""

import json

from . import _core
from ._core import (
    MAX_KNOWN_CRPS,
    SCHEMA_VERSION,
    ConfigError,
    ConvergenceError,
    DimensionError,
    Error,
    InfeasibleError,
    __version__,
    orthant_prob_2d,
    orthant_prob_3d,
    worked_example_prob,
)

__all__ = [
    "MAX_KNOWN_CRPS",
    "SCHEMA_VERSION",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "Error",
    "InfeasibleError",
    "__version__",
    "config_hash",
    "histogram",
    "orthant_prob_2d",
    "orthant_prob_3d",
    "run_game",
    "sweep",
    "sweep_spec",
    "worked_example_prob",
]


def run_game(arch="apuf", k=64, n_crps=1, n_puf=100000, m_eval=1000, seed=1,
             weighting="uniform", se_inflation=1.0, threads=0, detail=False):
    """Runs one game and returns the estimate record as a dict."""
    return json.loads(_core.run_game_json(arch, k, n_crps, n_puf, m_eval, seed, weighting,
                                          se_inflation, threads, detail))


def sweep_spec(archs, k=64, n_values=(1, 2, 4, 8, 16), k_values=(), n_puf=100000, m_eval=1000,
               seed=1, replications=1, weighting="uniform", se_inflation=1.0):
    """Builds a sweep spec dict; `archs` are texts such as "apuf" or "xor:2"."""
    return {
        "archs": [{"spec": a, "k": k} for a in archs],
        "n_values": list(n_values),
        "k_values": list(k_values),
        "N_PUF": n_puf,
        "M_eval": m_eval,
        "seed": seed,
        "replications": replications,
        "weighting": weighting,
        "se_inflation": se_inflation,
    }


def sweep(spec, kind="crp", csv_path="", resume=True, threads=0):
    """Runs a sweep ("crp", "stage" or "report") and returns the sidecar dict.

    With `csv_path` set, rows are appended there and the sidecar is written
    next to it as `<csv_path>.json`.
    """
    return json.loads(_core.sweep_json(kind, json.dumps(spec), str(csv_path), resume, threads))


def histogram(arch="apuf", k=64, n_condition=1, n_puf=100000, m_eval=1000, seed=1, bins=40,
              csv_path="", threads=0):
    """Bias histogram of the whole population and of the largest group."""
    return json.loads(_core.histogram_json(arch, k, n_condition, n_puf, m_eval, seed, bins,
                                           str(csv_path), threads))


def config_hash(config):
    """Hash used to tag sweep rows, for a JSON-serializable config."""
    return _core.config_hash(json.dumps(config))
