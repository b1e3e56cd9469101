"""Python front end for the reachplan C++ core."""

import json

from ._core import (
    AdmissibleSet,
    LearnedSet,
    ReachplanError,
    __version__,
    area_2d,
    batch_learn,
    compute_d_min,
    distance_2d,
    double_integrator_occupancy,
    hull_2d,
    init_seed,
    minkowski_sum,
    project,
    recursive_update,
)
from . import _core

__all__ = [
    "AdmissibleSet",
    "LearnedSet",
    "ReachplanError",
    "__version__",
    "area_2d",
    "batch_learn",
    "compute_d_min",
    "distance_2d",
    "double_integrator_occupancy",
    "hull_2d",
    "init_seed",
    "learn_demo_csv",
    "minkowski_sum",
    "monte_carlo",
    "project",
    "recursive_update",
    "run",
]


def _dump(config):
    if config is None:
        return ""
    return json.dumps(config)


def run(config=None, mode=None):
    """Closed-loop run of a scenario dict (same schema as the CLI configs).

    Returns {"metrics": ..., "trace": ...}.
    """
    return _core._run(_dump(config), mode or "")


def monte_carlo(config=None, n=30, modes=("proposed", "rmpc", "dmpc"), threads=0):
    return _core._monte_carlo(_dump(config), int(n), list(modes), int(threads))


def learn_demo_csv(config=None):
    return _core._learn_demo(_dump(config))
