"""Python access to the rieszlab core.

Geometry and kernel evaluations are re-exported from the compiled module.
The experiment runners return parsed JSON reports.
"""

import json

from . import _core
from ._core import (  # noqa: F401
    RieszlabError,
    ball_volume,
    classify_integrability,
    distance,
    heat_kernel,
    kernel_gij,
    kernel_k,
    kernel_kij,
    kernel_U,
    kernel_W,
    multiply,
    psi,
    radius,
)


def expand(i=0, j=0, order=12):
    return json.loads(_core.expand(i, j, order))


def verify(suite, seed=1, tol=None, budget=1.0):
    return json.loads(_core.verify(suite, seed, tol, budget))


def unbounded(kind, i=0, j=0, tmax=1e8, seed=1, budget=1.0):
    return json.loads(_core.unbounded(kind, i, j, tmax, seed, budget))


def hn(N_list=(2, 3, 4), L=60.0, p=4, q=1, draws=20, grid=4, samples=40000, seed=1):
    return json.loads(_core.hn(list(N_list), L, p, q, draws, grid, samples, seed))


def bounded(check, seed=1, tol=None, budget=1.0):
    return json.loads(_core.bounded(check, seed, tol, budget))


def passed(report):
    return all(c["pass"] for c in report["checks"])
