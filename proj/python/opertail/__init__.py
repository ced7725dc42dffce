"""Operator tail densities of Liouville copulas.

Distributions are plain dicts in the CLI's JSON schema, e.g.
``{"a": [1, 1], "g": {"type": "inverted_dirichlet", "theta": 3}}``.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DivergenceError,
    DomainError,
    Error,
    IntegrabilityError,
    NotRegularlyVaryingError,
    NumericalError,
)

__all__ = [
    "ConfigError", "DivergenceError", "DomainError", "Error", "IntegrabilityError",
    "NotRegularlyVaryingError", "NumericalError", "copula_density", "copula_tail_density",
    "exponent_function", "hill_estimate", "intensity_measure", "joint_density", "limiting_density",
    "marginal_cdf", "marginal_density", "marginal_survival", "normalizing_constant", "radial_cdf",
    "run_suite", "sample", "suite_names", "validate",
]


def _d(dist):
    return dist if isinstance(dist, str) else _json.dumps(dist)


def validate(dist):
    """Parse and validate a distribution; returns its normalized dict."""
    return _json.loads(_core.validate(_d(dist)))


def normalizing_constant(dist):
    return _core.normalizing_constant(_d(dist))


def joint_density(dist, x):
    return _core.joint_density(_d(dist), list(x))


def marginal_density(dist, i, x):
    return _core.marginal_density(_d(dist), i, x)


def marginal_cdf(dist, i, x):
    return _core.marginal_cdf(_d(dist), i, x)


def marginal_survival(dist, i, x):
    return _core.marginal_survival(_d(dist), i, x)


def radial_cdf(dist, r):
    return _core.radial_cdf(_d(dist), r)


def copula_density(dist, u):
    return _core.copula_density(_d(dist), list(u))


def sample(dist, n, seed=20240917, jobs=1):
    """n x d numpy array; identical for any ``jobs``."""
    return _core.sample(_d(dist), n, seed, jobs)


def limiting_density(dist, x, eigenvalues=()):
    return _core.limiting_density(_d(dist), list(eigenvalues), list(x))


def copula_tail_density(dist, w, eigenvalues=()):
    return _core.copula_tail_density(_d(dist), list(eigenvalues), list(w))


def exponent_function(dist, w, eigenvalues=(), tol=1e-10):
    return _core.exponent_function(_d(dist), list(eigenvalues), list(w), tol)


def intensity_measure(dist, region, eigenvalues=(), frame="copula"):
    """Returns (divergent, value, reason) for a region dict such as
    ``{"type": "upper_orthant", "w": [1, 1]}``."""
    if frame not in ("copula", "original"):
        raise ValueError("frame must be 'copula' or 'original'")
    return _core.intensity_measure(_d(dist), list(eigenvalues), _json.dumps(region), frame == "copula")


def hill_estimate(xs, k=None):
    """Returns (alpha_hat, k)."""
    return _core.hill_estimate(list(map(float, xs)), k)


def suite_names():
    return list(_core.suite_names())


def run_suite(suite, config=None):
    """Runs a verify suite in-process and returns its report dict."""
    return _json.loads(_core.run_suite(suite, _json.dumps(config or {})))
