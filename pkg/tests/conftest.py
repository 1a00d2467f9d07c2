import warnings

import numpy as np
import pytest
from scipy.optimize import NonlinearConstraint, minimize


def refine_minimize_1d(f, lo, hi, rounds=60, pts=33):
    """Minimize a 1-d convex function on [lo, hi] by repeated grid refinement.

    Independent of any closed form; used as the oracle for separable
    backward steps.  Accurate to ~1e-10 on well-scaled problems.
    """
    lo, hi = float(lo), float(hi)
    for _ in range(rounds):
        grid = np.linspace(lo, hi, pts)
        vals = np.array([f(g) for g in grid])
        j = int(np.argmin(vals))
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, pts - 1)]
        if hi - lo < 1e-13 * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def l2ball_projection_oracle(y, radius):
    """Numeric argmin_z 0.5||z - y||^2 s.t. ||z|| <= radius, via trust-constr."""
    y = np.asarray(y, dtype=float)
    start = y * min(1.0, 0.5 * radius / max(np.linalg.norm(y), 1e-12))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        res = minimize(lambda z: 0.5 * float(np.sum((z - y) ** 2)),
                       start, jac=lambda z: z - y, method="trust-constr",
                       constraints=[NonlinearConstraint(
                           lambda z: float(z @ z), -np.inf, radius ** 2,
                           jac=lambda z: 2.0 * z[None, :])],
                       options={"xtol": 1e-16, "gtol": 1e-14,
                                "barrier_tol": 1e-14, "maxiter": 5000})
    assert res.status in (1, 2), res.message
    return res.x


def simplex_kl_oracle(y):
    """Numeric argmin_z sum z log(z/y) - z + y over the simplex, via SLSQP."""
    y = np.asarray(y, dtype=float)
    d = y.size
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(lambda z: float(np.sum(z * np.log(z / y)) - np.sum(z) + np.sum(y)),
                       np.full(d, 1.0 / d), jac=lambda z: np.log(z / y),
                       method="SLSQP",
                       bounds=[(1e-14, None)] * d,
                       constraints=[{"type": "eq",
                                     "fun": lambda z: float(np.sum(z)) - 1.0,
                                     "jac": lambda z: np.ones(d)}],
                       options={"ftol": 1e-16, "maxiter": 500})
    assert res.success, res.message
    return res.x


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
