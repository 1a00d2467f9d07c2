"""Composite problem instances: data-defined loss F plus regularizer G.

Three loss families are supported:

* ``lad``: least absolute deviation, F(x) = (1/m) sum_i |a_i'x - b_i|,
  with the subgradient convention sign(0) = 0.
* ``logistic``: F(x) = (1/m) sum_i log(1 + exp(-b_i a_i'x)) with labels
  b_i in {-1, +1}, evaluated via log1p/expit so large margins neither
  overflow nor lose precision.
* ``linear``: F(x) = <c, x>; no data rows.

Stochastic oracles draw a minibatch of rows uniformly without
replacement and return the subgradient of the minibatch-average loss,
which is an unbiased estimate of a full subgradient.
"""

import numpy as np
from scipy.special import expit

from .geometry import as_vector, dual_norm, pairing
from .regularizers import ensure_supported

LOSS_KINDS = ("lad", "logistic", "linear")


class GradientSample:
    """A stochastic subgradient with the rows and RNG state that produced it."""

    def __init__(self, value, indices, seed_state):
        self.value = value
        self.indices = indices
        self.seed_state = seed_state


class CompositeProblem:
    """Objective f = F + G together with its geometry and sampling setup.

    ``M`` is a bound on the dual norm of every per-sample subgradient,
    hence of every minibatch subgradient; it feeds the convergence
    bound.
    """

    def __init__(self, loss, reg, mirror, A=None, b=None, c=None, batch_size=None):
        if loss not in LOSS_KINDS:
            raise ValueError("unknown loss kind %r (choose from %s)" % (loss, LOSS_KINDS))
        ensure_supported(mirror, reg)
        self.loss = loss
        self.reg = reg
        self.mirror = mirror
        if loss == "linear":
            if c is None:
                raise ValueError("linear loss needs a cost vector c")
            if A is not None or b is not None:
                raise ValueError("linear loss takes no data matrix or targets")
            self.c = as_vector(c)
            self.A = None
            self.b = None
            self.d = self.c.size
            self.m = 1
        else:
            if A is None or b is None:
                raise ValueError("%s loss needs a data matrix A and targets b" % loss)
            A = np.asarray(A, dtype=float)
            if A.ndim != 2:
                raise ValueError("data matrix must be 2-d, got shape %s" % (A.shape,))
            b = as_vector(b, dim=A.shape[0])
            if not np.all(np.isfinite(A)):
                raise ValueError("data matrix has non-finite entries")
            if loss == "logistic" and not np.all(np.abs(b) == 1.0):
                raise ValueError("logistic targets must be +1/-1 labels")
            self.A = A
            self.b = b
            self.c = None
            self.m, self.d = A.shape
            if self.m < 1 or self.d < 1:
                raise ValueError("data matrix must have at least one row and column")
        if batch_size is None:
            batch_size = self.m
        if not 1 <= batch_size <= self.m:
            raise ValueError("batch size %r not in [1, %d]" % (batch_size, self.m))
        self.batch_size = int(batch_size)
        self.M = self._lipschitz_bound()

    def _lipschitz_bound(self):
        kind = self.mirror.dual_norm
        if self.loss == "linear":
            return dual_norm(self.c, kind)
        return max(dual_norm(row, kind) for row in self.A)

    def loss_value(self, x):
        x = as_vector(x, dim=self.d)
        if self.loss == "linear":
            return pairing(self.c, x)
        r = self.A @ x
        if self.loss == "lad":
            return float(np.sum(np.abs(r - self.b))) / self.m
        return float(np.sum(np.logaddexp(0.0, -self.b * r))) / self.m

    def subgradient(self, x):
        x = as_vector(x, dim=self.d)
        if self.loss == "linear":
            return self.c.copy()
        return self._rows_subgradient(x, self.A, self.b)

    def _rows_subgradient(self, x, A, b):
        r = A @ x
        if self.loss == "lad":
            w = np.sign(r - b)
        else:
            w = -b * expit(-b * r)
        return (A.T @ w) / A.shape[0]

    def objective(self, x):
        return self.loss_value(x) + self.reg.value(x)

    def sample_subgradient(self, x, rng):
        """Minibatch subgradient; unbiased over uniformly drawn batches."""
        state = rng.bit_generator.state
        if self.loss == "linear":
            return GradientSample(self.c.copy(), np.arange(0), state)
        idx = rng.choice(self.m, size=self.batch_size, replace=False)
        g = self._rows_subgradient(x, self.A[idx], self.b[idx])
        return GradientSample(g, idx, state)


def build_problem(loss, reg, mirror, A=None, b=None, c=None, batch_size=None):
    """Validate and assemble a CompositeProblem; see CompositeProblem."""
    return CompositeProblem(loss, reg, mirror, A=A, b=b, c=c, batch_size=batch_size)


def synthetic_sparse_data(loss, d, m, k, noise, seed):
    """Planted k-sparse instance: returns (A, b, x_planted).

    A has standard normal entries; the planted solution has k support
    coordinates with magnitudes in [1, 2] and random signs.  For lad,
    b = A x_planted + noise * eps; for logistic, b = sign of the noisy
    response (zeros mapped to +1).
    """
    if loss not in ("lad", "logistic"):
        raise ValueError("synthetic recipe supports lad or logistic, got %r" % (loss,))
    if not (1 <= k <= d):
        raise ValueError("planted sparsity k=%r must lie in [1, d]" % (k,))
    if m < 1 or noise < 0:
        raise ValueError("need m >= 1 and noise >= 0")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, d))
    x_planted = np.zeros(d)
    support = rng.choice(d, size=k, replace=False)
    signs = rng.choice([-1.0, 1.0], size=k)
    x_planted[support] = signs * (1.0 + rng.random(k))
    response = A @ x_planted + noise * rng.standard_normal(m)
    if loss == "lad":
        b = response
    else:
        b = np.sign(response)
        b[b == 0.0] = 1.0
    return A, b, x_planted


def read_dense_matrix(path, ndmin=2):
    """Read the dense text format: one row per line, whitespace-separated."""
    try:
        out = np.loadtxt(path, dtype=float, ndmin=ndmin)
    except Exception as exc:
        raise ValueError("failed to read matrix file %s: %s" % (path, exc)) from exc
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix file %s has non-finite entries" % (path,))
    return out


def write_dense_matrix(path, arr):
    """Write the dense text format with full float64 round-trip precision."""
    np.savetxt(path, np.asarray(arr, dtype=float), fmt="%.17g")
