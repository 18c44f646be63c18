"""Objective functions, stochastic first-order samplers, and related helpers."""

import math

import numpy as np
import scipy.sparse as sp

from .linalg import power_iteration


def simplex_project(v):
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("simplex_project expects a 1-D vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    j = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / j > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class LeastSquares:
    """f(x) = ||A x - b||^2 with an unbiased row-sampling gradient estimator.

    A may be a dense ndarray or a scipy CSR matrix.  Instances are immutable
    after construction and safe to share between concurrent solver runs.
    """

    def __init__(self, A, b):
        if sp.issparse(A):
            self.A = sp.csr_matrix(A)
            self._dense = None
        else:
            self.A = np.asarray(A, dtype=float)
            self._dense = self.A
        self.b = np.asarray(b, dtype=float)
        self.m, self.n = self.A.shape
        if self.b.shape != (self.m,):
            raise ValueError("b must have shape (%d,)" % (self.m,))
        self._L = None

    def value(self, x):
        r = self.A @ x - self.b
        return float(r @ r)

    def grad(self, x):
        r = self.A @ x - self.b
        g = self.A.T @ r
        g = np.asarray(g).ravel()
        return 2.0 * g

    def _rows(self, idx):
        if self._dense is not None:
            return self._dense[idx]
        return self.A[idx].toarray()

    def sfo_sample(self, z, rng):
        """One unbiased stochastic gradient: 2 m a_i (a_i . z - b_i), i ~ U{1..m}."""
        i = int(rng.integers(0, self.m))
        a = self._rows([i])[0]
        return 2.0 * self.m * a * (float(a @ z) - self.b[i])

    def sfo_batch(self, z, size, rng):
        """Mean of `size` independent samples, drawn vectorized from one stream."""
        idx = rng.integers(0, self.m, size=size)
        rows = self._rows(idx)
        resid = rows @ z - self.b[idx]
        return (2.0 * self.m / size) * (rows.T @ resid)

    def sfo_many(self, z, count, rng):
        """A (count, n) matrix of individual samples (for moment checks)."""
        idx = rng.integers(0, self.m, size=count)
        rows = self._rows(idx)
        resid = rows @ z - self.b[idx]
        return 2.0 * self.m * rows * resid[:, None]

    def lipschitz(self):
        """L = 2 sigma_max(A)^2, via power iteration on v -> A^T (A v)."""
        if self._L is None:
            A = self.A
            lam, _, _, _ = power_iteration(lambda v: np.asarray(A.T @ (A @ v)).ravel(),
                                           self.n, tol=1e-9)
            self._L = 2.0 * max(lam, 0.0)
        return self._L


class GaussianSfo:
    """Additive isotropic Gaussian noise around an exact gradient.

    E||sample - grad||^2 equals ``sigma2`` exactly, making it the reference
    sampler for tests that pin the variance level.
    """

    def __init__(self, base, sigma2):
        if sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        self.base = base
        self.sigma2 = float(sigma2)

    def value(self, x):
        return self.base.value(x)

    def grad(self, x):
        return self.base.grad(x)

    def _noise(self, n, rng, count=None):
        scale = math.sqrt(self.sigma2 / n)
        shape = (n,) if count is None else (count, n)
        return rng.normal(0.0, scale, size=shape)

    def sfo_sample(self, z, rng):
        g = self.base.grad(z)
        return g + self._noise(len(g), rng)

    def sfo_batch(self, z, size, rng):
        g = self.base.grad(z)
        return g + self._noise(len(g), rng, count=size).mean(axis=0)

    def sfo_many(self, z, count, rng):
        g = self.base.grad(z)
        return g[None, :] + self._noise(len(g), rng, count=count)

    def lipschitz(self):
        return self.base.lipschitz()


class L1Distance:
    """f(x) = ||x - x_star||_1 with the sign subgradient (0 at kinks)."""

    def __init__(self, x_star):
        self.x_star = np.asarray(x_star, dtype=float)
        self.n = len(self.x_star)

    def value(self, x):
        return float(np.sum(np.abs(x - self.x_star)))

    def subgrad(self, x):
        return np.sign(x - self.x_star)

    def sfo_sample(self, z, rng):
        return self.subgrad(z)

    def lipschitz_M(self):
        # Constant M of f(y) <= f(x) + <f'(x), y-x> + M||x-y||; for the sign
        # subgradient of an l1 distance in the Euclidean norm this is 2 sqrt(n)
        # (each coordinate can contribute a factor-2 overshoot when y crosses
        # the kink), tight in the limit.
        return 2.0 * math.sqrt(self.n)


class SmoothedSaddle:
    """f(x) = max_i (A x)_i and its Euclidean smoothings.

    The smoothing uses the quadratic prox function w(y) = 0.5 ||y - c||^2 on
    the probability simplex with c the uniform center, strong convexity
    modulus 1, so the smoothed inner maximizer is the simplex projection of
    c + A x / tau and f <= f_tau <= f + tau * d2_yw everywhere.
    """

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)
        self.m, self.n = self.A.shape
        self.center = np.full(self.m, 1.0 / self.m)
        self.sigma_omega = 1.0
        self._a_norm = None

    @property
    def d2_yw(self):
        """max over the simplex of W(y) = 0.5 ||y - center||^2 = (m-1)/(2m)."""
        return (self.m - 1) / (2.0 * self.m)

    def value(self, x):
        return float(np.max(self.A @ x))

    def smoothed(self, x, tau):
        """(f_tau(x), grad f_tau(x)); one A-apply and one A^T-apply."""
        if tau <= 0:
            raise ValueError("tau must be positive, got %r" % (tau,))
        ax = self.A @ x
        y = simplex_project(self.center + ax / tau)
        d = y - self.center
        val = float(ax @ y) - tau * 0.5 * float(d @ d) + tau * self.d2_yw
        grad = self.A.T @ y
        return val, grad

    def a_norm(self):
        """Operator norm sigma_max(A) via power iteration on A^T A."""
        if self._a_norm is None:
            A = self.A
            lam, _, _, _ = power_iteration(lambda v: A.T @ (A @ v), self.n, tol=1e-9)
            self._a_norm = math.sqrt(max(lam, 0.0))
        return self._a_norm


def estimate_L(obj):
    """Smoothness constant of the objective (2 sigma_max(A)^2 for least squares)."""
    return obj.lipschitz()


def estimate_sigma2(obj, x_ref, samples, rng):
    """Empirical SFO variance bound at x_ref, inflated by 10 percent.

    Requires at least 1000 samples so the estimate is stable enough to feed
    batch-size rules.
    """
    if samples < 1000:
        raise ValueError("estimate_sigma2 needs samples >= 1000, got %d" % (samples,))
    g = obj.grad(x_ref)
    if hasattr(obj, "sfo_many"):
        S = obj.sfo_many(x_ref, samples, rng)
        sq = np.sum((S - g[None, :]) ** 2, axis=1)
        mean = float(np.mean(sq))
    else:
        acc = 0.0
        for _ in range(samples):
            d = obj.sfo_sample(x_ref, rng) - g
            acc += float(d @ d)
        mean = acc / samples
    return 1.1 * mean
