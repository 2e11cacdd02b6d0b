"""Conventional local GP: k-NN selection, posterior prediction, likelihood.

Prediction at a test location uses only the k nearest training points.
The posterior targets the latent function value (no noise in the prior
variance at the test point), with the constant process mean handled as in
standard constant-mean kriging. `fit_local_gp` maximizes the likelihood
over (signal variance, lengthscales, noise variance, mean) with positivity
enforced by optimizing the variance-like parameters in log space.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernel
from .core import (
    Dataset,
    KernelParams,
    KOutOfRangeError,
    Neighborhood,
    Posterior,
)
from .optimize import OptimizerConfig, gradient_descent

__all__ = ["LocalFit", "knn_select", "local_gp_posterior", "local_gp_nll",
           "fit_local_gp"]

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

#: Floor applied to a zero noise variance before moving to log space.
NOISE_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class LocalFit:
    """Maximum-likelihood local GP fit on one neighborhood."""

    params: KernelParams
    nll: float
    neighborhood: Neighborhood
    iterations: int = 0
    status: str = ""


def knn_select(d: Dataset, x_star, k: int) -> Neighborhood:
    """Select the k nearest training inputs by Euclidean distance.

    Ties are broken by ascending dataset index, so the result is a
    deterministic total order for any dataset and center.
    """
    if not 1 <= k <= d.n:
        raise KOutOfRangeError(f"k={k} outside 1..{d.n}")
    x_star = np.asarray(x_star, dtype=float)
    diffs = d.inputs - x_star
    dist2 = np.einsum("ij,ij->i", diffs, diffs)
    order = np.argsort(dist2, kind="stable")[:k]
    return Neighborhood(center=x_star, indices=order)


def gp_posterior_raw(X, y, x_star, kp: KernelParams,
                     zero_prior_mean: bool = False) -> Posterior:
    """Gaussian-conditioning posterior from raw arrays.

    mean = m + c' C^-1 (y - m 1) with m the constant process mean (dropped
    from the leading term when `zero_prior_mean`), variance =
    signal_variance - c' C^-1 c. Tiny negative round-off in the variance is
    clamped to zero.
    """
    C = kernel.cov_matrix(X, X, kp)
    c = kernel.cov_matrix(np.atleast_2d(x_star), X, kp)[0]
    L = kernel.cholesky_with_jitter(C, kp.signal_variance)
    alpha = kernel.chol_solve_vec(L, y - kp.mean)
    w = kernel.half_solve(L, c)
    mean = float(c @ alpha)
    if not zero_prior_mean:
        mean += kp.mean
    variance = kp.signal_variance - float(w @ w)
    if variance < 0.0:
        if variance < -1e-10 * max(1.0, kp.signal_variance):
            raise kernel.NotPositiveDefiniteError(
                f"posterior variance {variance:.3e} below round-off tolerance"
            )
        variance = 0.0
    return Posterior(mean=mean, variance=variance)


def gp_nll_raw(X, y, kp: KernelParams) -> float:
    """Negative log density of y under the stationary GP with noise.

    Includes the (n/2) log 2 pi constant so the value is a proper log
    density and likelihoods of different models over the same data are
    directly comparable.
    """
    n = len(y)
    C = kernel.cov_matrix(X, X, kp)
    L = kernel.cholesky_with_jitter(C, kp.signal_variance)
    r = kernel.half_solve(L, y - kp.mean)
    return float(0.5 * kernel.chol_logdet(L) + 0.5 * (r @ r) + n * HALF_LOG_2PI)


def local_gp_posterior(nb: Neighborhood, d: Dataset, kp: KernelParams,
                       zero_prior_mean: bool = False) -> Posterior:
    """Posterior of the latent value at the neighborhood center."""
    X = d.inputs[nb.indices]
    y = d.responses[nb.indices]
    return gp_posterior_raw(X, y, nb.center, kp, zero_prior_mean=zero_prior_mean)


def local_gp_nll(nb: Neighborhood, d: Dataset, kp: KernelParams) -> float:
    """Negative log likelihood of the neighborhood responses."""
    X = d.inputs[nb.indices]
    y = d.responses[nb.indices]
    return gp_nll_raw(X, y, kp)


class _LocalObjective:
    """NLL and analytic gradient over (log sv, log ls_1..p, log noise, mean).

    Pairwise squared coordinate differences are precomputed once per
    neighborhood; each evaluation costs one Cholesky of the n x n matrix.
    """

    def __init__(self, X, y):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.n, self.p = self.X.shape
        # (p, n, n) per-dimension squared differences
        diff = self.X.T[:, :, None] - self.X.T[:, None, :]
        self.d2 = diff * diff
        self.eye = np.eye(self.n)

    def unpack(self, vec):
        p = self.p
        sv = math.exp(vec[0])
        ls = np.exp(vec[1:1 + p])
        noise = math.exp(vec[1 + p])
        mean = vec[2 + p]
        return sv, ls, noise, mean

    def value(self, vec):
        sv, ls, noise, mean = self.unpack(vec)
        scaled = np.tensordot(1.0 / (ls * ls), self.d2, axes=(0, 0))
        K = sv * np.exp(-0.5 * scaled)
        C = K + noise * self.eye
        try:
            L = kernel.cholesky_with_jitter(C, sv)
        except kernel.NotPositiveDefiniteError:
            return np.inf, None
        r = self.y - mean
        alpha = kernel.chol_solve_vec(L, r)
        f = 0.5 * kernel.chol_logdet(L) + 0.5 * float(r @ alpha) \
            + self.n * HALF_LOG_2PI
        return f, (K, L, alpha, ls, sv, noise)

    def grad(self, vec, state):
        K, L, alpha, ls, sv, noise = state
        Cinv = kernel.chol_solve_vec(L, self.eye)
        M = Cinv - np.outer(alpha, alpha)
        MK = M * K
        g = np.empty(self.p + 3)
        g[0] = 0.5 * float(np.sum(MK))
        for dim in range(self.p):
            g[1 + dim] = 0.5 * float(np.sum(MK * self.d2[dim])) / (ls[dim] ** 2)
        g[1 + self.p] = 0.5 * noise * float(np.trace(M))
        g[2 + self.p] = -float(np.sum(alpha))
        return g


def pack_kernel_params(kp: KernelParams) -> np.ndarray:
    noise = max(kp.noise_variance, NOISE_FLOOR_REL * max(kp.signal_variance, 1.0))
    return np.concatenate((
        [math.log(kp.signal_variance)],
        np.log(kp.lengthscales),
        [math.log(noise), kp.mean],
    ))


def unpack_kernel_params(vec, p) -> KernelParams:
    return KernelParams(
        signal_variance=math.exp(vec[0]),
        lengthscales=np.exp(vec[1:1 + p]),
        noise_variance=math.exp(vec[1 + p]),
        mean=float(vec[2 + p]),
    )


def fit_local_gp(nb: Neighborhood, d: Dataset, init: KernelParams,
                 cfg: OptimizerConfig | None = None) -> LocalFit:
    """Fit kernel parameters and mean by likelihood descent from `init`.

    The attained negative log likelihood never exceeds the value at
    `init`, and the result is a deterministic function of the inputs.
    """
    if cfg is None:
        cfg = OptimizerConfig()
    X = d.inputs[nb.indices]
    y = d.responses[nb.indices]
    obj = _LocalObjective(X, y)
    res = gradient_descent(obj.value, obj.grad, pack_kernel_params(init), cfg)
    params = unpack_kernel_params(res.x, obj.p)
    return LocalFit(params=params, nll=res.fval, neighborhood=nb,
                    iterations=res.iterations, status=res.status)
