"""Single Gaussian-process regression through one Cholesky factorization.

This is both a baseline regressor and the ``M = 1`` reference against
which the mixture code is checked.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .data import DataSet
from .errors import DimensionError
from .kernels import JITTER, diag_gram, gram, self_gram, self_gram_gradients
from .linalg import robust_cholesky
from .optimize import LOG_BOUNDS, maximize

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GpFit:
    """A factorized GP posterior.

    Attributes
    ----------
    inputs : (N, P) array
    targets : (N, D) array
        Mean-centered training outputs.
    target_mean : (D,) array
        Per-dimension means removed from the outputs; added back by
        `gp_predict`.
    kernel : KernelSpec
    noise_variance : float
    chol_factor : (N, N) array
        Lower-triangular ``L`` with ``L @ L.T = K + noise_variance * I``.
    """

    inputs: np.ndarray
    targets: np.ndarray
    target_mean: np.ndarray
    kernel: object
    noise_variance: float
    chol_factor: np.ndarray

    @property
    def alpha(self):
        return cho_solve((self.chol_factor, True), self.targets)


def gp_fit(data, kernel, noise_variance):
    if data.n < 1:
        raise ValueError("gp_fit needs at least one observation")
    if not noise_variance > 0:
        raise ValueError(f"noise_variance must be positive, got {noise_variance}")
    centered, mean = data.centered()
    C = self_gram(kernel, data.inputs)
    C[np.diag_indices_from(C)] += noise_variance
    L = robust_cholesky(C, JITTER)
    return GpFit(data.inputs, centered.outputs, mean, kernel, float(noise_variance), L)


def gp_predict(fit, X_star):
    """Predictive means (N*, D) and variances (N*,), noise included."""
    X_star = np.asarray(X_star, dtype=float)
    if X_star.ndim == 1:
        X_star = X_star[:, None]
    if X_star.shape[1] != fit.inputs.shape[1]:
        raise DimensionError(
            f"test inputs have {X_star.shape[1]} dimensions, model expects {fit.inputs.shape[1]}")
    k_star = gram(fit.kernel, fit.inputs, X_star)
    means = k_star.T @ fit.alpha + fit.target_mean
    v = solve_triangular(fit.chol_factor, k_star, lower=True)
    variances = fit.noise_variance + diag_gram(fit.kernel, X_star) - np.sum(v * v, axis=0)
    return means, np.maximum(variances, fit.noise_variance)


def gp_log_evidence(fit):
    """log N(y_d | 0, K + s2 I) summed over the D output dimensions."""
    n, d = fit.targets.shape
    z = solve_triangular(fit.chol_factor, fit.targets, lower=True)
    log_det = 2.0 * np.sum(np.log(np.diag(fit.chol_factor)))
    return -0.5 * np.sum(z * z) - 0.5 * d * log_det - 0.5 * n * d * LOG_2PI


def gp_log_evidence_gradient(fit):
    """Gradient of `gp_log_evidence` w.r.t. ``[kernel log-params..., log noise]``."""
    n, d = fit.targets.shape
    alpha = fit.alpha
    C_inv = cho_solve((fit.chol_factor, True), np.eye(n))
    W = alpha @ alpha.T - d * C_inv
    grads = self_gram_gradients(fit.kernel, fit.inputs)
    g_kernel = 0.5 * np.einsum("ij,pij->p", W, grads)
    g_noise = 0.5 * fit.noise_variance * np.trace(W)
    return np.append(g_kernel, g_noise)


def gp_optimize(data, kernel, noise_variance, max_evals=200, gradient_tol=1e-6,
                min_noise_variance=1e-8):
    """Maximize the log evidence over all log-hyperparameters.

    Returns the refitted `GpFit`.
    """
    n_k = kernel.n_params

    def objective(theta):
        fit = gp_fit(data, kernel.with_log_params(theta[:n_k]), np.exp(theta[n_k]))
        return gp_log_evidence(fit), gp_log_evidence_gradient(fit)

    bounds = [LOG_BOUNDS] * n_k + [(np.log(min_noise_variance), LOG_BOUNDS[1])]
    x0 = np.append(kernel.log_params(), np.log(noise_variance))
    x, _, _ = maximize(objective, x0, max_evals=max_evals, gradient_tol=gradient_tol,
                       bounds=bounds)
    return gp_fit(data, kernel.with_log_params(x[:n_k]), np.exp(x[n_k]))


__all__ = ["GpFit", "gp_fit", "gp_predict", "gp_log_evidence",
           "gp_log_evidence_gradient", "gp_optimize", "DataSet"]
