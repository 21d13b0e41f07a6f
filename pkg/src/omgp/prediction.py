"""Mixture predictive distributions and hard data association."""
import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DimensionError
from .kernels import diag_gram, gram


@dataclass(frozen=True)
class MixturePrediction:
    """Per-component Gaussian predictions at N* test inputs.

    ``means`` has shape (N*, M, D); ``variances`` (N*, M) is shared
    across output dimensions and already includes the observation noise.
    """

    inputs: np.ndarray
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def num_components(self):
        return self.weights.shape[0]


def predict(model, X_star, weights=None):
    """Predict every component at ``X_star`` through triangular solves.

    ``weights`` defaults to the prior mixing proportions (``1/M`` under a
    uniform prior; column means of a full-matrix prior).
    """
    X_star = np.asarray(X_star, dtype=float)
    if X_star.ndim == 1:
        X_star = X_star[:, None]
    X = model.data.inputs
    if X_star.ndim != 2 or X_star.shape[1] != X.shape[1]:
        raise DimensionError(
            f"test inputs must have {X.shape[1]} columns, got shape {X_star.shape}")
    config = model.config
    post = model.posterior
    M = config.num_components
    if weights is None:
        weights = np.full(M, 1.0 / M) if config.prior is None else config.prior.mean(axis=0)
    weights = np.asarray(weights, dtype=float)
    n_star = X_star.shape[0]
    means = np.empty((n_star, M, model.data.output_dim))
    variances = np.empty((n_star, M))
    for m, spec in enumerate(config.kernels):
        k_star = gram(spec, X, X_star)
        sb = np.sqrt(post.precisions[m])
        means[:, m, :] = k_star.T @ post.weights[m] + model.output_mean
        v = solve_triangular(post.chol_factors[m], sb[:, None] * k_star, trans="T", lower=False)
        var = config.noise_variance + diag_gram(spec, X_star) - np.sum(v * v, axis=0)
        variances[:, m] = np.maximum(var, config.noise_variance)
    return MixturePrediction(X_star, weights, means, variances)


def log_predictive_density(pred, y_star, point_index):
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    mu = pred.means[point_index]
    var = pred.variances[point_index]
    d = mu.shape[1]
    if y_star.shape != (d,):
        raise DimensionError(f"y_star must have {d} entries")
    with np.errstate(divide="ignore"):
        log_w = np.log(pred.weights)
    comp = (-0.5 * np.sum((y_star - mu) ** 2, axis=1) / var
            - 0.5 * d * np.log(2.0 * np.pi * var))
    return float(logsumexp(log_w + comp))


def predictive_density(pred, y_star, point_index):
    """Mixture density sum_m w_m prod_d N(y_d | mu_md, var_m) at one test point."""
    return float(np.exp(log_predictive_density(pred, y_star, point_index)))


def associate(model):
    """Hard labels ``argmax_m resp[n, m]``; exact ties go to the lowest index."""
    return np.argmax(model.responsibilities, axis=1)


def _fmt(x):
    return repr(float(x))


def write_prediction_csv(pred, path):
    n_star, M, D = pred.means.shape
    P = pred.inputs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(P)] + ["component"]
                   + [f"mean_{d + 1}" for d in range(D)] + ["variance", "weight"])
        for i in range(n_star):
            for m in range(M):
                w.writerow([_fmt(v) for v in pred.inputs[i]] + [m]
                           + [_fmt(v) for v in pred.means[i, m]]
                           + [_fmt(pred.variances[i, m]), _fmt(pred.weights[m])])


def write_labels_csv(model, path):
    labels = associate(model)
    top = model.responsibilities[np.arange(labels.size), labels]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label", "responsibility"])
        for i, (lab, r) in enumerate(zip(labels, top)):
            w.writerow([i, int(lab), _fmt(r)])


def read_labels_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "label" not in rows[0]:
        raise ValueError(f"{path}: expected a 'label' column")
    order = np.argsort([int(r["index"]) for r in rows]) if "index" in rows[0] else None
    labels = np.array([int(r["label"]) for r in rows])
    return labels if order is None else labels[order]
