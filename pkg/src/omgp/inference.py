"""Variational inference for the overlapping mixture of Gaussian processes.

Every component ``m`` is a global GP over the whole input space; samples
are softly assigned to components through the responsibility matrix
``resp`` (N x M, rows sum to one).  Given the responsibilities, each
component sees heteroscedastic noise ``noise_variance / resp[n, m]`` and
everything reduces to triangular solves against

    R_m = chol(I + B_m^1/2 K_m B_m^1/2),   B_m = diag(resp[:, m] / noise_variance)

which stays well conditioned even when responsibilities approach zero.
Dense inverses are never formed.

Training alternates closed-form updates of the responsibilities and of the
trajectory posteriors (both monotone in the standard variational bound)
with gradient ascent on the marginalized (KL-corrected) bound over all
log-hyperparameters.
"""
import copy
import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import logsumexp

from .data import DataSet
from .errors import ConfigError, DimensionError, FactorizationError
from .kernels import JITTER, KernelSpec, self_gram, self_gram_gradients
from .linalg import robust_cholesky
from .optimize import LOG_BOUNDS, maximize

log = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)

#: lower bound applied to every responsibility (rows are renormalized after)
RESPONSIBILITY_FLOOR = 1e-10
#: relative spread of the multiplicative noise used to break label symmetry
INIT_PERTURBATION = 0.1


@dataclass
class MStepOptions:
    max_evals: int = 20
    gradient_tol: float = 1e-5


@dataclass
class OmgpConfig:
    """Model hyperparameters and training controls.

    ``prior`` is either None (uniform ``1/M`` everywhere) or a full
    N x M row-stochastic matrix.  The prior is never learned.
    """

    kernels: list
    noise_variance: float
    prior: np.ndarray = None
    max_em_rounds: int = 50
    estep_tol: float = 1e-6
    max_estep_iters: int = 200
    mstep: MStepOptions = field(default_factory=MStepOptions)
    seed: int = 0
    learn_hyperparameters: bool = True
    min_noise_variance: float = 1e-8
    n_restarts: int = 1

    def __post_init__(self):
        self.kernels = list(self.kernels)
        if len(self.kernels) < 1:
            raise ConfigError("at least one component is required")
        if not all(isinstance(k, KernelSpec) for k in self.kernels):
            raise ConfigError("kernels must be KernelSpec instances")
        if not (np.isfinite(self.noise_variance) and self.noise_variance > 0):
            raise ConfigError(f"noise_variance must be positive, got {self.noise_variance}")
        self.noise_variance = float(self.noise_variance)
        if self.prior is not None:
            prior = np.asarray(self.prior, dtype=float)
            if prior.ndim != 2 or prior.shape[1] != self.num_components:
                raise ConfigError(f"prior must be N x {self.num_components}")
            if np.any(prior < 0) or np.any(np.abs(prior.sum(axis=1) - 1.0) > 1e-12):
                raise ConfigError("prior rows must be non-negative and sum to 1")
            self.prior = prior
        if self.max_em_rounds < 0 or self.max_estep_iters < 1 or self.n_restarts < 1:
            raise ConfigError("iteration limits must be positive")

    @property
    def num_components(self):
        return len(self.kernels)

    def prior_matrix(self, n):
        if self.prior is None:
            return np.full((n, self.num_components), 1.0 / self.num_components)
        if self.prior.shape[0] != n:
            raise DimensionError(f"prior has {self.prior.shape[0]} rows, data has {n}")
        return self.prior

    def log_params(self):
        """All learnable log-hyperparameters: each kernel in turn, then the noise."""
        return np.concatenate([k.log_params() for k in self.kernels]
                              + [[np.log(self.noise_variance)]])

    def with_log_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        kernels, i = [], 0
        for k in self.kernels:
            kernels.append(k.with_log_params(theta[i:i + k.n_params]))
            i += k.n_params
        if theta.size != i + 1:
            raise ValueError(f"expected {i + 1} log-parameters, got {theta.size}")
        return dataclasses.replace(self, kernels=kernels, noise_variance=float(np.exp(theta[i])))

    def param_bounds(self):
        n_kernel = sum(k.n_params for k in self.kernels)
        return [LOG_BOUNDS] * n_kernel + [(np.log(self.min_noise_variance), LOG_BOUNDS[1])]

    def to_dict(self):
        return {
            "num_components": self.num_components,
            "kernels": [k.to_dict() for k in self.kernels],
            "noise_variance": self.noise_variance,
            "prior": "uniform" if self.prior is None else self.prior.tolist(),
            "max_em_rounds": self.max_em_rounds,
            "estep_tol": self.estep_tol,
            "max_estep_iters": self.max_estep_iters,
            "mstep": {"max_evals": self.mstep.max_evals,
                      "gradient_tol": self.mstep.gradient_tol},
            "seed": self.seed,
            "learn_hyperparameters": self.learn_hyperparameters,
            "min_noise_variance": self.min_noise_variance,
            "n_restarts": self.n_restarts,
        }

    @classmethod
    def from_dict(cls, d):
        prior = d.get("prior", "uniform")
        mstep = d.get("mstep", {})
        return cls(
            kernels=[KernelSpec.from_dict(k) for k in d["kernels"]],
            noise_variance=d["noise_variance"],
            prior=None if prior == "uniform" else np.asarray(prior),
            max_em_rounds=int(d.get("max_em_rounds", 50)),
            estep_tol=float(d.get("estep_tol", 1e-6)),
            max_estep_iters=int(d.get("max_estep_iters", 200)),
            mstep=MStepOptions(int(mstep.get("max_evals", 20)),
                               float(mstep.get("gradient_tol", 1e-5))),
            seed=int(d.get("seed", 0)),
            learn_hyperparameters=bool(d.get("learn_hyperparameters", True)),
            min_noise_variance=float(d.get("min_noise_variance", 1e-8)),
            n_restarts=int(d.get("n_restarts", 1)),
        )


@dataclass(frozen=True)
class TrajectoryPosterior:
    """Gaussian posteriors q(f_d^m) = N(means[m][:, d], covariances[m]).

    Posteriors built from "sites" additionally carry the diagonal site
    precisions ``B_m``, the upper Cholesky factors ``R_m`` of
    ``I + B_m^1/2 K_m B_m^1/2`` and representer weights ``w_m`` with
    ``means[m] = K_m @ w_m``.  Their covariance is ``(K_m^-1 + B_m)^-1``.
    """

    means: np.ndarray            # (M, N, D)
    covariances: np.ndarray      # (M, N, N)
    precisions: np.ndarray = None     # (M, N)
    chol_factors: np.ndarray = None   # (M, N, N) upper triangular
    weights: np.ndarray = None        # (M, N, D)
    kl_divergence: float = None       # KL(q(F) || p(F)) against the building prior

    @property
    def num_components(self):
        return self.means.shape[0]


def check_responsibilities(resp, n, m):
    resp = np.asarray(resp, dtype=float)
    if resp.shape != (n, m):
        raise DimensionError(f"responsibilities must be {n} x {m}, got {resp.shape}")
    if np.any(resp < 0) or np.any(np.abs(resp.sum(axis=1) - 1.0) > 1e-10):
        raise ValueError("responsibility rows must be non-negative and sum to 1")
    return resp


def floor_responsibilities(resp, floor=RESPONSIBILITY_FLOOR):
    resp = np.maximum(resp, floor)
    return resp / resp.sum(axis=1, keepdims=True)


def initial_responsibilities(prior, rng, spread=INIT_PERTURBATION):
    """Prior perturbed by a factor ``1 + U(-spread, spread)`` per entry."""
    noisy = prior * (1.0 + rng.uniform(-spread, spread, size=prior.shape))
    noisy /= noisy.sum(axis=1, keepdims=True)
    return floor_responsibilities(noisy)


def component_grams(data, config):
    return [self_gram(k, data.inputs) for k in config.kernels]


def _site_factor(K, b, component):
    sb = np.sqrt(b)
    A = sb[:, None] * K * sb[None, :]
    A[np.diag_indices_from(A)] += 1.0
    return sb, robust_cholesky(A, JITTER, lower=False, component=component)


def posterior_from_sites(grams, precisions, weights):
    """Build a posterior with covariance (K^-1 + B)^-1 and means K @ w.

    Any non-negative site precisions and any weights give a valid Gaussian,
    so this also generates arbitrary (non-optimal) q(F) for bound checks.
    """
    M = len(grams)
    n, d = weights.shape[1], weights.shape[2]
    means = np.empty((M, n, d))
    covs = np.empty((M, n, n))
    Rs = np.empty((M, n, n))
    kl = 0.0
    eye = np.eye(n)
    for m, K in enumerate(grams):
        sb, R = _site_factor(K, precisions[m], m)
        R_inv = solve_triangular(R, eye, lower=False)
        V = R_inv.T @ (sb[:, None] * K)
        covs[m] = K - V.T @ V
        covs[m] = 0.5 * (covs[m] + covs[m].T)
        means[m] = K @ weights[m]
        Rs[m] = R
        # log|K| - log|Sigma| = log|A|,  tr(K^-1 Sigma) = tr(A^-1)
        log_det_A = 2.0 * np.sum(np.log(np.diag(R)))
        kl += 0.5 * (d * (np.sum(R_inv * R_inv) - n + log_det_A)
                     + np.sum(weights[m] * means[m]))
    return TrajectoryPosterior(means, covs, np.asarray(precisions, dtype=float), Rs,
                               np.asarray(weights, dtype=float), kl)


def m_step_posterior(data, responsibilities, config, grams=None):
    """Optimal q(F) for fixed responsibilities and hyperparameters."""
    n, M = data.n, config.num_components
    resp = check_responsibilities(responsibilities, n, M)
    if grams is None:
        grams = component_grams(data, config)
    precisions = resp.T / config.noise_variance
    weights = np.empty((M, n, data.output_dim))
    for m, K in enumerate(grams):
        sb, R = _site_factor(K, precisions[m], m)
        u = cho_solve((R, False), sb[:, None] * data.outputs)
        weights[m] = sb[:, None] * u
    return posterior_from_sites(grams, precisions, weights)


def expected_log_likelihood(data, posterior, noise_variance):
    """The N x M matrix of expected per-sample log-likelihoods ``a[n, m]``."""
    Y = data.outputs
    d = Y.shape[1]
    sq = np.sum((Y[None, :, :] - posterior.means) ** 2, axis=2)          # (M, N)
    var = np.diagonal(posterior.covariances, axis1=1, axis2=2)           # (M, N)
    a = -(sq + d * var) / (2.0 * noise_variance) - 0.5 * d * (LOG_2PI + np.log(noise_variance))
    return a.T


def e_step(data, posterior, config):
    """Optimal responsibilities for a fixed q(F), floored and renormalized."""
    a = expected_log_likelihood(data, posterior, config.noise_variance)
    with np.errstate(divide="ignore"):
        logits = np.log(config.prior_matrix(data.n)) + a
    log_resp = logits - logsumexp(logits, axis=1, keepdims=True)
    resp = np.exp(log_resp)
    return floor_responsibilities(resp)


def kl_assignments(resp, prior):
    """KL(q(Z) || p(Z)) with the convention 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(resp > 0, resp * (np.log(resp) - np.log(prior)), 0.0)
    return float(np.sum(terms))


def kl_trajectories_dense(posterior, grams):
    """KL(q(F) || p(F)) from explicit means and covariances.

    Needs Cholesky factors of every K_m and covariance, so it is only
    reliable for well-conditioned problems; used for arbitrary posteriors
    without site parameters.
    """
    total = 0.0
    for m, K in enumerate(grams):
        n, d = posterior.means[m].shape
        if n == 0:
            continue
        Lk = robust_cholesky(K, JITTER, component=m)
        Ls = robust_cholesky(posterior.covariances[m], JITTER, component=m)
        trace = np.sum(solve_triangular(Lk, Ls, lower=True) ** 2)
        z = solve_triangular(Lk, posterior.means[m], lower=True)
        log_det = 2.0 * (np.sum(np.log(np.diag(Lk))) - np.sum(np.log(np.diag(Ls))))
        total += 0.5 * (d * (trace - n + log_det) + np.sum(z * z))
    return total


def bound_lvb(data, responsibilities, posterior, config, grams=None):
    """Standard variational lower bound L_VB for (q(Z), q(F))."""
    n, M = data.n, config.num_components
    if n == 0:
        return 0.0
    resp = check_responsibilities(responsibilities, n, M)
    a = expected_log_likelihood(data, posterior, config.noise_variance)
    if posterior.kl_divergence is not None:
        kl_f = posterior.kl_divergence
    else:
        kl_f = kl_trajectories_dense(
            posterior, component_grams(data, config) if grams is None else grams)
    return float(np.sum(resp * a) - kl_f - kl_assignments(resp, config.prior_matrix(n)))


def lkl_value_and_gradient(data, responsibilities, config, grams=None, gradient=True):
    """KL-corrected bound and its gradient w.r.t. ``config.log_params()``.

    Only the stable form is evaluated: for each component,

        -1/2 sum_d ||R^-T B^1/2 y_d||^2 - D sum_n log R_nn

    followed by ``- KL(q(Z)||p(Z)) - D/2 sum_nm resp_nm log(2 pi s2)``.
    """
    n, M = data.n, config.num_components
    resp = check_responsibilities(responsibilities, n, M)
    Y = data.outputs
    d = Y.shape[1]
    s2 = config.noise_variance
    if grams is None:
        grams = component_grams(data, config)
    prior = config.prior_matrix(n)
    value = -kl_assignments(resp, prior) - 0.5 * d * np.sum(resp) * (LOG_2PI + np.log(s2))
    grad_kernel, grad_noise = [], 0.5 * d * (M * n - np.sum(resp))
    eye = np.eye(n)
    for m, (K, spec) in enumerate(zip(grams, config.kernels)):
        sb, R = _site_factor(K, resp[:, m] / s2, m)
        z = solve_triangular(R, sb[:, None] * Y, trans="T", lower=False)
        value += -0.5 * np.sum(z * z) - d * np.sum(np.log(np.diag(R)))
        if not gradient:
            continue
        u = solve_triangular(R, z, lower=False)          # A^-1 B^1/2 Y
        w = sb[:, None] * u                               # (K + B^-1)^-1 Y
        A_inv = cho_solve((R, False), eye)
        W = w @ w.T - d * (sb[:, None] * A_inv * sb[None, :])
        dK = self_gram_gradients(spec, data.inputs, K)
        grad_kernel.append(0.5 * np.einsum("ij,pij->p", W, dK))
        grad_noise += 0.5 * np.sum(u * u) - 0.5 * d * np.trace(A_inv)
    if not gradient:
        return float(value), None
    return float(value), np.concatenate(grad_kernel + [[grad_noise]])


def bound_lkl(data, responsibilities, config, grams=None):
    """KL-corrected variational bound L_KL; depends on q(Z) only."""
    if data.n == 0:
        return 0.0
    return lkl_value_and_gradient(data, responsibilities, config, grams, gradient=False)[0]


def lkl_hyper_gradient(data, responsibilities, config, grams=None):
    """Gradient of `bound_lkl` w.r.t. every log-hyperparameter (noise last)."""
    return lkl_value_and_gradient(data, responsibilities, config, grams)[1]


@dataclass
class OmgpModel:
    """A fitted mixture. ``data`` holds mean-centered outputs."""

    config: OmgpConfig
    data: DataSet
    output_mean: np.ndarray
    responsibilities: np.ndarray
    posterior: TrajectoryPosterior
    bound_trace: list = field(default_factory=list)
    vb_trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def raw_data(self):
        return DataSet(self.data.inputs, self.data.outputs + self.output_mean, self.data.labels)

    @property
    def final_bound(self):
        return self.bound_trace[-1][1] if self.bound_trace else float("nan")

    def bound(self):
        return bound_lkl(self.data, self.responsibilities, self.config)


def _m_step_hyperparameters(data, resp, config):
    def objective(theta):
        return lkl_value_and_gradient(data, resp, config.with_log_params(theta))

    theta, value, evals = maximize(objective, config.log_params(),
                                   max_evals=config.mstep.max_evals,
                                   gradient_tol=config.mstep.gradient_tol,
                                   bounds=config.param_bounds())
    log.debug("M-step: %d evaluations, L_KL=%.6f", evals, value)
    return config.with_log_params(theta)


def _run_estep(data, resp, config, grams):
    """Alternate q(Z) and q(F) updates until L_VB stalls.

    Returns (resp, posterior, bound values after every half-update).
    """
    post = m_step_posterior(data, resp, config, grams)
    current = bound_lvb(data, resp, post, config)
    trace = [current]
    for _ in range(config.max_estep_iters):
        resp = e_step(data, post, config)
        trace.append(bound_lvb(data, resp, post, config))
        post = m_step_posterior(data, resp, config, grams)
        new = bound_lvb(data, resp, post, config)
        trace.append(new)
        if new - current < config.estep_tol:
            break
        current = new
    return resp, post, trace


def restart_rng(seed, restart):
    """Generator for one random restart; restart 0 is keyed by the seed alone."""
    key = seed if restart == 0 else np.random.SeedSequence([seed, restart])
    return np.random.Generator(np.random.Philox(key))


def fit(data, config, init_responsibilities=None):
    """Fit responsibilities and hyperparameters by variational EM.

    Each round runs the inner E-step loop (responsibilities and trajectory
    posteriors) to convergence, then ascends L_KL over hyperparameters
    with the responsibilities held fixed.  Without explicit initial
    responsibilities, ``config.n_restarts`` perturbed starts are tried and
    the one reaching the highest final bound is kept.
    """
    M = config.num_components
    if data.n < M:
        raise ValueError(f"need at least {M} samples for {M} components, got {data.n}")
    centered, mean = data.centered()
    if init_responsibilities is not None:
        resp = floor_responsibilities(check_responsibilities(init_responsibilities, data.n, M))
        return _fit_from(centered, mean, config, resp)
    prior = config.prior_matrix(data.n)
    best = None
    for r in range(config.n_restarts):
        resp = initial_responsibilities(prior, restart_rng(config.seed, r))
        model = _fit_from(centered, mean, config, resp)
        log.info("restart %d: final L_KL=%.8f", r, model.final_bound)
        if best is None or model.final_bound > best.final_bound:
            best = model
    return best


def _fit_from(centered, mean, config, resp):
    bound_trace, vb_trace = [], []
    converged = False
    for rnd in range(config.max_em_rounds):
        grams = component_grams(centered, config)
        resp, post, trace = _run_estep(centered, resp, config, grams)
        vb_trace.append(trace)
        if config.learn_hyperparameters:
            config = _m_step_hyperparameters(centered, resp, config)
        value = bound_lkl(centered, resp, config)
        log.debug("round %d: L_KL=%.8f (E-step %d updates)", rnd, value, len(trace) // 2)
        previous = bound_trace[-1][1] if bound_trace else None
        bound_trace.append((rnd, value))
        if previous is not None and value - previous < config.estep_tol:
            converged = True
            break
    post = m_step_posterior(centered, resp, config)
    return OmgpModel(config, centered, mean, resp, post, bound_trace, vb_trace, converged)


def fit_online(model, new_data, new_prior_rows=None):
    """Append a batch of samples and refit, warm-started from ``model``.

    Existing responsibilities and all hyperparameters carry over; rows for
    the new samples start at the prior.  With a full-matrix prior, the
    prior rows of the new samples must be supplied.
    """
    if new_data.n == 0:
        return copy.deepcopy(model)
    full = model.raw_data.append(new_data)
    config = model.config
    M = config.num_components
    if new_prior_rows is None:
        if config.prior is not None:
            raise ConfigError("new_prior_rows is required when the prior is a full matrix")
        new_rows = np.full((new_data.n, M), 1.0 / M)
    else:
        new_rows = np.asarray(new_prior_rows, dtype=float)
        config = dataclasses.replace(config, prior=np.vstack([config.prior, new_rows]))
    init = np.vstack([model.responsibilities, new_rows])
    return fit(full, config, init_responsibilities=init)


def permute_components(config, perm):
    """Config with components reordered so that new component i is old ``perm[i]``."""
    prior = None if config.prior is None else config.prior[:, perm]
    return dataclasses.replace(config, kernels=[config.kernels[i] for i in perm], prior=prior)
