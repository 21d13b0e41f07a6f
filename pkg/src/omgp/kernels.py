"""Covariance functions and their derivatives w.r.t. log-hyperparameters.

Two families are supported:

``se_ard``
    ``k(a, b) = signal_power * exp(-0.5 * (a - b)^T diag(length_scales)^-1 (a - b))``.
    Note that ``length_scales`` holds the diagonal of the scaling matrix
    directly, i.e. the *squared* characteristic length of each input
    dimension.

``white_noise``
    ``k(a, b) = noise_level`` when ``a`` and ``b`` are bitwise identical and
    zero otherwise.  Useful as an outlier-absorbing mixture component.

Hyperparameters are always exposed to optimizers as logarithms, in the
order ``[signal_power, *length_scales]`` for ``se_ard`` and
``[noise_level]`` for ``white_noise``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _backend
from .errors import DimensionError

#: relative diagonal jitter added to every self Gram matrix
JITTER = 1e-8


class KernelFamily(str, Enum):
    SE_ARD = "se_ard"
    WHITE_NOISE = "white_noise"


@dataclass(frozen=True)
class KernelSpec:
    family: KernelFamily
    signal_power: float = 1.0
    length_scales: tuple = (1.0,)
    noise_level: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        ls = tuple(float(v) for v in np.atleast_1d(self.length_scales))
        object.__setattr__(self, "length_scales", ls)
        object.__setattr__(self, "signal_power", float(self.signal_power))
        object.__setattr__(self, "noise_level", float(self.noise_level))
        values = self.hyperparameters()
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError(f"kernel hyperparameters must be positive, got {values}")

    @classmethod
    def se_ard(cls, signal_power, length_scales):
        return cls(KernelFamily.SE_ARD, signal_power=signal_power,
                   length_scales=length_scales)

    @classmethod
    def white_noise(cls, noise_level):
        return cls(KernelFamily.WHITE_NOISE, noise_level=noise_level)

    @property
    def n_params(self):
        if self.family is KernelFamily.SE_ARD:
            return 1 + len(self.length_scales)
        return 1

    @property
    def amplitude(self):
        """Prior variance k(x, x)."""
        if self.family is KernelFamily.SE_ARD:
            return self.signal_power
        return self.noise_level

    def hyperparameters(self):
        if self.family is KernelFamily.SE_ARD:
            return np.array((self.signal_power,) + self.length_scales)
        return np.array([self.noise_level])

    def log_params(self):
        return np.log(self.hyperparameters())

    def with_log_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} log-parameters, got {theta.shape}")
        values = np.exp(theta)
        if self.family is KernelFamily.SE_ARD:
            return KernelSpec.se_ard(values[0], tuple(values[1:]))
        return KernelSpec.white_noise(values[0])

    def to_dict(self):
        if self.family is KernelFamily.SE_ARD:
            return {"family": self.family.value, "signal_power": self.signal_power,
                    "length_scales": list(self.length_scales)}
        return {"family": self.family.value, "noise_level": self.noise_level}

    @classmethod
    def from_dict(cls, d):
        family = KernelFamily(d["family"])
        if family is KernelFamily.SE_ARD:
            return cls.se_ard(d["signal_power"], tuple(d["length_scales"]))
        return cls.white_noise(d["noise_level"])


def _as_inputs(X, name):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array of inputs, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(X)


def _check_dims(spec, A, B):
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"input dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.family is KernelFamily.SE_ARD and len(spec.length_scales) != A.shape[1]:
        raise DimensionError(
            f"kernel has {len(spec.length_scales)} length-scales "
            f"but inputs have {A.shape[1]} dimensions")


def gram(spec, A, B=None):
    """Covariance matrix ``K[i, j] = k(A[i], B[j])``.

    ``B`` defaults to ``A``. No jitter is added here; see `self_gram`.
    """
    A = _as_inputs(A, "A")
    B = A if B is None else _as_inputs(B, "B")
    _check_dims(spec, A, B)
    if spec.family is KernelFamily.SE_ARD:
        return _backend.se_ard_gram(A, B, spec.signal_power,
                                    np.asarray(spec.length_scales))
    return spec.noise_level * _backend.exact_match(A, B)


def diag_gram(spec, A):
    """Prior variances k(a, a) for each row of A."""
    A = _as_inputs(A, "A")
    return np.full(A.shape[0], spec.amplitude)


def self_gram(spec, X):
    """Gram matrix of X with itself plus a ``JITTER * amplitude`` diagonal."""
    K = gram(spec, X)
    K[np.diag_indices_from(K)] += JITTER * spec.amplitude
    return K


def self_gram_gradients(spec, X, K=None):
    """All derivatives of `self_gram` w.r.t. the log-hyperparameters.

    Returns an array of shape (n_params, N, N). Since the jitter scales
    with the amplitude, the amplitude derivative is the jittered matrix
    itself.
    """
    X = _as_inputs(X, "X")
    if K is None:
        K = self_gram(spec, X)
    if spec.family is KernelFamily.WHITE_NOISE:
        return K[None].copy()
    _check_dims(spec, X, X)
    G = _backend.se_ard_length_grads(X, np.ascontiguousarray(K),
                                     np.asarray(spec.length_scales))
    return np.concatenate([K[None], G], axis=0)


def gram_gradient(spec, A, hyper_index):
    """Derivative of ``gram(spec, A, A)`` w.r.t. one log-hyperparameter."""
    if not 0 <= hyper_index < spec.n_params:
        raise IndexError(f"hyper_index {hyper_index} out of range for {spec.n_params} parameters")
    A = _as_inputs(A, "A")
    K = gram(spec, A)
    if hyper_index == 0:
        return K
    G = _backend.se_ard_length_grads(A, np.ascontiguousarray(K),
                                     np.asarray(spec.length_scales))
    return G[hyper_index - 1]
