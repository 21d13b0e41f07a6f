"""Pure numpy implementations of the covariance hot loops.

These mirror the compiled routines in ``_ckernels.pyx`` exactly and are
used whenever the extension is unavailable (or ``OMGP_PURE_PYTHON=1``).
"""
import numpy as np


def se_ard_gram(A, B, signal_power, length_scales):
    """Squared-exponential ARD Gram matrix between the rows of A and B."""
    inv = 1.0 / np.asarray(length_scales, dtype=float)
    d2 = np.zeros((A.shape[0], B.shape[0]))
    for p in range(A.shape[1]):
        diff = A[:, p, None] - B[None, :, p]
        d2 += diff * diff * inv[p]
    return signal_power * np.exp(-0.5 * d2)


def se_ard_length_grads(A, K, length_scales):
    """Derivatives of a self Gram matrix w.r.t. each log length-scale.

    Returns an array of shape (P, N, N) whose p-th slice is
    ``K * (a_p - a'_p)**2 / (2 * length_scales[p])``.
    """
    n, dim = A.shape
    out = np.empty((dim, n, n))
    for p in range(dim):
        diff = A[:, p, None] - A[None, :, p]
        out[p] = K * (diff * diff) * (0.5 / length_scales[p])
    return out


def exact_match(A, B):
    """1.0 where row i of A equals row j of B bit for bit, else 0.0."""
    eq = np.ones((A.shape[0], B.shape[0]), dtype=bool)
    for p in range(A.shape[1]):
        eq &= A[:, p, None] == B[None, :, p]
    return eq.astype(float)
