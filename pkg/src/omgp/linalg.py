import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .errors import FactorizationError

JITTER_GROWTH = 10.0
MAX_JITTER_RETRIES = 3


def robust_cholesky(A, base_jitter, lower=True, component=None):
    """Cholesky factor of A, escalating a diagonal jitter on failure.

    The first attempt factors A as given; each retry adds
    ``base_jitter * 10**k`` (k = 1..3) to the diagonal.
    """
    try:
        return cholesky(A, lower=lower, check_finite=True)
    except (LinAlgError, ValueError):
        pass
    scale = max(base_jitter, np.finfo(float).eps) * max(1.0, float(np.mean(np.abs(np.diag(A)))))
    for k in range(1, MAX_JITTER_RETRIES + 1):
        jittered = A + (scale * JITTER_GROWTH**k) * np.eye(A.shape[0])
        try:
            return cholesky(jittered, lower=lower, check_finite=True)
        except (LinAlgError, ValueError):
            continue
    raise FactorizationError(
        f"Cholesky factorization of a {A.shape[0]}x{A.shape[0]} matrix failed after "
        f"{MAX_JITTER_RETRIES} jitter escalations", component=component)
