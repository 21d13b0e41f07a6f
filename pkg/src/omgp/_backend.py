"""Pick the compiled kernel loops when available, numpy otherwise.

Set ``OMGP_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

NAME = "python"
impl = _pykernels

if os.environ.get("OMGP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        impl = _ckernels
        NAME = "cython"


def se_ard_gram(A, B, signal_power, length_scales):
    return impl.se_ard_gram(A, B, signal_power, length_scales)


def se_ard_length_grads(A, K, length_scales):
    return impl.se_ard_length_grads(A, K, length_scales)


def exact_match(A, B):
    return impl.exact_match(A, B)
