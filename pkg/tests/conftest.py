import sys
import zlib

import numpy as np
import pytest

from omgp import DataSet, KernelSpec, OmgpConfig


def random_config(rng, M, P=1, noise=None, white_noise=False):
    kernels = []
    for m in range(M):
        if white_noise and m == M - 1:
            kernels.append(KernelSpec.white_noise(rng.uniform(0.5, 2.0)))
        else:
            kernels.append(KernelSpec.se_ard(rng.uniform(0.5, 2.0),
                                             tuple(rng.uniform(0.5, 3.0, P))))
    return OmgpConfig(kernels, rng.uniform(0.05, 0.5) if noise is None else noise)


def random_instance(rng, N, M, D=1, P=1, min_resp=1e-3, white_noise=False):
    """Well-separated random inputs, outputs, responsibilities and config."""
    X = np.sort(rng.uniform(0.0, 1.5 * N, (N, P)), axis=0)
    Y = rng.normal(size=(N, D))
    resp = rng.dirichlet(np.full(M, 2.0), N)
    resp = np.maximum(resp, min_resp)
    resp /= resp.sum(axis=1, keepdims=True)
    return DataSet(X, Y), resp, random_config(rng, M, P, white_noise=white_noise)


@pytest.fixture
def rng(request):
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  ({detail})")
