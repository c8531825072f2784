import numpy as np
import pytest

import superpert as sp


def random_hermitian(rng, n, scale=1.0):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (m + m.conj().T) / 2.0


def random_diagonal_model(rng, n, gap=0.5, v_scale=1.0):
    """Nondegenerate diagonal unperturbed part plus a dense Hermitian V."""
    e0 = np.cumsum(gap + rng.uniform(0.0, 1.0, size=n))
    h0 = np.diag(e0).astype(np.complex128)
    v = random_hermitian(rng, n, scale=v_scale)
    return sp.make_model(n, [(0, h0), (1, v)])


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # first eigh call compiles the numba sweep; keep that cost out of tests
    sp.eigh(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128))
