import numpy as np
import pytest

from ctrlscore.network import build_laplacian_dynamics, fixture_fig2


@pytest.fixture(scope="session")
def fig2_A():
    return build_laplacian_dynamics(fixture_fig2())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_mixed_matrix(rng, n_minus, n_zero, n_plus, complex_pairs=True):
    """Random real matrix with a prescribed count of stable, zero and unstable eigenvalues.

    Zero eigenvalues are semisimple.  Stable/unstable eigenvalues are kept
    at least 0.2 away from the imaginary axis.
    """
    blocks = []

    def side(count, sign):
        k = count
        while k > 0:
            if complex_pairs and k >= 2 and rng.random() < 0.5:
                re = sign * rng.uniform(0.2, 2.0)
                im = rng.uniform(0.3, 2.0)
                blocks.append(np.array([[re, im], [-im, re]]))
                k -= 2
            else:
                blocks.append(np.array([[sign * rng.uniform(0.2, 2.0)]]))
                k -= 1

    side(n_minus, -1.0)
    blocks.extend(np.zeros((1, 1)) for _ in range(n_zero))
    side(n_plus, 1.0)
    n = n_minus + n_zero + n_plus
    D = np.zeros((n, n))
    k = 0
    for b in blocks:
        s = b.shape[0]
        D[k:k + s, k:k + s] = b
        k += s
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    U = np.eye(n) + np.triu(rng.uniform(-0.5, 0.5, (n, n)), 1)
    S = Q @ U
    return S @ D @ np.linalg.inv(S)


def random_stable(rng, n, margin=0.1):
    M = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(M).real) + margin + rng.uniform(0, 1)
    return M - shift * np.eye(n)
