import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_contraction(rng, rows, cols, sigma=0.9):
    M = crandn(rng, rows, cols)
    s = np.linalg.norm(M, 2) if M.size else 0.0
    return M * (sigma / s) if s > 0 else M


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    X = crandn(rng, n, rank)
    return X @ X.conj().T


def scalar(x):
    return np.array([[x]], dtype=complex)


def min_eig(H):
    if H.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((H + H.conj().T) / 2)[0])


def gram_schmidt_verblunsky(c, n):
    """Oracle: α_k = -conj(Φ_{k+1}(0)), Φ monic orthogonal under <z^j, z^k> = c_{k-j}."""
    def mom(k):
        return c[k] if k >= 0 else np.conj(c[-k])
    G = np.array([[mom(k - j) for k in range(n + 1)] for j in range(n + 1)])
    alphas, norms = [], []
    for k in range(1, n + 1):
        # Φ_k = z^k + Σ_{j<k} a_j z^j with <Φ_k, z^i> = 0 for i < k
        A = G[:k, :k].T
        rhs = -G[k, :k]
        coef = np.linalg.solve(A, rhs)
        alphas.append(-np.conj(coef[0]))
        phi = np.concatenate([coef, [1.0]])
        norms.append(float(np.real(phi @ G[: k + 1, : k + 1] @ phi.conj())))
    return np.array(alphas), np.array(norms)
