import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schurkit import matcore
from schurkit.colligation import (Colligation, associated_system, characteristic_function, colligation_from_state,
                                  hnm_basis, observable_subspace, random_colligation, random_unitary, shift_parts,
                                  simplicity_check, transfer_coeffs, truncated_shift, unitarity_residual,
                                  verify_main1)
from schurkit.errors import DegenerateDefect, DimensionMismatch, NotAContraction, VerificationFailure
from schurkit.schur import operator_schur_params
from schurkit.series import shift_div
from schurkit.toeplitz import build_toeplitz, limit_diagnostics, product_formula


def test_random_colligation_examples():
    c = random_colligation(2, 0, 1)
    assert c.h == 0 and unitarity_residual(c.D) < 1e-12
    assert np.allclose(transfer_coeffs(c, 3).coeffs[1:], 0)
    c = random_colligation(0, 3, 1)
    assert c.m == 0 and unitarity_residual(c.A) < 1e-12
    a, b = random_colligation(2, 4, 7), random_colligation(2, 4, 7)
    assert np.array_equal(a.U, b.U)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(0, 3), h=st.integers(0, 8), seed=st.integers(0, 2**32 - 1))
def test_generated_colligations_are_unitary(m, h, seed):
    assert unitarity_residual(random_colligation(m, h, seed).U) <= 1e-12


def test_colligation_validation():
    with pytest.raises(VerificationFailure):
        Colligation(1, 1, 1, np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        Colligation(1, 2, 0, np.zeros((2, 1)))


def test_json_round_trip():
    c = random_colligation(2, 3, 5)
    back = Colligation.from_json(c.to_json())
    assert np.array_equal(back.U, c.U)


def test_transfer_examples():
    # A = 0 leaves only C_0 = D and C_1 = CB
    col = colligation_from_state(np.zeros((2, 2)))
    t = transfer_coeffs(col, 4)
    assert np.allclose(t[0], col.D) and np.allclose(t[1], col.C @ col.B)
    assert np.allclose(t.coeffs[2:], 0)


def test_transfer_is_schur_class():
    col = random_colligation(2, 5, 3)
    t = transfer_coeffs(col, 6)
    assert matcore.is_contraction(build_toeplitz(t, 6).matrix).ok


def test_hnm_examples():
    A = 0.9 * random_unitary(3, np.random.default_rng(1))
    assert hnm_basis(A, 1, 0).shape[1] == 0
    S = truncated_shift(2)
    H10 = hnm_basis(S, 1, 0)
    assert H10.shape == (2, 1) and np.allclose(np.abs(H10[:, 0]), [1, 0])
    assert hnm_basis(S, 2, 0).shape[1] == 0
    assert np.allclose(hnm_basis(S, 0, 0), np.eye(2))


def compressed(A, Q):
    return Q.conj().T @ A @ Q


@pytest.mark.parametrize("seed", range(6))
def test_hnm_dimension_recursion(seed):
    col = random_colligation(1, 6, seed)
    A = col.A
    for n in range(3):
        for m in range(3):
            Q = hnm_basis(A, n, m)
            Anm = compressed(A, Q)
            for k in range(1, 3):
                lhs = matcore.defect_kernel_basis(np.linalg.matrix_power(Anm, k)).shape[1] if Q.shape[1] else 0
                assert lhs == hnm_basis(A, n + k, m).shape[1]
                lhs = matcore.defect_kernel_basis(np.linalg.matrix_power(Anm.conj().T, k)).shape[1] \
                    if Q.shape[1] else 0
                assert lhs == hnm_basis(A, n, m + k).shape[1]


@pytest.mark.parametrize("seed", range(6))
def test_a_maps_lattice_isometrically(seed):
    A = random_colligation(1, 7, seed).A
    for n in range(1, 4):
        for m in range(3):
            Q = hnm_basis(A, n, m)
            if not Q.shape[1]:
                continue
            img = A @ Q
            assert np.linalg.norm(img.conj().T @ img - np.eye(Q.shape[1])) <= 1e-8
            target = hnm_basis(A, n - 1, m + 1)
            assert np.linalg.norm(img - target @ (target.conj().T @ img)) <= 1e-8


def test_simplicity_examples():
    W = random_unitary(3, np.random.default_rng(2))
    s = simplicity_check(Colligation(0, 0, 3, W))
    assert not s.simple and s.rank == 0 and s.cnu_defect_dim == 3
    assert simplicity_check(0.5 * W).simple
    assert simplicity_check(colligation_from_state(truncated_shift(4))).simple
    # unitary part appended to a simple system
    col = random_colligation(1, 3, 4)
    U = np.zeros((6, 6), dtype=complex)
    U[:4, :4] = col.U
    U[4:, 4:] = random_unitary(2, np.random.default_rng(3))
    s = simplicity_check(Colligation(1, 1, 5, U))
    assert not s.simple and s.cnu_defect_dim == 2


def test_main1_examples():
    r = verify_main1(random_colligation(2, 0, 0), 3)
    assert r.max_residual_M < 1e-12 and r.max_residual_N < 1e-12
    col = colligation_from_state(0.5 * random_unitary(3, np.random.default_rng(5)))
    r = verify_main1(col, 3)
    assert r.max_residual_M <= 1e-8 and r.max_residual_N <= 1e-8
    cs = operator_schur_params(transfer_coeffs(col, 3))
    assert matcore.opnorm(product_formula(cs, 1)) <= 1e-8
    W = random_unitary(2, np.random.default_rng(6))
    assert verify_main1(Colligation(0, 0, 2, W), 2).skipped


@settings(max_examples=15, deadline=None)
@given(m=st.integers(1, 3), h=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_main1_random(m, h, seed):
    r = verify_main1(random_colligation(m, h, seed), 4)
    assert r.skipped or (r.max_residual_M <= 1e-8 and r.max_residual_N <= 1e-8)


def shifted_colligation(m, h, seed):
    """Unitary colligation with D = 0: a block cyclic shift twisted by state unitaries."""
    rng = np.random.default_rng(seed)
    size = m + h
    P = np.roll(np.eye(size), m, axis=0)
    W1, W2 = random_unitary(h, rng), random_unitary(h, rng)
    L = np.eye(size, dtype=complex)
    R = np.eye(size, dtype=complex)
    L[m:, m:], R[m:, m:] = W1, W2
    return Colligation(m, m, h, L @ P @ R)


def test_associated_system_with_zero_feedthrough():
    col = shifted_colligation(2, 4, 0)
    assert np.allclose(col.D, 0)
    a = associated_system(col, 4)
    theta = transfer_coeffs(col, 5)
    assert transfer_coeffs(a.zeta, 4).max_abs_diff(shift_div(theta)) <= 1e-8
    assert a.unitarity_residual <= 1e-10


def test_associated_system_degenerate():
    with pytest.raises(DegenerateDefect):
        associated_system(random_colligation(2, 0, 1))
    W = random_unitary(2, np.random.default_rng(8))
    U = np.zeros((4, 4), dtype=complex)
    U[:2, :2] = W
    U[2:, 2:] = random_unitary(2, np.random.default_rng(9))
    with pytest.raises(DegenerateDefect):
        associated_system(Colligation(2, 2, 2, U))


@pytest.mark.parametrize("seed", range(5))
def test_associated_system_random(seed):
    a = associated_system(random_colligation(2, 5, seed), 4)
    assert a.residual <= 1e-8 and a.gamma1_residual <= 1e-8
    assert a.unitarity_residual <= 1e-8 and a.zeta.h == 3
    assert not a.theta1_constant


def test_characteristic_function_examples():
    psi = characteristic_function(np.zeros((2, 2)), 3)
    assert np.allclose(psi.coeffs, [np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))])
    psi = characteristic_function(random_unitary(3, np.random.default_rng(0)), 3)
    assert psi.shape == (0, 0)
    with pytest.raises(NotAContraction):
        characteristic_function(2 * np.eye(2), 2)


def test_characteristic_function_is_transfer_of_its_system():
    A = 0.8 * random_unitary(3, np.random.default_rng(4)) @ np.diag([1, 0.5, 0.2])
    psi = characteristic_function(A, 5)
    # direct definition -A + λ D_{A*}(I - λA*)^{-1} D_A on full spaces
    DA, DAs = matcore.defect(A), matcore.defect(A.conj().T)
    direct = [-A] + [DAs @ np.linalg.matrix_power(A.conj().T, k - 1) @ DA for k in range(1, 6)]
    Vi, Vo = matcore.defect_basis(A), matcore.defect_basis(A.conj().T)
    for k in range(6):
        assert np.allclose(psi[k], Vo.conj().T @ direct[k] @ Vi)


def cnu_contraction(rng, strict_dim, shift_dim):
    A = np.zeros((strict_dim + shift_dim,) * 2, dtype=complex)
    A[:strict_dim, :strict_dim] = 0.8 * random_unitary(strict_dim, rng) @ np.diag(rng.uniform(0.1, 1, strict_dim))
    A[strict_dim:, strict_dim:] = truncated_shift(shift_dim)
    W = random_unitary(A.shape[0], rng)
    return W @ A @ W.conj().T


@pytest.mark.parametrize("seed", range(5))
def test_shift_verdicts_from_characteristic_function(seed):
    rng = np.random.default_rng(seed)
    A = cnu_contraction(rng, 2, 3) if seed else truncated_shift(2)
    h = A.shape[0]
    cs = operator_schur_params(characteristic_function(A, h))
    d = limit_diagnostics(cs, h)
    v = shift_parts(A)
    assert d.controllable == v.cni and d.observable == v.cnci


def test_krylov_and_limit_estimate_agree():
    for seed in range(4):
        col = random_colligation(2, 5, seed)
        Q = observable_subspace(col)
        lhs = np.linalg.norm(col.B - Q @ (Q.conj().T @ col.B), 2)
        cs = operator_schur_params(transfer_coeffs(col, col.h))
        rhs = np.sqrt(matcore.opnorm(product_formula(cs, col.h)))
        assert abs(lhs - rhs) <= 1e-6
