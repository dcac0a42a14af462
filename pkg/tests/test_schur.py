import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schurkit import matcore
from schurkit.errors import NotSchurClass, NotSchurSequence, NotVerblunsky
from schurkit.schur import (ChoiceSequence, first_associated, operator_schur_params, params_to_coeffs,
                            random_choice_sequence, scalar_schur_params, schur_function_from_moments,
                            szego_recursion)
from schurkit.series import MatSeries, shift_div
from schurkit.toeplitz import defect_shorted_M

from conftest import gram_schmidt_verblunsky


def sseries(*c):
    return MatSeries(np.array(c, dtype=complex))


def test_scalar_constant():
    r = scalar_schur_params(sseries(0.4, 0, 0, 0))
    assert np.allclose(r.gammas, [0.4, 0, 0, 0]) and not r.terminated


def test_scalar_lambda_terminates():
    r = scalar_schur_params(sseries(0, 1, 0, 0))
    assert np.allclose(r.gammas, [0, 1]) and r.terminated


def test_scalar_blaschke_factor():
    a = 0.3
    # (a + λ)/(1 + aλ) = a + (1 - a²) Σ (-a)^{k-1} λ^k
    c = [a] + [(1 - a * a) * (-a) ** (k - 1) for k in range(1, 6)]
    r = scalar_schur_params(sseries(*c))
    assert np.allclose(r.gammas, [a, 1]) and r.terminated


def test_scalar_rejects_non_schur():
    with pytest.raises(NotSchurClass):
        scalar_schur_params(sseries(0.5, 0.9))


def test_operator_constant():
    C0 = np.diag([0.5, 0.0])
    cs = operator_schur_params(MatSeries.constant(C0, 3))
    assert np.allclose(cs.gammas[0], C0)
    for g in cs.gammas[1:]:
        assert g.shape == (2, 2) and np.allclose(g, 0)


def test_operator_agrees_with_scalar(rng):
    cs = random_choice_sequence(1, 1, 4, 0.9, rng)
    f = params_to_coeffs(cs, 4)
    op = operator_schur_params(f)
    sc = scalar_schur_params(f)
    # scalar defect bases are 1 with phase fixed real positive: parameters coincide
    assert np.allclose([g[0, 0] for g in op.gammas], sc.gammas, atol=1e-12)


def test_operator_rejects_non_schur():
    with pytest.raises(NotSchurSequence):
        operator_schur_params(MatSeries([np.eye(2) * 0.5, np.eye(2)]))


def test_params_to_coeffs_examples():
    cs = ChoiceSequence.from_gammas([[[0.3]]])
    assert np.allclose(params_to_coeffs(cs, 3).coeffs.ravel(), [0.3, 0, 0, 0])
    cs = ChoiceSequence.from_gammas([[[0.0]], [[0.7j]]])
    assert np.allclose(params_to_coeffs(cs, 4).coeffs.ravel(), [0, 0.7j, 0, 0, 0])
    a, g = 0.4 + 0.1j, -0.5
    cs = ChoiceSequence.from_gammas([[[a]], [[g]]])
    d = 1 - abs(a) ** 2
    assert np.allclose(params_to_coeffs(cs, 2).coeffs.ravel(), [a, d * g, -d * np.conj(a) * g * g])


def test_unimodular_parameter_round_trip():
    cs = ChoiceSequence.from_gammas([[[0.6]], [[1.0]]])
    assert cs.terminated_at == 1
    f = params_to_coeffs(cs, 4)
    assert np.allclose(f.coeffs.ravel(), [0.6, 0.64, -0.384, 0.2304, -0.13824])


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 3), n=st.integers(1, 3), N=st.integers(0, 4), seed=st.integers(0, 2**32 - 1))
def test_round_trip(m, n, N, seed):
    rng = np.random.default_rng(seed)
    cs = random_choice_sequence(m, n, N, 0.95, rng)
    f = params_to_coeffs(cs, N)
    again = params_to_coeffs(operator_schur_params(f, N), N)
    assert again.max_abs_diff(f) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 3), n=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_adjoint_symmetry(m, n, seed):
    rng = np.random.default_rng(seed)
    cs = random_choice_sequence(m, n, 3, 0.9, rng)
    f = params_to_coeffs(cs, 3)
    a = operator_schur_params(f)
    b = operator_schur_params(f.tilde())
    for ga, gb in zip(a.gammas, b.gammas):
        sa = np.linalg.svd(ga, compute_uv=False) if ga.size else np.zeros(0)
        sb = np.linalg.svd(gb, compute_uv=False) if gb.size else np.zeros(0)
        assert np.allclose(sa, sb, atol=1e-8)


def test_scalar_norm_identity(rng):
    cs = random_choice_sequence(1, 1, 4, 0.9, rng)
    f = params_to_coeffs(cs, 4)
    g = np.array([c[0, 0] for c in cs.gammas])
    for n in range(5):
        prod = np.prod(1 - np.abs(g[: n + 1]) ** 2)
        assert defect_shorted_M(f, n).compressed[0, 0].real == pytest.approx(prod, abs=1e-8)


def test_first_associated_of_shifted(rng):
    C = rng.standard_normal((4, 2, 2)) * 0.2
    C[0] = 0
    theta = MatSeries(C)
    th1, Vi, Vo = first_associated(theta)
    assert np.allclose(Vi, np.eye(2)) and np.allclose(Vo, np.eye(2))
    assert th1.max_abs_diff(shift_div(theta)) < 1e-12


def test_choice_sequence_json_round_trip(rng):
    cs = random_choice_sequence(2, 3, 3, 0.9, rng)
    back = ChoiceSequence.from_json(cs.to_json())
    assert all(np.array_equal(a, b) for a, b in zip(cs.gammas, back.gammas))
    bare = {"gammas": cs.to_json()["gammas"]}
    assert params_to_coeffs(ChoiceSequence.from_json(bare), 3).max_abs_diff(params_to_coeffs(cs, 3)) < 1e-12


def test_szego_examples():
    r = szego_recursion([0, 0, 0])
    assert np.allclose(r.monic_polys[3], [0, 0, 0, 1]) and np.allclose(r.norm_products, 1)
    a = 0.3 + 0.4j
    assert np.allclose(szego_recursion([a]).monic_polys[1], [-np.conj(a), 1])
    assert np.allclose(szego_recursion([0.5, 0.5]).norm_products, [0.75, 0.5625])
    with pytest.raises(NotVerblunsky):
        szego_recursion([0.5, 1.0])


def test_moments_examples():
    assert np.allclose(schur_function_from_moments([0, 0, 0]).coeffs, 0)
    assert np.allclose(schur_function_from_moments([1, 1, 1, 1]).coeffs.ravel(), [1, 0, 0, 0])


@pytest.mark.parametrize("t,phi", [(0.2, 0.0), (0.5, 0.0), (0.9, 0.0), (0.7, 1.1)])
def test_geronimus(t, phi):
    K = 6
    c = np.zeros(K + 1, dtype=complex)
    c[0], c[1] = 1.0, t * np.exp(-1j * phi) / 2
    gammas = scalar_schur_params(schur_function_from_moments(c[1:])).gammas
    alphas, norms = gram_schmidt_verblunsky(c, 4)
    assert np.allclose(gammas[:4], alphas, atol=1e-8)
    assert np.allclose(szego_recursion(alphas).norm_products, norms, atol=1e-8)
