"""Block lower-triangular Toeplitz matrices and their shorted defect operators.

For coefficients ``C_0..C_n`` (each ``rows x cols``) the level-``n`` matrix
``T_n`` has block ``(i, j)`` equal to ``C_{i-j}`` below the diagonal.  The
compressions of ``I - T_n* T_n`` to the first input block (``M``) and of
``I - T~_n* T~_n`` to the first output block (``N``, with ``T~`` built from
the adjoint coefficients) are the central quantities here; each is computed
twice, once by the generic shorted-operator routine and once by the explicit
block formula, and the two must agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import matcore
from .errors import InternalInconsistency, NotAContraction, RouteDisagreement, ShapeMismatch
from .matcore import DEFAULT_TOL, Tolerances
from .series import MatSeries
from .shorted import ShortedResult, Subspace, shorted_operator

if TYPE_CHECKING:
    from .schur import ChoiceSequence


@dataclass(frozen=True)
class ToeplitzBlock:
    n: int
    coeffs: tuple
    matrix: np.ndarray = field(repr=False)

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.coeffs[0].shape


def _coeff_list(coeffs, n: int) -> list[np.ndarray]:
    if isinstance(coeffs, MatSeries):
        mats = list(coeffs.coeffs)
    else:
        mats = [matcore.cmat(c) for c in coeffs]
    if n < 0 or n + 1 > len(mats):
        raise ShapeMismatch(f"level {n} needs {n + 1} coefficients, got {len(mats)}")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats[: n + 1]):
        raise ShapeMismatch("coefficients have different shapes")
    return mats[: n + 1]


def build_toeplitz(coeffs, n: int) -> ToeplitzBlock:
    mats = _coeff_list(coeffs, n)
    r, c = mats[0].shape
    T = np.zeros(((n + 1) * r, (n + 1) * c), dtype=complex)
    for i in range(n + 1):
        for j in range(i + 1):
            T[i * r:(i + 1) * r, j * c:(j + 1) * c] = mats[i - j]
    return ToeplitzBlock(n, tuple(mats), T)


def block_flip(size: int, n: int) -> np.ndarray:
    """``J_n``: reverses the order of ``n+1`` blocks of dimension ``size``."""
    J = np.zeros(((n + 1) * size, (n + 1) * size), dtype=complex)
    eye = np.eye(size)
    for i in range(n + 1):
        j = n - i
        J[i * size:(i + 1) * size, j * size:(j + 1) * size] = eye
    return J


def flip_toeplitz(coeffs, n: int, tol: Tolerances = DEFAULT_TOL) -> ToeplitzBlock:
    """``S_n = T_n J_n``: block ``(i, j)`` is ``C_{i+j-n}`` when ``i+j >= n``."""
    mats = _coeff_list(coeffs, n)
    r, c = mats[0].shape
    S = np.zeros(((n + 1) * r, (n + 1) * c), dtype=complex)
    for i in range(n + 1):
        for j in range(n + 1):
            if i + j >= n:
                S[i * r:(i + 1) * r, j * c:(j + 1) * c] = mats[i + j - n]
    T = build_toeplitz(mats, n).matrix
    res = matcore.opnorm(S - T @ block_flip(c, n))
    if res > tol.match_tol:
        raise InternalInconsistency(f"S_n != T_n J_n (residual {res:.3g})")
    return ToeplitzBlock(n, tuple(mats), S)


def _contractive_toeplitz(mats, n: int, tol: Tolerances) -> np.ndarray:
    T = build_toeplitz(mats, n).matrix
    chk = matcore.is_contraction(T, tol)
    if not chk.ok:
        raise NotAContraction(chk.sigma_max, f"T_{n}")
    return T


def _shorted_first_block(T: np.ndarray, k: int, tol: Tolerances) -> ShortedResult:
    D2 = matcore.defect_sq(T)
    # I - T*T is PSD up to rounding; clamp before handing to the shorted routine
    D2 = matcore.psd_clamp(D2, tol)
    return shorted_operator(D2, Subspace.coordinates(D2.shape[0], range(k)), tol)


def frm_first_block(mats: Sequence[np.ndarray], n: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Explicit formula ``I - C0*C0 - |D^{-1}_{T*_{n-1}} [C_1;..;C_n]|^2``."""
    C0 = mats[0]
    out = np.eye(C0.shape[1], dtype=complex) - C0.conj().T @ C0
    if n >= 1:
        Tprev = build_toeplitz(mats, n - 1).matrix
        col = np.vstack(mats[1: n + 1])
        X = matcore.defect_pinv(Tprev.conj().T, tol) @ col
        out = out - X.conj().T @ X
    return matcore.hermitian_part(out)


def _defect_shorted(mats, n: int, tol: Tolerances, what: str) -> ShortedResult:
    T = _contractive_toeplitz(mats, n, tol)
    k = mats[0].shape[1]
    res = _shorted_first_block(T, k, tol)
    alt = frm_first_block(mats, n, tol)
    gap = matcore.opnorm(res.compressed - alt)
    if gap > tol.match_tol:
        raise RouteDisagreement(gap, what)
    return res


def defect_shorted_M(coeffs, n: int, tol: Tolerances = DEFAULT_TOL) -> ShortedResult:
    """``(D^2_{T_n})_M`` compressed to the first input block."""
    return _defect_shorted(_coeff_list(coeffs, n), n, tol, f"M side, n={n}")


def defect_shorted_N(coeffs, n: int, tol: Tolerances = DEFAULT_TOL) -> ShortedResult:
    """``(D^2_{T~_n})_N`` compressed to the first output block."""
    mats = [m.conj().T for m in _coeff_list(coeffs, n)]
    return _defect_shorted(mats, n, tol, f"N side, n={n}")


def defect_chain(cs: "ChoiceSequence", n: int) -> np.ndarray:
    """``R_n = D_{Γ_n} ... D_{Γ_0}`` as a map from ``M`` into ``D_{Γ_{n-1}}``-coordinates.

    Parameters beyond the stored sequence are zero maps between the recorded
    defect spaces (central continuation).
    """
    tol = cs.tol
    R = np.eye(cs.m, dtype=complex)
    for k in range(n + 1):
        g = cs.gamma(k)
        if k > 0:
            R = cs.in_basis(k - 1).conj().T @ R
        R = matcore.defect(g, tol) @ R
    return R


def product_formula(cs: "ChoiceSequence", n: int, side: str = "M") -> np.ndarray:
    """``D_{Γ_0}..D_{Γ_{n-1}} D^2_{Γ_n} D_{Γ_{n-1}}..D_{Γ_0}`` on ``M`` (or the ``Γ*`` version on ``N``)."""
    if side == "N":
        cs = cs.adjoint()
    elif side != "M":
        raise ValueError("side must be 'M' or 'N'")
    R = defect_chain(cs, n)
    return matcore.hermitian_part(R.conj().T @ R)


@dataclass(frozen=True)
class LimitDiagnostics:
    M_sequence: list
    N_sequence: list
    M_limit_est: np.ndarray
    N_limit_est: np.ndarray
    M_limit_norm: float
    N_limit_norm: float
    observable: bool
    controllable: bool
    at_truncation: int


def limit_diagnostics(cs: "ChoiceSequence", n_max: int, tol: Tolerances | None = None) -> LimitDiagnostics:
    """Non-increasing product sequences up to ``n_max`` and truncation-level verdicts.

    ``observable``/``controllable`` only say that the level-``n_max`` value has
    norm at most ``match_tol``; the true strong limit is not decidable from a
    finite truncation.
    """
    tol = tol or cs.tol
    Ms, Ns = [], []
    RM = np.eye(cs.m, dtype=complex)
    csN = cs.adjoint()
    RN = np.eye(cs.n, dtype=complex)
    for k in range(n_max + 1):
        if k > 0:
            RM = cs.in_basis(k - 1).conj().T @ RM
            RN = csN.in_basis(k - 1).conj().T @ RN
        RM = matcore.defect(cs.gamma(k), tol) @ RM
        RN = matcore.defect(csN.gamma(k), tol) @ RN
        Ms.append(matcore.hermitian_part(RM.conj().T @ RM))
        Ns.append(matcore.hermitian_part(RN.conj().T @ RN))
    mn, nn = matcore.opnorm(Ms[-1]), matcore.opnorm(Ns[-1])
    return LimitDiagnostics(Ms, Ns, Ms[-1], Ns[-1], mn, nn,
                            bool(mn <= tol.match_tol), bool(nn <= tol.match_tol), n_max)


@dataclass(frozen=True)
class RangeCheck:
    M_in_ran: bool
    N_in_ran: bool
    all_strict: bool
    M_residual: float
    N_residual: float


def _first_block_in_range(T: np.ndarray, k: int, tol: Tolerances) -> tuple[bool, float]:
    V = matcore.defect_basis(T, tol)
    E = np.eye(T.shape[1], dtype=complex)[:, :k]
    resid = matcore.opnorm(E - V @ (V.conj().T @ E))
    return bool(resid <= tol.match_tol), resid


def range_inclusion_check(coeffs, n: int, tol: Tolerances = DEFAULT_TOL) -> RangeCheck:
    """Check that ``M ⊂ ran D_{T_n}``, ``N ⊂ ran D_{T~_n}`` and all ``|Γ_k| < 1`` agree."""
    from .schur import operator_schur_params

    mats = _coeff_list(coeffs, n)
    T = _contractive_toeplitz(mats, n, tol)
    Tt = build_toeplitz([m.conj().T for m in mats], n).matrix
    m_in, m_res = _first_block_in_range(T, mats[0].shape[1], tol)
    n_in, n_res = _first_block_in_range(Tt, mats[0].shape[0], tol)
    cs = operator_schur_params(MatSeries.from_list(mats), n, tol)
    strict = all(cs.is_strict(k) for k in range(n + 1))
    if not (m_in == n_in == strict):
        raise InternalInconsistency(
            f"range tests disagree: M_in_ran={m_in}, N_in_ran={n_in}, all_strict={strict}")
    return RangeCheck(m_in, n_in, strict, m_res, n_res)
