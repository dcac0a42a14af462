"""The Schur (Carathéodory-Fejér) interpolation problem.

Given ``C_0..C_N`` find Schur-class functions with these Taylor coefficients.
Solvable iff ``T_N`` is a contraction; every admissible next coefficient is

    C_{N+1} = Ċ_{N+1} + Q_N^{1/2} Y P_M^{1/2}

where ``P_M``/``Q_N`` are the shorted defect compressions on the input/output
side and ``Y`` is a contraction between their ranges.  ``Y = 0`` gives the
central (maximal entropy) continuation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import matcore
from .errors import (InternalInconsistency, NotAContraction, NotSolvable, PostconditionFailure,
                     RouteDisagreement, ShapeMismatch)
from .matcore import DEFAULT_TOL, Tolerances
from .schur import ChoiceSequence, operator_schur_params, params_to_coeffs
from .series import MatSeries
from .toeplitz import build_toeplitz, defect_shorted_M, defect_shorted_N


@dataclass(frozen=True)
class SchurProblem:
    coeffs: tuple
    tol: Tolerances = field(default=DEFAULT_TOL)

    def __post_init__(self):
        mats = tuple(matcore.cmat(c) for c in self.coeffs)
        if not mats:
            raise ShapeMismatch("a Schur problem needs at least C_0")
        if any(c.shape != mats[0].shape for c in mats):
            raise ShapeMismatch("coefficients have different shapes")
        object.__setattr__(self, "coeffs", mats)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs[0].shape

    def series(self) -> MatSeries:
        return MatSeries.from_list(self.coeffs)

    def with_next(self, C) -> "SchurProblem":
        return SchurProblem(self.coeffs + (matcore.cmat(C),), self.tol)


class Validation(NamedTuple):
    solvable: bool
    sigma_max: float


@dataclass(frozen=True)
class UniquenessVerdict:
    unique: bool
    M_side_zero: bool
    N_side_zero: bool
    witness_norms: tuple
    terminating_index: int | None


def validate(p: SchurProblem) -> Validation:
    chk = matcore.is_contraction(build_toeplitz(p.coeffs, p.N).matrix, p.tol)
    return Validation(chk.ok, chk.sigma_max)


def _require_solvable(p: SchurProblem):
    v = validate(p)
    if not v.solvable:
        raise NotSolvable(v.sigma_max)


def first_isometric_index(cs: ChoiceSequence) -> int | None:
    """First ``r`` with ``Γ_r`` isometric or co-isometric (a defect space is trivial)."""
    for k in range(cs.N + 1):
        if cs.in_bases[k].shape[1] == 0 or cs.out_bases[k].shape[1] == 0:
            return k
    return None


def uniqueness(p: SchurProblem) -> UniquenessVerdict:
    """Uniqueness from the shorted compressions, cross-checked with the Schur parameters."""
    _require_solvable(p)
    tol = p.tol
    wm = matcore.opnorm(defect_shorted_M(p.coeffs, p.N, tol).compressed)
    wn = matcore.opnorm(defect_shorted_N(p.coeffs, p.N, tol).compressed)
    m_zero, n_zero = wm <= tol.match_tol, wn <= tol.match_tol
    cs = operator_schur_params(p.series(), p.N, tol)
    r = first_isometric_index(cs)
    unique = bool(m_zero or n_zero)
    if unique != (r is not None):
        raise InternalInconsistency(
            f"shorted operators say unique={unique} but the first (co-)isometric parameter index is {r}")
    return UniquenessVerdict(unique, bool(m_zero), bool(n_zero), (wm, wn), r)


def central_next(p: SchurProblem) -> np.ndarray:
    """Centre ``Ċ_{N+1}`` of the disc of admissible next coefficients.

    ``-(D^{-1}_{T_{N-1}} [C_N*;..;C_1*])* T_{N-1}* D^{-1}_{T*_{N-1}} [C_1;..;C_N]``,
    and ``0`` when ``N = 0``.
    """
    _require_solvable(p)
    tol = p.tol
    C = p.coeffs
    n_out, m_in = p.shape
    if p.N == 0:
        return np.zeros((n_out, m_in), dtype=complex)
    T = build_toeplitz(C, p.N - 1).matrix
    left = matcore.defect_pinv(T, tol) @ np.vstack([c.conj().T for c in C[p.N:0:-1]])
    right = matcore.defect_pinv(T.conj().T, tol) @ np.vstack(C[1:])
    return -left.conj().T @ T.conj().T @ right


def shorted_pair(p: SchurProblem) -> tuple[np.ndarray, np.ndarray]:
    """``((D^2_{T_N})_M, (D^2_{T~_N})_N)`` compressed to ``M`` and ``N``."""
    return (defect_shorted_M(p.coeffs, p.N, p.tol).compressed,
            defect_shorted_N(p.coeffs, p.N, p.tol).compressed)


def extend(p: SchurProblem, Y) -> np.ndarray:
    """Next coefficient for the contraction ``Y`` (``N x M`` shaped)."""
    _require_solvable(p)
    tol = p.tol
    n_out, m_in = p.shape
    Y = matcore.cmat(Y)
    if Y.shape != (n_out, m_in):
        raise ShapeMismatch(f"Y must be {n_out}x{m_in}, got {Y.shape}")
    chk = matcore.is_contraction(Y, tol)
    if not chk.ok:
        raise NotAContraction(chk.sigma_max, "Y")
    PM, QN = shorted_pair(p)
    ranM = matcore.orth(PM, tol) if matcore.opnorm(PM) > tol.rank_rel_tol else np.zeros((m_in, 0), complex)
    ranN = matcore.orth(QN, tol) if matcore.opnorm(QN) > tol.rank_rel_tol else np.zeros((n_out, 0), complex)
    leak_in = matcore.opnorm(Y - Y @ ranM @ ranM.conj().T)
    leak_out = matcore.opnorm(Y - ranN @ ranN.conj().T @ Y)
    if max(leak_in, leak_out) > tol.match_tol:
        raise ShapeMismatch(
            f"Y must vanish off the ranges of the shorted operators (leak {max(leak_in, leak_out):.3g})")
    C_next = central_next(p) + matcore.psd_sqrt(QN, tol) @ Y @ matcore.psd_sqrt(PM, tol)
    post = matcore.is_contraction(build_toeplitz(p.coeffs + (C_next,), p.N + 1).matrix, tol)
    if not post.ok:
        raise PostconditionFailure(f"T_{p.N + 1} has sigma_max={post.sigma_max:.12g}; tolerances too loose?")
    return C_next


def central_by_recursion(p: SchurProblem, K: int) -> MatSeries:
    """Central solution up to ``λ^K`` by repeatedly appending ``Ċ``."""
    q = p
    while q.N < K:
        q = q.with_next(central_next(q))
    return MatSeries.from_list(q.coeffs[: K + 1])


def central_solution(p: SchurProblem, K: int) -> MatSeries:
    """Central solution to order ``K``; the recursion and the Möbius composition must agree."""
    _require_solvable(p)
    if K < p.N:
        raise ShapeMismatch(f"order {K} is below the number of data ({p.N})")
    tol = p.tol
    cs = operator_schur_params(p.series(), p.N, tol)
    via_params = params_to_coeffs(cs, K, tol)
    via_recursion = central_by_recursion(p, K)
    scale = max(1.0, float(np.max(np.abs(via_params.coeffs))))
    gap = via_params.max_abs_diff(via_recursion)
    if gap > tol.match_tol * scale:
        raise RouteDisagreement(gap, "central solution: recursion vs. Möbius composition")
    return via_params


def problem_from_json(obj: dict, tol: Tolerances = DEFAULT_TOL) -> SchurProblem:
    from .jsonio import decode_cmatrix
    return SchurProblem(tuple(decode_cmatrix(c) for c in obj["coeffs"]), tol)


def problem_to_json(p: SchurProblem) -> dict:
    from .jsonio import encode_cmatrix
    return {"coeffs": [encode_cmatrix(c) for c in p.coeffs]}
