"""Kreĭn shorted operators of PSD matrices.

The production route rotates to coordinates ``[K | K⊥]`` and takes the
generalized Schur complement ``S11 - (S22^{-1/2} S12*)* (S22^{-1/2} S12*)``.
The range condition ``ran S12* ⊂ ran S22^{1/2}`` holds automatically for PSD
input in finite dimensions, so it is not checked; the pseudo-inverse cutoff
(applied to the eigenvalues of ``S22``) absorbs rounding violations.

:func:`shorted_quadratic_form` evaluates the variational definition
``inf_{φ ∈ K⊥} (S(f+φ), f+φ)`` by least squares and serves as the
independent oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import matcore
from .errors import DimensionMismatch
from .matcore import DEFAULT_TOL, Tolerances


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = matcore.cmat(self.basis) if np.size(self.basis) else np.zeros((self.ambient_dim, 0), complex)
        if b.shape[0] != self.ambient_dim:
            raise DimensionMismatch(f"basis has {b.shape[0]} rows, ambient_dim is {self.ambient_dim}")
        gram = b.conj().T @ b
        if b.shape[1] and matcore.opnorm(gram - np.eye(b.shape[1])) > 1e-8:
            raise ValueError("subspace basis must have orthonormal columns")
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (orthonormalized)."""
        V = matcore.cmat(vectors)
        return cls(V.shape[0], matcore.canonical_basis(matcore.orth(V, tol)))

    @classmethod
    def coordinates(cls, ambient_dim: int, indices) -> "Subspace":
        E = np.eye(ambient_dim, dtype=complex)[:, list(indices)]
        return cls(ambient_dim, E)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        return Subspace(self.ambient_dim, matcore.orth_complement(self.basis))


@dataclass(frozen=True)
class ShortedResult:
    full: np.ndarray
    compressed: np.ndarray
    numerical_rank: int
    tol_used: Tolerances


def _check_dims(S: np.ndarray, K: Subspace):
    if S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"S must be square, got {S.shape}")
    if K.ambient_dim != S.shape[0]:
        raise DimensionMismatch(f"subspace lives in dimension {K.ambient_dim}, S is {S.shape[0]}x{S.shape[0]}")


def shorted_operator(S, K: Subspace, tol: Tolerances = DEFAULT_TOL) -> ShortedResult:
    S = matcore.cmat(S)
    _check_dims(S, K)
    scale = max(matcore.opnorm(S), np.finfo(float).tiny)
    matcore.psd_eigh(S, tol)                      # NotHermitian / NotPSD

    Q, Qp = K.basis, K.complement().basis
    k = Q.shape[1]
    S11 = Q.conj().T @ S @ Q
    S12 = Q.conj().T @ S @ Qp
    S22 = matcore.hermitian_part(Qp.conj().T @ S @ Qp)

    if Qp.shape[1]:
        w, V = np.linalg.eigh(S22)
        keep = w > tol.rank_rel_tol * scale
        # X = S22^{-1/2} S12*, restricted to the numerically nonzero spectrum of S22
        X = (V[:, keep].conj().T @ S12.conj().T) / np.sqrt(w[keep])[:, None]
        comp = S11 - X.conj().T @ X
    else:
        comp = S11
    comp = matcore.psd_clamp(matcore.hermitian_part(comp), tol) if k else np.zeros((0, 0), complex)
    full = matcore.hermitian_part(Q @ comp @ Q.conj().T)
    rank = matcore.numerical_rank(comp, tol, scale=scale) if k else 0
    return ShortedResult(full=full, compressed=comp, numerical_rank=rank, tol_used=tol)


def shorted_quadratic_form(S, K: Subspace, f, tol: Tolerances = DEFAULT_TOL) -> float:
    """``inf over φ in K⊥ of (S(f+φ), f+φ)`` via the normal equations."""
    S = matcore.cmat(S)
    _check_dims(S, K)
    matcore.psd_eigh(S, tol)
    f = np.asarray(f, dtype=complex).reshape(-1)
    Qp = K.complement().basis
    g = f
    if Qp.shape[1]:
        A = Qp.conj().T @ S @ Qp
        rhs = -(Qp.conj().T @ S @ f)
        y = matcore.pinv(A, tol) @ rhs
        g = f + Qp @ y
    return float(np.real(g.conj() @ S @ g))


class ZeroCheck(NamedTuple):
    zero: bool
    witness_norm: float


def shorted_is_zero(S, K: Subspace, tol: Tolerances = DEFAULT_TOL) -> ZeroCheck:
    r = shorted_operator(S, K, tol)
    w = matcore.opnorm(r.compressed)
    return ZeroCheck(bool(w <= tol.match_tol), w)
