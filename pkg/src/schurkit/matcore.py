"""Dense complex matrix primitives: defect operators, PSD roots, pseudo-inverses.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Zero-sized
arrays (``(0, n)``, ``(n, 0)``, ``(0, 0)``) are legal everywhere and act as
empty linear maps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotAContraction, NotHermitian, NotPSD

# eigenvalues of I - T*T closer than this are treated as one cluster when
# choosing a canonical basis
_CLUSTER_GAP = 1e-9


@dataclass(frozen=True)
class Tolerances:
    contraction_slack: float = 1e-10
    rank_rel_tol: float = 1e-10
    match_tol: float = 1e-8

    def __post_init__(self):
        for name in ("contraction_slack", "rank_rel_tol", "match_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def as_dict(self) -> dict:
        return {"contraction_slack": self.contraction_slack,
                "rank_rel_tol": self.rank_rel_tol,
                "match_tol": self.match_tol}


DEFAULT_TOL = Tolerances()


class ContractionCheck(NamedTuple):
    ok: bool
    sigma_max: float


def cmat(x) -> np.ndarray:
    """Coerce ``x`` to a 2-D complex array (scalars become 1x1)."""
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    return a


def adjoint(M) -> np.ndarray:
    return cmat(M).conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def sigma_max(M) -> float:
    M = cmat(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def opnorm(M) -> float:
    """Spectral norm, 0 for empty matrices."""
    return sigma_max(M)


def is_contraction(T, tol: Tolerances = DEFAULT_TOL) -> ContractionCheck:
    s = sigma_max(T)
    return ContractionCheck(s <= 1.0 + tol.contraction_slack, s)


def _require_contraction(T: np.ndarray, tol: Tolerances, what: str = "matrix"):
    chk = is_contraction(T, tol)
    if not chk.ok:
        raise NotAContraction(chk.sigma_max, what)


def defect_spectrum(T) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of ``I - T*T`` computed from the SVD of ``T``.

    Returns ``(d2, V)`` with ``d2`` sorted descending and ``V`` unitary on the
    domain of ``T``.  ``1 - s**2`` is formed as ``(1-s)(1+s)`` and clamped at 0.
    """
    T = cmat(T)
    rows, cols = T.shape
    if cols == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.ones(cols), np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(T, full_matrices=True)
    sv = np.zeros(cols)
    sv[: s.size] = s
    d2 = np.clip((1.0 - sv) * (1.0 + sv), 0.0, None)
    order = np.argsort(-d2, kind="stable")
    return d2[order], vh.conj().T[:, order]


def defect(T, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``D_T = (I - T*T)^{1/2}``."""
    T = cmat(T)
    _require_contraction(T, tol)
    d2, V = defect_spectrum(T)
    D = (V * np.sqrt(d2)) @ V.conj().T
    return hermitian_part(D)


def defect_sq(T) -> np.ndarray:
    """``I - T*T`` without any contractivity check."""
    T = cmat(T)
    return hermitian_part(np.eye(T.shape[1], dtype=complex) - T.conj().T @ T)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    if v.size == 0:
        return v
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[0])
    return v * (abs(v[k]) / v[k])


def canonical_basis(Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Canonical orthonormal basis of ``ran Q`` (``Q`` with orthonormal columns).

    Greedy pivoted Gram-Schmidt on the columns of the projector ``Q Q*`` (ties go
    to the lowest coordinate index), followed by phase fixing.  The result
    depends only on the subspace, not on the particular ``Q``.
    """
    n, k = Q.shape
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    P = Q @ Q.conj().T
    basis = []
    R = P.copy()
    for _ in range(k):
        norms = np.linalg.norm(R, axis=0)
        j = int(np.flatnonzero(norms >= norms.max() - tol)[0])
        v = R[:, j] / norms[j]
        # re-orthogonalize against what we already have
        for b in basis:
            v = v - b * (b.conj() @ v)
        v = v / np.linalg.norm(v)
        v = _fix_phase(v)
        basis.append(v)
        R = R - np.outer(v, v.conj() @ R)
    return np.column_stack(basis)


def _clustered_basis(d2: np.ndarray, V: np.ndarray, keep: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return np.zeros((V.shape[0], 0), dtype=complex)
    cols = []
    start = 0
    for i in range(1, idx.size + 1):
        if i == idx.size or d2[idx[i - 1]] - d2[idx[i]] > _CLUSTER_GAP:
            cols.append(canonical_basis(V[:, idx[start:i]]))
            start = i
    return np.hstack(cols)


def defect_basis(T, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the defect space ``cran D_T``.

    Columns are eigenvectors of ``D_T`` ordered by descending eigenvalue; an
    eigenvalue ``d`` is kept when ``d**2 > rank_rel_tol`` (the squared spectrum
    ``1 - s**2`` is what floating point resolves).
    """
    T = cmat(T)
    _require_contraction(T, tol)
    d2, V = defect_spectrum(T)
    return _clustered_basis(d2, V, d2 > tol.rank_rel_tol)


def defect_kernel_basis(T, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ker D_T`` (the isometric part of ``T``)."""
    T = cmat(T)
    _require_contraction(T, tol)
    d2, V = defect_spectrum(T)
    return _clustered_basis(d2, V, d2 <= tol.rank_rel_tol)


def defect_pinv(T, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse of ``D_T`` with the cutoff applied to ``D_T**2``."""
    T = cmat(T)
    _require_contraction(T, tol)
    d2, V = defect_spectrum(T)
    inv = np.zeros_like(d2)
    keep = d2 > tol.rank_rel_tol
    inv[keep] = 1.0 / np.sqrt(d2[keep])
    return hermitian_part((V * inv) @ V.conj().T)


def defect_on_basis(T, basis: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``basis* D_T basis``: the defect operator in defect-space coordinates."""
    return hermitian_part(basis.conj().T @ defect(T, tol) @ basis)


def pinv(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse, singular values below ``rank_rel_tol*sigma_max`` dropped."""
    M = cmat(M)
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]), dtype=complex)
    return np.linalg.pinv(M, rcond=tol.rank_rel_tol)


def numerical_rank(M, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> int:
    M = cmat(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(s > tol.rank_rel_tol * ref))


def check_hermitian(S, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    S = cmat(S)
    if S.shape[0] != S.shape[1]:
        raise NotHermitian(float("inf"))
    if S.size == 0:
        return S
    res = np.linalg.norm(S - S.conj().T, 2)
    if res > tol.match_tol * max(1.0, np.linalg.norm(S, 2)):
        raise NotHermitian(res)
    return hermitian_part(S)


def psd_eigh(S, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with negative eigenvalues clamped to 0."""
    S = check_hermitian(S, tol)
    if S.size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    w, V = np.linalg.eigh(S)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol.contraction_slack * scale:
        raise NotPSD(w[0])
    return np.clip(w, 0.0, None), V


def psd_sqrt(S, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    w, V = psd_eigh(S, tol)
    return hermitian_part((V * np.sqrt(w)) @ V.conj().T)


def psd_clamp(S, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Project a nearly-PSD Hermitian matrix onto the PSD cone."""
    w, V = psd_eigh(S, tol)
    return hermitian_part((V * w) @ V.conj().T)


def orth(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ran M`` (relative rank cutoff)."""
    M = cmat(M)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    return u[:, s > tol.rank_rel_tol * s[0]]


def orth_complement(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``ran Q`` (``Q`` orthonormal)."""
    n, k = Q.shape
    if k == 0:
        return np.eye(n, dtype=complex)
    if k == n:
        return np.zeros((n, 0), dtype=complex)
    u, _, _ = np.linalg.svd(Q, full_matrices=True)
    return canonical_basis(u[:, k:])


def subspace_intersection(Q1: np.ndarray, Q2: np.ndarray, cos_tol: float) -> np.ndarray:
    """Orthonormal basis of ``ran Q1 ∩ ran Q2`` via principal angles.

    Principal vectors whose cosine exceeds ``1 - cos_tol`` are kept.
    """
    n = Q1.shape[0]
    if Q1.shape[1] == 0 or Q2.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    w, s, _ = np.linalg.svd(Q1.conj().T @ Q2)
    k = int(np.sum(s > 1.0 - cos_tol))
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    return canonical_basis(orth(Q1 @ w[:, :k]))
