"""Finite-dimensional unitary colligations (conservative discrete-time systems).

A colligation is a unitary ``U = [[D, C], [B, A]]`` acting from ``M ⊕ H`` to
``N ⊕ H``; its transfer function ``D + λ C (I - λA)^{-1} B`` is a Schur
function.  Unitarity of a finite matrix forces ``dim M = dim N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import DegenerateDefect, DimensionMismatch, NotAContraction, VerificationFailure
from .matcore import DEFAULT_TOL, Tolerances
from .schur import first_associated, operator_schur_params
from .series import MatSeries
from .toeplitz import product_formula


def unitarity_residual(U: np.ndarray) -> float:
    if U.size == 0:
        return 0.0
    eye_in = np.eye(U.shape[1])
    eye_out = np.eye(U.shape[0])
    return max(matcore.opnorm(U.conj().T @ U - eye_in), matcore.opnorm(U @ U.conj().T - eye_out))


@dataclass(frozen=True)
class Colligation:
    m: int
    n: int
    h: int
    U: np.ndarray = field(repr=False)
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        if self.m != self.n:
            raise DimensionMismatch(f"unitary colligations need m == n, got m={self.m}, n={self.n}")
        U = np.asarray(self.U, dtype=complex).reshape(self.n + self.h, self.m + self.h)
        res = unitarity_residual(U)
        if res > self.tol.match_tol:
            raise VerificationFailure(res, "colligation operator is not unitary")
        U = U.copy()
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @classmethod
    def from_blocks(cls, D, C, B, A, tol: Tolerances = DEFAULT_TOL) -> "Colligation":
        D, C, B, A = (np.asarray(x, dtype=complex) for x in (D, C, B, A))
        n, m = D.shape
        h = A.shape[0]
        U = np.block([[D.reshape(n, m), C.reshape(n, h)], [B.reshape(h, m), A.reshape(h, h)]])
        return cls(m, n, h, U, tol)

    @property
    def D(self) -> np.ndarray:
        return self.U[: self.n, : self.m]

    @property
    def C(self) -> np.ndarray:
        return self.U[: self.n, self.m:]

    @property
    def B(self) -> np.ndarray:
        return self.U[self.n:, : self.m]

    @property
    def A(self) -> np.ndarray:
        return self.U[self.n:, self.m:]

    def to_json(self) -> dict:
        from .jsonio import encode_cmatrix
        return {"m": self.m, "h": self.h, "U": encode_cmatrix(self.U)}

    @classmethod
    def from_json(cls, obj: dict, tol: Tolerances = DEFAULT_TOL) -> "Colligation":
        from .jsonio import decode_cmatrix
        m, h = int(obj["m"]), int(obj["h"])
        U = decode_cmatrix(obj["U"])
        if U.shape != (m + h, m + h):
            raise DimensionMismatch(f"U must be {m + h}x{m + h}, got {U.shape}")
        return cls(m, m, h, U, tol)


def random_unitary(size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a complex Gaussian."""
    if size == 0:
        return np.zeros((0, 0), dtype=complex)
    Z = (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_colligation(m: int, h: int, seed: int | np.random.Generator | None = None,
                       tol: Tolerances = DEFAULT_TOL) -> Colligation:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Colligation(m, m, h, random_unitary(m + h, rng), tol)


def colligation_from_state(A, tol: Tolerances = DEFAULT_TOL) -> Colligation:
    """Conservative system with state operator ``A``.

    Uses ``[[-A*, D_A], [D_{A*}, A]]`` cut down to input ``𝔇_{A*}`` and output
    ``𝔇_A`` (on their defect bases); the cut is exact because ``A*`` maps
    ``ker D_{A*}`` unitarily onto ``ker D_A``.
    """
    A = matcore.cmat(A)
    Vin = matcore.defect_basis(A.conj().T, tol)
    Vout = matcore.defect_basis(A, tol)
    D = -Vout.conj().T @ A.conj().T @ Vin
    C = Vout.conj().T @ matcore.defect(A, tol)
    B = matcore.defect(A.conj().T, tol) @ Vin
    return Colligation.from_blocks(D, C, B, A, tol)


def truncated_shift(h: int) -> np.ndarray:
    """``e_1 -> e_2 -> ... -> e_h -> 0``."""
    return np.eye(h, k=-1, dtype=complex)


def transfer_coeffs(col: Colligation, K: int) -> MatSeries:
    """``C_0 = D``, ``C_k = C A^{k-1} B``."""
    out = np.zeros((K + 1, col.n, col.m), dtype=complex)
    out[0] = col.D
    X = col.B
    for k in range(1, K + 1):
        out[k] = col.C @ X
        X = col.A @ X
    return MatSeries(out)


def _power(A: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(A, k) if k else np.eye(A.shape[0], dtype=complex)


def hnm_basis(col_or_A, n: int, m_idx: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``ker D_{A^n} ∩ ker D_{A*^m}`` (``n = 0`` or ``m = 0`` drops that factor)."""
    A = col_or_A.A if isinstance(col_or_A, Colligation) else matcore.cmat(col_or_A)
    h = A.shape[0]
    full = np.eye(h, dtype=complex)
    Q1 = matcore.defect_kernel_basis(_power(A, n), tol) if n else full
    Q2 = matcore.defect_kernel_basis(_power(A.conj().T, m_idx), tol) if m_idx else full
    if not m_idx:
        return Q1
    if not n:
        return Q2
    return matcore.subspace_intersection(Q1, Q2, tol.match_tol)


def hnm_projector(col_or_A, n: int, m_idx: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    Q = hnm_basis(col_or_A, n, m_idx, tol)
    return Q @ Q.conj().T


def _krylov_span(A: np.ndarray, start: np.ndarray, basis: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Extend ``basis`` by the block Krylov space of ``A`` on ``ran start``."""
    h = A.shape[0]
    block = matcore.orth(start, tol) if start.size else np.zeros((h, 0), complex)
    for _ in range(h + 1):
        if block.shape[1] == 0:
            break
        if basis.shape[1]:
            block = block - basis @ (basis.conj().T @ block)
        u, s, _ = np.linalg.svd(block, full_matrices=False) if block.size else (None, np.zeros(0), None)
        keep = s > tol.match_tol
        if not np.any(keep):
            break
        new = u[:, keep]
        basis = np.hstack([basis, new])
        block = A @ new
    return basis


@dataclass(frozen=True)
class SimplicityCheck:
    simple: bool
    cnu_defect_dim: int
    rank: int


def simplicity_check(col_or_A, tol: Tolerances = DEFAULT_TOL) -> SimplicityCheck:
    """``span{A*^k D_A, A^k D_{A*}}`` against the whole state space."""
    A = col_or_A.A if isinstance(col_or_A, Colligation) else matcore.cmat(col_or_A)
    h = A.shape[0]
    basis = np.zeros((h, 0), dtype=complex)
    basis = _krylov_span(A.conj().T, matcore.defect_basis(A, tol), basis, tol)
    basis = _krylov_span(A, matcore.defect_basis(A.conj().T, tol), basis, tol)
    rank = basis.shape[1]
    return SimplicityCheck(rank == h, h - rank, rank)


def observable_subspace(col: Colligation, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``span{A*^k D_A}``."""
    h = col.h
    return _krylov_span(col.A.conj().T, matcore.defect_basis(col.A, tol), np.zeros((h, 0), complex), tol)


@dataclass(frozen=True)
class Main1Report:
    max_residual_M: float
    max_residual_N: float
    residuals_M: tuple
    residuals_N: tuple
    simple: bool
    skipped: bool


def verify_main1(col: Colligation, n_max: int, tol: Tolerances = DEFAULT_TOL) -> Main1Report:
    """Compare ``B* P_{n,0} B`` with the product of defect operators (and the ``C*`` mirror).

    Gram matrices are compared, which covers every input vector at once.
    """
    simple = simplicity_check(col, tol).simple
    if not simple:
        return Main1Report(float("nan"), float("nan"), (), (), False, True)
    cs = operator_schur_params(transfer_coeffs(col, n_max), n_max, tol)
    rm, rn = [], []
    for k in range(n_max + 1):
        lhs_m = col.B.conj().T @ hnm_projector(col, k, 0, tol) @ col.B
        lhs_n = col.C @ hnm_projector(col, 0, k, tol) @ col.C.conj().T
        rm.append(matcore.opnorm(lhs_m - product_formula(cs, k, "M")))
        rn.append(matcore.opnorm(lhs_n - product_formula(cs, k, "N")))
    return Main1Report(max(rm), max(rn), tuple(rm), tuple(rn), True, False)


@dataclass(frozen=True)
class AssociatedSystem:
    zeta: Colligation | None
    F: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    L: np.ndarray = field(repr=False)
    residual: float
    gamma1_residual: float
    theta1_constant: bool
    theta1_unitary: bool
    zeta_simple: bool
    unitarity_residual: float


def associated_system(col: Colligation, K: int = 4, tol: Tolerances = DEFAULT_TOL) -> AssociatedSystem:
    """Realization ``[[GF, G], [L D_G F, L D_G]]`` of the first associated function.

    ``F``, ``G``, ``L`` come from ``B = F D_D``, ``C = D_{D*} G`` and
    ``A = -F D* G + D_{F*} L D_G``, all on the recorded defect bases.  The
    transfer coefficients are checked against ``Θ_1`` from the Schur step.
    """
    D, C, B, A = col.D, col.C, col.B, col.A
    Vi = matcore.defect_basis(D, tol)
    Vo = matcore.defect_basis(D.conj().T, tol)
    if Vi.shape[1] == 0 or Vo.shape[1] == 0:
        raise DegenerateDefect("D is isometric or co-isometric; no first associated function")
    F = B @ matcore.defect_pinv(D, tol) @ Vi                         # 𝔇_D -> H
    G = Vo.conj().T @ matcore.defect_pinv(D.conj().T, tol) @ C       # H -> 𝔇_{D*}
    Dstar = Vi.conj().T @ D.conj().T @ Vo                            # 𝔇_{D*} -> 𝔇_D
    Wf = matcore.defect_basis(F.conj().T, tol)                       # basis of 𝔇_{F*} in H
    Wg = matcore.defect_basis(G, tol)                                # basis of 𝔇_G in H
    core = A + F @ Dstar @ G
    L = Wf.conj().T @ matcore.defect_pinv(F.conj().T, tol) @ core @ matcore.defect_pinv(G, tol) @ Wg
    LDG = L @ Wg.conj().T @ matcore.defect(G, tol)                   # 𝔇_{F*}-coords <- H
    zeta_U = np.block([[G @ F, G @ Wf], [LDG @ F, LDG @ Wf]])
    ures = unitarity_residual(zeta_U)
    p = Vi.shape[1]
    try:
        zeta = Colligation(p, Vo.shape[1], Wf.shape[1], zeta_U, tol)
    except (DimensionMismatch, VerificationFailure):
        zeta = None

    theta1, _, _ = first_associated(transfer_coeffs(col, K + 1), tol)
    if zeta is not None:
        mine = transfer_coeffs(zeta, K)
    else:
        mine = MatSeries.from_list([G @ F] + [G @ Wf @ np.linalg.matrix_power(LDG @ Wf, k - 1) @ LDG @ F
                                              for k in range(1, K + 1)])
    residual = mine.max_abs_diff(theta1)
    if residual > tol.match_tol:
        raise VerificationFailure(residual, "transfer function of the associated system vs. Θ_1")
    g1res = matcore.opnorm(G @ F - theta1[0])
    constant = bool(K == 0 or np.max(np.abs(theta1.coeffs[1:])) <= tol.match_tol)
    unitary = bool(unitarity_residual(theta1[0]) <= tol.match_tol) if constant else False
    zsimple = simplicity_check(zeta, tol).simple if zeta is not None else False
    return AssociatedSystem(zeta, F, G, L, residual, g1res, constant, unitary, zsimple, ures)


def characteristic_function(A, K: int, tol: Tolerances = DEFAULT_TOL) -> MatSeries:
    """``Ψ_A(λ) = (-A + λ D_{A*}(I - λA*)^{-1} D_A)`` restricted to ``𝔇_A``.

    Coefficients on the defect bases: ``Ψ_0 = -A``, ``Ψ_k = D_{A*} A*^{k-1} D_A``.
    """
    A = matcore.cmat(A)
    chk = matcore.is_contraction(A, tol)
    if not chk.ok:
        raise NotAContraction(chk.sigma_max, "A")
    Vi = matcore.defect_basis(A, tol)
    Vo = matcore.defect_basis(A.conj().T, tol)
    DA = matcore.defect(A, tol) @ Vi
    DAs = Vo.conj().T @ matcore.defect(A.conj().T, tol)
    out = np.zeros((K + 1, Vo.shape[1], Vi.shape[1]), dtype=complex)
    out[0] = -Vo.conj().T @ A @ Vi
    X = DA
    for k in range(1, K + 1):
        out[k] = DAs @ X
        X = A.conj().T @ X
    return MatSeries(out)


@dataclass(frozen=True)
class ShiftVerdict:
    cni: bool
    cnci: bool
    isometric_dim: int
    coisometric_dim: int


def shift_parts(A, depth: int | None = None, tol: Tolerances = DEFAULT_TOL) -> ShiftVerdict:
    """Kernel test ``ker D_{A^k}`` (and the ``A*`` version) at ``k = depth`` (default ``dim``)."""
    A = matcore.cmat(A)
    k = A.shape[0] if depth is None else depth
    iso = hnm_basis(A, max(k, 1), 0, tol).shape[1] if A.shape[0] else 0
    co = hnm_basis(A, 0, max(k, 1), tol).shape[1] if A.shape[0] else 0
    return ShiftVerdict(iso == 0, co == 0, iso, co)
