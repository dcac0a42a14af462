"""Scalar and operator Schur algorithms, and the OPUC bridge.

Schur parameters ``Γ_k`` act between defect spaces; they are stored as
matrices on explicit orthonormal bases.  ``in_bases[k]`` is a basis of
``D_{Γ_k}`` (columns in the coordinates of the domain of ``Γ_k``) and
``out_bases[k]`` one of ``D_{Γ_k*}``, so ``Γ_{k+1}`` has shape
``(out_bases[k].cols, in_bases[k].cols)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore
from .errors import NotSchurClass, NotSchurSequence, NotVerblunsky, ShapeMismatch
from .matcore import DEFAULT_TOL, Tolerances
from .series import MatSeries, moebius_apply, series_inverse, shift_div
from .toeplitz import build_toeplitz


@dataclass(frozen=True)
class ChoiceSequence:
    gammas: tuple
    in_bases: tuple
    out_bases: tuple
    m: int
    n: int
    terminated_at: int | None = None
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        if not self.gammas:
            raise ShapeMismatch("a choice sequence needs at least Γ_0")
        if self.gammas[0].shape != (self.n, self.m):
            raise ShapeMismatch(f"Γ_0 must be {self.n}x{self.m}, got {self.gammas[0].shape}")
        for k, g in enumerate(self.gammas):
            if k and g.shape != (self.out_bases[k - 1].shape[1], self.in_bases[k - 1].shape[1]):
                raise ShapeMismatch(f"Γ_{k} has shape {g.shape}, inconsistent with the defect dimensions")
            if self.in_bases[k].shape[0] != g.shape[1] or self.out_bases[k].shape[0] != g.shape[0]:
                raise ShapeMismatch(f"bases of level {k} do not match Γ_{k}")

    @classmethod
    def from_gammas(cls, gammas: Sequence, tol: Tolerances = DEFAULT_TOL) -> "ChoiceSequence":
        """Build the sequence and its deterministic defect bases from bare matrices."""
        gs = [matcore.cmat(g) for g in gammas]
        ins, outs = [], []
        term = None
        for k, g in enumerate(gs):
            if not matcore.is_contraction(g, tol).ok:
                raise NotSchurSequence(k, matcore.sigma_max(g))
            ins.append(matcore.defect_basis(g, tol))
            outs.append(matcore.defect_basis(g.conj().T, tol))
            if term is None and (ins[-1].shape[1] == 0 or outs[-1].shape[1] == 0):
                term = k
        n, m = gs[0].shape
        return cls(tuple(gs), tuple(ins), tuple(outs), m, n, term, tol)

    @property
    def N(self) -> int:
        return len(self.gammas) - 1

    def gamma(self, k: int) -> np.ndarray:
        """``Γ_k``; beyond the stored levels the zero map between the last defect spaces."""
        if k <= self.N:
            return self.gammas[k]
        return np.zeros((self.out_bases[self.N].shape[1], self.in_bases[self.N].shape[1]), dtype=complex)

    def in_basis(self, k: int) -> np.ndarray:
        if k <= self.N:
            return self.in_bases[k]
        return np.eye(self.in_bases[self.N].shape[1], dtype=complex)

    def out_basis(self, k: int) -> np.ndarray:
        if k <= self.N:
            return self.out_bases[k]
        return np.eye(self.out_bases[self.N].shape[1], dtype=complex)

    def is_strict(self, k: int) -> bool:
        """``|Γ_k| < 1`` in the floating-point sense used for defect bases."""
        g = self.gamma(k)
        return self.in_basis(k).shape[1] == g.shape[1] and self.out_basis(k).shape[1] == g.shape[0]

    def adjoint(self) -> "ChoiceSequence":
        """Parameters of ``Θ~(λ) = Θ*(conj λ)``: adjoints with swapped bases."""
        return ChoiceSequence(tuple(g.conj().T for g in self.gammas), self.out_bases, self.in_bases,
                              self.n, self.m, self.terminated_at, self.tol)

    def padded(self, N: int) -> "ChoiceSequence":
        """The same sequence extended by zero parameters up to level ``N``."""
        if N <= self.N:
            return self
        gs = list(self.gammas) + [self.gamma(k) for k in range(self.N + 1, N + 1)]
        ins = list(self.in_bases) + [self.in_basis(k) for k in range(self.N + 1, N + 1)]
        outs = list(self.out_bases) + [self.out_basis(k) for k in range(self.N + 1, N + 1)]
        return ChoiceSequence(tuple(gs), tuple(ins), tuple(outs), self.m, self.n, self.terminated_at, self.tol)

    def to_json(self) -> dict:
        from .jsonio import encode_cmatrix
        return {"gammas": [encode_cmatrix(g) for g in self.gammas],
                "in_bases": [encode_cmatrix(b) for b in self.in_bases],
                "out_bases": [encode_cmatrix(b) for b in self.out_bases],
                "m": self.m, "n": self.n, "terminated_at": self.terminated_at}

    @classmethod
    def from_json(cls, obj: dict, tol: Tolerances = DEFAULT_TOL) -> "ChoiceSequence":
        from .jsonio import decode_cmatrix
        gs = [decode_cmatrix(g) for g in obj["gammas"]]
        if "in_bases" not in obj:
            return cls.from_gammas(gs, tol)
        cs = cls(tuple(gs), tuple(decode_cmatrix(b) for b in obj["in_bases"]),
                 tuple(decode_cmatrix(b) for b in obj["out_bases"]),
                 int(obj.get("m", gs[0].shape[1])), int(obj.get("n", gs[0].shape[0])),
                 obj.get("terminated_at"), tol)
        for k, g in enumerate(cs.gammas):
            if not matcore.is_contraction(g, tol).ok:
                raise NotSchurSequence(k, matcore.sigma_max(g))
        return cs


@dataclass(frozen=True)
class ScalarSchurResult:
    gammas: list
    terminated: bool


def _first_noncontractive_level(theta: MatSeries, N: int, tol: Tolerances):
    for k in range(N + 1):
        chk = matcore.is_contraction(build_toeplitz(theta, k).matrix, tol)
        if not chk.ok:
            return k, chk.sigma_max
    return None


def scalar_schur_params(f: MatSeries, tol: Tolerances = DEFAULT_TOL) -> ScalarSchurResult:
    """Classical Schur recursion ``f_{n+1} = (f_n - γ_n) / (λ (1 - conj(γ_n) f_n))``."""
    if f.shape != (1, 1):
        raise ShapeMismatch(f"scalar Schur algorithm needs a 1x1 series, got {f.shape}")
    bad = _first_noncontractive_level(f, f.order, tol)
    if bad is not None:
        raise NotSchurClass(*bad)
    gammas: list[complex] = []
    fn = f
    while True:
        g = complex(fn[0][0, 0])
        gammas.append(g)
        if (1 - abs(g)) * (1 + abs(g)) <= tol.rank_rel_tol:
            return ScalarSchurResult(gammas, True)
        if fn.order == 0:
            return ScalarSchurResult(gammas, False)
        K = fn.order
        num = fn - MatSeries.constant([[g]], K)
        den = MatSeries.identity(1, K) - MatSeries(fn.coeffs * np.conj(g))
        fn = shift_div(num @ series_inverse(den, tol), tol)


def _schur_step(theta: MatSeries, g: np.ndarray, Vi: np.ndarray, Vo: np.ndarray,
                tol: Tolerances) -> MatSeries:
    """Next associated function on defect coordinates.

    Writes ``Θ - Γ = D_{Γ*} Vo W Vi* D_Γ`` and returns ``λ^{-1} (I - W Γ*)^{-1} W``,
    which equals ``λ^{-1} D_{Γ*}(I - ΘΓ*)^{-1}(Θ - Γ) D_Γ^{-1}`` on ``ran D_Γ`` but
    only inverts a series with identity constant term.
    """
    K = theta.order
    Eo = matcore.defect_on_basis(g.conj().T, Vo, tol)
    Ei = matcore.defect_on_basis(g, Vi, tol)
    diff = theta - MatSeries.constant(g, K)
    W = diff.left(np.linalg.solve(Eo, Vo.conj().T)).right(np.linalg.solve(Ei, Vi.conj().T).conj().T)
    gstar = Vi.conj().T @ g.conj().T @ Vo
    q = Vo.shape[1]
    Z = series_inverse(MatSeries.identity(q, K) - W.right(gstar), tol) @ W
    return shift_div(Z, tol)


def first_associated(theta: MatSeries, tol: Tolerances = DEFAULT_TOL) -> tuple[MatSeries, np.ndarray, np.ndarray]:
    """``(Θ_1, Vi, Vo)``: the first associated function on the defect bases of ``Γ_0``.

    ``Θ_1`` has order one less than ``theta``; it maps ``Vi``-coordinates of
    ``𝔇_{Γ_0}`` to ``Vo``-coordinates of ``𝔇_{Γ_0*}``.
    """
    if theta.order < 1:
        raise ShapeMismatch("need at least C_0 and C_1 for the first associated function")
    chk = matcore.is_contraction(build_toeplitz(theta, theta.order).matrix, tol)
    if not chk.ok:
        raise NotSchurSequence(theta.order, chk.sigma_max)
    g = theta[0].copy()
    Vi = matcore.defect_basis(g, tol)
    Vo = matcore.defect_basis(g.conj().T, tol)
    if Vi.shape[1] == 0 or Vo.shape[1] == 0:
        return MatSeries.zeros(Vo.shape[1], Vi.shape[1], theta.order - 1), Vi, Vo
    return _schur_step(theta, g, Vi, Vo, tol), Vi, Vo


def operator_schur_params(theta: MatSeries, N: int | None = None,
                          tol: Tolerances = DEFAULT_TOL) -> ChoiceSequence:
    """Schur parameters ``Γ_0..Γ_N`` of the function with Taylor coefficients ``theta``.

    After a defect dimension reaches zero the remaining parameters are the
    zero maps between the (partly empty) defect spaces; ``terminated_at``
    records the first such level.
    """
    N = theta.order if N is None else N
    if N > theta.order:
        raise ShapeMismatch(f"level {N} needs {N + 1} coefficients, got {theta.order + 1}")
    theta = theta.truncate(N)
    chk = matcore.is_contraction(build_toeplitz(theta, N).matrix, tol)
    if not chk.ok:
        bad = _first_noncontractive_level(theta, N, tol)
        raise NotSchurSequence(*(bad or (N, chk.sigma_max)))
    gammas, ins, outs = [], [], []
    term = None
    cur = theta
    for k in range(N + 1):
        g = cur[0].copy()
        Vi = matcore.defect_basis(g, tol)
        Vo = matcore.defect_basis(g.conj().T, tol)
        gammas.append(g)
        ins.append(Vi)
        outs.append(Vo)
        if k == N:
            break
        if Vi.shape[1] == 0 or Vo.shape[1] == 0:
            if term is None:
                term = k
            cur = MatSeries.zeros(Vo.shape[1], Vi.shape[1], cur.order - 1)
        else:
            cur = _schur_step(cur, g, Vi, Vo, tol)
    if term is None and (ins[-1].shape[1] == 0 or outs[-1].shape[1] == 0):
        term = N
    n, m = theta.shape
    return ChoiceSequence(tuple(gammas), tuple(ins), tuple(outs), m, n, term, tol)


def params_to_coeffs(cs: ChoiceSequence, K: int, tol: Tolerances | None = None) -> MatSeries:
    """Taylor coefficients up to ``λ^K`` of ``M_{Γ_0}∘...∘M_{Γ_N}(λ·0)``."""
    tol = tol or cs.tol
    X = MatSeries.constant(cs.gammas[-1], K)
    for k in range(cs.N - 1, -1, -1):
        X = moebius_apply(cs.gammas[k], X.times_lambda(), tol,
                          in_basis=cs.in_bases[k], out_basis=cs.out_bases[k])
    return X


def random_choice_sequence(m: int, n: int, N: int, sigma: float,
                           rng: np.random.Generator, tol: Tolerances = DEFAULT_TOL) -> ChoiceSequence:
    """Random choice sequence with every ``|Γ_k| <= sigma`` (uniform norm in ``(0, sigma]``)."""
    gammas = []
    rows, cols = n, m
    for _ in range(N + 1):
        G = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        s = matcore.sigma_max(G)
        if s > 0:
            G = G * (sigma * rng.uniform(0.05, 1.0) / s)
        gammas.append(G)
        ins = matcore.defect_basis(G, tol)
        outs = matcore.defect_basis(G.conj().T, tol)
        rows, cols = outs.shape[1], ins.shape[1]
    return ChoiceSequence.from_gammas(gammas, tol)


@dataclass(frozen=True)
class SzegoResult:
    monic_polys: list
    norm_products: list


def szego_recursion(alphas: Sequence[complex], tol: Tolerances = DEFAULT_TOL) -> SzegoResult:
    """Monic OPUC ``Φ_{n+1}(z) = zΦ_n(z) - conj(α_n) Φ_n^*(z)`` (ascending coefficient lists)."""
    phi = np.array([1.0 + 0j])
    polys = [phi.tolist()]
    norms = []
    prod = 1.0
    for j, a in enumerate(alphas):
        a = complex(a)
        if abs(a) >= 1.0:
            raise NotVerblunsky(j, a)
        reversed_conj = np.conj(phi[::-1])
        nxt = np.zeros(phi.size + 1, dtype=complex)
        nxt[1:] += phi
        nxt[:-1] -= np.conj(a) * reversed_conj
        phi = nxt
        polys.append(phi.tolist())
        prod *= (1 - abs(a)) * (1 + abs(a))
        norms.append(prod)
    return SzegoResult(polys, norms)


def schur_function_from_moments(moments: Sequence[complex], tol: Tolerances = DEFAULT_TOL) -> MatSeries:
    """Schur function ``f = (F - 1) / (z (F + 1))`` with ``F = 1 + 2 sum_k c_k z^k``.

    ``moments`` are ``c_1..c_K``; the result has order ``K - 1``.
    """
    K = len(moments)
    if K == 0:
        raise ShapeMismatch("need at least one moment")
    F = np.zeros(K + 1, dtype=complex)
    F[0] = 1.0
    F[1:] = 2.0 * np.asarray(moments, dtype=complex)
    Fm1 = F.copy()
    Fm1[0] = 0.0
    Fp1 = F.copy()
    Fp1[0] = 2.0
    quotient = MatSeries(Fm1) @ series_inverse(MatSeries(Fp1), tol)
    return shift_div(quotient, tol)
