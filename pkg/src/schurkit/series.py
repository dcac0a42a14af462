"""Truncated power series with matrix coefficients and the Möbius map.

A :class:`MatSeries` of order ``K`` stores ``C_0 .. C_K`` (all the same shape)
in a ``(K+1, rows, cols)`` complex array.  Every operation is closed under
truncation: nothing beyond degree ``K`` is ever read or produced.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import matcore
from .errors import NonzeroConstantTerm, ShapeMismatch, SingularConstantTerm
from .matcore import DEFAULT_TOL, Tolerances


class MatSeries:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(-1, 1, 1)
        if c.ndim != 3 or c.shape[0] == 0:
            raise ShapeMismatch(f"coefficients must form a (K+1, r, c) array, got {c.shape}")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_list(cls, mats: Sequence, rows: int | None = None, cols: int | None = None) -> "MatSeries":
        mats = [matcore.cmat(m) for m in mats]
        if not mats:
            raise ShapeMismatch("need at least one coefficient")
        shape = mats[0].shape
        if any(m.shape != shape for m in mats):
            raise ShapeMismatch("coefficients have different shapes")
        if rows is not None and shape != (rows, cols):
            raise ShapeMismatch(f"expected {rows}x{cols} coefficients, got {shape}")
        return cls(np.stack(mats))

    @classmethod
    def zeros(cls, rows: int, cols: int, order: int) -> "MatSeries":
        return cls(np.zeros((order + 1, rows, cols), dtype=complex))

    @classmethod
    def constant(cls, M, order: int) -> "MatSeries":
        M = matcore.cmat(M)
        c = np.zeros((order + 1,) + M.shape, dtype=complex)
        c[0] = M
        return cls(c)

    @classmethod
    def identity(cls, n: int, order: int) -> "MatSeries":
        return cls.constant(np.eye(n), order)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coeffs[k]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __repr__(self) -> str:
        return f"MatSeries(order={self.order}, shape={self.shape})"

    def truncate(self, order: int) -> "MatSeries":
        if order > self.order:
            raise ShapeMismatch(f"cannot extend order {self.order} to {order}")
        return MatSeries(self.coeffs[: order + 1])

    def tilde(self) -> "MatSeries":
        """Coefficients of ``Θ*(conj λ)``: each coefficient replaced by its adjoint."""
        return MatSeries(np.conj(np.swapaxes(self.coeffs, 1, 2)))

    def times_lambda(self) -> "MatSeries":
        """``λ·X`` truncated at the same order (top coefficient dropped)."""
        c = np.zeros_like(self.coeffs)
        c[1:] = self.coeffs[:-1]
        return MatSeries(c)

    def left(self, M) -> "MatSeries":
        return MatSeries(np.einsum("ij,kjl->kil", matcore.cmat(M), self.coeffs))

    def right(self, M) -> "MatSeries":
        return MatSeries(np.einsum("kij,jl->kil", self.coeffs, matcore.cmat(M)))

    def __add__(self, other: "MatSeries") -> "MatSeries":
        return series_add(self, other)

    def __sub__(self, other: "MatSeries") -> "MatSeries":
        _same_frame(self, other)
        return MatSeries(self.coeffs - other.coeffs)

    def __neg__(self) -> "MatSeries":
        return MatSeries(-self.coeffs)

    def __matmul__(self, other: "MatSeries") -> "MatSeries":
        return series_mul(self, other)

    def max_abs_diff(self, other: "MatSeries") -> float:
        _same_frame(self, other)
        if self.coeffs.size == 0:
            return 0.0
        return float(np.max(np.abs(self.coeffs - other.coeffs)))

    def to_json(self) -> dict:
        from .jsonio import encode_cmatrix
        return {"order": self.order, "coeffs": [encode_cmatrix(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "MatSeries":
        from .jsonio import decode_cmatrix
        s = cls.from_list([decode_cmatrix(c) for c in obj["coeffs"]])
        if "order" in obj and int(obj["order"]) != s.order:
            raise ShapeMismatch("declared order does not match coefficient count")
        return s


def _same_frame(a: MatSeries, b: MatSeries):
    if a.order != b.order:
        raise ShapeMismatch(f"truncation orders differ ({a.order} vs {b.order})")
    if a.shape != b.shape:
        raise ShapeMismatch(f"coefficient shapes differ ({a.shape} vs {b.shape})")


def series_add(a: MatSeries, b: MatSeries) -> MatSeries:
    _same_frame(a, b)
    return MatSeries(a.coeffs + b.coeffs)


def series_mul(a: MatSeries, b: MatSeries) -> MatSeries:
    """Cauchy product ``c_k = sum_{i+j=k} a_i b_j`` truncated at the common order."""
    if a.order != b.order:
        raise ShapeMismatch(f"truncation orders differ ({a.order} vs {b.order})")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape} coefficients")
    K = a.order
    out = np.zeros((K + 1, a.shape[0], b.shape[1]), dtype=complex)
    for k in range(K + 1):
        out[k] = np.einsum("irs,ist->rt", a.coeffs[: k + 1], b.coeffs[k::-1])
    return MatSeries(out)


def series_inverse(a: MatSeries, tol: Tolerances = DEFAULT_TOL) -> MatSeries:
    """Multiplicative inverse, ``b_0 = a_0^{-1}``, ``b_k = -a_0^{-1} sum_{j=1..k} a_j b_{k-j}``."""
    r, c = a.shape
    if r != c:
        raise ShapeMismatch(f"only square series can be inverted, got {a.shape}")
    a0 = a.coeffs[0]
    a0inv = matcore.pinv(a0, tol)
    res = matcore.opnorm(a0 @ a0inv - np.eye(r))
    if res > tol.match_tol:
        raise SingularConstantTerm(res)
    K = a.order
    b = np.zeros_like(a.coeffs)
    b[0] = a0inv
    for k in range(1, K + 1):
        acc = np.einsum("irs,ist->rt", a.coeffs[1: k + 1], b[k - 1:: -1][:k])
        b[k] = -a0inv @ acc
    return MatSeries(b)


def shift_div(a: MatSeries, tol: Tolerances = DEFAULT_TOL) -> MatSeries:
    """Divide by ``λ``: requires a vanishing constant term, lowers the order by one."""
    n0 = matcore.opnorm(a.coeffs[0])
    if n0 > tol.match_tol:
        raise NonzeroConstantTerm(n0)
    if a.order == 0:
        raise ShapeMismatch("cannot divide an order-0 series by λ")
    return MatSeries(a.coeffs[1:])


def moebius_apply(S, X: MatSeries, tol: Tolerances = DEFAULT_TOL,
                  in_basis: np.ndarray | None = None,
                  out_basis: np.ndarray | None = None) -> MatSeries:
    """Truncated series of ``S + D_{S*} X (I + S* X)^{-1} D_S``.

    ``X`` acts from ``D_S``-coordinates to ``D_{S*}``-coordinates; the bases
    default to :func:`matcore.defect_basis` of ``S`` and ``S*``.
    """
    S = matcore.cmat(S)
    Vi = matcore.defect_basis(S, tol) if in_basis is None else in_basis
    Vo = matcore.defect_basis(S.conj().T, tol) if out_basis is None else out_basis
    p, q = Vi.shape[1], Vo.shape[1]
    if X.shape != (q, p):
        raise ShapeMismatch(f"X must be {q}x{p} on defect coordinates, got {X.shape}")
    K = X.order
    Eo = matcore.defect(S.conj().T, tol) @ Vo            # n x q
    Ei = Vi.conj().T @ matcore.defect(S, tol)            # p x m
    Sstar = Vi.conj().T @ S.conj().T @ Vo                # p x q
    inner = MatSeries.identity(p, K) + X.left(Sstar)
    core = X @ series_inverse(inner, tol)
    return MatSeries.constant(S, K) + core.left(Eo).right(Ei)
