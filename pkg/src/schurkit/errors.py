"""Exception hierarchy shared by all schurkit modules."""


class SchurKitError(Exception):
    """Base class for domain errors raised by schurkit."""


class NotAContraction(SchurKitError):
    def __init__(self, sigma_max: float, what: str = "matrix"):
        self.sigma_max = float(sigma_max)
        super().__init__(f"{what} is not a contraction (sigma_max={self.sigma_max:.6g})")


class NotPSD(SchurKitError):
    def __init__(self, min_eig: float):
        self.min_eig = float(min_eig)
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue={self.min_eig:.6g})")


class NotHermitian(SchurKitError):
    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"matrix is not Hermitian (residual={self.residual:.3g})")


class ShapeMismatch(SchurKitError, ValueError):
    pass


class DimensionMismatch(SchurKitError, ValueError):
    pass


class SingularConstantTerm(SchurKitError):
    def __init__(self, residual: float):
        self.residual = float(residual)
        super().__init__(f"constant term is not invertible (residual={self.residual:.3g})")


class NonzeroConstantTerm(SchurKitError):
    def __init__(self, norm: float):
        self.norm = float(norm)
        super().__init__(f"series has a nonzero constant term (norm={self.norm:.3g})")


class NotSchurClass(SchurKitError):
    def __init__(self, n: int, sigma: float):
        self.n, self.sigma = n, float(sigma)
        super().__init__(f"Toeplitz truncation T_{n} is not contractive (sigma_max={self.sigma:.6g})")


class NotSchurSequence(SchurKitError):
    def __init__(self, n: int, sigma: float = float("nan")):
        self.n, self.sigma = n, float(sigma)
        super().__init__(f"coefficients are not a Schur sequence at level {n} (sigma_max={self.sigma:.6g})")


class NotVerblunsky(SchurKitError):
    def __init__(self, j: int, value: complex):
        self.j = j
        super().__init__(f"alpha_{j}={value!r} has modulus >= 1")


class NotSolvable(SchurKitError):
    def __init__(self, sigma_max: float):
        self.sigma_max = float(sigma_max)
        super().__init__(f"Schur problem is not solvable (sigma_max(T_N)={self.sigma_max:.6g})")


class RouteDisagreement(SchurKitError):
    def __init__(self, residual: float, what: str = ""):
        self.residual = float(residual)
        super().__init__(f"independent computation routes disagree{' (' + what + ')' if what else ''}: "
                         f"residual={self.residual:.3g}")


class InternalInconsistency(SchurKitError):
    pass


class PostconditionFailure(SchurKitError):
    pass


class DegenerateDefect(SchurKitError):
    pass


class VerificationFailure(SchurKitError):
    def __init__(self, residual: float, what: str = ""):
        self.residual = float(residual)
        super().__init__(f"verification failed{' (' + what + ')' if what else ''}: residual={self.residual:.3g}")


class ParseError(SchurKitError):
    def __init__(self, line: int, message: str):
        self.line, self.message = line, message
        super().__init__(f"line {line}: {message}")
