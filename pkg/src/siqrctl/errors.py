"""Exception types raised across the package."""


class SiqrError(Exception):
    """Base class for every error raised by siqrctl."""


class ParameterError(SiqrError, ValueError):
    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid parameter {field!r}")


class NonFinite(ParameterError):
    def __init__(self, field):
        super().__init__(field, f"parameter {field!r} is not finite")


class NegativeParameter(ParameterError):
    def __init__(self, field):
        super().__init__(field, f"parameter {field!r} must be >= 0")


class ZeroMu(ParameterError):
    def __init__(self, field="mu"):
        super().__init__(field, "natural death rate mu must be > 0")


class ZeroAlpha(ParameterError):
    def __init__(self, field="alpha"):
        super().__init__(
            field, "alpha must be > 0 and gamma + mu + eta must be > 0"
        )


class ParameterWarning(UserWarning):
    """Parameters are admissible but produce unusual dynamics."""


class ShapeMismatch(SiqrError, ValueError):
    def __init__(self, a_shape, b_shape, op=""):
        self.shapes = (tuple(a_shape), tuple(b_shape))
        super().__init__(f"shape mismatch{' in ' + op if op else ''}: {tuple(a_shape)} vs {tuple(b_shape)}")


class NotSquare(SiqrError, ValueError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"matrix is not square: {self.shape}")


class NoConvergence(SiqrError, ArithmeticError):
    def __init__(self, iterations):
        self.iterations = iterations
        super().__init__(f"root iteration did not converge after {iterations} iterations")


class DegreeUnsupported(SiqrError, ValueError):
    def __init__(self, degree):
        self.degree = degree
        super().__init__(f"polynomial degree {degree} is not supported (1..4)")


class NonFiniteDerivative(SiqrError, ArithmeticError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"non-finite derivative encountered at t={t!r}")


class NotAnEquilibrium(SiqrError, ValueError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"point is not an equilibrium (|rhs|_inf = {residual:.3e})")


class PreconditionR0(SiqrError, ValueError):
    def __init__(self, r0):
        self.r0 = r0
        super().__init__(f"R0 = {r0:.6g} violates the precondition of this check")


class NotSymmetric(SiqrError, ValueError):
    def __init__(self, name="matrix"):
        self.name = name
        super().__init__(f"{name} is not symmetric")


class SingularR(SiqrError, ValueError):
    pass


class NotPositiveDefinite(SiqrError, ValueError):
    pass


class GridCoverage(SiqrError, ValueError):
    def __init__(self, horizon, covered):
        self.horizon = horizon
        self.covered = covered
        super().__init__(
            f"Riccati grid covers [0, {covered}] but the run needs [0, {horizon}]"
        )


class MissingControls(SiqrError, ValueError):
    pass


class ScenarioError(SiqrError):
    pass


class ParseError(ScenarioError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ScenarioError, ValueError):
    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid value for {field!r}")


class UnknownKey(ScenarioError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"unknown key {self.name!r}"


class IoError(SiqrError, OSError):
    def __init__(self, path, reason=""):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}" + (f": {reason}" if reason else ""))
