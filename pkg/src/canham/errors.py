"""Exception hierarchy shared by all modules."""


class CanhamError(Exception):
    """Base class for every error raised by this package."""


class SpecError(CanhamError, ValueError):
    """Malformed kernel specification or configuration."""


class DomainError(CanhamError, ValueError):
    """Argument outside the region where a formula is valid."""


class KinkPoint(DomainError):
    """Derivative requested at a point where K' jumps; split panels there."""

    def __init__(self, x):
        super().__init__(f"K' is discontinuous at x={x!r}")
        self.x = x


class InvalidInterval(DomainError):
    pass


class NearSingular(CanhamError, ArithmeticError):
    """det(I -/+ M) is numerically zero, i.e. an eigenvalue sits at +/-1."""

    def __init__(self, det, sign):
        super().__init__(f"|det(I {'+' if sign > 0 else '-'} M)| = {abs(det):.3e} below threshold")
        self.det = det
        self.sign = sign


class K5Violation(CanhamError):
    """One of +/-1 is (numerically) an eigenvalue of K[t]."""

    def __init__(self, t, detail=""):
        msg = f"I +/- K[t] is not invertible at t={t!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.t = t


class LinearSolveFailure(CanhamError, ArithmeticError):
    """Condition number of I -/+ M beyond the guard."""

    def __init__(self, t, cond):
        super().__init__(f"cond(I +/- M) = {cond:.3e} at t={t!r} exceeds guard")
        self.t = t
        self.cond = cond
