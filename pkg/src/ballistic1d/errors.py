"""Exception hierarchy shared by all modules."""


class Ballistic1DError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(Ballistic1DError, ValueError):
    pass


class OutOfBandError(InvalidParameterError):
    """Injected wave number outside the admissible momentum interval."""


class DegenerateEquationError(InvalidParameterError):
    """The fourth-order equation loses its leading coefficient (alpha ~ 0)."""


class InconsistentInjectionError(InvalidParameterError):
    pass


class ContractError(Ballistic1DError):
    """Caller-supplied flags or values contradict each other."""


class InvalidProfileError(InvalidParameterError):
    pass


class DomainError(InvalidParameterError):
    pass


class UnsupportedProfileError(InvalidParameterError):
    pass


class IntegrationError(Ballistic1DError):
    """The ODE integrator could not complete."""


class StiffnessError(IntegrationError):
    def __init__(self, segment, x, h):
        self.segment = segment
        self.x = x
        self.h = h
        super().__init__(
            f"step size underflow (h={h:.3e} nm) in segment {segment} at x={x:.9g} nm"
        )


class SingularSystemError(Ballistic1DError):
    """Boundary system is singular: the boundary value problem has either a
    unique solution or none, and here the matrix test says none."""

    def __init__(self, det, threshold, condition):
        self.det = det
        self.threshold = threshold
        self.condition = condition
        super().__init__(
            f"boundary matrix is singular: |det A| = {abs(det):.3e} <= {threshold:.3e} "
            f"(cond_1 = {condition:.3e}); existence and uniqueness both fail"
        )


class DynamicRangeError(Ballistic1DError):
    pass
