"""Exception types shared across the package."""


class RPDWError(Exception):
    """Base class for all package errors."""


class InfiniteNormError(RPDWError, ValueError):
    """A homogeneous norm with negative order met a nonzero zero mode."""


class DivergentIntegralError(RPDWError, ValueError):
    """An integrand fails the integrability condition of the requested norm."""


class QuadratureError(RPDWError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigError(RPDWError, ValueError):
    """One or more configuration constraints are violated.

    ``problems`` holds every violated constraint, not only the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
