"""Exception and warning types raised across the package."""


class SisRewireError(Exception):
    """Base class for all package errors."""


class DegenerateState(SisRewireError):
    """Closure denominators (mean degree or susceptible count) vanish."""


class IntegrationFailure(SisRewireError):
    """A state coordinate became non-finite during integration."""


class MultipleRoots(SisRewireError):
    """More than one all-positive endemic equilibrium was found."""


class BracketInvalid(SisRewireError):
    """Bisection endpoints do not bracket the controllability switch."""


class NoAchievableTarget(SisRewireError):
    """No target mean degree is reachable with the given bounds."""


class UnknownScenario(SisRewireError):
    """Requested experiment scenario does not exist."""


class ConfigError(SisRewireError):
    """Invalid configuration document or parameter value."""


class OptimizationStalled(UserWarning):
    """Horizon optimizer hit its iteration cap before converging."""
