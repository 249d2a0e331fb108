"""Exception types shared across the package."""


class ThetaKitError(Exception):
    pass


class CompositionError(ThetaKitError, ValueError):
    """Raised when two morphisms are not composable."""


class MalformedError(ThetaKitError, ValueError):
    """Raised when a value violates its structural invariants."""


class GradeBoundError(ThetaKitError):
    """Raised when a computation needs elements beyond the requested grade bound."""


class SupportError(ThetaKitError, KeyError):
    """Raised when a presheaf is evaluated outside of its support."""

    def __str__(self):
        return Exception.__str__(self)
