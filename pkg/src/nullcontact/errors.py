"""Exception hierarchy shared by all modules."""


class NullContactError(Exception):
    """Base class for every error raised by this package."""


# numerics
class NumericsError(NullContactError, ArithmeticError):
    pass


class NonFiniteError(NumericsError):
    """An integrand, right-hand side or guard returned NaN or infinity."""


class BudgetError(NumericsError):
    """The step / subdivision budget was exhausted."""


class StiffError(NumericsError):
    """Step size collapsed below the floating point resolution of t."""


class NoBracketError(NumericsError):
    """A root was requested on an interval without a sign change."""


# geometry
class GeometryError(NullContactError, ValueError):
    pass


class NotNullError(GeometryError):
    pass


class NotFutureError(GeometryError):
    pass


# regions / boundary
class RegionError(NullContactError, ValueError):
    pass


class BadProfileError(RegionError):
    """A radius-squared profile violates one of its invariants.

    ``invariant`` names the failed condition so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class OutsideDomainError(RegionError):
    pass


class NotSmoothError(RegionError):
    """Operation needs a smooth boundary but the region is analytic-only."""


class NotOnBoundaryError(RegionError):
    pass


class DegenerateGradientError(RegionError):
    pass


# foliation / invariants
class LostSurfaceError(NullContactError, RuntimeError):
    """Newton projection onto the boundary failed to converge."""


class IllConditionedError(NullContactError, ValueError):
    pass


class MismatchError(NullContactError, RuntimeError):
    """Two independent computations of the same object disagree."""


class NotTransverseError(NullContactError, RuntimeError):
    pass


class InconsistentHolonomyError(NullContactError, RuntimeError):
    pass


class NotMonotoneError(NullContactError, ValueError):
    pass
