"""Exception types shared across the toolkit.

Precondition violations raise plain ValueError; these classes cover runtime
failures of the numerical machinery itself.
"""


class IntegrationError(RuntimeError):
    """Time integration failed to converge or lost unitarity."""


class SearchError(RuntimeError):
    """A bracketing/window-growth search exhausted its configured cap."""


class NotApplicableError(RuntimeError):
    """The requested analysis does not apply to this problem (no perfect-success spike)."""


class DegenerateGroundStateError(RuntimeError):
    """Spectral gap below resolution; ground state ill-defined."""


class FitQualityError(RuntimeError):
    """A fit violated its required residual bound."""
