"""Exception types shared across the package."""


class MatplaneError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(MatplaneError):
    """Operands have incompatible shapes."""


class RankDeficient(MatplaneError):
    """A matrix that must have full column rank does not."""


class PoleError(MatplaneError):
    """A gamma-product factor was evaluated at a pole.

    ``factor_index`` is the index j of the offending factor in the
    product over j = 0 .. m-1.
    """

    def __init__(self, message, factor_index=None):
        super().__init__(message)
        self.factor_index = factor_index


class ExcludedOrder(MatplaneError):
    """The potential order lies in the excluded integer ladder."""


class UnsupportedOrder(MatplaneError):
    """The potential order matches neither evaluation branch."""


class OutOfRange(MatplaneError):
    """An integer parameter lies outside its admissible range."""


class DivergenceSuspected(MatplaneError):
    """Truncated integrals failed to Cauchy-converge within budget."""


class BudgetExceeded(MatplaneError):
    """A quadrature call would exceed the evaluation cap."""


class InjectivityViolated(MatplaneError):
    """Operation requires the injective regime n - k >= m."""


class WrongRegime(MatplaneError):
    """Operation was invoked in the wrong dimension regime."""


class BadSpec(MatplaneError):
    """A phantom or quadrature specification is invalid."""


class ConfigError(MatplaneError):
    """An experiment configuration is invalid.

    ``field`` names the offending configuration entry, e.g. ``dims.k``.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
