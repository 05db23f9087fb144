"""Exception types shared across modules."""


class DomainError(ValueError):
    """Input lies outside the interval or cube on which a formula is certified."""


class ArgumentError(ValueError):
    """Invalid construction parameter."""


class ConfigMismatch(ValueError):
    pass


class DenominatorNearZero(ArithmeticError):
    pass


class IntermediateEscape(DomainError):
    """An intermediate value left the margin-extended activation domain."""

    def __init__(self, layer, value, domain):
        super().__init__(f"layer {layer}: value {value:.6g} outside {domain}")
        self.layer = layer
        self.value = value
        self.domain = domain


class SizeCapExceeded(ValueError):
    pass


class SingularFit(ArithmeticError):
    pass


class DegenerateSeries(ValueError):
    pass
