class NumericalContractError(ArithmeticError):
    """A computed quantity violates a normalization or accuracy contract."""


class ModelContradictionError(ValueError):
    """An observed outcome has zero probability at every phase under the model."""
