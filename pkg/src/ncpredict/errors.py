"""Exception hierarchy shared by all modules."""


class PredictionError(ValueError):
    """Base class for invalid inputs to any ncpredict operation."""


class DimMismatch(PredictionError):
    pass


class NotNormalized(PredictionError):
    pass


class NotSelfAdjoint(PredictionError):
    pass


class InvalidDensityOperator(PredictionError):
    """Raised when a matrix fails self-adjointness, positivity or unit trace."""


class NotProjector(PredictionError):
    def __init__(self, index, defect):
        self.index = index
        self.defect = defect
        super().__init__(f"operator {index} is not a self-adjoint projector (defect {defect:.3g})")


class NotOrthogonal(PredictionError):
    def __init__(self, i, j, overlap):
        self.pair = (i, j)
        self.overlap = overlap
        super().__init__(f"projectors {i} and {j} are not orthogonal (||B_i B_j|| = {overlap:.3g})")


class NotInAlgebra(PredictionError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"operator is not in the measurement algebra (residual {residual:.3g})")


class ZeroProbabilityEvent(PredictionError):
    pass


class ZeroProbabilityBranch(PredictionError):
    pass


class AllWeightsZero(PredictionError):
    pass


class MissingLevel(PredictionError):
    pass


class IncompleteFamily(PredictionError):
    pass


class NonPositiveTime(PredictionError):
    pass


class CoincidentPoints(PredictionError):
    pass


class InvalidConfig(PredictionError):
    pass


class ContractViolation(RuntimeError):
    """An internal consistency check failed on otherwise valid input."""
