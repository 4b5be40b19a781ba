"""Exceptions raised across the laboratory.

Every error carries the process exit code the CLI reports for it.
"""


class LabError(Exception):
    exit_code = 1


class ValidationError(LabError):
    """Bad input: sizes, parameters, grids, configurations."""
    exit_code = 2


class NumericalError(LabError):
    """A computation could not be carried out reliably."""
    exit_code = 3


class ComparisonFailure(LabError):
    exit_code = 4


class InvalidSizeError(ValidationError):
    pass


class InvalidNeighborhoodError(ValidationError):
    pass


class InvalidParameterError(ValidationError):
    pass


class SamplingGridError(ValidationError):
    pass


class AliasingError(ValidationError):
    pass


class AlignmentError(ValidationError):
    pass


class NotCirculantError(ValidationError):
    pass


class NearDefectiveMatrixError(NumericalError):
    def __init__(self, mode_label, residual):
        self.mode_label = mode_label
        self.residual = residual
        super().__init__(f"Eigenresidual {residual:.3e} for mode {mode_label} exceeds the refinement limit; "
                         f"K looks near-defective, use expm_apply instead of the eigenmode expansion")


class MagnitudeOverflowError(NumericalError):
    pass


class IllConditionedBasisError(NumericalError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, time):
        self.time = time
        super().__init__(f"Non-finite phase encountered at t = {time:.6g} s")


class DegenerateReconstructionError(NumericalError):
    pass


class UndefinedArgumentError(NumericalError):
    def __init__(self, index, time):
        self.index = index
        self.time = time
        super().__init__(f"Reconstructed state vanishes at oscillator {index} (t = {time:.6g} s); its phase is undefined")


class MissingRunFilesError(ValidationError):
    pass
