"""Exception types shared across the toolkit."""


class LocaliserLabError(Exception):
    """Base class for all toolkit errors."""


class DimensionTooLarge(LocaliserLabError):
    """Dense-path operation requested above the dense dimension limit."""


class BoundaryEigenvalue(LocaliserLabError):
    """A spectral boundary collides with an eigenvalue.

    Carries the offending eigenvalue and its distance to the boundary.
    """

    def __init__(self, eigenvalue, distance, message=None):
        self.eigenvalue = eigenvalue
        self.distance = distance
        super().__init__(
            message
            or f"eigenvalue {eigenvalue} within {distance:.3e} of a spectral boundary"
        )


class IndexOutOfRange(LocaliserLabError):
    """Compression index set exceeds the matrix dimensions."""


class DimensionMismatch(LocaliserLabError):
    """Operands have incompatible shapes."""


class DefectTooLarge(LocaliserLabError):
    """Quasi-(idem)projection defect is not below 1/4."""


class SignIterationDiverged(LocaliserLabError):
    """Newton sign iteration failed to converge.

    Carries the residual trace of the iteration.
    """

    def __init__(self, residuals, message=None):
        self.residuals = list(residuals)
        super().__init__(
            message or f"sign iteration diverged after {len(self.residuals)} steps"
        )


class NonIntegralTrace(LocaliserLabError):
    """A projection trace is too far from an integer to round safely."""


class NotUnitary(LocaliserLabError):
    """Matrix fails the unitarity tolerance on its certified region."""


class HypothesisViolated(LocaliserLabError):
    """A certified check was invoked outside its hypothesis window."""


class SingularMatrix(LocaliserLabError):
    """Spectrum touches the zero tolerance window; signature undefined."""


class OddSignature(LocaliserLabError):
    """Localiser signature is odd; the half-signature is not an integer."""


class WindowViolated(LocaliserLabError):
    """Certification requested but eps + delta >= 1/400."""


class RankDecisionAmbiguous(LocaliserLabError):
    """Singular value gap too small to decide kernel dimensions."""


class TruncationTooSmall(LocaliserLabError):
    """Model truncation radius too small for the requested operation."""


class InvalidWeights(LocaliserLabError):
    """Trace weights must be strictly positive."""


class ConfigInvalid(LocaliserLabError):
    """Experiment configuration failed validation."""
