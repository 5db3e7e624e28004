"""Exception types shared across the package."""


class ConeRungeError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteInput(ConeRungeError):
    """An input coefficient is NaN or infinite."""


class NotInCone(ConeRungeError):
    """The element does not lie in the quadratic cone."""


class NotRootSphere(ConeRungeError):
    """The element is not a square root of -1 inside the cone."""


class CharacterizationMismatch(ConeRungeError):
    """The two independent membership tests disagree far beyond tolerance.

    This indicates a broken product table or conjugation rule, not a
    borderline input, and is therefore raised loudly.
    """


class OutOfDomain(ConeRungeError):
    """A point lies over a plane location outside the stem's domain."""


class BadBasis(ConeRungeError):
    """A completion basis fails the anticommutation relations."""


class NotRealDenominator(ConeRungeError):
    """A^c*A has non-real components beyond tolerance."""


class ZeroDenominator(ConeRungeError):
    """The real denominator polynomial is identically zero, or an
    evaluation point sits on its zero set."""


class ResolutionTooLow(ConeRungeError):
    """Grid resolution below the supported minimum."""


class ThinFeature(ConeRungeError):
    """A shape is too small for the grid resolution to rasterize faithfully."""


class NotNested(ConeRungeError):
    """The smaller domain is not contained cellwise in the larger one."""


class ParityViolation(ConeRungeError):
    """(b1 - r) or (b1 + r) is odd for a symmetric component.

    The closed-form Betti numbers require these to be even; an odd value
    means rasterization destroyed the symmetric topology.
    """


class EulerMismatch(ConeRungeError):
    """Flood-fill hole count and Euler-characteristic hole count disagree."""


class DegreeTooLargeForSamples(ConeRungeError):
    """Least-squares fit would be underdetermined."""


class PoleInsideDomain(ConeRungeError):
    """A prescribed pole location lies inside the domain."""


class SchemaError(ConeRungeError):
    """Input JSON failed schema validation.

    ``pointer`` is a JSON pointer to the offending field.
    """

    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = message
