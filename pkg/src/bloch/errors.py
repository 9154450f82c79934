"""Exception hierarchy shared by all modules."""


class BlochError(Exception):
    """Base class for every error raised by the package."""


# lattice
class DegenerateLattice(BlochError, ValueError):
    pass


class ZeroBlochVector(BlochError, ValueError):
    pass


# mesh / bem
class MeshError(BlochError, ValueError):
    """Invalid or unreadable surface mesh."""


class ParseError(MeshError):
    pass


class OpenSurface(MeshError):
    pass


class InconsistentOrientation(MeshError):
    pass


class InvertedOrientation(MeshError):
    pass


class SubdivisionTooLarge(MeshError):
    pass


class MeshTooLarge(MeshError):
    pass


class SingularSystem(BlochError, ArithmeticError):
    pass


class NonUnitDirection(BlochError, ValueError):
    pass


# specfun
class DomainError(BlochError, ValueError):
    pass


class ResonantRadius(BlochError, ValueError):
    pass


class OrderOutOfRange(BlochError, ValueError):
    pass


# dispersion / cluster
class AsymmetricTensor(BlochError, ValueError):
    pass


class VolumeFractionTooLarge(BlochError, ValueError):
    pass


class NonPhysicalFrequency(BlochError, ValueError):
    pass


class MismatchedInputs(BlochError, ValueError):
    pass


# cli
class ConfigError(BlochError, ValueError):
    pass
