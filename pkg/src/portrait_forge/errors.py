"""Exception types shared across the package."""


class PortraitForgeError(Exception):
    """Base class for all domain errors raised by this package."""


class PortraitParseError(PortraitForgeError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


class PreconditionError(PortraitForgeError):
    """An operation was called on input that fails its stated precondition."""


class MapInvariantError(PortraitForgeError):
    """A combinatorial map failed a structural invariant."""


class SurgeryError(PortraitForgeError):
    """A map surgery was requested with invalid arguments."""


class ConstructionError(PortraitForgeError):
    """An internal assertion of the subdivision construction failed.

    These indicate either invalid input that slipped past validation or an
    implementation bug; they are never expected on valid portraits.
    """


class WitnessError(PortraitForgeError):
    """A Levy-exclusion witness could not be produced or verified."""


class RoseError(PortraitForgeError):
    """The rose-cover construction could not be completed as demanded."""


class CapExceeded(PortraitForgeError):
    """A configured resource cap (dart count, enumeration size) was hit."""
