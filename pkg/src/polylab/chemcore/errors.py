"""Exception types raised by polymer parsing and featurization."""


class ChemError(Exception):
    """Base class for chemistry-layer failures."""


class PsmilesSyntaxError(ChemError):
    """Malformed polymer string (bad token, unclosed ring or branch, ...)."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ValenceError(ChemError):
    """Bonding impossible for an atom given its element and charge."""


class WildcardCountError(ChemError):
    """Repeat unit does not carry exactly two attachment points."""


class UnknownTokenError(ChemError):
    """Character span not coverable by the vocabulary."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EmbedFailure(ChemError):
    """3D embedding failed to reach a well-separated geometry."""


class LengthMismatchError(ChemError):
    """Fingerprints of different bit lengths were combined."""
