"""Exception taxonomy shared by all engrasp modules."""


class EngraspError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(EngraspError):
    """An argument violates a documented precondition."""


class InvalidMesh(EngraspError):
    """Mesh data is structurally invalid (bad indices, degenerate faces)."""


class MeshFormatError(EngraspError):
    """A mesh file could not be parsed.

    Carries the source path plus a line number (text formats) or byte
    offset (binary formats) pointing at the failure.
    """

    def __init__(self, message, path=None, line=None, offset=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"byte {offset}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.path = path
        self.line = line
        self.offset = offset


class InvalidConfig(EngraspError):
    """A joint configuration names unknown joints or exceeds limits."""


class InvalidPulse(EngraspError):
    """An actuation pulse lies outside its channel's range."""


class InvalidRegion(EngraspError):
    """A sampling region is unusable (empty patch, bad parameters)."""


class InvalidStart(EngraspError):
    """The initial hand placement already collides with the environment."""


class InvalidTemplate(EngraspError):
    """A template fails its own stored invariants (e.g. not caged)."""


class CalibrationError(EngraspError):
    """Calibration input is empty or inconsistent."""


class ConfigError(EngraspError):
    """Run configuration is incomplete or refers to missing resources."""


class StreamError(EngraspError):
    """A streamed frame violates stream ordering guarantees."""


class VersionError(EngraspError):
    """A persisted document declares an unsupported schema version."""


class HashMismatchError(EngraspError):
    """A referenced resource no longer matches its recorded content hash."""


class IntegrityError(EngraspError):
    """Stored derived values disagree with recomputation from stored data."""
