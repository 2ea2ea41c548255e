"""Exception taxonomy shared across the engine.

Invalid arguments raise the built-in ``ValueError`` everywhere. The classes
here cover the two failure families that need to stay distinguishable at the
command line: malformed files (exit code 1) and numeric blow-ups during
training (exit code 3).
"""


class MilvadError(Exception):
    """Base class for engine-specific errors."""


class NumericError(MilvadError):
    """A computation produced a non-finite value where one is not allowed."""


class BagFormatError(MilvadError):
    """Base class for problems with serialized feature bags or checkpoints."""


class BadMagicError(BagFormatError):
    """The file does not start with the expected magic tag."""


class UnsupportedVersionError(BagFormatError):
    """The file declares a format version this build cannot read."""


class HeaderChecksumError(BagFormatError):
    """The header checksum does not match the header bytes."""


class TruncatedFileError(BagFormatError):
    """The file ends before the declared payload is complete."""


class TrailingDataError(BagFormatError):
    """Extra bytes follow the declared payload."""


class DimensionMismatchError(BagFormatError):
    """Declared shapes disagree with each other or with the payload."""


class NonFiniteValueError(BagFormatError):
    """A stored feature value is NaN or infinite.

    Carries enough location detail to point at the offending scalar.
    """

    def __init__(self, video_id: str, stream: str, segment: int, column: int):
        self.video_id = video_id
        self.stream = stream
        self.segment = segment
        self.column = column
        super().__init__(
            f"non-finite value in video '{video_id}': {stream} features, "
            f"segment {segment}, column {column}"
        )
