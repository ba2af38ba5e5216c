"""Exception hierarchy shared across the toolkit.

Every error carries a stable machine-readable ``code`` so CLI exit-code
mapping and HTTP error bodies stay consistent.
"""

from __future__ import annotations


class RevhistError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class DumpIOError(RevhistError):
    """Source file missing, unreadable, or truncated mid-stream."""

    code = "io-error"


class CodecMismatchError(RevhistError):
    """Magic bytes disagree with the declared compression codec."""

    code = "codec-mismatch"


class MalformedXmlError(RevhistError):
    """XML well-formedness violation, with the approximate byte offset."""

    code = "malformed-xml"

    def __init__(self, message: str, byte_offset: int = -1):
        super().__init__(message)
        self.byte_offset = byte_offset


class NotSeekableError(RevhistError):
    code = "not-seekable"


class MissingFieldError(RevhistError):
    """A revision element lacks a required child (id or timestamp)."""

    code = "missing-required-field"


class BadTimestampError(RevhistError):
    code = "bad-timestamp"


class FormatError(RevhistError):
    """Record cannot be serialized or parsed in the chosen partition format."""

    code = "format-error"


class UnknownKindError(RevhistError):
    code = "unknown-kind"


class IndexClosedError(RevhistError):
    code = "index-closed"


class CorruptPayloadError(RevhistError):
    code = "corrupt-payload"


class UnknownSegmentError(RevhistError):
    code = "unknown-segment"


class IndexCorruptError(RevhistError):
    """Stored index fails validation (bad checksum, version, or tokenizer)."""

    code = "index-corrupt"


class BadRangeError(RevhistError):
    code = "bad-range"


class UnknownFieldError(RevhistError):
    code = "unknown-field"


class ConfigError(RevhistError):
    code = "config-parse-error"


class OutputExistsError(RevhistError):
    """Refusing to overwrite prior outputs without an explicit force flag."""

    code = "output-exists"


class StageFailure(RevhistError):
    """A pipeline stage failed; earlier stage outputs are left intact."""

    code = "stage-failure"

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
