"""Exception hierarchy shared by all otterlab modules.

Everything raised for bad data or a violated contract derives from
:class:`OtterlabError`; the CLI maps those to exit code 2.
"""


class OtterlabError(Exception):
    """Base class for data and contract errors."""


class UnknownLanguageError(OtterlabError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown language"


class AlignmentError(OtterlabError):
    def __init__(self, src_path, src_count: int, tgt_path, tgt_count: int):
        self.src_count = src_count
        self.tgt_count = tgt_count
        super().__init__(
            f"line count mismatch: {src_path} has {src_count} lines, "
            f"{tgt_path} has {tgt_count} lines"
        )


class CorpusDecodeError(OtterlabError):
    def __init__(self, path, offset: int, reason: str):
        self.path = path
        self.offset = offset
        super().__init__(f"{path}: invalid UTF-8 at byte offset {offset} ({reason})")


class ParseError(OtterlabError):
    def __init__(self, path, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class AugmentError(OtterlabError):
    pass


class ModelFormatError(OtterlabError):
    pass


class OtterUndefinedError(OtterlabError):
    """No reference was identified as the target language, so the ratio has no denominator."""

    def __init__(self, numerator: int, denominator: int, total: int):
        self.numerator = numerator
        self.denominator = denominator
        self.total = total
        super().__init__(
            "OTTER undefined: no reference identified as target language "
            f"(numerator={numerator}, denominator={denominator}, examples={total})"
        )


class BackendError(OtterlabError):
    """Base for translation backend failures.

    ``stage`` is filled in by the pivot orchestrator ("first" or "second").
    """

    retryable = False

    def __init__(self, message: str, stage: str | None = None):
        self.message = message
        self.stage = stage
        super().__init__(message)

    def __str__(self) -> str:
        if self.stage:
            return f"[stage {self.stage}] {self.message}"
        return self.message


class CapabilityError(BackendError):
    pass


class TransportError(BackendError):
    retryable = True

    def __init__(self, message: str, attempts: int, stage: str | None = None):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempt(s))", stage)


class ProtocolError(BackendError):
    pass
