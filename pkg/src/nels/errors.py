"""Exception types shared across the package."""


class NelsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLabelError(NelsError, ValueError):
    """A sound-event label is empty or unusable."""


class InvalidDurationError(NelsError, ValueError):
    """A media duration is negative or otherwise nonsensical."""


class MetadataIncompleteError(NelsError):
    """A crawled item is missing or has malformed mandatory metadata."""


class SourceError(NelsError):
    """A media source failed; the operation may be retried."""


class UnsupportedUrlError(SourceError):
    """The configured source adapter cannot resolve the given URL."""


class InvalidAudioError(NelsError, ValueError):
    """Decoded audio is empty, has no sample rate, or cannot be processed."""


class ContractViolationError(NelsError):
    """An internal pipeline contract was broken (e.g. non-canonical input)."""


class ConfigurationError(NelsError, ValueError):
    """A configuration value or DSP parameter is out of its allowed range."""


class VocabularyError(NelsError, ValueError):
    """A class vocabulary violates uniqueness or dense-id constraints."""


class ManifestError(NelsError, ValueError):
    """A dataset manifest references unknown labels or is malformed."""


class TrainingError(NelsError):
    """Training preconditions are not met (e.g. fewer than two classes)."""


class ModelFormatError(NelsError):
    """A model file is missing the magic string or is structurally invalid."""


class SegmentNotFoundError(NelsError, KeyError):
    """An operation referenced a segment id that is not in the index."""


class IndexLogError(NelsError):
    """The index log contains a corrupt record.

    ``lineno`` is the 1-based line of the offending record.
    """

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EmbeddingFormatError(NelsError, ValueError):
    """An embedding file line could not be parsed.

    ``lineno`` is the 1-based line of the offending record.
    """

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class UndefinedSimilarityError(NelsError, ValueError):
    """Cosine similarity was requested for an all-zero vector."""
