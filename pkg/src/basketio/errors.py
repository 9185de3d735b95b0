"""Exception hierarchy for basketio."""


class BasketIOError(Exception):
    """Base class for every error raised by this package."""


# model
class MalformedOffsets(BasketIOError, ValueError):
    pass


class SchemaMismatch(BasketIOError, ValueError):
    pass


# precond
class BadStride(BasketIOError, ValueError):
    pass


class CountNotMultipleOf8(BasketIOError, ValueError):
    pass


# codec
class EmptyPayload(BasketIOError, ValueError):
    pass


class PayloadTooLarge(BasketIOError, ValueError):
    pass


class CodecFailure(BasketIOError):
    """The underlying compression library raised; ``codec`` names which one."""

    def __init__(self, codec, message):
        super().__init__(f"{codec!s}: {message}")
        self.codec = codec


class UnknownTag(BasketIOError, ValueError):
    pass


class TruncatedFrame(BasketIOError, ValueError):
    pass


class SizeMismatch(BasketIOError, ValueError):
    pass


class TotalSizeMismatch(BasketIOError, ValueError):
    pass


class InsufficientSamples(BasketIOError, ValueError):
    pass


class TrainingFailure(BasketIOError):
    pass


class MissingDictionary(BasketIOError):
    pass


# writer / reader
class InvalidSettings(BasketIOError, ValueError):
    pass


class BadMagic(BasketIOError, ValueError):
    pass


class CorruptFooter(BasketIOError, ValueError):
    pass


class DirectoryGap(CorruptFooter):
    pass
