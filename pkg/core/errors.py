"""Exception types shared by every module.

Anything derived from ZeroPhoneError is a user-facing problem (bad input
file, unknown phoneme, impossible alignment ...) and makes the CLI exit
with status 1. Any other exception is treated as an internal error.
"""


class ZeroPhoneError(Exception):
    """Base class for all expected, user-facing errors."""


class ConfigError(ZeroPhoneError, ValueError):
    pass


class UsageError(ZeroPhoneError):
    pass


# --- Catalog / table parsing ---

class ParseError(ZeroPhoneError, ValueError):
    def __init__(self, message, path=None, line_no=None):
        self.path = path
        self.line_no = line_no
        where = ""
        if path is not None:
            where = f"{path}:{line_no}: " if line_no is not None else f"{path}: "
        super().__init__(where + message)


class UnknownAttribute(ParseError):
    def __init__(self, name, path=None, line_no=None):
        self.name = name
        super().__init__(f"unknown attribute '{name}'", path, line_no)


# --- Phonemes and inventories ---

class InvalidPhoneme(ZeroPhoneError, ValueError):
    pass


class UnknownPhoneme(ZeroPhoneError, ValueError):
    def __init__(self, phoneme, remainder=None, index=None):
        self.phoneme = phoneme
        self.remainder = phoneme if remainder is None else remainder
        self.index = index
        msg = f"cannot parse phoneme '{phoneme}'"
        if self.remainder != phoneme:
            msg += f" (unmatched remainder '{self.remainder}')"
        if index is not None:
            msg += f" at inventory position {index}"
        super().__init__(msg)


class DuplicatePhoneme(ZeroPhoneError, ValueError):
    def __init__(self, phoneme, index=None):
        self.phoneme = phoneme
        self.index = index
        super().__init__(f"duplicate phoneme '{phoneme}'" + (f" at position {index}" if index is not None else ""))


class EmptyAttributeSet(ZeroPhoneError, ValueError):
    pass


# --- Numerics / model ---

class ShapeMismatch(ZeroPhoneError, ValueError):
    pass


class MissingCache(ZeroPhoneError, RuntimeError):
    pass


class ImpossibleAlignment(ZeroPhoneError, ValueError):
    def __init__(self, message, utterance_id=None):
        self.utterance_id = utterance_id
        if utterance_id is not None:
            message = f"utterance '{utterance_id}': {message}"
        super().__init__(message)


class TooLarge(ZeroPhoneError, ValueError):
    pass


class UnknownLanguage(ZeroPhoneError, ValueError):
    def __init__(self, language):
        self.language = language
        super().__init__(f"no signature registered for language '{language}'")


# --- Files ---

class DataIOError(ZeroPhoneError, OSError):
    pass


class FormatVersionMismatch(ZeroPhoneError, ValueError):
    pass


class BadFeatureHeader(ParseError):
    pass


class TranscriptPhonemeOutsideInventory(ZeroPhoneError, ValueError):
    def __init__(self, utterance_id, phoneme, language):
        self.utterance_id = utterance_id
        self.phoneme = phoneme
        self.language = language
        super().__init__(
            f"utterance '{utterance_id}': phoneme '{phoneme}' is not in the '{language}' inventory"
        )


class EmptyCorpus(ZeroPhoneError, ValueError):
    pass


class InfeasibleSpec(ZeroPhoneError, ValueError):
    pass


# --- Evaluation ---

class EmptyReference(ZeroPhoneError, ValueError):
    pass


class MismatchedTestSet(ZeroPhoneError, ValueError):
    pass
