"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class TopoclustError(Exception):
    code = "E_TOPOCLUST"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ParseError(TopoclustError):
    code = "E_PARSE"


class ValidationError(TopoclustError, ValueError):
    code = "E_INVALID"


class SizeMismatchError(ValidationError):
    code = "E_SIZE_MISMATCH"


class EmptyInputError(ValidationError):
    code = "E_EMPTY"
