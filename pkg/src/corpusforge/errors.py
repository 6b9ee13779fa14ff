"""Error types shared across the pipeline.

The HTTP layer maps these onto status codes (validation 400, auth 401,
permission 403, conflict 409); the CLI prints them and exits non-zero.
"""


class CorpusForgeError(Exception):
    """Base class for all pipeline errors."""


class InputError(CorpusForgeError):
    """Caller supplied an invalid value or referenced a missing object."""


class TrainingError(InputError):
    """Language-model training was asked to run on unusable data."""


class AuthError(CorpusForgeError):
    """Missing, unknown, or expired credentials."""


class Forbidden(CorpusForgeError):
    """Caller is authenticated but not allowed to act on this object."""


class ConflictError(CorpusForgeError):
    """The operation was already performed, or races a completed one."""


class ConfigError(CorpusForgeError):
    """Service or module configuration is unusable."""


class IntegrityError(CorpusForgeError):
    """Persisted state is corrupt or from an incompatible version."""


class RangeError(CorpusForgeError):
    """A computed quantity exceeds the supported range."""
