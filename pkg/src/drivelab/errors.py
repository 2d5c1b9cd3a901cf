"""Exception types shared across the package."""


class DrivelabError(Exception):
    """Base class for package errors."""


class InputError(DrivelabError, ValueError):
    """Rejected input (non-finite values, malformed structures)."""


class HorizonError(DrivelabError, ValueError):
    """A requested horizon exceeds what the data or plan provides."""


class FamilyError(DrivelabError, TypeError):
    """Action or policy family mismatch."""


class GenerationError(DrivelabError, RuntimeError):
    """Scenario generation failed after bounded retries."""


class TrainingDiverged(DrivelabError, RuntimeError):
    """Training loss became non-finite.

    Carries the last finite-loss checkpoint so callers can salvage it.
    """

    def __init__(self, message, last_good=None, step=None):
        super().__init__(message)
        self.last_good = last_good
        self.step = step


class ConfigError(DrivelabError, ValueError):
    """Invalid or unknown configuration content."""


class ManifestError(DrivelabError, RuntimeError):
    """A run manifest references missing or modified artifacts."""
