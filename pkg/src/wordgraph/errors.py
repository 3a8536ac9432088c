"""Exception hierarchy shared by the library and the CLI."""


class WordGraphError(Exception):
    """Base class for all package errors."""


class ConfigError(WordGraphError):
    """Bad configuration: rules files, windowing parameters, CLI options."""


class DataError(WordGraphError):
    """Input data that cannot be analyzed (empty text, malformed manifest...)."""


class DocumentSkipped(WordGraphError):
    """A document produced no windows under the active short-text policy.

    Not a failure: the corpus runner lists it in the skip report.
    """
