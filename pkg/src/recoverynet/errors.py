"""Exception hierarchy shared across the package.

InputError covers everything caused by user-supplied data or configuration
(bad CSV rows, inconsistent datasets, malformed config files). The CLI maps
InputError to exit code 1 and any other exception to exit code 2.
"""


class InputError(Exception):
    """A problem with user-supplied inputs (files, config, alignment)."""


class IngestError(InputError):
    """Malformed or invalid rows in an input file; message carries line numbers."""


class DatasetError(InputError):
    """Cross-dataset inconsistency (unknown endpoints, missing panel rows)."""


class ConfigError(InputError):
    """Malformed run configuration or parameter file."""
