"""Exception types shared across the package.

The split mirrors how failures are reported to users: configuration
problems, malformed or inconsistent data, and numerical solver failures
are distinct classes so the CLI can map them to distinct exit codes.
"""


class ConfigError(Exception):
    """Invalid configuration: bad flag values, unknown config keys, etc."""


class DataError(Exception):
    """Malformed or inconsistent data: bad files, dimension conflicts,
    labels without prototypes, non-finite entries."""


class SolverError(Exception):
    """Numerical failure: singular eigenvalue pair, non-convergence."""
