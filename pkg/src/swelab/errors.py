"""Exception taxonomy shared by every module.

The CLI maps these onto exit codes: configuration-family errors exit with 2,
runtime failures (NaN, I/O) with 3.
"""


class LabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LabError):
    """Invalid parameters: bad lattice spec, inadmissible partition, unstable step, ..."""


class AlignmentError(ConfigurationError):
    """A query or partition does not land exactly on the lattice."""


class DomainError(ConfigurationError):
    """A cell or point lies outside the simulated region."""


class PreconditionError(ConfigurationError):
    """An operation's structural precondition is violated (duplicate cells, uncoupled fields)."""


class DegenerateInputError(ConfigurationError):
    """Input degenerates the requested statistic (e.g. identically-zero noise coefficient)."""


class ConfigurationWarning(UserWarning):
    """Legal but statistically questionable configuration (e.g. too few replicates)."""


class SimulationError(LabError):
    """Numeric failure while running; carries the replicate seed for replay."""

    def __init__(self, message: str, seed: int | None = None):
        super().__init__(message)
        self.seed = seed
