"""
Error hierarchy for the optomech package.

Every exception carries the process exit code the CLI reports for it:
- 2: configuration or usage problems (bad file, bad field, empty sweep)
- 3: numerical failures (unstable kernel, singular solve, non-convergence)
"""


class OptomechError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(OptomechError):
    """Parameter file could not be parsed or validated."""

    exit_code = 2


class ParameterError(ConfigError):
    """A physical parameter violates its type invariant."""


class UsageError(OptomechError):
    """Invalid command-line request (empty range, bad option value)."""

    exit_code = 2


class NumericalError(OptomechError):
    """A numerical routine could not produce a trustworthy result."""

    exit_code = 3


class NoConvergence(NumericalError):
    pass


class DegenerateInput(NumericalError):
    pass


class EigenFailure(NumericalError):
    pass


class UnstableSystem(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class UnknownMode(NumericalError):
    pass


class NegativeDiscriminant(NumericalError):
    pass


class IllPosedGrid(NumericalError):
    pass


class UnstableScheme(NumericalError):
    pass
