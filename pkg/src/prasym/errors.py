"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PrasymError(Exception):
    exit_code = 1


class ParameterError(PrasymError, ValueError):
    """Invalid user-supplied parameter (probability out of range, bad shape, ...)."""

    exit_code = 1


class StructuralError(PrasymError, ValueError):
    """The graph does not have the structure an operation needs (isolated vertex, empty graph)."""

    exit_code = 1


class SizeError(PrasymError, ValueError):
    """Input too large for a dense routine."""

    exit_code = 1


class ConvergenceError(PrasymError, RuntimeError):
    exit_code = 2


class InternalError(PrasymError, RuntimeError):
    exit_code = 2
