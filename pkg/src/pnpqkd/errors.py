"""Exception types raised by the simulator."""


class ParameterError(ValueError):
    """An argument or configuration field is outside its physical domain."""


class StateError(RuntimeError):
    """An operation was applied to an object in the wrong state."""


class SolverError(RuntimeError):
    """A solver precondition failed (e.g. the link is insecure at zero distance)."""


class ConfigError(ValueError):
    """A configuration file could not be read or parsed.

    ``line`` carries the 1-based line number when the problem is local to a line.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
