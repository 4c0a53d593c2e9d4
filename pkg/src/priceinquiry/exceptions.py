class InputError(ValueError):
    """Invalid user-supplied data or parameters.

    ``field`` names the offending parameter when one can be identified.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConvergenceError(RuntimeError):
    """An iterative numerical routine exhausted its budget."""
