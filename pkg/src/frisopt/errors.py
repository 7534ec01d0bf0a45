class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class DegenerateChannelError(ArithmeticError):
    """The effective channel vanishes, so no beam direction is defined."""


class InstanceTooLargeError(RuntimeError):
    """Exhaustive enumeration would exceed the configured work guard."""


class ConfigError(ValueError):
    """Malformed or unknown experiment configuration."""
