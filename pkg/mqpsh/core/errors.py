from typing import Any, Optional


class MqpshError(Exception):
    """Base class for every error the toolkit raises on purpose."""

    exit_code = 1


class InputError(MqpshError, ValueError):
    """Rejected input: NaN, +inf, wrong shapes, bad parameters."""


class GridError(InputError):
    pass


class DimensionError(InputError):
    pass


class KernelError(InputError):
    pass


class UnboundedFieldError(InputError):
    pass


class NonSmoothPointError(MqpshError):
    """A finite-difference stencil hit NEG_INF or a kink."""

    def __init__(self, message: str, point: Optional[Any] = None, node: Optional[int] = None):
        super().__init__(message)
        self.point = point
        self.node = node

    def at_node(self, node: int) -> "NonSmoothPointError":
        return NonSmoothPointError(f"{self} (node {node})", point=self.point, node=node)


class PreconditionError(MqpshError):
    pass


class ConfigError(MqpshError):
    """Scenario could not be parsed, validated or resolved."""

    def __init__(self, message: str, location: Optional[str] = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class AssertionFailed(MqpshError):
    """A scenario assertion failed; carries the first witness."""

    exit_code = 2

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness
