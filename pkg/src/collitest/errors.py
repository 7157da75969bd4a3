"""Exception types shared across the package."""


class CapacityError(Exception):
    """A requested configuration cannot fit the declared resource budget."""


class ModelViolationError(Exception):
    """A simulated run broke one of its model's resource constraints."""


class ProtocolRefusedError(Exception):
    """A protocol was invoked on a topology that does not support it."""


class InvalidNetworkError(Exception):
    """The communication topology is malformed (for example disconnected)."""
