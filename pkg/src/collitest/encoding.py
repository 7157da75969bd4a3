"""Bit-width conventions shared by planners and model simulators.

Messages carry a collision count in a fixed-width binary field: values
0 .. ceil(T)-1 are sent literally and one extra codepoint is the
overflow sentinel (any count >= T).  A stored sample from {1, .., n}
costs ceil(log2(n)) bits (at least one); the running collision counter
only ever needs to reach ceil(T) because the run stops there.
"""
from __future__ import annotations

import math


def sample_bit_width(n: int) -> int:
    """Bits to store one sample from a domain of size n (at least 1)."""
    if n < 1:
        raise ValueError("domain size must be >= 1")
    return max(1, math.ceil(math.log2(n)))


def message_bit_width(t: float) -> int:
    """Fixed message width: ceil(log2(ceil(T) + 2))."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    return math.ceil(math.log2(math.ceil(t) + 2))


def counter_bit_width(t: float) -> int:
    """Width of a collision counter that saturates at T: ceil(log2(ceil(T) + 1))."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    return max(1, math.ceil(math.log2(math.ceil(t) + 1)))
