"""Seed-path addressed random streams.

One master seed governs a whole experiment.  Every logical consumer of
randomness addresses its own stream through a path of small integers,
for example ``(trial,)`` for a trial and ``(trial, player)`` for one
player inside that trial.  Distinct paths yield statistically
independent generators, and the mapping from ``(master_seed, path)`` to
the generator state is fixed, so results reproduce no matter in which
order (or on how many workers) the consumers run.

The convention used throughout the package:

* trial ``t`` of a scenario      -> path ``(t,)``
* player / batch / clique ``i``  -> path ``(t, i)``
* network node ``v`` (CONGEST)   -> path ``(t, v)``

Each path should have exactly one consumer, and that consumer must draw
from the generator in a fixed order.
"""
from __future__ import annotations

import numpy as np


class Stream:
    """A reproducible RNG stream identified by ``(master_seed, path)``."""

    __slots__ = ("master_seed", "path")

    def __init__(self, master_seed: int, path: tuple[int, ...] = ()):
        self.master_seed = int(master_seed)
        self.path = tuple(int(p) for p in path)

    def child(self, *indices: int) -> "Stream":
        """Stream addressed by this path extended with `indices`."""
        return Stream(self.master_seed, self.path + indices)

    def rng(self) -> np.random.Generator:
        """A fresh generator for this path.

        Calling twice returns generators in the same initial state, so a
        path must not be shared by two independent consumers.
        """
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))

    def label(self) -> tuple[int, ...]:
        """Provenance tuple ``(master_seed, *path)`` for trial records."""
        return (self.master_seed,) + self.path

    def __repr__(self) -> str:
        return f"Stream(master_seed={self.master_seed}, path={self.path})"
