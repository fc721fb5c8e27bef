"""Seeded uniform random streams with a fixed consumption contract.

Every run owns one `RandomStream`; replication k of a batch gets the stream
seeded with ``derive_seed(base_seed, k)`` so results never depend on
execution order or thread count.
"""

import numpy as np

from . import _kernels as _k

_MASK64 = (1 << 64) - 1


class RandomStream:
    """splitmix64 stream of float64 values strictly inside (0, 1)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = np.array([int(seed) & _MASK64], dtype=np.uint64)

    def uniform(self) -> float:
        return float(_k.next_uniform(self._state))

    def uniforms(self, count: int) -> np.ndarray:
        out = np.empty(int(count), dtype=np.float64)
        _k.fill_uniforms(out, self._state)
        return out

    def integer(self, upper: int) -> int:
        """Uniform integer in [0, upper), one draw."""
        return int(self.uniform() * upper)

    @property
    def state(self) -> int:
        """Current raw stream state (for consumption-contract checks)."""
        return int(self._state[0])


def derive_seed(base_seed: int, index: int) -> int:
    """Per-replication seed: a splitmix-style mix of base seed and index."""
    return int(_k.derive_seed(np.uint64(int(base_seed) & _MASK64),
                              np.uint64(int(index) & _MASK64)))


def derive_seeds(base_seed: int, start: int, count: int) -> np.ndarray:
    out = np.empty(int(count), dtype=np.uint64)
    _k.derive_seed_block(np.uint64(int(base_seed) & _MASK64), np.int64(start), out)
    return out
