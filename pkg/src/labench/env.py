"""Stationary Bernoulli reward environments and the five benchmark presets."""

import numpy as np

from . import _kernels as _k
from .rng import RandomStream

# Standard 10-action benchmark presets. E1-E3 share a tail and differ only in
# how far the best action sits above the runner-up; E4 and E5 have duplicated
# non-optimal values.
PRESETS = {
    "E1": (0.65, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10),
    "E2": (0.60, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10),
    "E3": (0.55, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10),
    "E4": (0.70, 0.50, 0.30, 0.20, 0.40, 0.50, 0.40, 0.30, 0.50, 0.20),
    "E5": (0.10, 0.45, 0.84, 0.76, 0.20, 0.40, 0.60, 0.70, 0.50, 0.30),
}


class Environment:
    """Fixed per-action Bernoulli reward probabilities.

    Immutable after construction; safe to share across concurrent runs since
    responding only reads the probability vector and draws from the caller's
    private stream.
    """

    __slots__ = ("probs",)

    def __init__(self, probs):
        arr = np.asarray([float(v) for v in probs], dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("an environment needs at least two actions")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("reward probabilities must lie in [0, 1]")
        arr.setflags(write=False)
        self.probs = arr

    @property
    def r(self) -> int:
        return self.probs.shape[0]

    @property
    def optimal_index(self) -> int:
        # argmax with ties broken by lowest index
        return int(np.argmax(self.probs))

    def respond(self, action: int, rng: RandomStream) -> int:
        """Bernoulli feedback for one action; consumes exactly one draw."""
        if not 0 <= action < self.r:
            raise IndexError(f"action {action} out of range for r={self.r}")
        return int(_k.bernoulli(self.probs[action], rng._state))

    def __repr__(self):
        return f"Environment({list(self.probs)})"


def benchmark_environment(name: str) -> Environment:
    try:
        return Environment(PRESETS[name])
    except KeyError:
        valid = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown environment {name!r}; valid presets: {valid}") from None


def parse_probabilities(text: str) -> list[float]:
    """Parse newline- and/or comma-separated decimals; values must be in [0, 1]."""
    values = []
    for line in text.splitlines():
        for token in line.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                v = float(token)
            except ValueError:
                raise ValueError(f"not a decimal probability: {token!r}") from None
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"probability out of range [0, 1]: {v}")
            values.append(v)
    return values


def load_environment_file(path) -> Environment:
    with open(path, "r", encoding="utf-8") as fh:
        return Environment(parse_probabilities(fh.read()))
