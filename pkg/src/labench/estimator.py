"""Per-action reward/selection counts and the two reward-probability estimates."""

import numpy as np

from . import _kernels as _k
from .rng import RandomStream


class Estimator:
    """Counts of rewards (per action) and selections (per action).

    Estimates are computed on demand from the counts, never cached. The
    maximum-likelihood estimate of action i is rewards[i] / selections[i];
    the stochastic variant adds an independent uniform perturbation on the
    open interval (-gamma/selections[i], +gamma/selections[i]), so its
    confidence band tightens as an action accumulates samples. Stochastic
    estimates may leave [0, 1]; they are only ever compared by argmax.
    """

    __slots__ = ("reward_counts", "selection_counts")

    def __init__(self, r: int):
        if r < 1:
            raise ValueError("need at least one action")
        self.reward_counts = np.zeros(r, dtype=np.int64)
        self.selection_counts = np.zeros(r, dtype=np.int64)

    @property
    def r(self) -> int:
        return self.reward_counts.shape[0]

    def record(self, action: int, feedback: int) -> None:
        """Fold one observation for the selected action into the counts."""
        if not 0 <= action < self.r:
            raise IndexError(f"action {action} out of range for r={self.r}")
        if feedback not in (0, 1):
            raise ValueError("feedback must be 0 or 1")
        self.reward_counts[action] += feedback
        self.selection_counts[action] += 1

    def deterministic(self) -> np.ndarray:
        if np.any(self.selection_counts == 0):
            raise ValueError("every action must have been selected at least once")
        return self.reward_counts / self.selection_counts

    def stochastic(self, gamma: float, rng: RandomStream) -> np.ndarray:
        """Perturbed estimates: one fresh draw per action, in index order."""
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        if np.any(self.selection_counts == 0):
            raise ValueError("every action must have been selected at least once")
        out = np.empty(self.r, dtype=np.float64)
        _k.stochastic_estimates(self.reward_counts, self.selection_counts,
                                float(gamma), out, rng._state)
        return out
