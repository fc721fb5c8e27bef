"""The learning engines behind a common interface.

Two schemes share the estimator machinery and the reward-path update:

* ``dca`` moves probability toward the current stochastic-estimate leader on
  every reward, and additionally, whenever the action holding the highest
  stochastic estimate changes, transfers (1 - mu) of the outgoing leader's
  probability to the incoming one. Early on the leader churns constantly and
  probabilities swing hard; once the estimates settle the churn stops and
  convergence is fast.
* ``seri`` is the reward-inaction baseline: the same reward-path update, no
  leader transfer, and penalties leave the probability vector untouched.

State lives in plain numpy arrays and every mutation goes through the
compiled kernels, so a run stepped from Python is bit-identical to the same
seed executed inside the fused batch runner.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as _k
from .env import Environment
from .estimator import Estimator
from .rng import RandomStream

SCHEMES = ("dca", "seri")


@dataclass(frozen=True)
class AutomatonConfig:
    """Scheme parameters.

    n is the resolution: the reward-path step is delta = 1/(r*n), so larger n
    means finer, slower, more accurate updates. gamma scales the estimator
    perturbation width. mu is the fraction of the outgoing leader's
    probability it keeps when the leader changes. k0 is the number of
    initialization samples per action.
    """

    r: int
    n: int
    gamma: float
    mu: float = 0.1
    k0: int = 10
    scheme: str = "dca"

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie strictly between 0 and 1")
        if self.k0 < 1:
            raise ValueError("k0 must be at least 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    @property
    def delta(self) -> float:
        return 1.0 / (self.r * self.n)


class StepEvent(NamedTuple):
    """What one iteration did.

    ``boosted`` is the action the reward-path update favoured (-1 on
    penalty). The two masses are the outgoing/incoming leader probabilities
    captured just before the attenuation transfer; they are only meaningful
    when ``leader_changed`` is True.
    """

    action: int
    feedback: int
    boosted: int
    leader_changed: bool
    old_leader: int
    leader: int
    old_leader_mass: float
    new_leader_mass: float
    renormalized: bool


def first_strategy_update(p, m: int, delta: float) -> np.ndarray:
    """Reward-path update: every action but m loses delta (floored at 0),
    m absorbs the slack. Returns a new vector."""
    out = np.array(p, dtype=np.float64, copy=True)
    _k.first_strategy(out, m, float(delta))
    return out


def second_strategy_update(p, old_leader: int, new_leader: int, mu: float):
    """Leader-change transfer: the incoming leader gains (1-mu) of the
    outgoing leader's probability. Returns (new vector, new leader)."""
    if new_leader == old_leader:
        raise ValueError("leader did not change; transfer must be skipped")
    out = np.array(p, dtype=np.float64, copy=True)
    _k.second_strategy(out, old_leader, new_leader, float(mu))
    return out, new_leader


class Automaton:
    """One live run: probability vector, estimator, leader, iteration count.

    Construction performs the initialization protocol: each action is played
    k0 times in index order, P is set uniform and the initial leader is a
    uniform random action (one extra draw). The iteration counter starts at
    r*k0 because those plays count as environment interactions.
    """

    __slots__ = ("config", "env", "probs", "estimator", "leader", "t", "_u_buf")

    def __init__(self, config: AutomatonConfig, env: Environment, rng: RandomStream):
        if config.r != env.r:
            raise ValueError(f"config.r={config.r} does not match environment r={env.r}")
        self.config = config
        self.env = env
        self.estimator = Estimator(config.r)
        self.probs = np.empty(config.r, dtype=np.float64)
        self._u_buf = np.empty(config.r, dtype=np.float64)
        self.leader = int(_k.initialize(env.probs, config.k0, self.probs,
                                        self.estimator.reward_counts,
                                        self.estimator.selection_counts,
                                        rng._state))
        self.t = config.r * config.k0

    def step(self, rng: RandomStream) -> StepEvent:
        cfg = self.config
        if cfg.scheme == "dca":
            (leader, action, feedback, boosted, changed, old_leader,
             old_mass, new_mass, renormalized) = _k.dca_step(
                self.env.probs, self.probs,
                self.estimator.reward_counts, self.estimator.selection_counts,
                self.leader, cfg.delta, float(cfg.gamma), cfg.mu,
                self._u_buf, rng._state)
            self.leader = int(leader)
            event = StepEvent(int(action), int(feedback), int(boosted),
                              bool(changed), int(old_leader), int(leader),
                              float(old_mass), float(new_mass), bool(renormalized))
        else:
            action, feedback, boosted = _k.seri_step(
                self.env.probs, self.probs,
                self.estimator.reward_counts, self.estimator.selection_counts,
                cfg.delta, float(cfg.gamma), self._u_buf, rng._state)
            event = StepEvent(int(action), int(feedback), int(boosted),
                              False, self.leader, self.leader, 0.0, 0.0, False)
        self.t += 1
        return event
