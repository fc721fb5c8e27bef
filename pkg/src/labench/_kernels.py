"""Compiled inner loops shared by the step-level API and the batch runners.

Everything operates on plain arrays plus an explicit 64-bit RNG state so the
exact same code drives a single traced step from Python and millions of fused
iterations inside a batch kernel. Keeping one implementation is what makes
"same seed => same trajectory" hold across both paths.

RNG: a splitmix64 stream. One stream per run. Uniform doubles are produced
strictly inside (0, 1) (bin centers of 2^52 equal bins), so open-interval
perturbations never touch their endpoints and `u < c` implements a Bernoulli
with exact behaviour at c = 0 and c = 1.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)

SCHEME_DCA = 0
SCHEME_SERI = 1


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def next_uniform(state):
    state[0] = state[0] + _GOLDEN
    z = mix64(state[0])
    return (np.float64(z >> np.uint64(12)) + 0.5) * (1.0 / 4503599627370496.0)


@njit(cache=True, nogil=True)
def fill_uniforms(out, state):
    for i in range(out.shape[0]):
        out[i] = next_uniform(state)


@njit(cache=True, nogil=True)
def derive_seed(base, index):
    # splitmix-style: jump the state by index+1 gammas, then finalize
    return mix64(base + (index + np.uint64(1)) * _GOLDEN)


@njit(cache=True, nogil=True)
def derive_seed_block(base, start, out):
    for k in range(out.shape[0]):
        out[k] = derive_seed(base, np.uint64(start + k))


@njit(cache=True, nogil=True)
def sample_action(p, state):
    # inverse CDF over indices in order; exactly one draw
    u = next_uniform(state)
    acc = 0.0
    for i in range(p.shape[0] - 1):
        acc += p[i]
        if u < acc:
            return i
    return p.shape[0] - 1


@njit(cache=True, nogil=True)
def bernoulli(prob, state):
    if next_uniform(state) < prob:
        return 1
    return 0


@njit(cache=True, nogil=True)
def argmax_first(values):
    best = 0
    for i in range(1, values.shape[0]):
        if values[i] > values[best]:
            best = i
    return best


@njit(cache=True, nogil=True)
def stochastic_estimates(w, z, gamma, out, state):
    # one fresh draw per action, in index order; perturbation strictly
    # inside (-gamma/z_i, +gamma/z_i)
    for i in range(w.shape[0]):
        half_width = gamma / z[i]
        out[i] = w[i] / z[i] + (2.0 * next_uniform(state) - 1.0) * half_width


@njit(cache=True, nogil=True)
def first_strategy(p, m, delta):
    # everyone but the estimate leader loses delta (floored at 0);
    # the leader absorbs whatever keeps the vector summing to 1
    total = 0.0
    for i in range(p.shape[0]):
        if i != m:
            v = p[i] - delta
            if v < 0.0:
                v = 0.0
            p[i] = v
            total += v
    p[m] = 1.0 - total


@njit(cache=True, nogil=True)
def second_strategy(p, old_leader, new_leader, mu):
    moved = p[old_leader]
    p[new_leader] = p[new_leader] + (1.0 - mu) * moved
    p[old_leader] = mu * moved


@njit(cache=True, nogil=True)
def renormalize_if_drifted(p):
    s = 0.0
    for i in range(p.shape[0]):
        s += p[i]
    if abs(s - 1.0) > 1e-12:
        for i in range(p.shape[0]):
            p[i] = p[i] / s
        return True
    return False


@njit(cache=True, nogil=True)
def initialize(c, k0, p, w, z, state):
    """Sample every action k0 times (index order), set P uniform, draw leader.

    Returns the initial leader index; consumes r*k0 + 1 draws.
    """
    r = c.shape[0]
    for i in range(r):
        w[i] = 0
        z[i] = 0
    for i in range(r):
        for _ in range(k0):
            fb = bernoulli(c[i], state)
            w[i] += fb
            z[i] += 1
    for i in range(r):
        p[i] = 1.0 / r
    return np.int64(next_uniform(state) * r)


@njit(cache=True, nogil=True)
def dca_step(c, p, w, z, leader, delta, gamma, mu, u_buf, state):
    """One full double-competitive iteration.

    Draw order is fixed: 1 (action) + 1 (feedback) + r (estimates, reward
    path only) + r (estimates for the leader comparison, always).

    Returns (leader, action, feedback, boosted, changed, old_leader,
    old_leader_mass, new_leader_mass, renormalized) where the two masses are
    the probabilities of the outgoing/incoming leader just before the
    attenuation transfer (inert when changed is False).
    """
    action = sample_action(p, state)
    feedback = bernoulli(c[action], state)
    w[action] += feedback
    z[action] += 1

    boosted = -1
    if feedback == 1:
        stochastic_estimates(w, z, gamma, u_buf, state)
        boosted = argmax_first(u_buf)
        first_strategy(p, boosted, delta)

    stochastic_estimates(w, z, gamma, u_buf, state)
    contender = argmax_first(u_buf)

    changed = contender != leader
    old_leader = leader
    old_mass = p[leader]
    new_mass = p[contender]
    renormalized = False
    if changed:
        second_strategy(p, leader, contender, mu)
        leader = contender
        renormalized = renormalize_if_drifted(p)
    return (leader, action, feedback, boosted, changed, old_leader,
            old_mass, new_mass, renormalized)


@njit(cache=True, nogil=True)
def seri_step(c, p, w, z, delta, gamma, u_buf, state):
    """One reward-inaction iteration: P moves on reward only, no leader logic.

    Draw order: 1 (action) + 1 (feedback) + r (estimates, reward path only).
    """
    action = sample_action(p, state)
    feedback = bernoulli(c[action], state)
    w[action] += feedback
    z[action] += 1

    boosted = -1
    if feedback == 1:
        stochastic_estimates(w, z, gamma, u_buf, state)
        boosted = argmax_first(u_buf)
        first_strategy(p, boosted, delta)
    return action, feedback, boosted


@njit(cache=True, nogil=True)
def run_single(c, scheme, delta, gamma, mu, k0, threshold, max_iter, seed):
    """Initialize and step until some p_i >= threshold or the iteration cap.

    Returns (converged_action or -1, iterations, final_z). Iterations count
    every environment interaction, initialization plays included.
    """
    r = c.shape[0]
    p = np.empty(r, np.float64)
    w = np.empty(r, np.int64)
    z = np.empty(r, np.int64)
    u_buf = np.empty(r, np.float64)
    state = np.empty(1, np.uint64)
    state[0] = seed

    leader = initialize(c, k0, p, w, z, state)
    t = np.int64(r) * np.int64(k0)

    best = argmax_first(p)
    if p[best] >= threshold:
        return best, t, z
    while t < max_iter:
        if scheme == SCHEME_DCA:
            leader = dca_step(c, p, w, z, leader, delta, gamma, mu, u_buf, state)[0]
        else:
            seri_step(c, p, w, z, delta, gamma, u_buf, state)
        t += 1
        best = argmax_first(p)
        if p[best] >= threshold:
            return best, t, z
    return -1, t, z


@njit(cache=True, nogil=True)
def run_chunk(c, scheme, delta, gamma, mu, k0, threshold, max_iter, seeds,
              out_action, out_iters, z_total):
    """Run one replication per seed, filling result slots by index."""
    for j in range(seeds.shape[0]):
        action, iters, z = run_single(c, scheme, delta, gamma, mu, k0,
                                      threshold, max_iter, seeds[j])
        out_action[j] = action
        out_iters[j] = iters
        for i in range(z.shape[0]):
            z_total[i] += z[i]
