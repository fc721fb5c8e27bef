"""Acceptance suite: reproduction targets and always-on behavioural checks.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion. The reproduction criteria run 25,000 replications per cell against
frozen reference statistics; tolerances are fixed here, nothing is calibrated
at run time.
"""

import numpy as np
import pytest

from labench.automata import Automaton, AutomatonConfig
from labench.cli import main as cli_main
from labench.env import Environment, benchmark_environment
from labench.estimator import Estimator
from labench.experiment import (BEST_PARAMS, DCA_MATCHED_PARAMS, run_batch,
                                selection_histogram)
from labench.rng import RandomStream, derive_seed

REPS = 25_000
BASE_SEED = 20260811
PARALLELISM = 2
ENV_NAMES = ("E1", "E2", "E3", "E4", "E5")

REFERENCE_MEAN_ITERATIONS = {
    "dca": {"E1": 377, "E2": 664, "E3": 2134, "E4": 299, "E5": 633},
    "seri": {"E1": 426, "E2": 834, "E3": 2540, "E4": 325, "E5": 729},
}
REFERENCE_ACCURACY = {
    "dca": {"E1": 0.998, "E2": 0.997, "E3": 0.996, "E4": 0.999, "E5": 0.998},
    "seri": {"E1": 0.997, "E2": 0.996, "E3": 0.995, "E4": 0.998, "E5": 0.997},
}
REFERENCE_IMPROVEMENT = {"E2": 24.10, "E3": 21.65, "E4": 13.23, "E5": 20.16}


def check(name, ok, detail=""):
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}"
          f"{(' | ' + detail) if detail else ''}")
    assert ok, f"{name} failed: {detail}"


@pytest.fixture(scope="module")
def best_sweep():
    results = {}
    for scheme in ("dca", "seri"):
        for name in ENV_NAMES:
            env = benchmark_environment(name)
            n, gamma = BEST_PARAMS[scheme][name]
            config = AutomatonConfig(r=env.r, n=n, gamma=gamma, scheme=scheme)
            results[(scheme, name)] = run_batch(config, env, REPS,
                                                base_seed=BASE_SEED,
                                                parallelism=PARALLELISM)
    return results


@pytest.fixture(scope="module")
def matched_sweep():
    results = {}
    for name in ENV_NAMES:
        env = benchmark_environment(name)
        n, gamma = DCA_MATCHED_PARAMS[name]
        config = AutomatonConfig(r=env.r, n=n, gamma=gamma, scheme="dca")
        results[name] = run_batch(config, env, REPS, base_seed=BASE_SEED,
                                  parallelism=PARALLELISM)
    return results


def test_criterion_1_headline_speed_e1(best_sweep):
    dca = best_sweep[("dca", "E1")].mean_iterations
    seri = best_sweep[("seri", "E1")].mean_iterations
    ok = abs(dca - 377) <= 0.10 * 377 and abs(seri - 426) <= 0.10 * 426
    check("mean-iterations-e1-pair", ok,
          f"dca {dca:.1f} (ref 377), seri {seri:.1f} (ref 426)")


def test_criterion_2_mean_iterations_all_environments(best_sweep):
    failures = []
    for scheme in ("dca", "seri"):
        for name in ENV_NAMES:
            measured = best_sweep[(scheme, name)].mean_iterations
            reference = REFERENCE_MEAN_ITERATIONS[scheme][name]
            if abs(measured - reference) > 0.10 * reference:
                failures.append(f"{scheme}/{name}: {measured:.1f} vs {reference}")
    check("mean-iterations-full-sweep", not failures, "; ".join(failures) or
          "all 10 cells within 10%")


def test_criterion_3_accuracy_all_environments(best_sweep):
    failures = []
    for scheme in ("dca", "seri"):
        for name in ENV_NAMES:
            measured = best_sweep[(scheme, name)].accuracy
            reference = REFERENCE_ACCURACY[scheme][name]
            if abs(measured - reference) > 0.004:
                failures.append(f"{scheme}/{name}: {measured:.4f} vs {reference}")
    check("accuracy-full-sweep", not failures, "; ".join(failures) or
          "all 10 cells within 0.004")


def test_criterion_4_speed_improvement_at_matched_accuracy(best_sweep, matched_sweep):
    failures = []
    details = []
    for name in ENV_NAMES:
        dca = matched_sweep[name].mean_iterations
        seri = best_sweep[("seri", name)].mean_iterations
        improvement = 100.0 * (seri - dca) / seri
        details.append(f"{name} {improvement:.2f}%")
        if name == "E1":
            if improvement < 15.0:
                failures.append(f"E1 improvement {improvement:.2f}% < 15%")
        elif abs(improvement - REFERENCE_IMPROVEMENT[name]) > 6.0:
            failures.append(f"{name}: {improvement:.2f}% vs "
                            f"{REFERENCE_IMPROVEMENT[name]}%")
    check("improvement-vs-baseline", not failures,
          "; ".join(failures) or " ".join(details))


def test_criterion_5a_probability_vector_invariant():
    fuzz = np.random.default_rng(2718)
    steps_done = 0
    violations = 0
    while steps_done < 1_000_000:
        r = int(fuzz.integers(2, 12))
        env = Environment(fuzz.uniform(0.02, 0.98, size=r))
        scheme = "dca" if fuzz.integers(0, 2) == 0 else "seri"
        config = AutomatonConfig(r=r, n=int(fuzz.integers(1, 60)),
                                 gamma=float(fuzz.uniform(0, 12)),
                                 mu=float(fuzz.uniform(0.05, 0.95)),
                                 k0=int(fuzz.integers(1, 3)), scheme=scheme)
        rng = RandomStream(int(fuzz.integers(0, 2**63)))
        automaton = Automaton(config, env, rng)
        for _ in range(1000):
            automaton.step(rng)
            p = automaton.probs
            if abs(p.sum() - 1.0) >= 1e-9 or p.min() < 0.0 or p.max() > 1.0:
                violations += 1
        steps_done += 1000
    check("probability-invariants", violations == 0,
          f"{steps_done} fuzzed steps, {violations} violations")


def test_criterion_5b_attenuation_exact_on_every_leader_change():
    env = benchmark_environment("E1")
    config = AutomatonConfig(r=10, n=13, gamma=6, scheme="dca")
    events = 0
    bad = 0
    for k in range(1000):
        rng = RandomStream(derive_seed(77, k))
        automaton = Automaton(config, env, rng)
        while automaton.probs.max() < 0.999 and automaton.t < 100_000:
            ev = automaton.step(rng)
            if ev.leader_changed:
                events += 1
                exact = (automaton.probs[ev.old_leader] == 0.1 * ev.old_leader_mass
                         and automaton.probs[ev.leader] ==
                         ev.new_leader_mass + 0.9 * ev.old_leader_mass
                         and not ev.renormalized)
                bad += not exact
    check("attenuation-events", events > 0 and bad == 0,
          f"{events} leader changes across 1000 runs, {bad} inexact")


def test_criterion_5c_reward_inaction_is_bitwise():
    env = benchmark_environment("E1")
    config = AutomatonConfig(r=10, n=16, gamma=8, scheme="seri")
    penalties = 0
    bad = 0
    for k in range(20):
        rng = RandomStream(derive_seed(31, k))
        automaton = Automaton(config, env, rng)
        for _ in range(500):
            before = automaton.probs.copy()
            ev = automaton.step(rng)
            if ev.feedback == 0:
                penalties += 1
                bad += not np.array_equal(before, automaton.probs)
    check("reward-inaction", penalties > 0 and bad == 0,
          f"{penalties} penalty steps, {bad} changed the vector")


def test_criterion_5d_ablation_equivalence():
    env = Environment([1.0, 0.0])
    dca_cfg = AutomatonConfig(r=2, n=8, gamma=0.0, scheme="dca")
    seri_cfg = AutomatonConfig(r=2, n=8, gamma=0.0, scheme="seri")
    init_seed = next(s for s in range(100)
                     if Automaton(dca_cfg, env, RandomStream(s)).leader == 0)
    dca = Automaton(dca_cfg, env, RandomStream(init_seed))
    seri = Automaton(seri_cfg, env, RandomStream(init_seed))
    identical = np.array_equal(dca.probs, seri.probs)
    stray_changes = 0
    for t in range(1000):
        step_seed = derive_seed(4242, t)
        ev = dca.step(RandomStream(step_seed))
        seri.step(RandomStream(step_seed))
        stray_changes += ev.leader_changed
        identical = identical and np.array_equal(dca.probs, seri.probs)
    check("ablation-equivalence", identical and stray_changes == 0,
          f"1000 aligned steps, leader changes={stray_changes}")


def test_criterion_5e_estimator_perturbation_bounds():
    rng = RandomStream(1618)
    feed = np.random.default_rng(5)
    est = Estimator(4)
    est.selection_counts[:] = (1, 3, 10, 100)
    est.reward_counts[:] = (1, 2, 4, 37)
    gamma = 6.0
    violations = 0
    for call in range(1_000_000):
        if call % 1000 == 999:
            est.record(int(feed.integers(0, 4)), int(feed.integers(0, 2)))
        bound = gamma / est.selection_counts
        deviation = np.abs(est.stochastic(gamma, rng) - est.deterministic())
        violations += int(np.any(deviation >= bound))
    check("estimator-bounds", violations == 0,
          f"1e6 calls, {violations} outside the open interval")


def test_criterion_6_batch_csv_byte_identical(tmp_path):
    args = ["batch", "--scheme", "dca", "seri", "--env", "E1", "--n", "13",
            "--gamma", "6", "--reps", "2000", "--seed", "606"]
    outs = [tmp_path / f"{i}.csv" for i in range(3)]
    codes = [cli_main(args + ["--parallelism", par, "--out", str(path)])
             for par, path in zip(("1", "1", "8"), outs)]
    blobs = [p.read_bytes() for p in outs]
    ok = codes == [0, 0, 0] and blobs[0] == blobs[1] == blobs[2]
    check("csv-determinism", ok,
          "repeat run and parallelism 1 vs 8 byte-identical")


def test_criterion_7_exploration_share(best_sweep):
    shares = {}
    for scheme in ("dca", "seri"):
        env = benchmark_environment("E1")
        n, gamma = BEST_PARAMS[scheme]["E1"]
        config = AutomatonConfig(r=10, n=n, gamma=gamma, scheme=scheme)
        summary = run_batch(config, env, 10_000, base_seed=9090,
                            parallelism=PARALLELISM)
        shares[scheme] = 100.0 - selection_histogram(summary)[env.optimal_index]
    check("exploration-share", shares["dca"] > shares["seri"],
          f"non-optimal share dca {shares['dca']:.2f}% vs "
          f"seri {shares['seri']:.2f}%")
