"""Trajectory simulation, transition estimation, and sample-size bounds.

The bound calculators are closed forms tying the number of observed
transitions to the accuracy of the recovered reward:

* dkw_bound: m >= 2/eps^2 * log(2n/delta) samples per (state, action) pair
  put every row of one action's estimated matrix within eps (sup norm) of
  the truth with probability at least 1 - delta.
* alpha_bound: m >= 4/(alpha eps^2) * log(4nk/delta) covers all k actions
  when each state is only reachable in one step with probability >= alpha.
* power_error_bound: ||P_hat^j - P^j||_inf <= ((j-1)n + 1) eps whenever
  ||P_hat - P||_inf <= eps, for right-stochastic P and P_hat.
* feature_error_bound: transition error eps propagates through the row
  difference and the discounted resolvent to a feature-row error of at most
  2 eps ((n-1) gamma + 1) / (1 - gamma)^2.
* feature_error_threshold: feature error up to (1-c)/(2-c) * beta keeps the
  true margins of the recovered reward at or above c on a beta-separable
  instance (c = 0 recovers plain Bellman optimality).
* recovery_sample_bound: the composition of the three pieces above,
  m >= 64/(alpha beta^2) * (((n-1) gamma + 1)/(1-gamma)^2)^2 * log(4nk/delta).
* witness_check: the post-hoc certificate; with eps the high-probability
  feature error implied by m samples, a recovered reward whose L1 norm is
  well below 1/eps is optimal for the true transitions with probability at
  least 1 - delta.

Randomness: PCG64 streams keyed by numpy SeedSequence tuples, so every
dataset is bit-reproducible from (mdp, m, scheme, seed) and parallel trials
can derive independent streams without sharing generator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mdp import Mdp, TransitionModel, _readonly
from .solvers import SolverReport

SCHEME_PER_PAIR = "per_state_action"
SCHEME_ALPHA_REACHABLE = "alpha_reachable"
DEFAULT_EPISODE_LENGTH = 20

_CEIL_GUARD = 1e-12  # relative slack so FP noise cannot inflate a ceiling


def _ceil_bound(value: float) -> int:
    return int(math.ceil(value - _CEIL_GUARD * max(1.0, abs(value))))


def _check_prob(name: str, value: float, lo_open: bool = True) -> None:
    ok = (0.0 < value <= 1.0) if lo_open else (0.0 <= value <= 1.0)
    if not ok:
        raise ValueError(f"{name} must lie in {'(0, 1]' if lo_open else '[0, 1]'}, got {value}")


@dataclass(frozen=True)
class BoundInputs:
    """Problem parameters consumed by the bound calculators.

    Unused fields may stay None; each calculator validates what it reads.
    """

    n: int | None = None
    k: int | None = None
    gamma: float | None = None
    beta: float | None = None
    alpha: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    c: float | None = None
    m: int | None = None


@dataclass(frozen=True)
class TrajectoryDataset:
    """Sampled (state, action, next state) transitions with seed provenance.

    counts[a, i, j] is the number of observed i -> j transitions under a.
    triples is the flat (T, 3) record of the draws in (i, a, j) order, or
    None when the caller asked for counts only; when present it is always
    consistent with counts.
    """

    n: int
    k: int
    scheme: str
    seed: tuple[int, ...]
    counts: np.ndarray
    triples: np.ndarray | None = None


@dataclass(frozen=True)
class EstimateReport:
    """Maximum-likelihood transition estimate plus coverage diagnostics.

    Rows of p_hat are empirical next-state frequencies for visited
    (action, state) pairs; unvisited pairs fall back to the uniform row and
    are listed so callers can discard under-sampled trials.
    """

    p_hat: TransitionModel
    unvisited_pairs: tuple[tuple[int, int], ...]
    samples_per_pair: np.ndarray  # shape (k, n)


def make_rng(*key: int) -> np.random.Generator:
    """PCG64 generator keyed by a tuple of nonnegative integers."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def dkw_bound(n: int, epsilon: float, delta: float) -> int:
    """Per-pair samples so one action's matrix is eps-accurate whp.

    The probability statement is meaningful for delta in (0, 1); larger
    (vacuous) values are accepted as plain formula evaluations.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return _ceil_bound(2.0 / epsilon**2 * math.log(2.0 * n / delta))


def alpha_bound(n: int, k: int, alpha: float, epsilon: float, delta: float) -> int:
    """Samples covering all actions under one-step reachability alpha.

    As with dkw_bound, delta values at or above 1 are accepted and evaluate
    the formula even though the resulting guarantee is vacuous.
    """
    _check_prob("alpha", alpha)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return _ceil_bound(4.0 / (alpha * epsilon**2) * math.log(4.0 * n * k / delta))


def discount_amplification(n: int, gamma: float) -> float:
    """((n-1) gamma + 1) / (1 - gamma)^2, the resolvent error amplifier."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    return ((n - 1) * gamma + 1.0) / (1.0 - gamma) ** 2


def feature_error_bound(epsilon_p: float, n: int, gamma: float) -> float:
    """Sup-norm feature-row error implied by transition error epsilon_p."""
    if epsilon_p < 0:
        raise ValueError("epsilon_p must be nonnegative")
    return 2.0 * epsilon_p * discount_amplification(n, gamma)


def power_error_bound(n: int, power: int, epsilon_p: float) -> float:
    """Sup-norm error of the power-th matrix power: ((power-1)n + 1) eps."""
    if power < 1:
        raise ValueError("power must be at least 1")
    if epsilon_p < 0:
        raise ValueError("epsilon_p must be nonnegative")
    return ((power - 1) * n + 1) * epsilon_p


def feature_error_threshold(beta: float, c: float) -> float:
    """Largest feature error keeping true margins >= c: (1-c)/(2-c) * beta."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    _check_prob("c", c, lo_open=False)
    return (1.0 - c) / (2.0 - c) * beta


def recovery_sample_bound(inputs: BoundInputs) -> int:
    """Per-pair samples sufficient for the recovered reward to stay optimal
    under the true transitions with probability at least 1 - delta."""
    if inputs.beta is None or inputs.beta <= 0:
        raise ValueError("beta must be positive")
    _check_prob("alpha", inputs.alpha)
    if not 0 < inputs.delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    amp = discount_amplification(inputs.n, inputs.gamma)
    value = (
        64.0
        / (inputs.alpha * inputs.beta**2)
        * amp**2
        * math.log(4.0 * inputs.n * inputs.k / inputs.delta)
    )
    return _ceil_bound(value)


def witness_check(
    report: SolverReport, inputs: BoundInputs, ratio_threshold: float
) -> tuple[float, bool]:
    """Post-hoc optimality certificate for a recovered reward.

    epsilon = 2 sqrt(4/(alpha m) log(4nk/delta)) * ((n-1)gamma+1)/(1-gamma)^2
    bounds the feature error with probability 1 - delta; the check passes
    when ||R_hat||_1 * epsilon stays at or below ratio_threshold.
    """
    _check_prob("alpha", inputs.alpha)
    if not 0 < inputs.delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if inputs.m is None or inputs.m < 1:
        raise ValueError("m must be at least 1")
    epsilon = 2.0 * math.sqrt(
        4.0 / (inputs.alpha * inputs.m) * math.log(4.0 * inputs.n * inputs.k / inputs.delta)
    ) * discount_amplification(inputs.n, inputs.gamma)
    passes = report.l1_norm * epsilon <= ratio_threshold
    return epsilon, bool(passes)


def _per_pair_counts(mdp: Mdp, m: int, rng: np.random.Generator) -> np.ndarray:
    flat = mdp.p.reshape(mdp.k * mdp.n, mdp.n)
    flat = flat / flat.sum(axis=1, keepdims=True)  # absorb sub-ulp drift
    return rng.multinomial(m, flat).reshape(mdp.k, mdp.n, mdp.n)


def _expand_per_pair_triples(counts: np.ndarray) -> np.ndarray:
    k, n, _ = counts.shape
    chunks = []
    for a in range(k):
        for i in range(n):
            total = int(counts[a, i].sum())
            if total == 0:
                continue
            nxt = np.repeat(np.arange(n), counts[a, i])
            block = np.empty((total, 3), dtype=np.int64)
            block[:, 0] = i
            block[:, 1] = a
            block[:, 2] = nxt
            chunks.append(block)
    return np.vstack(chunks)


def simulate_dataset(
    mdp: Mdp,
    m: int,
    scheme: str = SCHEME_PER_PAIR,
    seed=0,
    episode_length: int = DEFAULT_EPISODE_LENGTH,
    store_triples: bool = True,
) -> TrajectoryDataset:
    """Sample transitions under the true dynamics, deterministically per seed.

    per_state_action: m independent next-state draws for every (action, state)
    pair.  Stored triples list the draws in canonical (action, state) order;
    the counts are the statistic every consumer uses.

    alpha_reachable: m episodes of episode_length steps, each starting in a
    uniformly random state and choosing a uniformly random action at every
    step.  With uniform starts the one-step reachability parameter of the
    bounds is effectively 1/n unless the caller overrides it.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    key = _seed_tuple(seed)
    rng = make_rng(*key)
    if scheme == SCHEME_PER_PAIR:
        counts = _per_pair_counts(mdp, m, rng)
        triples = _expand_per_pair_triples(counts) if store_triples else None
    elif scheme == SCHEME_ALPHA_REACHABLE:
        if episode_length < 1:
            raise ValueError("episode_length must be at least 1")
        counts = np.zeros((mdp.k, mdp.n, mdp.n), dtype=np.int64)
        cdf = np.cumsum(mdp.p, axis=2)
        states = rng.integers(0, mdp.n, size=m)
        steps = []
        for _ in range(episode_length):
            actions = rng.integers(0, mdp.k, size=m)
            u = rng.random(m)
            nxt = (cdf[actions, states] < u[:, None]).sum(axis=1)
            np.clip(nxt, 0, mdp.n - 1, out=nxt)
            np.add.at(counts, (actions, states, nxt), 1)
            if store_triples:
                steps.append(np.column_stack([states, actions, nxt]))
            states = nxt
        triples = np.vstack(steps).astype(np.int64) if store_triples else None
    else:
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    return TrajectoryDataset(
        n=mdp.n,
        k=mdp.k,
        scheme=scheme,
        seed=key,
        counts=counts,
        triples=triples,
    )


def mle_transition(ds: TrajectoryDataset) -> EstimateReport:
    """Empirical next-state frequencies; unvisited pairs fall back to uniform."""
    totals = ds.counts.sum(axis=2)
    p_hat = np.empty((ds.k, ds.n, ds.n))
    unvisited = []
    for a in range(ds.k):
        for i in range(ds.n):
            if totals[a, i] == 0:
                p_hat[a, i] = 1.0 / ds.n
                unvisited.append((a, i))
            else:
                p_hat[a, i] = ds.counts[a, i] / totals[a, i]
    model = TransitionModel(n=ds.n, k=ds.k, p=_readonly(p_hat))
    return EstimateReport(
        p_hat=model,
        unvisited_pairs=tuple(unvisited),
        samples_per_pair=totals,
    )


def write_dataset_csv(ds: TrajectoryDataset, path) -> None:
    """Dump the sampled triples as state,action,next_state rows."""
    if ds.triples is None:
        raise ValueError("dataset was simulated without stored triples")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("state,action,next_state\n")
        for i, a, j in ds.triples:
            fh.write(f"{i},{a},{j}\n")


def estimate_report_to_dict(report: EstimateReport) -> dict:
    return {
        "n": report.p_hat.n,
        "k": report.p_hat.k,
        "transitions": report.p_hat.p.tolist(),
        "unvisited_pairs": [list(pair) for pair in report.unvisited_pairs],
        "samples_per_pair": report.samples_per_pair.tolist(),
    }
