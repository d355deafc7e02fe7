"""Randomized success-rate experiments for the reward-recovery solvers.

Random MDP generation (uniform-simplex rows or follow-the-action structured
rows), rejection sampling for strictly separable instances, and the
success-versus-samples experiment: for each sample count m, estimate the
transitions from m draws per (action, state) pair, recover a reward with
each solver from the estimated feature rows, and count the trial a success
when the reward keeps every margin nonnegative under the TRUE transitions.

Determinism: every random quantity is keyed by (master_seed, purpose tag,
indices), so a config reproduces its curve bit-for-bit at any parallelism
degree.  Both solvers in a trial share the same dataset, and the same MDP
set is reused across all sample counts, so the curves are paired.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimation import (
    SCHEME_ALPHA_REACHABLE,
    SCHEME_PER_PAIR,
    BoundInputs,
    make_rng,
    mle_transition,
    recovery_sample_bound,
    simulate_dataset,
)
from .mdp import FeatureRows, Mdp, TransitionModel, _readonly, bellman_margin, feature_rows
from .solvers import (
    METHOD_L1_SVM,
    METHOD_LP_IRL,
    InfeasibleProblem,
    beta_certificate,
    solve_l1_svm,
    solve_lp_irl,
)

log = logging.getLogger(__name__)

GENERATOR_UNIFORM = "uniform"
GENERATOR_STRUCTURED = "structured"

MAX_GENERATION_ATTEMPTS = 10_000

# seed-derivation tags: (master_seed, tag, ...) keys one PCG64 stream each
_TAG_GENERATE = 0
_TAG_TRIAL = 1


class GenerationExhausted(RuntimeError):
    """Rejection sampling failed to find a separable instance."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    k: int
    gamma: float
    sample_grid: tuple[int, ...]
    num_mdps: int = 30
    generator: str = GENERATOR_UNIFORM
    n1: int = 1
    follow_mass: float = 0.7
    solvers: tuple[str, ...] = (METHOD_L1_SVM, METHOD_LP_IRL)
    lam: float = 0.1
    r_max: float = 1.0
    alpha: float = 1.0
    delta: float = 0.05
    success_tolerance: float = 1e-8
    beta_min: float = 1e-6
    scheme: str = SCHEME_PER_PAIR
    episode_length: int = 20
    master_seed: int = 42

    def __post_init__(self):
        grid = tuple(int(m) for m in self.sample_grid)
        object.__setattr__(self, "sample_grid", grid)
        object.__setattr__(self, "solvers", tuple(self.solvers))
        if not grid or any(m < 1 for m in grid):
            raise ValueError("sample_grid must list positive sample counts")
        if any(b >= c for b, c in zip(grid, grid[1:])):
            raise ValueError("sample_grid must be strictly increasing")
        if self.num_mdps < 1:
            raise ValueError("num_mdps must be at least 1")
        if self.generator not in (GENERATOR_UNIFORM, GENERATOR_STRUCTURED):
            raise ValueError(f"unknown generator {self.generator!r}")
        if not 0.0 < self.follow_mass <= 1.0:
            raise ValueError("follow_mass must lie in (0, 1]")
        if not 1 <= self.n1 < self.n:
            raise ValueError("n1 must lie in [1, n)")
        bad = [s for s in self.solvers if s not in (METHOD_L1_SVM, METHOD_LP_IRL)]
        if bad or not self.solvers:
            raise ValueError(f"solvers must be a nonempty subset, got {self.solvers}")
        if self.scheme not in (SCHEME_PER_PAIR, SCHEME_ALPHA_REACHABLE):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "gamma": self.gamma,
            "sample_grid": list(self.sample_grid),
            "num_mdps": self.num_mdps,
            "generator": self.generator,
            "n1": self.n1,
            "follow_mass": self.follow_mass,
            "solvers": list(self.solvers),
            "lambda": self.lam,
            "r_max": self.r_max,
            "alpha": self.alpha,
            "delta": self.delta,
            "success_tolerance": self.success_tolerance,
            "beta_min": self.beta_min,
            "scheme": self.scheme,
            "episode_length": self.episode_length,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in data.items() if k in known}
        if "lambda" in data:
            kwargs["lam"] = data["lambda"]
        unknown = set(data) - known - {"lambda"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass(frozen=True)
class TrialRecord:
    mdp_index: int
    m: int
    solver: str
    feasible: bool
    success: bool
    l1_norm: float
    beta_of_instance: float


@dataclass(frozen=True)
class CurvePoint:
    m: int
    solver: str
    trials: int
    successes: int
    success_rate: float


@dataclass(frozen=True)
class SuccessCurve:
    points: tuple[CurvePoint, ...]
    bound_line_m: int
    records: tuple[TrialRecord, ...] = field(default=(), repr=False)


def _model_from_rows(rows: np.ndarray) -> TransitionModel:
    k, n, _ = rows.shape
    return TransitionModel(n=n, k=k, p=_readonly(rows))


def gen_mdp_uniform(n: int, k: int, gamma: float, seed) -> Mdp:
    """Every transition row drawn uniformly from the probability simplex
    (n unit-rate exponentials normalized by their sum)."""
    rng = make_rng(*_as_key(seed))
    raw = rng.standard_exponential((k, n, n))
    raw /= raw.sum(axis=2, keepdims=True)
    return Mdp(transitions=_model_from_rows(raw), gamma=gamma)


def gen_mdp_structured(
    n: int, k: int, n1: int, follow_mass: float, gamma: float, seed
) -> Mdp:
    """Rows concentrating follow_mass on n1 random states, the rest uniform.

    Mimics dynamics where the chosen action is followed with large
    probability and the state jumps to a random one with small probability.
    """
    if not 1 <= n1 < n:
        raise ValueError("n1 must lie in [1, n)")
    if not 0.0 < follow_mass <= 1.0:
        raise ValueError("follow_mass must lie in (0, 1]")
    rng = make_rng(*_as_key(seed))
    raw = np.full((k, n, n), (1.0 - follow_mass) / (n - n1))
    for a in range(k):
        for i in range(n):
            targets = rng.choice(n, size=n1, replace=False)
            raw[a, i, targets] = follow_mass / n1
    return Mdp(transitions=_model_from_rows(raw), gamma=gamma)


def _as_key(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def _generate_one(config: ExperimentConfig, seed) -> Mdp:
    if config.generator == GENERATOR_UNIFORM:
        return gen_mdp_uniform(config.n, config.k, config.gamma, seed)
    return gen_mdp_structured(
        config.n, config.k, config.n1, config.follow_mass, config.gamma, seed
    )


def gen_separable_mdp(config: ExperimentConfig, seed) -> tuple[Mdp, float]:
    """Rejection-sample instances until the measured margin reaches beta_min."""
    key = _as_key(seed)
    for attempt in range(MAX_GENERATION_ATTEMPTS):
        mdp = _generate_one(config, key + (attempt,))
        f = feature_rows(mdp)
        # beta never exceeds the smallest row sup norm; skip the LP when the
        # cheap upper bound already rules the instance out
        if float(np.abs(f.matrix).max(axis=1).min()) < config.beta_min:
            continue
        cert = beta_certificate(f)
        if cert.beta >= config.beta_min:
            return mdp, cert.beta
    raise GenerationExhausted(
        f"no instance with margin >= {config.beta_min} in "
        f"{MAX_GENERATION_ATTEMPTS} attempts"
    )


def _solve_one(solver: str, f_hat: FeatureRows, config: ExperimentConfig):
    if solver == METHOD_L1_SVM:
        return solve_l1_svm(f_hat)
    return solve_lp_irl(f_hat, lam=config.lam, r_max=config.r_max)


def run_trial(
    mdp: Mdp,
    beta: float,
    m: int,
    solver: str,
    config: ExperimentConfig,
    trial_seed,
    mdp_index: int = 0,
) -> TrialRecord:
    """One estimate-then-recover trial, judged against the true transitions.

    The dataset depends only on trial_seed, never on the solver, so calling
    this for each solver with the same seed evaluates both on one dataset.
    """
    return _run_task(mdp, beta, mdp_index, m, (solver,), config, trial_seed)[0]


def _run_task(
    mdp: Mdp,
    beta: float,
    mdp_index: int,
    m: int,
    solvers: tuple[str, ...],
    config: ExperimentConfig,
    trial_seed,
) -> list[TrialRecord]:
    ds = simulate_dataset(
        mdp,
        m,
        scheme=config.scheme,
        seed=trial_seed,
        episode_length=config.episode_length,
        store_triples=False,
    )
    estimate = mle_transition(ds)
    est_mdp = Mdp(
        transitions=estimate.p_hat,
        gamma=mdp.gamma,
        optimal_action=mdp.optimal_action,
    )
    with warnings.catch_warnings():
        # estimated rows may collide at tiny m; the solvers stay total on them
        warnings.simplefilter("ignore", RuntimeWarning)
        f_hat = feature_rows(est_mdp, provenance="estimated")
    f_true = feature_rows(mdp)
    out = []
    for solver in solvers:
        try:
            report = _solve_one(solver, f_hat, config)
            margin, _ = bellman_margin(f_true, report.reward)
            success = margin >= -config.success_tolerance
            out.append(
                TrialRecord(
                    mdp_index=mdp_index,
                    m=m,
                    solver=solver,
                    feasible=True,
                    success=bool(success),
                    l1_norm=report.l1_norm,
                    beta_of_instance=beta,
                )
            )
        except InfeasibleProblem:
            out.append(
                TrialRecord(
                    mdp_index=mdp_index,
                    m=m,
                    solver=solver,
                    feasible=False,
                    success=False,
                    l1_norm=math.nan,
                    beta_of_instance=beta,
                )
            )
    return out


def _task_seed(config: ExperimentConfig, mdp_index: int, m: int) -> tuple[int, ...]:
    return (config.master_seed, _TAG_TRIAL, mdp_index, m)


def _task_worker(payload) -> list[TrialRecord]:
    mdp, beta, mdp_index, m, config = payload
    return _run_task(
        mdp, beta, mdp_index, m, config.solvers, config, _task_seed(config, mdp_index, m)
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> SuccessCurve:
    """The full success-versus-samples experiment for one configuration.

    Generates num_mdps separable instances once, runs every (instance, m)
    trial with all configured solvers on shared datasets, and aggregates
    per-(m, solver) success rates.  bound_line_m is the sample-size bound
    evaluated at the median measured margin with the configured alpha and
    delta.
    """
    instances = []
    for idx in range(config.num_mdps):
        mdp, beta = gen_separable_mdp(config, (config.master_seed, _TAG_GENERATE, idx))
        instances.append((mdp, beta))
        log.debug("instance %d generated with margin %.6f", idx, beta)
    betas = np.array([beta for _, beta in instances])
    bound_line = recovery_sample_bound(
        BoundInputs(
            n=config.n,
            k=config.k,
            gamma=config.gamma,
            beta=float(np.median(betas)),
            alpha=config.alpha,
            delta=config.delta,
        )
    )

    payloads = [
        (mdp, beta, idx, m, config)
        for m in config.sample_grid
        for idx, (mdp, beta) in enumerate(instances)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_task_worker, payloads, chunksize=4))
    else:
        chunks = [_task_worker(p) for p in payloads]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.m, r.solver, r.mdp_index))

    points = []
    for m in config.sample_grid:
        for solver in sorted(config.solvers):
            hits = [r for r in records if r.m == m and r.solver == solver]
            successes = sum(r.success for r in hits)
            points.append(
                CurvePoint(
                    m=m,
                    solver=solver,
                    trials=len(hits),
                    successes=successes,
                    success_rate=successes / len(hits),
                )
            )
    return SuccessCurve(
        points=tuple(points), bound_line_m=bound_line, records=tuple(records)
    )


def emit_csv(curve: SuccessCurve, path) -> None:
    """Write the curve as m,solver,trials,successes,success_rate,bound_line_m
    sorted by (m, solver); byte-identical output for identical curves."""
    if not curve.points:
        raise ValueError("cannot emit an empty curve")
    rows = sorted(curve.points, key=lambda p: (p.m, p.solver))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,solver,trials,successes,success_rate,bound_line_m\n")
        for p in rows:
            fh.write(
                f"{p.m},{p.solver},{p.trials},{p.successes},"
                f"{p.success_rate!r},{curve.bound_line_m}\n"
            )


def emit_trials_csv(curve: SuccessCurve, path) -> None:
    """Optional per-trial dump with one row per TrialRecord."""
    if not curve.records:
        raise ValueError("curve carries no trial records")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("mdp_index,m,solver,feasible,success,l1_norm,beta_of_instance\n")
        for r in curve.records:
            fh.write(
                f"{r.mdp_index},{r.m},{r.solver},{r.feasible},{r.success},"
                f"{r.l1_norm!r},{r.beta_of_instance!r}\n"
            )
