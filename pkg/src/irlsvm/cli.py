"""Command-line frontend: irl {gen,solve,classify,estimate,bounds,witness,experiment}.

Data goes to stdout (or --out files), diagnostics to stderr.  Exit codes:
0 success, 1 domain error (infeasible instance, invalid input file), 2 usage
error.  The IRL_LOG environment variable (error|warn|info|debug) controls
logging verbosity.  Every stochastic subcommand takes --seed (default 42).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import estimation, experiments, mdp as mdp_mod, solvers
from .simplex import NumericalBreakdown

DEFAULT_SEED = 42

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_DOMAIN_ERRORS = (
    mdp_mod.DimensionMismatch,
    mdp_mod.NegativeEntry,
    mdp_mod.RowSumViolation,
    mdp_mod.SingularSystem,
    mdp_mod.NonConvergence,
    solvers.InfeasibleProblem,
    solvers.ZeroFeatureRow,
    experiments.GenerationExhausted,
    NumericalBreakdown,
    ValueError,
    KeyError,
    OSError,
    json.JSONDecodeError,
)


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("IRL_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit_json(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2)
    if out is None or out == "-":
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_mdp(path: str) -> mdp_mod.Mdp:
    return mdp_mod.mdp_from_dict(_load_json(path))


def _cmd_gen(args) -> int:
    if args.beta_min is not None:
        config = experiments.ExperimentConfig(
            n=args.n,
            k=args.k,
            gamma=args.gamma,
            sample_grid=(1,),
            num_mdps=1,
            generator=args.generator,
            n1=args.n1,
            follow_mass=args.follow_mass,
            beta_min=args.beta_min,
            master_seed=args.seed,
        )
        instance, beta = experiments.gen_separable_mdp(config, args.seed)
        logging.info("generated instance with margin %.6g", beta)
    elif args.generator == experiments.GENERATOR_UNIFORM:
        instance = experiments.gen_mdp_uniform(args.n, args.k, args.gamma, args.seed)
    else:
        instance = experiments.gen_mdp_structured(
            args.n, args.k, args.n1, args.follow_mass, args.gamma, args.seed
        )
    _emit_json(mdp_mod.mdp_to_dict(instance), args.out)
    return 0


def _cmd_solve(args) -> int:
    instance = _load_mdp(args.mdp)
    f_hat = mdp_mod.feature_rows(instance)
    if args.method == solvers.METHOD_L1_SVM:
        report = solvers.solve_l1_svm(f_hat)
    else:
        report = solvers.solve_lp_irl(f_hat, lam=args.lam, r_max=args.r_max)
    _emit_json(report.to_dict(), args.out)
    return 0


def _cmd_classify(args) -> int:
    instance = _load_mdp(args.mdp)
    f = mdp_mod.feature_rows(instance)
    label = solvers.classify_regime(f, tau=args.tau)
    beta = solvers.beta_certificate(f).beta
    print(f"{label.value} beta={beta:.12g}")
    return 0


def _cmd_estimate(args) -> int:
    instance = _load_mdp(args.mdp)
    ds = estimation.simulate_dataset(
        instance,
        args.m,
        scheme=args.scheme,
        seed=args.seed,
        episode_length=args.episode_length,
        store_triples=args.dump is not None,
    )
    if args.dump is not None:
        estimation.write_dataset_csv(ds, args.dump)
    report = estimation.mle_transition(ds)
    _emit_json(estimation.estimate_report_to_dict(report), args.out)
    return 0


def _cmd_bounds(args) -> int:
    amp = estimation.discount_amplification(args.n, args.gamma)
    eps_f = estimation.feature_error_threshold(args.beta, args.c)
    eps_p = eps_f / (2.0 * amp)  # transition accuracy that forces eps_f
    inputs = estimation.BoundInputs(
        n=args.n, k=args.k, gamma=args.gamma, beta=args.beta,
        alpha=args.alpha, delta=args.delta,
    )
    print(f"feature_error_threshold {eps_f:.12g}")
    print(f"transition_error_target {eps_p:.12g}")
    print(f"dkw_m {estimation.dkw_bound(args.n, eps_p, args.delta)}")
    print(f"alpha_m {estimation.alpha_bound(args.n, args.k, args.alpha, eps_p, args.delta)}")
    print(f"recovery_m {estimation.recovery_sample_bound(inputs)}")
    return 0


def _cmd_witness(args) -> int:
    if args.report is not None:
        report = solvers.SolverReport.from_dict(_load_json(args.report))
        l1_norm = report.l1_norm
    else:
        if args.l1_norm is None:
            raise ValueError("either --report or --l1-norm is required")
        l1_norm = args.l1_norm
        report = solvers.SolverReport(
            method=solvers.METHOD_L1_SVM,
            reward=np.zeros(args.n),
            objective_value=l1_norm,
            l1_norm=l1_norm,
        )
    inputs = estimation.BoundInputs(
        n=args.n, k=args.k, gamma=args.gamma, alpha=args.alpha,
        delta=args.delta, m=args.m,
    )
    epsilon, passes = estimation.witness_check(report, inputs, args.threshold)
    print(f"epsilon {epsilon:.12g}")
    print(f"ratio {l1_norm * epsilon:.12g}")
    print(f"pass {str(passes).lower()}")
    return 0


def _cmd_experiment(args) -> int:
    config = experiments.ExperimentConfig.from_dict(_load_json(args.config))
    curve = experiments.run_experiment(config, threads=args.threads)
    experiments.emit_csv(curve, args.out)
    if args.trials_csv is not None:
        experiments.emit_trials_csv(curve, args.trials_csv)
    logging.info("bound line at m=%d", curve.bound_line_m)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irl",
        description="Reward recovery for finite MDPs: solvers, bounds, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random MDP as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--generator", choices=[experiments.GENERATOR_UNIFORM,
                                           experiments.GENERATOR_STRUCTURED],
                   default=experiments.GENERATOR_UNIFORM)
    p.add_argument("--n1", type=int, default=1)
    p.add_argument("--follow-mass", dest="follow_mass", type=float, default=0.7)
    p.add_argument("--beta-min", dest="beta_min", type=float, default=None,
                   help="rejection-sample until the separability margin reaches this")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="recover a reward from an MDP JSON file")
    p.add_argument("--mdp", required=True)
    p.add_argument("--method", choices=[solvers.METHOD_L1_SVM, solvers.METHOD_LP_IRL],
                   required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--r-max", dest="r_max", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("classify", help="report the geometric regime and margin")
    p.add_argument("--mdp", required=True)
    p.add_argument("--tau", type=float, default=solvers.STRICTNESS_TOL)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("estimate", help="simulate a dataset and estimate transitions")
    p.add_argument("--mdp", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--scheme", choices=[estimation.SCHEME_PER_PAIR,
                                        estimation.SCHEME_ALPHA_REACHABLE],
                   default=estimation.SCHEME_PER_PAIR)
    p.add_argument("--episode-length", dest="episode_length", type=int,
                   default=estimation.DEFAULT_EPISODE_LENGTH)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dump", default=None, help="also write the triples as CSV here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("bounds", help="print the sample-size bounds for given inputs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--c", type=float, default=0.0,
                   help="required true-margin level (default 0)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("witness", help="post-hoc optimality certificate")
    p.add_argument("--report", default=None, help="solver report JSON")
    p.add_argument("--l1-norm", dest="l1_norm", type=float, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("experiment", help="run a success-curve experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials-csv", dest="trials_csv", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
