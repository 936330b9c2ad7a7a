"""Command-line entry point.

Subcommands ``simulate``, ``frontier``, ``learn``, ``fairness`` and
``bound`` each write plot-ready CSV and JSON files into ``--out``. A JSON
``--config`` file may supply any option (keys use underscores); command-line
flags override it.

Exit codes: 0 success, 1 I/O failure, 2 argument or schema error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fairness as fair
from . import learning
from .core import Cohort, NumericalError
from .frontier import default_alpha_grid, diagnose, dominance_gap, sweep_frontier
from .io import SchemaError, read_columns, read_csv, write_columns, write_json
from .policies import ScoreSource
from .simulation import (GaussianModel, mean_and_se, optimal_expected_alpha_utility,
                         plugin_utility_lower_bound, run_trials, sigma_y)

EXIT_IO, EXIT_ARGS, EXIT_NUMERIC = 1, 2, 3

DEFAULTS = {
    "simulate": dict(sigma_w=1.0, sigma_p=1.0, rho=[0.0], noise_w=0.0, noise_p=0.0,
                     noise_mode="independent", n=5000, trials=100, alpha_points=101,
                     workers=None, write_trials=True),
    "frontier": dict(input=None, profit_from_views=None, welfare_from_conspiracy=None,
                     alpha_points=101),
    "learn": dict(data=None, synthetic=None, features=["all"], train_size=None,
                  lambda_grid=list(learning.DEFAULT_LAMBDA_GRID), folds=4, replication=0,
                  center_scores=False, alpha_points=101),
    "fairness": dict(input=None, synthetic=None, u_plus=fair.U_PLUS, u_minus=fair.U_MINUS,
                     epsilon_grid=None, epsilon_points=25, rate_resolution=fair.DEFAULT_RATE_RESOLUTION,
                     variant="standard"),
    "bound": dict(sigma_w=1.0, sigma_p=1.0, noise_w=0.5, noise_p=0.1, noise_mode="dependent",
                  alpha_points=11, rho_points=21),
}
COMMON = dict(seed=0, out=".")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master random seed (default 0)")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--config", help="JSON file of options; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="welfare-pareto", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo frontiers for Gaussian scores with noise")
    _common(s)
    s.add_argument("--sigma-w", type=float, help="welfare score std (default 1)")
    s.add_argument("--sigma-p", type=float, help="profit score std (default 1)")
    s.add_argument("--rho", type=float, nargs="+",
                   help="score correlation; several values write rho_<v>/ subdirectories (default 0)")
    s.add_argument("--noise-w", type=float, help="welfare prediction noise std (default 0)")
    s.add_argument("--noise-p", type=float, help="profit prediction noise std (default 0)")
    s.add_argument("--noise-mode", choices=["independent", "dependent"],
                   help="independent noise terms or one shared draw (default independent)")
    s.add_argument("--n", type=int, help="cohort size per trial (default 5000)")
    s.add_argument("--trials", type=int, help="number of trials (default 100)")
    s.add_argument("--alpha-points", type=int, help="uniform alpha grid size (default 101)")
    s.add_argument("--workers", type=int,
                   help="parallel trials (default: $WELFARE_PARETO_WORKERS or 1)")

    f = sub.add_parser("frontier", help="frontiers from a CSV of precomputed scores")
    _common(f)
    f.add_argument("--input", help="CSV with p_hat,w_hat and optionally p,w (required)")
    f.add_argument("--profit-from-views", metavar="COL",
                   help="derive p_hat = log((1 + views) / 100000) from column COL")
    f.add_argument("--welfare-from-conspiracy", metavar="COL",
                   help="derive w_hat = 0.95 - s from conspiracy-score column COL")
    f.add_argument("--alpha-points", type=int, help="uniform alpha grid size (default 101)")

    ln = sub.add_parser("learn", help="ridge-learned abalone scores and their frontier")
    _common(ln)
    ln.add_argument("--data", help="abalone CSV (default: packaged 50-row synthetic fixture)")
    ln.add_argument("--synthetic", type=int, metavar="N",
                    help="use N generated abalone-like records instead of --data")
    ln.add_argument("--features", nargs="+",
                    help="feature names, 'all' or 'weight' (default all)")
    ln.add_argument("--train-size", type=int, help="training subsample size (default: all)")
    ln.add_argument("--lambda-grid", type=float, nargs="+",
                    help="ridge penalties to search (default 1e-8 .. 1e2, 11 values)")
    ln.add_argument("--folds", type=int, help="cross-validation folds (default 4)")
    ln.add_argument("--replication", type=int, help="outer 80/20 split index 0-4 (default 0)")
    ln.add_argument("--center-scores", action="store_true", default=None,
                    help="shift scores by the training profit mean")
    ln.add_argument("--alpha-points", type=int, help="uniform alpha grid size (default 101)")

    fa = sub.add_parser("fairness", help="demographic-parity sweep and induced welfare")
    _common(fa)
    fa.add_argument("--input", help="CSV with group,repay_prob[,count] or group,profit_score")
    fa.add_argument("--synthetic", type=int, metavar="N",
                    help="use N smooth synthetic members per group instead of --input")
    fa.add_argument("--u-plus", type=float, help="gain from repayment (default 1)")
    fa.add_argument("--u-minus", type=float, help="loss from default (default -4)")
    fa.add_argument("--epsilon-grid", type=float, nargs="+",
                    help="ascending epsilon values (default: 25 points up to 1.2x the rate gap)")
    fa.add_argument("--epsilon-points", type=int, help="size of the default epsilon grid (25)")
    fa.add_argument("--rate-resolution", type=int, help="rate grid points (default 1001)")
    fa.add_argument("--variant", choices=["standard", "flipped"],
                    help="induced welfare construction (default standard)")

    b = sub.add_parser("bound", help="plug-in lower-bound table over (alpha, rho)")
    _common(b)
    b.add_argument("--sigma-w", type=float, help="welfare score std (default 1)")
    b.add_argument("--sigma-p", type=float, help="profit score std (default 1)")
    b.add_argument("--noise-w", type=float, help="welfare noise std (default 0.5)")
    b.add_argument("--noise-p", type=float, help="profit noise std (default 0.1)")
    b.add_argument("--noise-mode", choices=["independent", "dependent"],
                   help="noise dependence assumed by the bound (default dependent)")
    b.add_argument("--alpha-points", type=int, help="alpha grid size on [0, 1] (default 11)")
    b.add_argument("--rho-points", type=int, help="rho grid size on [-1, 1] (default 21)")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the JSON config file and explicit flags, in that order."""
    defaults = {**COMMON, **DEFAULTS[args.command]}
    cfg = dict(defaults)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config {args.config}: invalid JSON ({exc})") from None
        if not isinstance(loaded, dict):
            raise SchemaError(f"config {args.config}: expected a JSON object")
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise SchemaError(f"config {args.config}: unknown option {unknown[0]!r}")
        cfg.update(loaded)
    for k, v in vars(args).items():
        if k in defaults and v is not None:
            cfg[k] = v
    return cfg


def _require(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise ValueError(f"{field}: {msg}")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _alpha_grid(cfg: dict) -> np.ndarray:
    # three points are the fewest the concavity diagnostic accepts
    _require(int(cfg["alpha_points"]) >= 3, "alpha_points", "need at least 3 points")
    return default_alpha_grid(int(cfg["alpha_points"]))


def _curve_columns(curve, prefix: str = "") -> dict:
    return {f"{prefix}profit_utility": curve.profit, f"{prefix}welfare_utility": curve.welfare}


def _model(cfg: dict, rho: float) -> GaussianModel:
    return GaussianModel(float(cfg["sigma_w"]), float(cfg["sigma_p"]), float(rho),
                         float(cfg["noise_w"]), float(cfg["noise_p"]),
                         cfg["noise_mode"] == "independent")


def _simulate_one(cfg: dict, rho: float, out: Path) -> dict:
    model = _model(cfg, rho)
    _require(int(cfg["n"]) >= 1, "n", "must be at least 1")
    _require(int(cfg["trials"]) >= 1, "trials", "must be at least 1")
    grid = _alpha_grid(cfg)
    reports = run_trials(model, int(cfg["n"]), int(cfg["trials"]), grid, int(cfg["seed"]),
                         cfg["workers"])
    exact_p, _ = mean_and_se([r.exact_curve.profit for r in reports])
    exact_w, _ = mean_and_se([r.exact_curve.welfare for r in reports])
    write_columns(out / "exact_frontier.csv", {"alpha": grid, "profit_utility": exact_p,
                                               "welfare_utility": exact_w})
    if cfg["write_trials"]:
        for k, r in enumerate(reports):
            write_columns(out / f"trial_{k}_frontier.csv",
                          {"alpha": grid, **_curve_columns(r.empirical_curve),
                           **_curve_columns(r.exact_curve, "exact_")})
    b = np.stack([r.bounds for r in reports])
    opt_mean, opt_se = mean_and_se(b["optimal_utility"])
    plug_mean, plug_se = mean_and_se(b["plugin_utility"])
    gap_mean, _ = mean_and_se(b["realized_gap"])
    l1_mean, _ = mean_and_se(b["l1_bound"])
    violations = ((b["realized_gap"] < 0) | (b["realized_gap"] > b["l1_bound"])).sum(axis=0)
    write_columns(out / "bounds.csv", {
        "alpha": grid,
        "sigma_y": [sigma_y(model, a) for a in grid],
        "optimal_utility": [optimal_expected_alpha_utility(model, a) for a in grid],
        "lower_bound": [plugin_utility_lower_bound(model, a) for a in grid],
        "mean_realized_utility": plug_mean,
        "mean_l1_bound": l1_mean,
        "se_realized_utility": plug_se,
        "mean_exact_utility": opt_mean,
        "se_exact_utility": opt_se,
        "mean_realized_gap": gap_mean,
        "bound_violations": violations,
    })
    gaps = np.array([dominance_gap(r.exact_curve, r.empirical_curve) for r in reports])
    finite = np.where(np.isfinite(gaps), gaps, np.nan)
    mid = int(np.argmin(np.abs(grid - 0.5)))
    return {
        "model": {"sigma_w": model.sigma_w, "sigma_p": model.sigma_p, "rho": model.rho,
                  "sigma_eps_w": model.sigma_eps_w, "sigma_eps_p": model.sigma_eps_p,
                  "noise_independent": model.noise_independent},
        "n": int(cfg["n"]), "trials": int(cfg["trials"]), "seed": int(cfg["seed"]),
        "alpha_mid": float(grid[mid]),
        "realized_utility_mid": float(plug_mean[mid]),
        "realized_utility_mid_se": float(plug_se[mid]),
        "mean_dominance_gap": float(np.nanmean(finite)),
        "bound_violations": int(violations.sum()),
        "trial_seeds": [int(r.trial_seed) for r in reports],
    }


def cmd_simulate(cfg: dict) -> dict:
    out = _out_dir(cfg)
    rhos = cfg["rho"] if isinstance(cfg["rho"], list) else [cfg["rho"]]
    _require(len(rhos) >= 1, "rho", "need at least one value")
    if len(rhos) == 1:
        summary = _simulate_one(cfg, float(rhos[0]), out)
    else:
        runs = []
        for r in rhos:
            sub = out / f"rho_{float(r)!r}"
            sub.mkdir(exist_ok=True)
            runs.append(_simulate_one(cfg, float(r), sub))
            write_json(sub / "summary.json", runs[-1])
        mids = [s["realized_utility_mid"] for s in runs]
        summary = {"rho": [float(r) for r in rhos], "realized_utility_mid": mids,
                   "realized_utility_mid_se": [s["realized_utility_mid_se"] for s in runs],
                   "increasing_in_rho": bool(np.all(np.diff(mids) > 0)), "runs": runs}
    write_json(out / "summary.json", summary)
    return summary


def _frontier_cohort(cfg: dict) -> Cohort:
    _require(cfg["input"] is not None, "input", "an input CSV is required")
    path = cfg["input"]
    views, consp = cfg["profit_from_views"], cfg["welfare_from_conspiracy"]
    required = [views or "p_hat", consp or "w_hat"]
    cols = read_columns(path, required=required, optional=["p", "w"])
    if views:
        v = cols[views]
        if np.any(v < 0):
            raise SchemaError(f"{path}: column {views!r} has negative view counts")
        ph = np.log((1.0 + v) / 100000.0)
    else:
        ph = cols["p_hat"]
    wh = 0.95 - cols[consp] if consp else cols["w_hat"]
    if ("p" in cols) != ("w" in cols):
        raise SchemaError(f"{path}: missing required column {'w' if 'p' in cols else 'p'!r}")
    if "p" in cols:
        return Cohort(cols["p"], cols["w"], ph, wh)
    # predictions only: treat them as the best available truth for plotting
    return Cohort(ph, wh, ph, wh)


def cmd_frontier(cfg: dict) -> dict:
    out = _out_dir(cfg)
    grid = _alpha_grid(cfg)
    cohort = _frontier_cohort(cfg)
    has_truth = "p" in read_csv(cfg["input"])[0]
    est = sweep_frontier(cohort, ScoreSource.PREDICTED, grid, eval_with=ScoreSource.PREDICTED)
    write_columns(out / "estimated_frontier.csv", {"alpha": grid, **_curve_columns(est)})
    report = {"n": cohort.n, "has_true_scores": has_truth,
              "estimated": _diag_dict(diagnose(est))}
    if has_truth:
        hind = sweep_frontier(cohort, ScoreSource.TRUE, grid)
        real = sweep_frontier(cohort, ScoreSource.PREDICTED, grid, eval_with=ScoreSource.TRUE)
        write_columns(out / "hindsight_frontier.csv", {"alpha": grid, **_curve_columns(hind)})
        write_columns(out / "realized_frontier.csv", {"alpha": grid, **_curve_columns(real)})
        d = diagnose(hind, real)
        report["hindsight"] = _diag_dict(d)
        report["dominance_gaps"] = d.dominance_gaps.tolist()
        report["min_dominance_gap"] = float(d.dominance_gaps.min())
    write_json(out / "diagnostics.json", report)
    return report


def _diag_dict(d) -> dict:
    return {"p_min": d.p_min, "p_max": d.p_max, "w_max": d.w_max,
            "concavity_violation": d.concavity_violation}


def _learn_records(cfg: dict):
    if cfg["synthetic"] is not None:
        _require(int(cfg["synthetic"]) >= 10, "synthetic", "need at least 10 records")
        return learning.synthetic_abalone(int(cfg["synthetic"]), int(cfg["seed"]))
    path = cfg["data"] or learning.fixture_path()
    try:
        return learning.read_abalone_csv(path)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def cmd_learn(cfg: dict) -> dict:
    out = _out_dir(cfg)
    grid = _alpha_grid(cfg)
    records = _learn_records(cfg)
    feats = cfg["features"] if isinstance(cfg["features"], list) else [cfg["features"]]
    learning.resolve_features(feats)
    _require(0 <= int(cfg["replication"]) < 5, "replication", "must be in 0..4")
    _require(int(cfg["folds"]) >= 2, "folds", "need at least 2")
    conf = learning.LearnConfig(tuple(feats), tuple(float(x) for x in cfg["lambda_grid"]),
                                int(cfg["folds"]), cfg["train_size"], int(cfg["seed"]))
    res = learning.abalone_experiment(records, conf, int(cfg["replication"]),
                                      bool(cfg["center_scores"]))
    c = res.cohort
    write_columns(out / "scored_cohort.csv", {"p": c.profit, "w": c.welfare,
                                              "p_hat": c.profit_hat, "w_hat": c.welfare_hat})
    write_json(out / "hyperparameters.json", {
        "features": list(conf.features), "lambda_profit": res.lambda_profit,
        "lambda_welfare": res.lambda_welfare, "folds": conf.k, "train_size": cfg["train_size"],
        "replication": int(cfg["replication"]), "seed": conf.seed, "welfare_scale_c": res.c})
    report = {"mae_profit": res.mae_profit, "mae_welfare": res.mae_welfare,
              "n_eval": c.n, "n_records": len(records),
              "mean_profit": float(c.profit.mean()), "mean_welfare": float(c.welfare.mean()),
              "corr_profit_welfare": float(np.corrcoef(c.profit, c.welfare)[0, 1])}
    write_json(out / "mae_report.json", report)
    real = sweep_frontier(c, ScoreSource.PREDICTED, grid, eval_with=ScoreSource.TRUE)
    exact = sweep_frontier(c, ScoreSource.TRUE, grid)
    write_columns(out / "frontier.csv", {"alpha": grid, **_curve_columns(real),
                                         **_curve_columns(exact, "exact_")})
    return report


def synthetic_credit_groups(n: int, seed=0, u_plus=fair.U_PLUS, u_minus=fair.U_MINUS):
    """Two groups with logistic-Gaussian repayment probabilities (A lower on average)."""
    ss_a, ss_b = np.random.SeedSequence(seed).spawn(2)

    def draw(ss, mu):
        z = np.random.default_rng(ss).normal(mu, 1.0, n)
        return fair.repayment_profit_score(1.0 / (1.0 + np.exp(-z)), u_plus, u_minus)

    return fair.make_groups(draw(ss_a, 0.5), draw(ss_b, 1.5))


def _fairness_groups(cfg: dict):
    up, um = float(cfg["u_plus"]), float(cfg["u_minus"])
    if cfg["synthetic"] is not None:
        _require(int(cfg["synthetic"]) >= 1, "synthetic", "must be at least 1")
        return synthetic_credit_groups(int(cfg["synthetic"]), int(cfg["seed"]), up, um), {}
    _require(cfg["input"] is not None, "input", "an input CSV or --synthetic is required")
    path = cfg["input"]
    if "profit_score" in read_csv(path)[0]:
        cols = read_columns(path, ["group", "profit_score"], numeric=["profit_score"])
        profits, counts = cols["profit_score"], np.ones(cols["group"].size)
    else:
        cols = read_columns(path, ["group", "repay_prob"], ["count"], numeric=["repay_prob", "count"])
        try:
            profits = fair.repayment_profit_score(cols["repay_prob"], up, um)
        except ValueError:
            raise SchemaError(f"{path}: column 'repay_prob' must lie in [0, 1]") from None
        counts = cols.get("count", np.ones(profits.size))
    labels = sorted(set(cols["group"].tolist()))
    if len(labels) != 2:
        raise ValueError(f"group: need exactly 2 groups, found {len(labels)}")
    names = {"A": "A", "B": "B"} if labels == ["A", "B"] else dict(zip("AB", labels))
    g = cols["group"]
    ma, mb = g == names["A"], g == names["B"]
    return fair.make_groups(profits[ma], profits[mb], counts[ma], counts[mb]), names


def cmd_fairness(cfg: dict) -> dict:
    out = _out_dir(cfg)
    (ga, gb), names = _fairness_groups(cfg)
    res = int(cfg["rate_resolution"])
    _require(res >= 2, "rate_resolution", "need at least 2 points")
    if cfg["epsilon_grid"] is not None:
        eps = np.asarray(cfg["epsilon_grid"], dtype=float)
    else:
        _require(int(cfg["epsilon_points"]) >= 2, "epsilon_points", "need at least 2")
        gap = abs(fair.rate(gb, 0.0) - fair.rate(ga, 0.0))
        eps = np.linspace(0.0, min(1.0, 1.2 * gap), int(cfg["epsilon_points"]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sweep = fair.epsilon_sweep(ga, gb, eps, res)
    spec = fair.build_induced_welfare(sweep, cfg["variant"])
    write_columns(out / "epsilon_sweep.csv", {
        "epsilon": sweep.epsilons, "t_A": sweep.t_A, "t_B": sweep.t_B,
        "beta_A": [s.beta_A for s in sweep], "beta_B": [s.beta_B for s in sweep],
        "profit": [s.profit_utility for s in sweep],
        "alpha_eps": [spec.alpha(e) for e in sweep.epsilons],
        "t_A_raw": sweep.raw_t_A, "t_B_raw": sweep.raw_t_B,
    })
    roles = sweep[0].roles
    by_id = {ga.group_id: ga, gb.group_id: gb}
    rows_g, rows_p, rows_w = [], [], []
    for role, gid in zip("AB", roles):
        p = np.unique(by_id[gid].profits)
        rows_g += [names.get(gid, gid)] * p.size
        rows_p += p.tolist()
        rows_w += spec.welfare(role, p).tolist()
    write_columns(out / "induced_welfare.csv", {"group": rows_g, "p": rows_p, "w_induced": rows_w})
    reports = [fair.verify_fair_pareto_equivalence(s, spec, ga, gb, res) for s in sweep]
    va, vb = sweep.raw_monotonicity_violation()
    summary = {
        "variant": spec.variant.value, "rate_resolution": res,
        "roles": {"A": names.get(roles[0], roles[0]), "B": names.get(roles[1], roles[1])},
        "swapped": roles != ("A", "B"),
        "warnings": [str(w.message) for w in caught],
        "raw_threshold_violation": {"t_A_decrease": va, "t_B_increase": vb},
        "per_epsilon": [{"epsilon": r.epsilon, "alpha": r.alpha, "n_individuals": r.n_individuals,
                         "mismatches": r.mismatches,
                         "mismatches_outside_boundary": r.mismatches_outside_boundary}
                        for r in reports],
        "total_mismatches_outside_boundary": float(sum(r.mismatches_outside_boundary
                                                       for r in reports)),
    }
    write_json(out / "equivalence_report.json", summary)
    return summary


def cmd_bound(cfg: dict) -> dict:
    out = _out_dir(cfg)
    _require(int(cfg["alpha_points"]) >= 2, "alpha_points", "need at least 2 points")
    _require(int(cfg["rho_points"]) >= 2, "rho_points", "need at least 2 points")
    alphas = default_alpha_grid(int(cfg["alpha_points"]))
    rhos = np.linspace(-1.0, 1.0, int(cfg["rho_points"]))
    rows = {"alpha": [], "rho": [], "sigma_y": [], "optimal_utility": [], "lower_bound": []}
    for a in alphas:
        for r in rhos:
            m = _model(cfg, r)
            rows["alpha"].append(a)
            rows["rho"].append(r)
            rows["sigma_y"].append(sigma_y(m, a))
            rows["optimal_utility"].append(optimal_expected_alpha_utility(m, a))
            rows["lower_bound"].append(plugin_utility_lower_bound(m, a))
    write_columns(out / "lower_bound.csv", rows)
    return {"rows": len(rows["alpha"])}


COMMANDS = {"simulate": cmd_simulate, "frontier": cmd_frontier, "learn": cmd_learn,
            "fairness": cmd_fairness, "bound": cmd_bound}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
