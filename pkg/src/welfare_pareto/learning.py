"""Score learning: abalone score definitions, feature encoding, and ridge
regression with k-fold selection of the penalty."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .core import Cohort, NumericalError

MEAT_PRICE_PER_GRAM = 0.25
SHELL_PRICE_PER_CM2 = 0.32
NUMERIC_FEATURES = ("length", "diameter", "height", "whole_weight",
                    "shucked_weight", "viscera_weight", "shell_weight")
SEXES = ("F", "M", "I")
FEATURE_ALIASES = {
    "all": ("sex",) + NUMERIC_FEATURES,
    "weight": ("whole_weight",),
}
DEFAULT_LAMBDA_GRID = tuple(np.logspace(-8, 2, num=11, base=10))
TRAIN_SIZE_LADDER = (16, 33, 334, 3341)


@dataclass(frozen=True)
class AbaloneRecord:
    sex: str
    length: float
    diameter: float
    height: float
    whole_weight: float
    shucked_weight: float
    viscera_weight: float
    shell_weight: float
    rings: int

    def __post_init__(self):
        if self.sex not in SEXES:
            raise ValueError(f"sex must be one of {SEXES}, got {self.sex!r}")
        for name in NUMERIC_FEATURES:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a non-negative number, got {v!r}")
        if self.rings < 0:
            raise ValueError("rings must be non-negative")


def _parse_row(row: Sequence[str], lineno: int) -> AbaloneRecord:
    if len(row) != 9:
        raise ValueError(f"line {lineno}: expected 9 columns, got {len(row)}")
    try:
        nums = [float(v) for v in row[1:8]]
        rings = int(float(row[8]))
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from None
    return AbaloneRecord(row[0].strip(), *nums, rings)


def read_abalone_csv(path) -> list[AbaloneRecord]:
    """Read the UCI abalone table (9 columns, optional header row)."""
    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if lineno == 1 and row[0].strip() not in SEXES:
                continue  # header
            records.append(_parse_row(row, lineno))
    if not records:
        raise ValueError(f"{path}: no abalone records")
    return records


def write_abalone_csv(path, records: Iterable[AbaloneRecord]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        for r in records:
            out.writerow([r.sex] + [repr(float(getattr(r, f))) for f in NUMERIC_FEATURES] + [r.rings])


def fixture_path() -> Path:
    return Path(__file__).parent / "data" / "abalone_fixture.csv"


def synthetic_abalone(n: int, seed=None) -> list[AbaloneRecord]:
    """Abalone-like records from a simple allometric growth model.

    Not real measurements: used for offline demos and tests when the UCI file
    is unavailable. Size follows a von Bertalanffy curve in age, weights scale
    with length cubed, and young animals are mostly labelled infant.
    """
    rng = np.random.default_rng(seed)
    rings = np.clip(np.rint(rng.gamma(9.0, 1.1, n)), 1, 29).astype(int)
    age = rings + 1.5
    length = np.clip(0.72 * (1 - np.exp(-0.19 * age)) + rng.normal(0, 0.075, n), 0.075, 0.815)
    diameter = np.clip(0.8 * length + rng.normal(0, 0.015, n), 0.055, 0.65)
    height = np.clip(0.34 * length + rng.normal(0, 0.012, n), 0.01, 0.3)
    whole = 5.8 * length ** 3 * np.exp(rng.normal(0, 0.12, n))
    shucked = whole * 0.43 * np.exp(rng.normal(0, 0.1, n))
    viscera = whole * 0.22 * np.exp(rng.normal(0, 0.12, n))
    shell = whole * 0.29 * np.exp(rng.normal(0, 0.1, n))
    infant = rng.random(n) < 1 / (1 + np.exp(rings - 8.0))
    sex = np.where(infant, "I", np.where(rng.random(n) < 0.5, "M", "F"))
    r4 = lambda a: np.round(a, 4)  # noqa: E731
    return [AbaloneRecord(str(s), *map(float, vals), int(k)) for s, *vals, k in zip(
        sex, r4(length), r4(diameter), r4(height), r4(whole), r4(shucked), r4(viscera),
        r4(shell), rings)]


class AbaloneScores(NamedTuple):
    profit: np.ndarray
    welfare: np.ndarray
    c: float


def abalone_profit(records: Sequence[AbaloneRecord]) -> np.ndarray:
    shucked = np.array([r.shucked_weight for r in records])
    length = np.array([r.length for r in records])
    diameter = np.array([r.diameter for r in records])
    return MEAT_PRICE_PER_GRAM * (200 * shucked) \
        + SHELL_PRICE_PER_CM2 * (20 * length) * (20 * diameter)


def abalone_log_age(records: Sequence[AbaloneRecord]) -> np.ndarray:
    rings = np.array([r.rings for r in records], dtype=float)
    return np.log((rings + 1.5) / 10)


def abalone_scores(records: Sequence[AbaloneRecord], c: Optional[float] = None) -> AbaloneScores:
    """Profit (meat and shell value) and welfare (scaled log age) scores.

    When ``c`` is omitted it is chosen so the welfare scores have the same
    standard deviation as the profit scores over ``records``; pass the
    training-set constant to score held-out records.
    """
    if len(records) == 0:
        raise ValueError("no records to score")
    p = abalone_profit(records)
    logage = abalone_log_age(records)
    if c is None:
        sd = logage.std()
        if sd == 0:
            raise NumericalError("all records have the same age; the welfare scale is undefined")
        c = float(p.std() / sd)
    return AbaloneScores(p, c * logage, float(c))


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("feature matrix must be 2-D with at least one row and column")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature matrix has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def resolve_features(feature_subset: Iterable[str]) -> tuple[str, ...]:
    names: list[str] = []
    for f in feature_subset:
        for g in FEATURE_ALIASES.get(f, (f,)):
            if g != "sex" and g not in NUMERIC_FEATURES:
                raise ValueError(f"unknown feature {g!r}; choose from sex, "
                                 f"{', '.join(NUMERIC_FEATURES)}, all, weight")
            if g not in names:
                names.append(g)
    if not names:
        raise ValueError("feature subset is empty")
    return tuple(names)


def encode_features(records: Sequence[AbaloneRecord], feature_subset: Iterable[str]) -> FeatureMatrix:
    """Numeric columns pass through; ``sex`` becomes three indicator columns."""
    cols, names = [], []
    for f in resolve_features(feature_subset):
        if f == "sex":
            for s in SEXES:
                cols.append([float(r.sex == s) for r in records])
                names.append(f"sex_{s}")
        else:
            cols.append([getattr(r, f) for r in records])
            names.append(f)
    return FeatureMatrix(np.array(cols).T, tuple(names))


def _matrix(X) -> np.ndarray:
    return X.values if isinstance(X, FeatureMatrix) else np.atleast_2d(np.asarray(X, dtype=float))


@dataclass(frozen=True, eq=False)
class RidgeModel:
    """Ridge fit on standardized columns with an unpenalized intercept.

    ``weights`` are in standardized coordinates; ``predict`` applies the
    stored column means and scales.
    """

    weights: np.ndarray
    intercept: float
    lam: float
    mean: np.ndarray
    scale: np.ndarray

    def standardize(self, X) -> np.ndarray:
        return (_matrix(X) - self.mean) / self.scale

    def predict(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.intercept

    def objective(self, X, y, weights=None, intercept=None) -> float:
        b = self.weights if weights is None else weights
        c = self.intercept if intercept is None else intercept
        r = np.asarray(y, dtype=float) - self.standardize(X) @ b - c
        return float(r @ r + self.lam * b @ b)


def ridge_fit(X, y, lam: float) -> RidgeModel:
    """Minimize ||y - Z b - c||^2 + lam ||b||^2 with Z the standardized columns."""
    A = _matrix(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if A.shape[0] != y.size or y.size < 1:
        raise ValueError(f"X has {A.shape[0]} rows but y has {y.size} entries")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    mean = A.mean(axis=0)
    scale = A.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (A - mean) / scale
    ybar = float(y.mean())
    gram = Z.T @ Z + lam * np.eye(Z.shape[1])
    if lam == 0 and np.linalg.matrix_rank(gram) < Z.shape[1]:
        raise NumericalError("singular normal equations at lambda=0 (collinear or constant "
                             "columns); use a positive lambda")
    weights = np.linalg.solve(gram, Z.T @ (y - ybar))
    return RidgeModel(weights, ybar, float(lam), mean, scale)


def mean_absolute_error(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if pred.size != truth.size:
        raise ValueError(f"length mismatch: {pred.size} predictions, {truth.size} targets")
    return float(np.mean(np.abs(pred - truth)))


def kfold_indices(n: int, k: int, seed=None) -> list[np.ndarray]:
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"cannot split {n} samples into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def kfold_select(X, y, lambda_grid=DEFAULT_LAMBDA_GRID, k: int = 4, seed=None):
    """Choose the penalty with the lowest mean fold MAE and refit on all data.

    Ties go to the larger penalty. Returns ``(best_lambda, model, cv_mae)``
    with ``cv_mae`` the fold-averaged error per grid value.
    """
    A = _matrix(X)
    y = np.asarray(y, dtype=float).reshape(-1)
    grid = np.asarray(lambda_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    folds = kfold_indices(y.size, k, seed)
    cv = np.zeros(grid.size)
    for f, test in enumerate(folds):
        train = np.concatenate([g for j, g in enumerate(folds) if j != f])
        for i, lam in enumerate(grid):
            try:
                model = ridge_fit(A[train], y[train], lam)
            except NumericalError:
                cv[i] = np.inf
                continue
            cv[i] += mean_absolute_error(model.predict(A[test]), y[test]) / k
    if not np.isfinite(cv).any():
        raise NumericalError("no penalty in the grid gave a solvable fit")
    best = cv.min()
    tied = np.flatnonzero(cv <= best + 1e-12 * abs(best))
    lam = float(grid[tied[np.argmax(grid[tied])]])
    return lam, ridge_fit(A, y, lam), cv


@dataclass(frozen=True)
class LearnConfig:
    features: tuple[str, ...] = ("all",)
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    k: int = 4
    train_subsample: Optional[int] = None
    seed: int = 0


@dataclass(frozen=True, eq=False)
class LearnResult:
    cohort: Cohort
    mae_profit: float
    mae_welfare: float
    lambda_profit: float
    lambda_welfare: float
    profit_model: RidgeModel = field(repr=False)
    welfare_model: RidgeModel = field(repr=False)
    c: Optional[float] = None


def learn_score_functions(train_records: Sequence[AbaloneRecord], train_scores,
                          eval_records: Sequence[AbaloneRecord], eval_scores,
                          config: LearnConfig = LearnConfig()) -> LearnResult:
    """Fit profit and welfare ridge predictors and score the evaluation set.

    ``train_scores`` and ``eval_scores`` are ``(profit, welfare)`` array
    pairs. The training set is first subsampled (without replacement) to
    ``config.train_subsample`` records.
    """
    tp, tw = (np.asarray(a, dtype=float) for a in train_scores[:2])
    ep, ew = (np.asarray(a, dtype=float) for a in eval_scores[:2])
    n_train = len(train_records)
    size = n_train if config.train_subsample is None else config.train_subsample
    if not 1 <= size <= n_train:
        raise ValueError(f"train_subsample {size} outside [1, {n_train}]")
    ss_sub, ss_p, ss_w = np.random.SeedSequence(config.seed).spawn(3)
    idx = np.sort(np.random.default_rng(ss_sub).choice(n_train, size=size, replace=False))
    X = encode_features([train_records[i] for i in idx], config.features)
    Xe = encode_features(eval_records, config.features)
    lam_p, model_p, _ = kfold_select(X, tp[idx], config.lambda_grid, config.k, ss_p)
    lam_w, model_w, _ = kfold_select(X, tw[idx], config.lambda_grid, config.k, ss_w)
    ph, wh = model_p.predict(Xe), model_w.predict(Xe)
    cohort = Cohort(ep, ew, ph, wh)
    return LearnResult(cohort, mean_absolute_error(ph, ep), mean_absolute_error(wh, ew),
                       lam_p, lam_w, model_p, model_w)


def outer_split(n: int, replication: int, folds: int = 5, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Train/eval indices for one outer fold (eval share ``1/folds``)."""
    parts = kfold_indices(n, folds, seed)
    ev = parts[replication % folds]
    tr = np.concatenate([p for j, p in enumerate(parts) if j != replication % folds])
    return np.sort(tr), np.sort(ev)


def abalone_experiment(records: Sequence[AbaloneRecord], config: LearnConfig = LearnConfig(),
                       replication: int = 0, center_scores: bool = False) -> LearnResult:
    """Outer 80/20 split, scores with the training-set welfare scale, then learning.

    With ``center_scores`` both score sets are shifted by the training-set
    profit mean so that profit is centred at zero.
    """
    tr, ev = outer_split(len(records), replication, seed=config.seed)
    train = [records[i] for i in tr]
    evals = [records[i] for i in ev]
    s_train = abalone_scores(train)
    s_eval = abalone_scores(evals, c=s_train.c)
    tp, ep = s_train.profit, s_eval.profit
    if center_scores:
        shift = tp.mean()
        tp, ep = tp - shift, ep - shift
    cfg = LearnConfig(config.features, config.lambda_grid, config.k, config.train_subsample,
                      config.seed * 1000 + replication)
    res = learn_score_functions(train, (tp, s_train.welfare), evals, (ep, s_eval.welfare), cfg)
    return LearnResult(res.cohort, res.mae_profit, res.mae_welfare, res.lambda_profit,
                       res.lambda_welfare, res.profit_model, res.welfare_model, s_train.c)
