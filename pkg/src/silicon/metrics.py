"""Correlation, 1-D Wasserstein distance, bootstrap baselines and the three data features."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .intake import ConfigDataset

SCORE_FIELDS = ("f1_bjw", "f1_gf", "f2_bjw", "f2_gf", "f3_abs_error")
SCORE_LABELS = {
    "f1_bjw": "Data Feature 1: BJW",
    "f1_gf": "Data Feature 1: Gut Feelings",
    "f2_bjw": "Data Feature 2: BJW",
    "f2_gf": "Data Feature 2: Gut Feelings",
    "f3_abs_error": "Data Feature 3",
}


class MetricError(ValueError):
    pass


class ZeroVariance(MetricError):
    pass


class LengthMismatch(MetricError):
    pass


class TooFewObservations(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class OutOfDomain(MetricError):
    pass


class MissingHumanMatch(MetricError):
    pass


@dataclass(frozen=True)
class CorrelationEstimate:
    r: float
    n: int
    ci_low: float
    ci_high: float
    p_value: float

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DistanceEstimate:
    w: float
    scale_id: str | None = None


@dataclass(frozen=True)
class BaselineBand:
    point: float
    ci_low: float
    ci_high: float
    iterations: int
    seed: int

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def fisher_ci(r: float, n: int, level: float = 0.95) -> tuple[float, float]:
    if n <= 3:
        return -1.0, 1.0
    if abs(r) >= 1.0:
        return r, r
    z = math.atanh(r)
    half = stats.norm.ppf(0.5 + level / 2) / math.sqrt(n - 3)
    return math.tanh(z - half), math.tanh(z + half)


def correlation_p_value(r: float, n: int) -> float:
    """Two-sided p from t = r * sqrt((n - 2) / (1 - r^2)) on n - 2 df."""
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationEstimate:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.shape} vs {y.shape}")
    n = len(x)
    if n < 3:
        raise TooFewObservations(f"need at least 3 observations, got {n}")
    # test constancy directly: the mean of identical floats need not equal them exactly
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ZeroVariance("correlation undefined for a constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("variance underflows to zero")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    lo, hi = fisher_ci(r, n)
    return CorrelationEstimate(r, n, lo, hi, correlation_p_value(r, n))


def spearman(x: Sequence[float], y: Sequence[float]) -> CorrelationEstimate:
    """Pearson on average ranks; CI and p use the same approximations as ``pearson``."""
    if len(x) != len(y):
        raise LengthMismatch(f"lengths differ: {len(x)} vs {len(y)}")
    return pearson(stats.rankdata(x), stats.rankdata(y))


CORRELATIONS = {"pearson": pearson, "spearman": spearman}


def _check_unit_sample(values, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise OutOfDomain(f"{name} has values outside [0, 1]")
    return arr


def wasserstein_1d(a: Sequence[float], b: Sequence[float], scale_id: str | None = None) -> DistanceEstimate:
    """W1 between two empirical distributions on [0, 1].

    Integrates |F_a - F_b| piecewise over the merged support.
    """
    a = np.sort(_check_unit_sample(a, "a"))
    b = np.sort(_check_unit_sample(b, "b"))
    knots = np.unique(np.concatenate([a, b]))
    if knots.size < 2:
        return DistanceEstimate(0.0, scale_id)
    # ECDFs are constant on [knots[i], knots[i+1])
    fa = np.searchsorted(a, knots[:-1], side="right") / a.size
    fb = np.searchsorted(b, knots[:-1], side="right") / b.size
    w = float(np.sum(np.abs(fa - fb) * np.diff(knots)))
    return DistanceEstimate(w, scale_id)


def wasserstein_sorted(a: Sequence[float], b: Sequence[float]) -> float:
    """Equal-size shortcut: mean absolute difference of the order statistics."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size != b.size:
        raise LengthMismatch("sorted-difference W1 needs equal sample sizes")
    if a.size == 0:
        raise EmptyInput("empty samples")
    return float(np.mean(np.abs(a - b)))


def bootstrap_human_baseline(human_scores: Sequence[float], B: int = 2000, seed: int = 0,
                             level: float = 0.95) -> BaselineBand:
    """Spread of W1 between two independent resamples of the human data.

    Each of ``B`` iterations draws two with-replacement resamples of size n
    and records their distance; the band is the percentile interval.
    """
    scores = _check_unit_sample(human_scores, "human_scores")
    if scores.size < 2:
        raise EmptyInput("need at least two human scores")
    if B < 1:
        raise ValueError("B must be >= 1")
    n = scores.size
    rng = np.random.default_rng(seed)
    first = np.sort(scores[rng.integers(0, n, size=(B, n))], axis=1)
    second = np.sort(scores[rng.integers(0, n, size=(B, n))], axis=1)
    distances = np.mean(np.abs(first - second), axis=1)
    tail = (1.0 - level) / 2 * 100
    lo, hi = np.percentile(distances, [tail, 100 - tail])
    point = float(np.mean(distances))
    return BaselineBand(point, min(float(lo), point), max(float(hi), point), B, seed)


# -- data features -----------------------------------------------------------

HumanScores = Mapping[str, Mapping]  # participant_id -> scale_id -> ScaleScore


def feature1_ranking(dataset: ConfigDataset, human: HumanScores, scale_id: str,
                     method: str = "pearson") -> CorrelationEstimate:
    """Correlation between silicon and human raw scores, paired by participant."""
    silicon, truth = [], []
    for row in dataset.rows:
        try:
            truth.append(human[row.participant_id][scale_id].raw)
        except KeyError:
            raise MissingHumanMatch(f"{dataset.config_id}: no human score for "
                                    f"{row.participant_id!r} on {scale_id}") from None
        silicon.append(row.scores[scale_id].raw)
    return CORRELATIONS[method](truth, silicon)


def feature2_distribution(dataset: ConfigDataset, human: HumanScores, scale_id: str) -> DistanceEstimate:
    silicon = dataset.normalized_scores(scale_id)
    truth = [scores[scale_id].normalized for scores in human.values()]
    return wasserstein_1d(silicon, truth, scale_id)


def human_relationship(human: HumanScores, first: str = "bjw", second: str = "gf") -> CorrelationEstimate:
    return pearson([s[first].raw for s in human.values()], [s[second].raw for s in human.values()])


def feature3_relationship(dataset: ConfigDataset, human_r: CorrelationEstimate,
                          first: str = "bjw", second: str = "gf"):
    r_hat = pearson(dataset.raw_scores(first), dataset.raw_scores(second))
    return r_hat, abs(r_hat.r - human_r.r)


@dataclass(frozen=True)
class ConfigScores:
    config_id: str
    f1_bjw: float | None = None
    f1_gf: float | None = None
    f2_bjw: float | None = None
    f2_gf: float | None = None
    f3_abs_error: float | None = None
    f3_r_hat: float | None = None
    n: int = 0
    completeness: float = 0.0

    @property
    def complete(self) -> bool:
        return all(getattr(self, name) is not None for name in SCORE_FIELDS)

    def value(self, name: str) -> float | None:
        return getattr(self, name)


def score_configuration(dataset: ConfigDataset, human: HumanScores, human_r: CorrelationEstimate,
                        zero_variance: Mapping[str, bool], method: str = "pearson") -> ConfigScores:
    """All five scores for one retained configuration; ineligible ones stay ``None``.

    A zero-variance scale drops out of Features 1 and 3 but keeps Feature 2.
    """
    values = {}
    for sid in ("bjw", "gf"):
        if not zero_variance.get(sid, False):
            try:
                values[f"f1_{sid}"] = feature1_ranking(dataset, human, sid, method).r
            except (ZeroVariance, TooFewObservations):
                pass
        if dataset.rows:
            values[f"f2_{sid}"] = feature2_distribution(dataset, human, sid).w
    if not (zero_variance.get("bjw") or zero_variance.get("gf")):
        try:
            r_hat, err = feature3_relationship(dataset, human_r)
            values["f3_r_hat"], values["f3_abs_error"] = r_hat.r, err
        except (ZeroVariance, TooFewObservations):
            pass
    return ConfigScores(dataset.config_id, n=len(dataset.rows),
                        completeness=dataset.completeness_fraction, **values)


# -- consistency -------------------------------------------------------------


@dataclass
class ConsistencyMatrix:
    variables: tuple[str, ...]
    # cells[i][j] is None where a variable has no variance across configurations
    cells: list[list[CorrelationEstimate | None]]
    n: int
    means: dict[str, float]
    sds: dict[str, float]
    accuracy_orientation: bool = False

    def cell(self, a: str, b: str) -> CorrelationEstimate | None:
        return self.cells[self.variables.index(a)][self.variables.index(b)]

    def r_matrix(self) -> np.ndarray:
        return np.array([[np.nan if c is None else c.r for c in row] for row in self.cells])

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "n": self.n,
            "accuracy_orientation": self.accuracy_orientation,
            "means": self.means,
            "sds": self.sds,
            "cells": [[None if c is None else c.to_dict() for c in row] for row in self.cells],
        }


def consistency_matrix(scores: Sequence[ConfigScores], accuracy_orientation: bool = False) -> ConsistencyMatrix:
    """Pairwise correlations of the five scores over complete-case configurations.

    With ``accuracy_orientation`` the Feature 3 error column is negated so
    that larger means better, for sign comparisons with published tables.
    """
    complete = [s for s in scores if s.complete]
    if len(complete) < 3:
        raise TooFewObservations(
            f"consistency needs at least 3 complete-case configurations, got {len(complete)}"
        )
    data = {name: np.array([s.value(name) for s in complete], float) for name in SCORE_FIELDS}
    if accuracy_orientation:
        data["f3_abs_error"] = -data["f3_abs_error"]
    k = len(SCORE_FIELDS)
    cells: list[list[CorrelationEstimate | None]] = [[None] * k for _ in range(k)]
    for i, a in enumerate(SCORE_FIELDS):
        for j, b in enumerate(SCORE_FIELDS):
            if j < i:
                cells[i][j] = cells[j][i]
                continue
            try:
                if i == j:
                    pearson(data[a], data[a])  # raises on zero variance
                    cells[i][j] = CorrelationEstimate(1.0, len(complete), 1.0, 1.0, 0.0)
                else:
                    cells[i][j] = pearson(data[a], data[b])
            except ZeroVariance:
                cells[i][j] = None
    return ConsistencyMatrix(
        SCORE_FIELDS,
        cells,
        len(complete),
        {name: float(np.mean(v)) for name, v in data.items()},
        {name: float(np.std(v, ddof=1)) for name, v in data.items()},
        accuracy_orientation,
    )


def stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _fmt(x: float) -> str:
    # APA style: no leading zero for quantities bounded by 1
    return f"{x:.2f}".replace("0.", ".", 1)


def format_cell(est: CorrelationEstimate | None) -> str:
    if est is None:
        return "NA"
    return f"{_fmt(est.r)}{stars(est.p_value)} [{_fmt(est.ci_low)}, {_fmt(est.ci_high)}]"


def format_table(matrix: ConsistencyMatrix) -> str:
    """Lower-triangular table with stars (* p < .05, ** p < .01) and 95% CIs."""
    k = len(matrix.variables)
    header = ["Variable", "M", "SD"] + [str(i + 1) for i in range(k - 1)]
    lines = ["\t".join(header)]
    for i, name in enumerate(matrix.variables):
        row = [f"{i + 1}. {SCORE_LABELS[name]}", f"{matrix.means[name]:.2f}", f"{matrix.sds[name]:.2f}"]
        row += [format_cell(matrix.cells[i][j]) for j in range(i)]
        row += [""] * (k - 1 - i)
        lines.append("\t".join(row))
    lines.append(f"Note. n = {matrix.n} configurations. Values in square brackets are 95% CIs. "
                 "* indicates p < .05. ** indicates p < .01.")
    return "\n".join(lines) + "\n"
