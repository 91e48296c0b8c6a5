import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from silicon.intake import ConfigDataset, DatasetRow
from silicon.metrics import (
    BaselineBand,
    ConfigScores,
    EmptyInput,
    LengthMismatch,
    OutOfDomain,
    TooFewObservations,
    ZeroVariance,
    bootstrap_human_baseline,
    consistency_matrix,
    correlation_p_value,
    fisher_ci,
    format_cell,
    format_table,
    pearson,
    score_configuration,
    spearman,
    stars,
    wasserstein_1d,
    wasserstein_sorted,
)
from silicon.study import make_score, score_participants

from oracles import pearson_decimal, w1_exact, w1_grid

unit = st.floats(0, 1, allow_nan=False)
samples = st.lists(unit, min_size=1, max_size=30)


# -- Wasserstein -------------------------------------------------------------


@pytest.mark.parametrize("a,b,expected", [
    ([0, 1], [0, 0], 0.5),
    ([0, 0, 1, 1], [0, 1, 1, 1], 0.25),
    ([0.2], [0.7], 0.5),
    ([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], 0.0),
    ([0, 1], [0.5], 0.5),
])
def test_w1_worked_examples(a, b, expected):
    assert float(w1_exact(a, b)) == pytest.approx(expected, abs=1e-15)
    assert wasserstein_1d(a, b).w == pytest.approx(expected, abs=1e-12)


def test_w1_against_exact_oracle_unequal_sizes():
    rng = np.random.default_rng(123)
    for _ in range(200):
        a = rng.random(rng.integers(1, 40))
        b = rng.random(rng.integers(1, 40))
        assert abs(wasserstein_1d(a, b).w - float(w1_exact(a, b))) < 1e-9


def test_w1_against_grid_oracle():
    # grid integration is a coarser, independent check of the exact oracle itself
    rng = np.random.default_rng(9)
    for _ in range(5):
        a, b = rng.random(7), rng.random(11)
        assert float(w1_exact(a, b)) == pytest.approx(w1_grid(a, b), abs=2e-4)


def test_w1_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b = rng.random(rng.integers(1, 60)), rng.random(rng.integers(1, 60))
        assert wasserstein_1d(a, b).w == pytest.approx(stats.wasserstein_distance(a, b), abs=1e-12)


def test_w1_domain_errors():
    with pytest.raises(EmptyInput):
        wasserstein_1d([], [0.5])
    with pytest.raises(OutOfDomain):
        wasserstein_1d([1.2], [0.5])
    with pytest.raises(OutOfDomain):
        wasserstein_1d([float("nan")], [0.5])
    with pytest.raises(LengthMismatch):
        wasserstein_sorted([0.1], [0.1, 0.2])


@given(samples, samples)
def test_w1_symmetric_and_bounded(a, b):
    w = wasserstein_1d(a, b).w
    assert 0.0 <= w <= 1.0 + 1e-12
    assert w == pytest.approx(wasserstein_1d(b, a).w, abs=1e-12)


@given(samples)
def test_w1_identity(a):
    assert wasserstein_1d(a, list(reversed(a))).w == 0.0


@given(samples, samples, samples)
def test_w1_triangle(a, b, c):
    ab, bc, ac = (wasserstein_1d(*p).w for p in ((a, b), (b, c), (a, c)))
    assert ac <= ab + bc + 1e-12


@given(st.lists(st.floats(0, 0.8, allow_nan=False), min_size=1, max_size=30),
       st.floats(0, 0.2, allow_nan=False))
def test_w1_translation(a, shift):
    shifted = [x + shift for x in a]
    assert wasserstein_1d(a, shifted).w == pytest.approx(shift, abs=1e-12)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    st.lists(unit, min_size=n, max_size=n), st.lists(unit, min_size=n, max_size=n))))
def test_w1_equal_size_shortcut(pair):
    a, b = pair
    assert wasserstein_1d(a, b).w == pytest.approx(wasserstein_sorted(a, b), abs=1e-12)


# -- correlation -------------------------------------------------------------


def test_pearson_against_decimal_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(3, 60))
        x = rng.normal(size=n)
        y = 0.3 * x + rng.normal(size=n)
        assert abs(pearson(x, y).r - pearson_decimal(x, y)) < 1e-12


def test_pearson_matches_scipy():
    rng = np.random.default_rng(6)
    x, y = rng.normal(size=40), rng.normal(size=40)
    ref = stats.pearsonr(x, y)
    est = pearson(x, y)
    assert est.r == pytest.approx(ref[0], abs=1e-12)
    assert est.p_value == pytest.approx(ref[1], rel=1e-9)


def test_fisher_ci_published_values():
    lo, hi = fisher_ci(0.26, 85)
    assert (round(lo, 2), round(hi, 2)) == (0.05, 0.45)
    # hand computation: atanh(.26) = .266108, half-width 1.959964 / sqrt(82) = .216442
    assert lo == pytest.approx(math.tanh(0.266108 - 0.216442), abs=1e-5)
    assert hi == pytest.approx(math.tanh(0.266108 + 0.216442), abs=1e-5)
    lo, hi = fisher_ci(0.40, 232)
    assert (round(lo, 2), round(hi, 2)) == (0.29, 0.50)


def test_fisher_ci_degenerate():
    assert fisher_ci(0.5, 3) == (-1.0, 1.0)
    assert fisher_ci(1.0, 10) == (1.0, 1.0)
    assert fisher_ci(-1.0, 10) == (-1.0, -1.0)


def test_pearson_errors():
    with pytest.raises(ZeroVariance):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(TooFewObservations):
        pearson([1, 2], [2, 1])
    with pytest.raises(LengthMismatch):
        pearson([1, 2, 3], [1, 2])


def test_spearman_ties():
    x = [1, 2, 2, 3, 4]
    y = [10, 20, 20, 25, 40]
    assert spearman(x, y).r == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-12)


@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=40),
       st.floats(0.1, 10), st.floats(-100, 100))
def test_pearson_affine_invariance(x, a, b):
    rng = np.random.default_rng(len(x))
    y = np.asarray(x) + rng.normal(size=len(x)) * 10
    try:
        base = pearson(x, y)
    except ZeroVariance:
        return
    moved = pearson([a * v + b for v in x], y)
    assert -1 <= base.r <= 1
    assert moved.r == pytest.approx(base.r, abs=1e-9)
    assert base.ci_low <= base.r <= base.ci_high


def test_p_value_and_stars():
    assert correlation_p_value(0.0, 30) == pytest.approx(1.0)
    assert stars(0.049) == "*" and stars(0.05) == ""
    assert stars(0.0099) == "**" and stars(0.01) == "*"


# -- bootstrap ---------------------------------------------------------------


def test_bootstrap_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(0)
    data = np.clip(np.concatenate([rng.normal(0.2, 0.05, 40), rng.normal(0.8, 0.05, 45)]), 0, 1)
    a = bootstrap_human_baseline(data, 2000, seed=7)
    b = bootstrap_human_baseline(data, 2000, seed=7)
    c = bootstrap_human_baseline(data, 2000, seed=8)
    assert a == b
    assert a != c
    assert a.ci_low <= a.point <= a.ci_high


def test_bootstrap_constant_input():
    band = bootstrap_human_baseline([0.4] * 85, 2000, seed=3)
    assert (band.point, band.ci_low, band.ci_high) == (0.0, 0.0, 0.0)


def test_bootstrap_against_loop_oracle():
    """Same draws replayed one iteration at a time with the scalar W1."""
    data = np.random.default_rng(2).random(20)
    band = bootstrap_human_baseline(data, 50, seed=4)
    rng = np.random.default_rng(4)
    first = rng.integers(0, 20, size=(50, 20))
    second = rng.integers(0, 20, size=(50, 20))
    dists = [float(w1_exact(data[first[k]], data[second[k]])) for k in range(50)]
    assert band.point == pytest.approx(np.mean(dists), abs=1e-12)
    assert band.ci_low == pytest.approx(np.percentile(dists, 2.5), abs=1e-12)
    assert band.ci_high == pytest.approx(np.percentile(dists, 97.5), abs=1e-12)


def test_bootstrap_errors():
    with pytest.raises(EmptyInput):
        bootstrap_human_baseline([0.5])
    with pytest.raises(ValueError):
        bootstrap_human_baseline([0.1, 0.2], B=0)


# -- features ----------------------------------------------------------------


def _dataset(config_id, records, scales, ratings_fn):
    rows = []
    for p in records:
        ratings = ratings_fn(p)
        scores = {s.scale_id: make_score(p.participant_id, s, [ratings[i] for i in s.item_ids])
                  for s in scales}
        rows.append(DatasetRow(p.participant_id, ratings, scores))
    return ConfigDataset(config_id, rows, len(records))


def _truth(p):
    return {item_id: v for (_, item_id), v in p.responses.items()}


def test_echo_dataset_scores_perfectly(participants, scales):
    human = score_participants(participants, scales)
    from silicon.metrics import human_relationship
    hr = human_relationship(human)
    ds = _dataset("c", participants, scales, _truth)
    s = score_configuration(ds, human, hr, {"bjw": False, "gf": False})
    assert (s.f1_bjw, s.f1_gf, s.f2_bjw, s.f2_gf, s.f3_abs_error) == (1.0, 1.0, 0.0, 0.0, 0.0)
    assert s.complete and s.n == 85 and s.completeness == 1.0


def test_zero_variance_scale_keeps_feature2(participants, scales):
    human = score_participants(participants, scales)
    from silicon.metrics import human_relationship
    hr = human_relationship(human)

    def flat_gf(p):
        r = _truth(p)
        r["gf_european_americans"], r["gf_african_americans"] = 5, 5
        return r

    ds = _dataset("c", participants, scales, flat_gf)
    s = score_configuration(ds, human, hr, {"bjw": False, "gf": True})
    assert s.f1_gf is None and s.f3_abs_error is None and s.f3_r_hat is None
    assert s.f1_bjw == 1.0 and s.f2_bjw == 0.0
    assert s.f2_gf is not None and s.f2_gf > 0
    assert not s.complete


# -- consistency -------------------------------------------------------------


def _random_scores(rng, n):
    cols = rng.normal(size=(5, n))
    return [ConfigScores(f"c{i}", *cols[:, i], n=85, completeness=1.0) for i in range(n)]


def test_consistency_matrix_matches_numpy():
    rng = np.random.default_rng(0)
    scores = _random_scores(rng, 60)
    m = consistency_matrix(scores)
    data = np.array([[getattr(s, f) for f in m.variables] for s in scores]).T
    assert np.allclose(m.r_matrix(), np.corrcoef(data), atol=1e-12)
    assert m.cell("f1_bjw", "f2_gf") is m.cell("f2_gf", "f1_bjw")


def test_accuracy_orientation_flips_f3_signs():
    rng = np.random.default_rng(1)
    scores = _random_scores(rng, 40)
    plain = consistency_matrix(scores).r_matrix()
    flipped = consistency_matrix(scores, accuracy_orientation=True).r_matrix()
    assert np.allclose(flipped[4, :4], -plain[4, :4])
    assert np.allclose(flipped[:4, :4], plain[:4, :4])


def test_consistency_complete_case_and_zero_variance():
    rng = np.random.default_rng(2)
    scores = _random_scores(rng, 20)
    scores.append(ConfigScores("partial", f1_bjw=0.3))
    assert consistency_matrix(scores).n == 20
    flat = [ConfigScores(s.config_id, s.f1_bjw, 0.5, s.f2_bjw, s.f2_gf, s.f3_abs_error) for s in scores[:20]]
    m = consistency_matrix(flat)
    assert m.cell("f1_gf", "f1_bjw") is None
    assert "NA" in format_table(m)
    with pytest.raises(TooFewObservations):
        consistency_matrix(scores[:2])


def test_table_formatting():
    from silicon.metrics import CorrelationEstimate
    assert format_cell(CorrelationEstimate(0.401, 232, 0.29, 0.5, 1e-9)) == ".40** [.29, .50]"
    assert format_cell(CorrelationEstimate(-0.14, 232, -0.27, -0.01, 0.03)) == "-.14* [-.27, -.01]"
    rng = np.random.default_rng(3)
    text = format_table(consistency_matrix(_random_scores(rng, 30)))
    lines = text.splitlines()
    assert lines[0].split("\t") == ["Variable", "M", "SD", "1", "2", "3", "4"]
    assert lines[1].startswith("1. Data Feature 1: BJW")
    assert "* indicates p < .05" in lines[-1]
    assert isinstance(BaselineBand(0, 0, 0, 1, 1).to_dict(), dict)
