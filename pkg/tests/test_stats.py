import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wordgraph.errors import DataError
from wordgraph.graphcore import ATTRIBUTES, AttributeVector
from wordgraph.pipeline import CorpusRecord, TextProfile
from wordgraph.stats import (
    ALPHA,
    FitPoint,
    asymptotic_model,
    attribute_sd,
    average_ranks,
    correlate,
    correlate_corpus,
    fit_asymptotic,
    fit_corpus,
    fit_points,
    per_year_means,
    spearman,
    spearman_permutation_pvalue,
    spearman_pvalue,
    suggest_grade,
)

YEARS = np.arange(12, dtype=float)


def record(doc_id, grade, values):
    return CorpusRecord(doc_id, grade, TextProfile(doc_id, 1, AttributeVector.from_sequence(values)))


# -- spearman -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ([1, 2, 3], [2, 4, 6], 1.0),
        ([1, 2, 3], [3, 2, 1], -1.0),
        ([1, 1, 2], [1, 2, 3], math.sqrt(3) / 2),  # ranks x = [1.5, 1.5, 3]
    ],
)
def test_spearman_examples(x, y, expected):
    assert spearman(x, y) == pytest.approx(expected, abs=1e-12)


def test_average_ranks_ties():
    assert average_ranks([10, 20, 10, 30, 20, 20]).tolist() == [1.5, 4.0, 1.5, 6.0, 4.0, 4.0]


def test_spearman_constant_input_is_zero():
    assert spearman([1, 1, 1], [1, 2, 3]) == 0.0
    c = correlate("N", [1, 1, 1], [1, 2, 3])
    assert (c.rho, c.p_value, c.degenerate, c.significant) == (0.0, 1.0, True, False)


@pytest.mark.parametrize("x, y", [([1, 2], [1, 2]), ([1, 2, 3], [1, 2])])
def test_spearman_errors(x, y):
    with pytest.raises(DataError):
        spearman(x, y)


vectors = st.integers(3, 30).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-5, 5), min_size=n, max_size=n),
        st.lists(st.floats(-100, 100, allow_nan=False), min_size=n, max_size=n),
    )
)


@given(vectors)
def test_spearman_symmetry_and_transforms(xy):
    x, y = xy
    rho = spearman(x, y)
    assert abs(rho) <= 1
    assert spearman(y, x) == pytest.approx(rho, abs=1e-12)
    assert spearman([v**3 + 7 for v in x], y) == pytest.approx(rho, abs=1e-12)
    assert spearman([-v for v in x], y) == pytest.approx(-rho, abs=1e-12)


def test_spearman_matches_rank_pearson_oracle():
    rng = np.random.default_rng(2024)
    for i in range(100):
        n = int(rng.integers(3, 60))
        if i % 2:
            x, y = rng.integers(0, 5, n).astype(float), rng.integers(0, 4, n).astype(float)
        else:
            x, y = rng.normal(size=n), rng.normal(size=n)
        if len(set(x)) == 1 or len(set(y)) == 1:
            continue
        assert spearman(x, y) == pytest.approx(oracles.spearman(list(x), list(y)), abs=1e-12)


# -- p-values -------------------------------------------------------------------------


def test_pvalue_examples():
    assert spearman_pvalue(0.0, 10) == 1.0
    assert spearman_pvalue(0.0, 1627) == 1.0
    assert spearman_pvalue(1.0, 10) == 0.0
    assert spearman_pvalue(-1.0, 10) == 0.0
    # frozen from a quadrature of the t density (df = 98), see oracles.t_tail_pvalue
    assert spearman_pvalue(0.5, 100) == pytest.approx(1.1804920270e-07, rel=1e-8)


@pytest.mark.parametrize("rho, n", [(0.1, 5), (0.3, 20), (-0.7, 12), (0.05, 1627), (0.9, 4)])
def test_pvalue_matches_quadrature(rho, n):
    assert spearman_pvalue(rho, n) == pytest.approx(oracles.t_tail_pvalue(rho, n), rel=1e-8, abs=1e-10)


@given(st.integers(3, 2000), st.floats(0, 1), st.floats(0, 1))
def test_pvalue_bounds_and_monotone(n, a, b):
    lo, hi = sorted((a, b))
    p_lo, p_hi = spearman_pvalue(lo, n), spearman_pvalue(hi, n)
    assert 0 <= p_hi <= p_lo <= 1
    assert spearman_pvalue(-hi, n) == p_hi


@pytest.mark.parametrize("rho, n", [(1.5, 10), (0.5, 2), (math.nan, 10)])
def test_pvalue_invalid(rho, n):
    with pytest.raises(DataError):
        spearman_pvalue(rho, n)


def test_permutation_pvalue_is_seeded():
    rng = np.random.default_rng(1)
    x = rng.normal(size=15)
    y = x + rng.normal(size=15)
    p1 = spearman_permutation_pvalue(x, y, 2000, seed=5)
    assert p1 == spearman_permutation_pvalue(x, y, 2000, seed=5)
    assert 0 < p1 <= 1
    # agrees roughly with the t approximation
    assert p1 == pytest.approx(spearman_pvalue(spearman(x, y), 15), abs=0.02)


# -- asymptotic fit ----------------------------------------------------------------------


def test_fit_recovers_noise_free_curve():
    fit = fit_asymptotic(YEARS, asymptotic_model(YEARS, 8, 14, 5), "LSC")
    assert (fit.f0, fit.f_inf, fit.T) == pytest.approx((8, 14, 5), abs=1e-4)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.mse <= 1e-10
    assert fit.identifiable and fit.T_rounded == 5


def test_fit_constant_data_is_unidentifiable():
    fit = fit_asymptotic(YEARS, np.full(12, 5.0))
    assert fit.f0 == fit.f_inf == 5.0
    assert not fit.identifiable and math.isnan(fit.T) and fit.T_rounded is None
    assert fit.r_squared == 1.0 and fit.mse == 0.0


def test_fit_noisy_decay_median_over_replicates():
    t = np.arange(200) % 12
    estimates = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        y = asymptotic_model(t, 1, 0, 2) + rng.normal(0, 0.05, t.size)
        fit = fit_asymptotic(t, y)
        estimates.append((fit.f0, fit.f_inf, fit.T))
    f0, f_inf, T = np.median(np.array(estimates), axis=0)
    assert abs(f0 - 1) <= 0.05 and abs(f_inf) <= 0.05 and abs(T - 2) <= 0.4


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-50, 50), st.floats(-50, 50), st.floats(0.5, 20),
)
def test_fit_recovery_property(f0, f_inf, T):
    if abs(f_inf - f0) < 1e-2 * max(1.0, abs(f0), abs(f_inf)):
        return
    fit = fit_asymptotic(YEARS, asymptotic_model(YEARS, f0, f_inf, T))
    scale = max(1.0, abs(f0), abs(f_inf))
    assert abs(fit.f0 - f0) <= 1e-4 * scale
    assert abs(fit.f_inf - f_inf) <= 1e-4 * scale
    assert fit.T == pytest.approx(T, rel=1e-4)
    assert fit.mse <= 1e-10


def _brute_force_profile(t, y):
    best = (math.inf, None)
    for T in np.round(np.arange(0.10, 50.0 + 1e-9, 0.01), 2):
        phi = 1 - np.exp(-t / T)
        design = np.column_stack([1 - phi, phi])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        ss = float(np.sum((y - design @ coef) ** 2))
        if ss < best[0]:
            best = (ss, T)
    return best


def test_profile_search_matches_brute_force_grid():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f0, f_inf = rng.uniform(0, 30, 2)
        T = rng.uniform(0.5, 15)
        t = np.repeat(YEARS, 4)
        y = asymptotic_model(t, f0, f_inf, T) + rng.normal(0, 0.2 * abs(f_inf - f0) + 0.01, t.size)
        fit = fit_asymptotic(t, y)
        ss_brute, T_brute = _brute_force_profile(t, y)
        ss_fit = fit.mse * t.size
        assert ss_fit <= ss_brute * (1 + 1e-6) + 1e-12
        # the brute grid lands within half a step of the refined optimum
        # unless the profile is nearly flat there
        assert abs(fit.T - T_brute) <= 0.005 + 1e-6 * fit.T or ss_brute - ss_fit <= 1e-6 * ss_brute


@given(st.lists(st.tuples(st.integers(0, 11), st.floats(-100, 100)), min_size=3, max_size=40))
@settings(deadline=None)
def test_fit_never_worse_than_constant(points):
    t = [p[0] for p in points]
    if len(set(t)) < 2:
        return
    y = np.array([p[1] for p in points])
    fit = fit_asymptotic(t, y)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    assert fit.mse * len(y) <= ss_tot + 1e-9 * max(1.0, ss_tot)
    assert fit.mse >= 0 and fit.r_squared <= 1
    if fit.identifiable:
        assert fit.T > 0


@pytest.mark.parametrize("t, y", [([0, 1], [1, 2]), ([3, 3, 3], [1, 2, 3])])
def test_fit_errors(t, y):
    with pytest.raises(DataError):
        fit_asymptotic(t, y)


def test_fit_points_wrapper():
    pts = [FitPoint(int(t), float(v)) for t, v in zip(YEARS, asymptotic_model(YEARS, 1, 0, 2))]
    assert fit_points(pts, "RE").T == pytest.approx(2, rel=1e-6)
    with pytest.raises(DataError):
        FitPoint(12, 1.0)


# -- corpus-level --------------------------------------------------------------------------


def test_per_year_means():
    recs = [record("a", 3, [26] * 7), record("b", 3, [28] * 7), record("c", 5, [1] * 7)]
    table = per_year_means(recs)
    assert table[3].mean.N == 27 and table[3].count == 2
    assert table[5].mean.N == 1
    assert set(table) == {3, 5}
    assert per_year_means(list(reversed(recs))) == table


def test_per_year_means_one_record_per_year():
    recs = [record(f"d{g}", g, [g + 0.1 * i for i in range(7)]) for g in range(12)]
    table = per_year_means(recs)
    assert all(table[r.grade].mean == r.profile.mean for r in recs)


def test_per_year_means_permutation_independent():
    rng = np.random.default_rng(3)
    recs = [record(f"d{i}", int(rng.integers(0, 12)), rng.normal(size=7)) for i in range(200)]
    table = per_year_means(recs)
    shuffled = [recs[i] for i in rng.permutation(len(recs))]
    assert per_year_means(shuffled) == table


def test_correlate_corpus_signs():
    recs = [record(f"d{i}", i % 12, [i % 12, -(i % 12), 0, 1, 2, 3, i % 12]) for i in range(36)]
    results = {c.attribute: c for c in correlate_corpus(recs)}
    assert results["N"].rho == pytest.approx(1.0)
    assert results["E"].rho == pytest.approx(-1.0)
    assert results["RE"].degenerate and results["RE"].p_value == 1.0
    assert results["N"].significant and results["N"].p_value < ALPHA
    assert [c.attribute for c in correlate_corpus(recs)] == list(ATTRIBUTES)


def test_correlate_corpus_needs_two_grades():
    with pytest.raises(DataError, match="2 distinct grades"):
        correlate_corpus([record(f"d{i}", 4, [i] * 7) for i in range(5)])
    with pytest.raises(DataError):
        fit_corpus([record("a", 1, [1] * 7), record("b", 2, [2] * 7)])


def test_attribute_sd():
    recs = [record("a", 1, [1] * 7), record("b", 2, [3] * 7)]
    assert attribute_sd(recs)["N"] == pytest.approx(math.sqrt(2))


# -- grade suggestion ----------------------------------------------------------------------


def _means(**rows):
    return {int(g[1:]): AttributeVector.from_sequence(v) for g, v in rows.items()}


def test_suggest_exact_match():
    means = {g: AttributeVector.from_sequence([g * 1.0] * 7) for g in range(12)}
    sd = {a: 1.0 for a in ATTRIBUTES}
    assert suggest_grade(means[3], means, sd).grade == 3


def test_suggest_tie_goes_low():
    means = _means(y2=[2.0] * 7, y3=[3.0] * 7)
    sd = {a: 1.0 for a in ATTRIBUTES}
    rec = suggest_grade(AttributeVector.from_sequence([2.5] * 7), means, sd)
    assert rec.grade == 2
    assert rec.distances[2] == rec.distances[3]


def test_suggest_ignores_zero_spread_and_missing_years():
    means = _means(y1=[1, 1, 1, 1, 1, 1, 1], y7=[7, 7, 7, 7, 7, 7, 7])
    sd = {a: 1.0 for a in ATTRIBUTES} | {"N": 0.0}
    rec = suggest_grade(AttributeVector.from_sequence([100, 6, 6, 6, 6, 6, 6]), means, sd)
    assert rec.grade == 7 and "N" not in rec.used_attributes
    assert set(rec.distances) == {1, 7}
    with pytest.raises(DataError):
        suggest_grade(AttributeVector.from_sequence([0] * 7), {}, sd)


def test_suggest_high_recurrence_text_gets_early_grade():
    import synthetic

    means = {
        g: AttributeVector.from_sequence([float(synthetic.curve(a, np.array([g]))[0]) for a in ATTRIBUTES])
        for g in range(12)
    }
    sd = {a: 0.1 * abs(synthetic.REFERENCE_CURVES[a][1] - synthetic.REFERENCE_CURVES[a][0]) for a in ATTRIBUTES}
    profile = AttributeVector(N=25.8, E=25.7, RE=1.2, PE=1.1, LCC=20.5, LSC=7.5, ASP=5.0)
    # distance table computed directly, ASP has zero spread and is left out
    used = [a for a in ATTRIBUTES if sd[a] > 0]
    table = {
        g: sum(((getattr(profile, a) - getattr(means[g], a)) / sd[a]) ** 2 for a in used) for g in range(12)
    }
    expected = min(table, key=lambda g: (table[g], g))
    rec = suggest_grade(profile, means, sd)
    assert rec.grade == expected == 0
    assert rec.grade <= 2
    assert rec.distances == pytest.approx(table)
