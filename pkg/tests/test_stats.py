import numpy as np
import pytest

from apps.evaluation import stats
from utils.exceptions import BootstrapUndefined, EmptyDataset, ValidationError


def test_iqm_of_one_to_twenty():
    assert stats.iqm(np.arange(1, 21)) == 10.5


def test_iqm_ignores_order_and_outliers():
    values = [5.0, 1.0, 1000.0, 3.0, 2.0, 4.0, 6.0, -1000.0]
    assert stats.iqm(values) == pytest.approx(3.5)


def test_iqm_uses_fractional_trimming():
    # quartile cut falls inside the second and fourth order statistics
    assert stats.iqm([1.0, 2.0, 3.0, 4.0, 5.0]) == pytest.approx(3.0)
    assert stats.iqm([1.0, 2.0, 3.0, 4.0, 10.0]) == pytest.approx((0.75 * 2 + 3 + 0.75 * 4) / 2.5)


def test_iqm_of_single_value():
    assert stats.iqm([7.0]) == 7.0


def test_iqm_of_empty_set():
    with pytest.raises(EmptyDataset):
        stats.iqm([])


def test_identical_scores_give_degenerate_interval():
    scores = {'a': [0.5, 0.5, 0.5], 'b': [0.5, 0.5]}
    lo, hi = stats.stratified_bootstrap_ci(scores, resamples=200, rng=np.random.default_rng(0))
    assert lo == hi == pytest.approx(0.5)


def test_single_seed_task_makes_bootstrap_undefined():
    with pytest.raises(BootstrapUndefined, match='"b"'):
        stats.stratified_bootstrap_ci({'a': [0.1, 0.2], 'b': [0.3]})


def test_interval_contains_point_estimate():
    rng = np.random.default_rng(3)
    scores = {'a': rng.uniform(size=5), 'b': rng.uniform(size=5)}
    pooled = np.concatenate([scores['a'], scores['b']])
    lo, hi = stats.stratified_bootstrap_ci(scores, resamples=500, rng=np.random.default_rng(0))
    assert lo <= stats.iqm(pooled) <= hi


def test_interval_is_reproducible_for_a_seed():
    scores = {'a': [0.1, 0.4, 0.9], 'b': [0.2, 0.3, 0.8]}
    first = stats.stratified_bootstrap_ci(scores, resamples=300, rng=np.random.default_rng(5))
    second = stats.stratified_bootstrap_ci(scores, resamples=300, rng=np.random.default_rng(5))
    assert first == second


def test_interval_narrows_with_more_seeds():
    rng = np.random.default_rng(1)
    few = {'a': rng.normal(size=4), 'b': rng.normal(size=4)}
    many = {'a': rng.normal(size=200), 'b': rng.normal(size=200)}
    lo_few, hi_few = stats.stratified_bootstrap_ci(few, resamples=500, rng=np.random.default_rng(0))
    lo_many, hi_many = stats.stratified_bootstrap_ci(many, resamples=500, rng=np.random.default_rng(0))
    assert hi_many - lo_many < hi_few - lo_few


@pytest.mark.parametrize('level', [0.0, 1.0, 1.5])
def test_confidence_level_range(level):
    with pytest.raises(ValidationError):
        stats.stratified_bootstrap_ci({'a': [0.1, 0.2]}, level=level)


def test_percentile_bootstrap_of_one_sample():
    lo, hi = stats.percentile_bootstrap_ci(np.linspace(0.0, 1.0, 40), resamples=400,
                                           rng=np.random.default_rng(0))
    assert 0.0 < lo < 0.5 < hi < 1.0


def test_performance_profile_fractions():
    scores = {'a': [0.1, 0.5, 0.9], 'b': [0.2, 0.6, 1.0]}
    profile = stats.performance_profile(scores, [0.0, 0.5, 1.0], resamples=100, rng=np.random.default_rng(0))
    assert [p['fraction'] for p in profile] == pytest.approx([1.0, 0.5, 0.0])
    assert all(p['ci_lo'] <= p['fraction'] <= p['ci_hi'] for p in profile)


def test_performance_profile_without_bands_for_single_seeds():
    profile = stats.performance_profile({'a': [0.4]}, [0.0, 0.5])
    assert [p['fraction'] for p in profile] == [1.0, 0.0]
    assert profile[0]['ci_lo'] is None


def test_normalise_scores():
    normalised = stats.normalise_scores({'a': [2.0, 2.0], 'b': [1.0]}, {'a': [4.0], 'b': [0.0]}, 'td3')
    assert normalised['normalised_to'] == 'td3'
    assert normalised['scores']['a'] == 0.5
    assert np.isnan(normalised['scores']['b'])


def test_normalise_scores_needs_every_task():
    with pytest.raises(ValidationError):
        stats.normalise_scores({'a': [1.0]}, {'b': [1.0]}, 'td3')
