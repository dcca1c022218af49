"""Aggregate statistics over rollout scores."""
import numpy as np

from project import settings
from utils.exceptions import BootstrapUndefined, EmptyDataset, ValidationError


def _iqm_rows(rows):
    """IQM along the last axis with fractional trimming.

    Order statistic ``k`` covers the rank interval [k, k + 1] and is weighted
    by its overlap with [n/4, 3n/4].
    """
    rows = np.sort(np.asarray(rows, dtype=np.float64), axis=-1)
    n = rows.shape[-1]
    ranks = np.arange(n)
    weights = np.clip(np.minimum(ranks + 1.0, 0.75 * n) - np.maximum(ranks, 0.25 * n), 0.0, None)
    return (rows * weights).sum(axis=-1) / (0.5 * n)


def iqm(values):
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptyDataset('iqm of an empty set')
    return float(_iqm_rows(values))


def _percentiles(level):
    if not 0.0 < level < 1.0:
        raise ValidationError({'confidence': 'must lie in (0, 1), got {}'.format(level)})
    tail = 100.0 * (1.0 - level) / 2.0
    return [tail, 100.0 - tail]


def _strata(scores):
    strata = [np.asarray(scores[task], dtype=np.float64).reshape(-1) for task in sorted(scores)]
    if not strata:
        raise EmptyDataset('no scores to aggregate')
    for task, stratum in zip(sorted(scores), strata):
        if stratum.size < 2:
            raise BootstrapUndefined('stratified bootstrap undefined: task "{}" has {} seed(s)'
                                     .format(task, stratum.size))
    return strata


def _stratified_draws(strata, resamples, rng):
    return np.concatenate([s[rng.integers(0, s.size, size=(resamples, s.size))] for s in strata], axis=1)


def stratified_bootstrap_ci(scores, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL,
                            rng=None):
    """Percentile interval of the pooled IQM, resampling seeds within each task."""
    rng = rng if rng is not None else np.random.default_rng(settings.SEED)
    strata = _strata(scores)
    lo, hi = np.percentile(_iqm_rows(_stratified_draws(strata, resamples, rng)), _percentiles(level))
    return float(lo), float(hi)


def percentile_bootstrap_ci(values, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL,
                            rng=None):
    """Plain bootstrap of the IQM of one sample."""
    rng = rng if rng is not None else np.random.default_rng(settings.SEED)
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptyDataset('bootstrap of an empty set')
    draws = values[rng.integers(0, values.size, size=(resamples, values.size))]
    lo, hi = np.percentile(_iqm_rows(draws), _percentiles(level))
    return float(lo), float(hi)


def performance_profile(scores, thresholds, resamples=settings.BOOTSTRAP_RESAMPLES,
                        level=settings.CONFIDENCE_LEVEL, rng=None):
    """Fraction of (task, seed) scores strictly above each threshold, with stratified bands."""
    rng = rng if rng is not None else np.random.default_rng(settings.SEED)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    pooled = np.concatenate([np.asarray(scores[t], dtype=np.float64).reshape(-1) for t in sorted(scores)])
    fractions = (pooled[None, :] > thresholds[:, None]).mean(axis=1)
    try:
        draws = _stratified_draws(_strata(scores), resamples, rng)
    except BootstrapUndefined:
        bands = [(None, None)] * len(thresholds)
    else:
        curves = (draws[:, None, :] > thresholds[None, :, None]).mean(axis=2)
        lo, hi = np.percentile(curves, _percentiles(level), axis=0)
        bands = list(zip(lo.tolist(), hi.tolist()))
    return [{'threshold': float(t), 'fraction': float(f), 'ci_lo': band[0], 'ci_hi': band[1]}
            for t, f, band in zip(thresholds, fractions, bands)]


def normalise_scores(scores, baseline, label):
    """Per-task IQM divided by the baseline's per-task IQM."""
    normalised = {}
    for task in sorted(scores):
        if task not in baseline:
            raise ValidationError({'baseline': 'no baseline scores for task "{}"'.format(task)})
        reference = iqm(baseline[task])
        normalised[task] = iqm(scores[task]) / reference if reference != 0.0 else float('nan')
    return {'normalised_to': label, 'scores': normalised}
