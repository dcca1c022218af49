import csv
import json
import logging
from collections import defaultdict
from pathlib import Path

import attr
import numpy as np

from apps.evaluation import stats
from project import settings
from utils.exceptions import BootstrapUndefined, StorageError

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ('checkpoint', 'task', 'seed', 'iqm', 'ci_lo', 'ci_hi')
PROFILE_COLUMNS = ('algo', 'threshold', 'fraction', 'ci_lo', 'ci_hi')


@attr.s
class EvalRecord(object):
    task = attr.ib(type=str)
    seed = attr.ib(type=int)
    checkpoint = attr.ib(type=int)
    returns = attr.ib(converter=lambda v: [float(r) for r in v], type=list)

    @property
    def score(self):
        return float(np.mean(self.returns))


@attr.s
class EvalReport(object):
    """Rollout returns per (task, seed, checkpoint) and their aggregates.

    A (task, seed) score is the mean return of its rollouts. Aggregates are
    taken at the checkpoint maximising the all-task IQM.
    """

    algo = attr.ib(type=str)
    records = attr.ib(factory=list)
    config_digest = attr.ib(default=None)

    def add(self, task, seed, checkpoint, returns):
        self.records.append(EvalRecord(task, int(seed), int(checkpoint), returns))

    def extend(self, other):
        self.records.extend(other.records)

    @property
    def checkpoints(self):
        return sorted({r.checkpoint for r in self.records})

    @property
    def seeds(self):
        return sorted({r.seed for r in self.records})

    @property
    def tasks(self):
        return sorted({r.task for r in self.records})

    def select(self, checkpoint=None, seed=None):
        return [r for r in self.records
                if (checkpoint is None or r.checkpoint == checkpoint) and (seed is None or r.seed == seed)]

    def scores(self, checkpoint):
        grouped = defaultdict(list)
        for record in self.select(checkpoint):
            grouped[record.task].append(record.score)
        return dict(grouped)

    def all_task_iqm(self, checkpoint):
        scores = self.scores(checkpoint)
        return stats.iqm(np.concatenate([scores[t] for t in sorted(scores)]))

    @property
    def best_checkpoint(self):
        checkpoints = self.checkpoints
        values = [self.all_task_iqm(c) for c in checkpoints]
        return checkpoints[int(np.argmax(values))]

    def best_checkpoint_for_seed(self, seed, tasks=None):
        best, best_value = None, None
        for checkpoint in self.checkpoints:
            records = [r for r in self.select(checkpoint, seed) if tasks is None or r.task in tasks]
            if not records:
                continue
            value = np.mean([r.score for r in records])
            if best_value is None or value > best_value:
                best, best_value = checkpoint, value
        return best

    def interval(self, checkpoint, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL,
                 rng=None):
        """Stratified bootstrap across seeds, or a plain bootstrap of rollouts for a single seed."""
        rng = rng if rng is not None else np.random.default_rng(settings.SEED)
        point = self.all_task_iqm(checkpoint)
        try:
            lo, hi = stats.stratified_bootstrap_ci(self.scores(checkpoint), resamples, level, rng)
        except BootstrapUndefined:
            returns = np.concatenate([r.returns for r in self.select(checkpoint)])
            lo, hi = stats.percentile_bootstrap_ci(returns, resamples, level, rng)
        if not lo <= point <= hi:
            logger.warning('Widening interval [%.4f, %.4f] to contain IQM %.4f', lo, hi, point)
            lo, hi = min(lo, point), max(hi, point)
        return lo, hi

    def aggregate(self, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL, rng=None):
        checkpoint = self.best_checkpoint
        scores = self.scores(checkpoint)
        lo, hi = self.interval(checkpoint, resamples, level, rng)
        return {
            'best_checkpoint': checkpoint,
            'task_iqm': {task: stats.iqm(values) for task, values in sorted(scores.items())},
            'iqm': self.all_task_iqm(checkpoint),
            'ci_lo': lo,
            'ci_hi': hi,
            'confidence': level,
        }

    def profile(self, thresholds, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL,
                rng=None):
        """Performance profile of the best checkpoint's per-(task, seed) scores."""
        return stats.performance_profile(self.scores(self.best_checkpoint), thresholds, resamples, level, rng)

    def normalised_to(self, reference):
        return stats.normalise_scores(self.scores(self.best_checkpoint),
                                      reference.scores(reference.best_checkpoint), reference.algo)

    def curve_rows(self, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL, rng=None):
        rng = rng if rng is not None else np.random.default_rng(settings.SEED)
        rows = []
        for record in sorted(self.records, key=lambda r: (r.checkpoint, r.task, r.seed)):
            lo, hi = stats.percentile_bootstrap_ci(record.returns, resamples, level, rng)
            rows.append((record.checkpoint, record.task, record.seed, stats.iqm(record.returns), lo, hi))
        return rows

    def to_json(self, resamples=settings.BOOTSTRAP_RESAMPLES, level=settings.CONFIDENCE_LEVEL, rng=None):
        return {
            'algo': self.algo,
            'config_digest': self.config_digest,
            'records': [attr.asdict(r) for r in self.records],
            'aggregate': self.aggregate(resamples, level, rng) if self.records else None,
        }

    @classmethod
    def from_json(cls, data):
        report = cls(algo=data['algo'], config_digest=data.get('config_digest'))
        for record in data['records']:
            report.add(record['task'], record['seed'], record['checkpoint'], record['returns'])
        return report

    def save(self, path, **kwargs):
        try:
            with open(path, 'w') as fh:
                json.dump(self.to_json(**kwargs), fh, indent=2, sort_keys=True)
        except OSError as exc:
            raise StorageError('cannot write report {}: {}'.format(path, exc))

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_json(json.load(fh))
        except (OSError, ValueError) as exc:
            raise StorageError('cannot read report {}: {}'.format(path, exc))


def write_curves(path, rows):
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh)
            writer.writerow(CURVE_COLUMNS)
            writer.writerows(rows)
    except OSError as exc:
        raise StorageError('cannot write curves {}: {}'.format(path, exc))


def find_reports(root, name='report.json'):
    return sorted(Path(root).rglob(name))


def write_profiles(path, profiles):
    """``profiles`` maps an algorithm to its :meth:`EvalReport.profile` rows."""
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh)
            writer.writerow(PROFILE_COLUMNS)
            for algo, rows in sorted(profiles.items()):
                writer.writerows([algo] + ['' if row[c] is None else row[c] for c in PROFILE_COLUMNS[1:]]
                                 for row in rows)
    except OSError as exc:
        raise StorageError('cannot write profile {}: {}'.format(path, exc))
