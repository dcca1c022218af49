import logging

import attr

from project import settings
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

PASS = 'PASS'
FAIL = 'FAIL'


@attr.s
class SeedVerdict(object):
    seed = attr.ib(type=int)
    fb_reached = attr.ib(type=dict)
    vcfb_reached = attr.ib(type=dict)

    @property
    def passed(self):
        return all(self.vcfb_reached.values()) and not all(self.fb_reached.values())


@attr.s
class Verdict(object):
    seeds = attr.ib(type=list)

    @property
    def passed(self):
        return sum(v.passed for v in self.seeds) * 2 > len(self.seeds)

    @property
    def label(self):
        return PASS if self.passed else FAIL

    def as_dict(self):
        return {
            'verdict': self.label,
            'seeds': [dict(attr.asdict(v), passed=v.passed) for v in self.seeds],
        }


def goals_reached(report, seed, tasks, threshold):
    """Per task: does any rollout at the seed's best checkpoint return more than ``threshold``."""
    checkpoint = report.best_checkpoint_for_seed(seed, tasks)
    records = {r.task: r for r in report.select(checkpoint, seed)}
    missing = [t for t in tasks if t not in records]
    if missing:
        raise ValidationError('{} report lacks tasks {} for seed {}'.format(report.algo, missing, seed))
    return {task: any(r > threshold for r in records[task].returns) for task in tasks}


def didactic_judge(fb_report, vcfb_report, tasks=settings.DIDACTIC_TASKS, threshold=0.0):
    """PASS when, on a majority of seeds, VC-FB reaches every goal and FB misses at least one."""
    if fb_report.seeds != vcfb_report.seeds:
        raise ValidationError('mismatched seeds: fb {} vs vcfb {}'.format(fb_report.seeds, vcfb_report.seeds))
    if not fb_report.seeds:
        raise ValidationError('reports hold no rollouts')

    verdicts = []
    for seed in fb_report.seeds:
        verdict = SeedVerdict(seed=seed, fb_reached=goals_reached(fb_report, seed, tasks, threshold),
                              vcfb_reached=goals_reached(vcfb_report, seed, tasks, threshold))
        logger.info('Seed %d: fb %s, vcfb %s', seed, verdict.fb_reached, verdict.vcfb_reached)
        verdicts.append(verdict)
    return Verdict(seeds=verdicts)
