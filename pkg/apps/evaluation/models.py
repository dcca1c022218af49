import attr

from project import settings

Z_SOURCES = ('goal', 'inferred')


@attr.s
class EvalConfig(object):
    rollouts = attr.ib(default=settings.EVAL_ROLLOUTS, type=int)
    seeds = attr.ib(default=settings.EVAL_SEEDS, type=int)
    tasks = attr.ib(default=attr.Factory(lambda: sorted(settings.MAZE_GOALS)), converter=list, type=list)
    bootstrap_resamples = attr.ib(default=settings.BOOTSTRAP_RESAMPLES, type=int)
    confidence = attr.ib(default=settings.CONFIDENCE_LEVEL, type=float)
    z_source = attr.ib(default='goal', type=str)
    z_inference_labels = attr.ib(default=settings.Z_INFERENCE_LABELS, type=int)
    project_inferred_z = attr.ib(default=False, type=bool)
    probe_rollouts = attr.ib(default=settings.PROBE_ROLLOUTS, type=int)
    workers = attr.ib(default=settings.EVAL_WORKERS, type=int)
