import itertools
import logging
from pathlib import Path

import numpy as np

from apps.baselines.models import BASELINES
from apps.baselines.trainer import BaselineTrainer
from apps.datasets import storage
from apps.datasets.generation import relabel
from apps.fb.checkpoints import load_checkpoint
from apps.fb.models import ALGORITHMS
from apps.fb.trainer import FBTrainer
from apps.maze.models import ACTION_DIM, STATE_DIM
from project.configuration import load_run_config, parse_overrides
from utils.commands import BaseCommand, CommandTableDef, set_override
from utils.exceptions import ValidationError
from utils.media import generate_path_to_dir, latest_checkpoint, prepare_run_dir

logger = logging.getLogger(__name__)

fb_commands = CommandTableDef()

TRAINERS = dict({algo: FBTrainer for algo in ALGORITHMS}, **{algo: BaselineTrainer for algo in BASELINES})
SWEEP_FILE = 'sweep.json'


def load_maze_dataset(path):
    return storage.load(path, state_dim=STATE_DIM, action_dim=ACTION_DIM)


def algo_config(config, algo):
    if algo in ALGORITHMS:
        return config.replace(penalty={'variant': ALGORITHMS[algo]})
    return config


def prepare_dataset(dataset, config, algo, relabel_task=False):
    """Dataset as the given algorithm trains on it; single-task baselines need rewards."""
    if algo not in BASELINES:
        return dataset
    if relabel_task:
        dataset = relabel(dataset, config.env, config.baseline.task)
    if algo == 'cql' and not dataset.is_relabelled:
        raise ValidationError({'dataset': 'cql needs a relabelled dataset; every reward is zero '
                                          '(pass --relabel to label it for "{}")'.format(config.baseline.task)})
    return dataset


def expand_sweep(pairs):
    """``['penalty.budget=1,10']`` -> one override dict per point of the cartesian product."""
    axes = []
    for pair in pairs or ():
        key, sep, values = pair.partition('=')
        values = [v.strip() for v in values.split(',') if v.strip()]
        if not sep or not values:
            raise ValidationError({'sweep': 'expected section.key=v1,v2,..., got "{}"'.format(pair)})
        axes.append([(key.strip(), v) for v in values])
    for point in itertools.product(*axes):
        yield parse_overrides(['{}={}'.format(k, v) for k, v in point])


def train_run(dataset, config, algo, run_dir, steps=None):
    config.write(run_dir)
    trainer = TRAINERS[algo](dataset, config, config.env, algo, run_dir=run_dir)
    trainer.run(steps)
    return trainer


def summarise(trainer):
    eval_cfg, seed = trainer.config.eval, trainer.config.train.seed
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    return trainer.report.aggregate(eval_cfg.bootstrap_resamples, eval_cfg.confidence, rng)


@fb_commands.command('train')
class TrainCommand(BaseCommand):
    """Trains FB, VC-FB, MC-FB or a single-task baseline on an offline dataset."""

    help = 'train an agent on an FBDS dataset'
    uses_config = True

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--algo', choices=sorted(TRAINERS), default='fb')
        parser.add_argument('--dataset', required=True)
        parser.add_argument('--out', help='run directory')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--steps', type=int, help='learning steps (overrides train.learning_steps)')
        parser.add_argument('--force', action='store_true', help='replace a non-empty run directory')
        parser.add_argument('--resume', metavar='DIR', help='continue the run in DIR from its latest checkpoint')
        parser.add_argument('--relabel', action='store_true',
                            help='label rewards for baseline.task before training a baseline')
        parser.add_argument('--sweep', action='append', default=[], metavar='SECTION.KEY=V1,V2',
                            help='train every combination of the listed values (repeatable)')

    def get_overrides(self):
        overrides = super(TrainCommand, self).get_overrides()
        set_override(overrides, 'train', 'seed', self.args.seed)
        set_override(overrides, 'train', 'learning_steps', self.args.steps)
        return overrides

    def handle(self):
        if self.args.resume:
            return self.resume(Path(self.args.resume))
        if not self.args.out:
            raise ValidationError({'out': 'train needs --out DIR (or --resume DIR)'})

        algo = self.args.algo
        config = algo_config(self.get_config(), algo)
        dataset = prepare_dataset(load_maze_dataset(self.args.dataset), config, algo, self.args.relabel)
        if dataset.metadata.get('env_digest') not in (None, config.env.config_digest()):
            logger.warning('Dataset was generated in a different maze than the configured one')

        run_dir = prepare_run_dir(self.args.out, force=self.args.force)
        points = list(expand_sweep(self.args.sweep))
        if len(points) == 1 and not points[0]:
            trainer = train_run(dataset, config, algo, run_dir)
            return self.report(algo, trainer)

        index = []
        results = {}
        for number, overrides in enumerate(points):
            name = '{:03d}'.format(number)
            logger.info('Sweep run %s: %s', name, overrides)
            trainer = train_run(dataset, algo_config(config.replace(**overrides), algo), algo,
                                generate_path_to_dir(run_dir, name))
            index.append({'run': name, 'overrides': overrides})
            results[name] = self.report(algo, trainer, label=name)
        self.write_json(run_dir / SWEEP_FILE, index)
        return results

    def resume(self, run_dir):
        config = load_run_config(run_dir)
        path = latest_checkpoint(run_dir)
        algo = load_checkpoint(path).manifest['algo']
        dataset = prepare_dataset(load_maze_dataset(self.args.dataset), config, algo, self.args.relabel)
        trainer = TRAINERS[algo](dataset, config, config.env, algo, run_dir=run_dir)
        trainer.restore(path)
        trainer.run(self.args.steps)
        return self.report(algo, trainer)

    def report(self, algo, trainer, label=None):
        summary = summarise(trainer)
        prefix = '{} {}'.format(label, algo) if label else algo
        self.echo('{}: best checkpoint {} IQM {:.3f} [{:.3f}, {:.3f}]'.format(
            prefix, summary['best_checkpoint'], summary['iqm'], summary['ci_lo'], summary['ci_hi']))
        return summary
