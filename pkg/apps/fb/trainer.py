import csv
import logging
import math
from pathlib import Path

import attr
import numpy as np

from apps.evaluation.reports import EvalReport, write_curves
from apps.evaluation.rollouts import evaluate_tasks
from apps.fb.checkpoints import load_checkpoint, save_checkpoint
from apps.fb.conservative import AlphaState, build_action_sample_set, mc_penalty, tune_alpha, vc_penalty
from apps.fb.losses import FBBatch, actor_loss, fb_loss, min_head_q, sample_z
from apps.fb.models import FBModel
from utils.autodiff import Adam, backward, no_grad, ops
from utils.exceptions import NumericAbort, StorageError
from utils.media import checkpoint_path, generate_path_to_dir, latest_checkpoint

logger = logging.getLogger(__name__)

METRICS_FILE = 'metrics.csv'
CURVES_FILE = 'curves.csv'
REPORT_FILE = 'report.json'
RNG_STREAMS = ('init', 'batch', 'noise', 'penalty')


@attr.s
class MetricsRecord(object):
    step = attr.ib(type=int)
    loss_fb = attr.ib(type=float)
    loss_actor = attr.ib(type=float)
    penalty = attr.ib(type=float)
    alpha = attr.ib(type=float)
    q_data_mean = attr.ib(type=float)
    q_ood_mean = attr.ib(type=float)

    def as_row(self):
        return [str(self.step)] + [repr(float(v)) for v in attr.astuple(self)[1:]]


class MetricsWriter(object):
    """Buffers metric rows and appends them to a CSV on ``flush``."""

    def __init__(self, path, columns, resume_step=None):
        self.path = Path(path) if path is not None else None
        self.columns = columns
        self.pending = []
        if self.path is None:
            return
        generate_path_to_dir(self.path.parent)
        if resume_step is None or not self.path.exists():
            self._write('w', [list(columns)])
        else:
            self._truncate(resume_step)

    def _write(self, mode, rows):
        try:
            with open(self.path, mode, newline='') as fh:
                csv.writer(fh).writerows(rows)
        except OSError as exc:
            raise StorageError('cannot write metrics {}: {}'.format(self.path, exc))

    def _truncate(self, step):
        with open(self.path, newline='') as fh:
            rows = list(csv.reader(fh))
        self._write('w', [rows[0]] + [row for row in rows[1:] if int(row[0]) <= step])

    def append(self, record):
        self.pending.append(record.as_row())

    def flush(self):
        if self.path is not None and self.pending:
            self._write('a', self.pending)
        self.pending = []


class BaseTrainer(object):
    """Step loop with metrics, periodic evaluation, checkpoints and resume.

    Subclasses build their networks in ``setup`` and implement ``train_step``.
    """

    kind = None
    metric_columns = tuple(a.name for a in attr.fields(MetricsRecord))

    def __init__(self, dataset, config, spec, algo, run_dir=None):
        self.dataset = dataset
        self.config = config
        self.spec = spec
        self.algo = algo
        self.run_dir = Path(run_dir) if run_dir is not None else None
        seeds = np.random.SeedSequence(config.train.seed).spawn(len(RNG_STREAMS))
        self.rngs = {name: np.random.default_rng(s) for name, s in zip(RNG_STREAMS, seeds)}
        self.step_count = 0
        self.history = []
        self.report = EvalReport(algo=algo, config_digest=config.digest())
        self.setup()
        self.writer = None

    def setup(self):
        raise NotImplementedError

    def train_step(self, step):
        raise NotImplementedError

    @property
    def modules(self):
        raise NotImplementedError

    @property
    def optimizers(self):
        raise NotImplementedError

    @property
    def agent(self):
        raise NotImplementedError

    def checkpoint_extra(self):
        return {}

    @staticmethod
    def check_finite(step, term, value):
        if not math.isfinite(value):
            raise NumericAbort(step, term, value)
        return value

    def _path(self, name):
        return self.run_dir / name if self.run_dir is not None else None

    def run(self, steps=None):
        train = self.config.train
        steps = train.learning_steps if steps is None else steps
        if self.writer is None:
            self.writer = MetricsWriter(self._path(METRICS_FILE), self.metric_columns)
        logger.info('Training %s for %d steps from step %d', self.algo, steps - self.step_count, self.step_count)
        while self.step_count < steps:
            step = self.step_count + 1
            record = self.train_step(step)
            self.step_count = step
            self.history.append(record)
            self.writer.append(record)
            logger.debug('step %d %s', step, record)
            if step % train.eval_every == 0 or step == steps:
                self.writer.flush()
                self.evaluate()
                logger.info('step %d: loss %.4f actor %.4f penalty %.4f alpha %.4g q_data %.4f q_ood %.4f',
                            *attr.astuple(record))
            if self.run_dir is not None and (step % train.checkpoint_every == 0 or step == steps):
                self.writer.flush()
                self.save()
        self.writer.flush()
        self.finish()
        return self.agent, self.history

    def evaluate(self):
        returns = evaluate_tasks(self.agent, self.spec, self.config.eval, self.config.train.seed,
                                 step=self.step_count, dataset=self.dataset, tasks=self.evaluation_tasks())
        for task, values in returns.items():
            self.report.add(task, self.config.train.seed, self.step_count, values)
        return returns

    def evaluation_tasks(self):
        return self.config.eval.tasks

    def finish(self):
        if self.run_dir is None or not self.report.records:
            return
        eval_cfg = self.config.eval
        rng = np.random.default_rng(np.random.SeedSequence([self.config.train.seed, 2]))
        write_curves(self._path(CURVES_FILE), self.report.curve_rows(eval_cfg.bootstrap_resamples,
                                                                    eval_cfg.confidence, rng))
        self.report.save(self._path(REPORT_FILE), resamples=eval_cfg.bootstrap_resamples,
                         level=eval_cfg.confidence, rng=rng)

    def save(self):
        extra = {
            'algo': self.algo,
            'state_dim': self.dataset.state_dim,
            'action_dim': self.dataset.action_dim,
            'config_digest': self.config.digest(),
            'report': [attr.asdict(r) for r in self.report.records],
        }
        extra.update(self.checkpoint_extra())
        return save_checkpoint(checkpoint_path(self.run_dir, self.step_count), self.kind, self.step_count,
                               self.config.to_dict(), self.modules, self.optimizers,
                               {k: v for k, v in self.rngs.items() if k != 'init'}, **extra)

    def restore(self, path=None):
        """Loads the latest (or given) checkpoint of this run and continues its metrics file."""
        checkpoint = load_checkpoint(path or latest_checkpoint(self.run_dir))
        checkpoint.restore(self.modules, self.optimizers)
        checkpoint.restore_rngs({k: v for k, v in self.rngs.items() if k != 'init'})
        self.step_count = checkpoint.step
        self.report = EvalReport.from_json({'algo': self.algo, 'config_digest': self.config.digest(),
                                            'records': checkpoint.manifest.get('report', [])})
        self.writer = MetricsWriter(self._path(METRICS_FILE), self.metric_columns, resume_step=self.step_count)
        logger.info('Resumed %s at step %d', self.algo, self.step_count)
        return checkpoint


class FBTrainer(BaseTrainer):
    """FB pre-training with an optional value- or measure-conservative penalty."""

    kind = 'fb'

    def setup(self):
        train, penalty = self.config.train, self.config.penalty
        self.model = FBModel(self.config.model, self.dataset.state_dim, self.dataset.action_dim,
                             self.rngs['init'], polyak=train.polyak)
        self.fb_optimizer = Adam(self.model.online_parameters('forward', 'backward'),
                                 lr=train.learning_rate, grad_clip=train.grad_clip)
        self.actor_optimizer = Adam(self.model.online_parameters('actor'),
                                    lr=train.learning_rate, grad_clip=train.grad_clip)
        self.alpha_state = None
        if penalty.enabled and penalty.tuned:
            self.alpha_state = AlphaState(train.learning_rate, penalty.alpha_max)

    @property
    def modules(self):
        return {'fb': self.model}

    @property
    def optimizers(self):
        optimizers = {'fb': self.fb_optimizer, 'actor': self.actor_optimizer}
        if self.alpha_state is not None:
            optimizers['alpha'] = self.alpha_state
        return optimizers

    @property
    def agent(self):
        return self.model

    def sample_batch(self):
        train, rng = self.config.train, self.rngs['batch']
        indices = self.dataset.sample_indices(train.batch_size, rng)
        z = sample_z(train.batch_size, self.model.latent_dim, self.dataset.next_states[indices],
                     self.model.backward, train.z_mix_ratio, rng)
        return FBBatch.from_dataset(self.dataset, indices, z, rng)

    def train_step(self, step):
        train, penalty_cfg = self.config.train, self.config.penalty
        noise_shape = (train.batch_size, self.dataset.action_dim)
        batch = self.sample_batch()

        fb = fb_loss(self.model, batch, train.discount, self.rngs['noise'].standard_normal(noise_shape))
        loss_fb = self.check_finite(step, 'loss_fb', fb.loss.item())
        with no_grad():
            q_data = min_head_q((ops.detach(fb.forward[0]), ops.detach(fb.forward[1])), batch.z).data.mean()
        total, penalty, alpha, q_ood = fb.loss, 0.0, 0.0, float('nan')

        if penalty_cfg.enabled:
            samples = build_action_sample_set(self.model, batch, penalty_cfg, self.rngs['penalty'])
            if penalty_cfg.variant == 'vc':
                result = vc_penalty(self.model, batch, samples, fb.forward)
            else:
                result = mc_penalty(self.model, batch, samples, fb.forward, fb.future_embedding)
            penalty = self.check_finite(step, 'penalty', result.penalty.item())
            if self.alpha_state is not None:
                alpha = tune_alpha(self.alpha_state, penalty, penalty_cfg.budget)
            else:
                alpha = penalty_cfg.fixed_alpha
            total = ops.add(total, ops.mul(result.penalty, alpha))
            q_ood = result.q_ood_mean

        self.fb_optimizer.zero_grad()
        backward(total)
        self.fb_optimizer.step()

        self.actor_optimizer.zero_grad()
        policy_loss = actor_loss(self.model, batch, self.rngs['noise'].standard_normal(noise_shape))
        loss_actor = self.check_finite(step, 'loss_actor', policy_loss.item())
        backward(policy_loss)
        self.actor_optimizer.step()

        self.model.polyak_update()
        return MetricsRecord(step, loss_fb, loss_actor, penalty, alpha, float(q_data), q_ood)


def train_fb(dataset, config, spec, algo='fb', run_dir=None, steps=None):
    trainer = FBTrainer(dataset, config, spec, algo, run_dir=run_dir)
    return trainer.run(steps)
