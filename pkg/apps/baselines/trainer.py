import logging

import attr
import numpy as np

from apps.baselines.models import BaselineModel
from apps.fb.conservative import cql_penalty, sample_actions
from apps.fb.trainer import BaseTrainer, MetricsRecord
from utils.autodiff import Adam, backward, no_grad, ops

logger = logging.getLogger(__name__)


@attr.s
class CriticBatch(object):
    states = attr.ib()
    actions = attr.ib()
    rewards = attr.ib()
    next_states = attr.ib()

    @classmethod
    def from_dataset(cls, dataset, indices):
        return cls(dataset.states[indices], dataset.actions[indices], dataset.rewards[indices],
                   dataset.next_states[indices])


def td_targets(model, batch, discount, noise):
    """r + discount * min_h Q_target(s', smoothed pi_target(s')).

    Episode ends in the offline data are time limits, so every row bootstraps.
    """
    with no_grad():
        next_actions = model.actor_target(batch.next_states, noise=noise)
        q1, q2 = model.critic_target(batch.next_states, next_actions)
        return batch.rewards + discount * np.minimum(q1.data, q2.data)


def td3_critic_loss(model, batch, targets):
    q1, q2 = model.critic(batch.states, batch.actions)
    return ops.add(ops.square(ops.sub(q1, targets)).mean(), ops.square(ops.sub(q2, targets)).mean())


def critic_loss(model, batch, targets, samples=None, alpha=0.0):
    """TD3 critic loss, plus ``alpha`` times the CQL penalty when samples are given."""
    loss = td3_critic_loss(model, batch, targets)
    if samples is None:
        return loss, None
    result = cql_penalty(model.critic, batch.states, batch.actions, samples)
    return ops.add(loss, ops.mul(result.penalty, alpha)), result


def baseline_actor_loss(model, batch):
    with model.critic.frozen():
        q1, _ = model.critic(batch.states, model.actor(batch.states))
        return ops.neg(q1.mean())


class BaselineTrainer(BaseTrainer):
    """Offline TD3 on one relabelled task; ``cql`` adds the fixed-weight CQL penalty."""

    metric_columns = ('step', 'loss_critic', 'loss_actor', 'penalty', 'alpha', 'q_data_mean', 'q_ood_mean')

    @property
    def kind(self):
        return self.algo

    def setup(self):
        train, baseline = self.config.train, self.config.baseline
        if not (self.dataset.rewards > 0).any():
            logger.warning('Dataset rewards are all zero; relabel it for task "%s" first', baseline.task)
        self.model = BaselineModel(baseline, self.dataset.state_dim, self.dataset.action_dim,
                                   self.rngs['init'], polyak=train.polyak)
        self.critic_optimizer = Adam(self.model.online_parameters('critic'),
                                     lr=train.learning_rate, grad_clip=train.grad_clip)
        self.actor_optimizer = Adam(self.model.online_parameters('actor'),
                                    lr=train.learning_rate, grad_clip=train.grad_clip)
        self.last_actor_loss = 0.0

    @property
    def modules(self):
        return {'baseline': self.model}

    @property
    def optimizers(self):
        return {'critic': self.critic_optimizer, 'actor': self.actor_optimizer}

    @property
    def agent(self):
        return self.model

    def checkpoint_extra(self):
        return {'last_actor_loss': self.last_actor_loss}

    def restore(self, path=None):
        checkpoint = super(BaselineTrainer, self).restore(path)
        self.last_actor_loss = checkpoint.manifest.get('last_actor_loss', 0.0)
        return checkpoint

    def evaluation_tasks(self):
        return [self.config.baseline.task]

    def policy(self, states, repeats, noise):
        return self.model.actor(np.repeat(states, repeats, axis=0), noise=noise).data

    def train_step(self, step):
        train, baseline = self.config.train, self.config.baseline
        indices = self.dataset.sample_indices(train.batch_size, self.rngs['batch'])
        batch = CriticBatch.from_dataset(self.dataset, indices)
        noise = self.rngs['noise'].standard_normal((train.batch_size, self.dataset.action_dim))
        targets = td_targets(self.model, batch, train.discount, noise)

        samples, alpha = None, 0.0
        if self.algo == 'cql':
            alpha = baseline.cql_alpha
            samples = sample_actions(self.policy, batch.states, batch.next_states, self.dataset.action_dim,
                                     self.config.penalty, self.rngs['penalty'])
        loss, result = critic_loss(self.model, batch, targets, samples, alpha)
        loss_critic = self.check_finite(step, 'loss_critic', loss.item())
        self.critic_optimizer.zero_grad()
        backward(loss)
        self.critic_optimizer.step()

        if step % baseline.policy_delay == 0:
            self.actor_optimizer.zero_grad()
            policy_loss = baseline_actor_loss(self.model, batch)
            self.last_actor_loss = self.check_finite(step, 'loss_actor', policy_loss.item())
            backward(policy_loss)
            self.actor_optimizer.step()
            self.model.polyak_update()

        q_data = float(self.model.q_values(batch.states, batch.actions).mean())
        penalty = result.penalty.item() if result is not None else 0.0
        q_ood = result.q_ood_mean if result is not None else float('nan')
        return MetricsRecord(step, loss_critic, self.last_actor_loss, penalty, alpha, q_data, q_ood)


def train_baseline(dataset, config, spec, algo='td3', run_dir=None, steps=None):
    trainer = BaselineTrainer(dataset, config, spec, algo, run_dir=run_dir)
    return trainer.run(steps)
