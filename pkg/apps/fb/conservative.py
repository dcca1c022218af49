"""Conservative penalties on out-of-distribution actions and the dual update of their weight."""
import attr
import numpy as np

from apps.fb.losses import min_head_q
from utils.autodiff import Adam, Parameter, backward, no_grad, ops
from utils.exceptions import ValidationError


@attr.s
class ActionSampleSet(object):
    """Per-row sampled actions, each array shaped (rows, samples, action_dim)."""

    uniform = attr.ib()
    current = attr.ib()
    following = attr.ib()
    dataset_repeats = attr.ib(default=0)

    @property
    def sampled(self):
        return np.concatenate([self.uniform, self.current, self.following], axis=1)

    @property
    def size(self):
        return self.sampled.shape[1] + self.dataset_repeats


@attr.s
class PenaltyResult(object):
    penalty = attr.ib()
    q_data_mean = attr.ib(type=float)
    q_ood_mean = attr.ib(type=float)


def sample_actions(policy, states, next_states, action_dim, cfg, rng):
    """Builds the sample set from ``policy(states, repeats, noise)``.

    The policy receives each row repeated ``repeats`` times; the actions it
    proposes at the next states are later scored at the current states.
    """
    n = len(states)
    uniform = rng.uniform(-1.0, 1.0, size=(n, cfg.n_uniform, action_dim))
    with no_grad():
        current = policy(states, cfg.n_policy_current,
                         rng.standard_normal((n * cfg.n_policy_current, action_dim)))
        following = policy(next_states, cfg.n_policy_next,
                           rng.standard_normal((n * cfg.n_policy_next, action_dim)))
    return ActionSampleSet(uniform=uniform,
                           current=np.asarray(current).reshape(n, cfg.n_policy_current, action_dim),
                           following=np.asarray(following).reshape(n, cfg.n_policy_next, action_dim),
                           dataset_repeats=cfg.n_policy_current if cfg.include_dataset_action else 0)


def build_action_sample_set(model, batch, cfg, rng):
    def policy(states, repeats, noise):
        return model.act(np.repeat(states, repeats, axis=0), np.repeat(batch.z, repeats, axis=0),
                         sample=True, noise=noise).data

    return sample_actions(policy, batch.states, batch.next_states, model.action_dim, cfg, rng)


def _with_dataset(sampled, data, repeats):
    """Appends the dataset-action column ``repeats`` times along the sample axis."""
    return ops.concat([sampled] + [data] * repeats, axis=1)


def _sampled_forward(model, batch, samples):
    n, k, m = samples.sampled.shape
    states = np.repeat(batch.states, k, axis=0)
    z = np.repeat(batch.z, k, axis=0)
    pair = model.forward(states, samples.sampled.reshape(n * k, m), z)
    return pair, z


def _logsumexp_gap(sampled_scores, data_scores, repeats, axis=1):
    """mean logsumexp over samples (dataset column included) minus the dataset mean."""
    combined = _with_dataset(sampled_scores, data_scores, repeats) if repeats else sampled_scores
    return ops.sub(ops.logsumexp(combined, axis=axis).mean(), data_scores.mean())


def vc_penalty(model, batch, samples, forward_data):
    """Sum over heads of mean_s logsumexp_a F_h(s, a, z)^T z minus mean (Q1 + Q2) at dataset actions."""
    n, k = batch.size, samples.sampled.shape[1]
    pair, z = _sampled_forward(model, batch, samples)
    total = None
    for sampled_forward, data_forward in zip(pair, forward_data):
        sampled_q = ops.reshape(ops.rowdot(sampled_forward, z), (n, k))
        data_q = ops.reshape(ops.rowdot(data_forward, batch.z), (n, 1))
        gap = _logsumexp_gap(sampled_q, data_q, samples.dataset_repeats)
        total = gap if total is None else ops.add(total, gap)
    return PenaltyResult(total, *_q_means(pair, z, forward_data, batch.z))


def mc_penalty(model, batch, samples, forward_data, future_embedding):
    """As :func:`vc_penalty` with F^T z replaced by the measures F^T B(s+) over the batch's future states."""
    n, k = batch.size, samples.sampled.shape[1]
    pair, z = _sampled_forward(model, batch, samples)
    total = None
    for sampled_forward, data_forward in zip(pair, forward_data):
        sampled_m = ops.reshape(ops.crossdot(sampled_forward, future_embedding), (n, k, n))
        data_m = ops.reshape(ops.crossdot(data_forward, future_embedding), (n, 1, n))
        gap = _logsumexp_gap(sampled_m, data_m, samples.dataset_repeats)
        total = gap if total is None else ops.add(total, gap)
    return PenaltyResult(total, *_q_means(pair, z, forward_data, batch.z))


def _q_means(pair, z, forward_data, batch_z):
    with no_grad():
        ood = min_head_q((ops.detach(pair[0]), ops.detach(pair[1])), z).data.mean()
        data = min_head_q((ops.detach(forward_data[0]), ops.detach(forward_data[1])), batch_z).data.mean()
    return float(data), float(ood)


def cql_penalty(critic, states, actions, samples):
    """Double-critic logsumexp estimate of max_a Q(s, a) minus Q at dataset actions."""
    n, k, m = samples.sampled.shape
    sampled_pair = critic(np.repeat(states, k, axis=0), samples.sampled.reshape(n * k, m))
    data_pair = critic(states, actions)
    total = None
    for sampled_q, data_q in zip(sampled_pair, data_pair):
        gap = _logsumexp_gap(ops.reshape(sampled_q, (n, k)), ops.reshape(data_q, (n, 1)),
                             samples.dataset_repeats)
        total = gap if total is None else ops.add(total, gap)
    with no_grad():
        ood = ops.minimum(ops.detach(sampled_pair[0]), ops.detach(sampled_pair[1])).data.mean()
        data = ops.minimum(ops.detach(data_pair[0]), ops.detach(data_pair[1])).data.mean()
    return PenaltyResult(total, float(data), float(ood))


PENALTIES = {'vc': vc_penalty, 'mc': mc_penalty}


class AlphaState(object):
    """Penalty weight alpha = clamp(exp(log_alpha), 0, alpha_max) with its own Adam."""

    def __init__(self, lr, alpha_max, log_alpha=0.0):
        if alpha_max < 0:
            raise ValidationError({'alpha_max': 'must be >= 0'})
        self.alpha_max = alpha_max
        self.log_alpha = Parameter(np.array(log_alpha, dtype=np.float64), name='log_alpha')
        self.optimizer = Adam([('log_alpha', self.log_alpha)], lr=lr)

    @property
    def alpha(self):
        return float(np.clip(np.exp(self.log_alpha.data), 0.0, self.alpha_max))

    def state_dict(self):
        scalars, arrays = self.optimizer.state_dict()
        arrays['log_alpha'] = self.log_alpha.data.copy()
        return scalars, arrays

    def load_state_dict(self, scalars, arrays):
        self.log_alpha.data = np.array(arrays['log_alpha'], dtype=np.float64)
        self.optimizer.load_state_dict(scalars, arrays)


def alpha_loss(state, penalty, budget):
    alpha = ops.clip(ops.exp(state.log_alpha), 0.0, state.alpha_max)
    return ops.mul(alpha, -0.5 * (float(penalty) - budget))


def tune_alpha(state, penalty, budget):
    """One dual step on log alpha; returns the detached alpha to weight this step's penalty."""
    state.optimizer.zero_grad()
    backward(alpha_loss(state, penalty, budget))
    state.optimizer.step()
    return state.alpha
