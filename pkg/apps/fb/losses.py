"""FB temporal-difference objective and the quantities derived from F and B."""
import math

import attr
import numpy as np

from utils.autodiff import no_grad, ops
from utils.exceptions import EmptyDataset, ValidationError


@attr.s
class FBBatch(object):
    """One mini-batch; ``future_states`` is a permutation of ``next_states``.

    ``permutation[j]`` is the row whose next state sits in future column
    ``j``, so row ``i``'s own successor is the column ``j`` with
    ``permutation[j] == i``.
    """

    states = attr.ib()
    actions = attr.ib()
    next_states = attr.ib()
    z = attr.ib()
    permutation = attr.ib()

    @property
    def future_states(self):
        return self.next_states[self.permutation]

    @property
    def size(self):
        return len(self.states)

    def successor_mask(self):
        mask = np.zeros((self.size, self.size))
        mask[self.permutation, np.arange(self.size)] = 1.0
        return mask

    @classmethod
    def from_dataset(cls, dataset, indices, z, rng):
        return cls(states=dataset.states[indices], actions=dataset.actions[indices],
                   next_states=dataset.next_states[indices], z=np.asarray(z, dtype=np.float64),
                   permutation=rng.permutation(len(indices)))


@attr.s
class FBLoss(object):
    loss = attr.ib()
    forward = attr.ib()
    future_embedding = attr.ib()
    diagnostics = attr.ib(factory=dict)


def uniform_sphere(count, d, rng):
    if d <= 0:
        raise ValidationError({'latent_dim': 'must be positive, got {}'.format(d)})
    draws = rng.standard_normal((count, d))
    return math.sqrt(d) * draws / np.linalg.norm(draws, axis=1, keepdims=True)


def sample_z(count, d, states, backward, mix_ratio, rng):
    """``ceil(mix_ratio * count)`` uniform draws on the sqrt(d) sphere, the rest B(s) of batch states."""
    if not 0.0 <= mix_ratio <= 1.0:
        raise ValidationError({'z_mix_ratio': 'must lie in [0, 1], got {}'.format(mix_ratio)})
    n_uniform = int(math.ceil(mix_ratio * count))
    uniform = uniform_sphere(n_uniform, d, rng)
    n_backward = count - n_uniform
    if n_backward == 0:
        return uniform
    states = np.asarray(states, dtype=np.float64)
    picks = rng.integers(0, len(states), size=n_backward)
    with no_grad():
        embedded = backward(states[picks]).data
    return np.concatenate([uniform, embedded], axis=0)


def _select_rows(pick, first, second):
    pick = pick[:, None]
    return np.where(pick, first, second)


def fb_loss(model, batch, discount, next_noise=None):
    """Sum over both forward heads of the off-diagonal TD residual minus twice the successor term."""
    if not 0.0 < discount < 1.0:
        raise ValidationError({'discount': 'must lie in (0, 1), got {}'.format(discount)})

    n = batch.size
    future = batch.future_states
    with no_grad():
        next_actions = model.act(batch.next_states, batch.z, sample=next_noise is not None, noise=next_noise)
        target1, target2 = model.forward_target(batch.next_states, next_actions, batch.z)
        target_future = model.backward_target(future).data
        q1 = np.einsum('sd,sd->s', target1.data, batch.z)
        q2 = np.einsum('sd,sd->s', target2.data, batch.z)
        target_forward = _select_rows(q1 <= q2, target1.data, target2.data)
        target_measure = target_forward @ target_future.T

    forward1, forward2 = model.forward(batch.states, batch.actions, batch.z)
    future_embedding = model.backward(future)

    diagonal = batch.successor_mask()
    off_diagonal = 1.0 - diagonal
    total = None
    diagnostics = {}
    for index, forward in enumerate((forward1, forward2), 1):
        measure = ops.crossdot(forward, future_embedding)
        residual = ops.sub(measure, discount * target_measure)
        off_term = ops.mul(ops.square(residual), off_diagonal).sum() / max(off_diagonal.sum(), 1.0)
        diag_term = ops.mul(measure, diagonal).sum() / n
        head_loss = ops.sub(off_term, 2.0 * diag_term)
        diagnostics['fb_offdiag_{}'.format(index)] = off_term.item()
        diagnostics['fb_diag_{}'.format(index)] = diag_term.item()
        total = head_loss if total is None else ops.add(total, head_loss)

    diagnostics['target_measure_mean'] = float(target_measure.mean())
    return FBLoss(loss=total, forward=(forward1, forward2), future_embedding=future_embedding,
                  diagnostics=diagnostics)


def head_q(forward, z):
    return ops.rowdot(forward, z)


def min_head_q(forward_pair, z):
    return ops.minimum(head_q(forward_pair[0], z), head_q(forward_pair[1], z))


def q_value(model, states, actions, z):
    """Q-proxy min_h F_h(s, a, z)^T z, one value per row."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = np.broadcast_to(z, (len(states), len(z)))
    with no_grad():
        return min_head_q(model.forward(states, np.atleast_2d(actions), z), z).data


def infer_z(backward, states, rewards, project=False):
    """Reward-weighted average of B over labelled states."""
    states = np.asarray(states, dtype=np.float64)
    rewards = np.asarray(rewards, dtype=np.float64)
    if len(states) == 0:
        raise EmptyDataset('z inference needs at least one labelled state')
    with no_grad():
        z = (rewards[:, None] * backward(states).data).mean(axis=0)
    if project:
        norm = np.linalg.norm(z)
        if norm > 0.0:
            z = z * (math.sqrt(len(z)) / norm)
    return z


def goal_z(backward, goal_state):
    with no_grad():
        return backward(np.atleast_2d(goal_state)).data[0]


def actor_loss(model, batch, noise):
    """-mean min_h F_h(s, pi(s, z), z)^T z with F held fixed."""
    actions = model.act(batch.states, batch.z, sample=noise is not None, noise=noise)
    with model.forward.frozen():
        forward_pair = model.forward(batch.states, actions, batch.z)
        q = min_head_q(forward_pair, batch.z)
        return ops.neg(q.mean())
