import attr
import numpy as np

from project import settings
from utils.exceptions import EmptyDataset, ValidationError


def _matrix(value):
    return np.ascontiguousarray(value, dtype=np.float64)


@attr.s(frozen=True)
class Transition(object):
    state = attr.ib(converter=_matrix)
    action = attr.ib(converter=_matrix)
    next_state = attr.ib(converter=_matrix)
    reward = attr.ib(default=0.0, converter=float)
    terminal = attr.ib(default=False, converter=bool)

    @reward.validator
    def _non_negative(self, attribute, value):
        if not value >= 0.0:
            raise ValidationError({'reward': 'rewards are non-negative, got {}'.format(value)})


@attr.s(eq=False)
class Dataset(object):
    """Column-major store of offline transitions; treat as immutable."""

    states = attr.ib(converter=_matrix)
    actions = attr.ib(converter=_matrix)
    next_states = attr.ib(converter=_matrix)
    rewards = attr.ib(converter=_matrix)
    terminals = attr.ib(converter=lambda v: np.ascontiguousarray(v, dtype=bool))
    metadata = attr.ib(factory=dict)

    def __attrs_post_init__(self):
        count = len(self.states)
        if count == 0:
            raise EmptyDataset('dataset has no transitions')
        if self.states.ndim != 2 or self.actions.ndim != 2 or self.next_states.shape != self.states.shape:
            raise ValidationError('inconsistent dataset dims: states {}, actions {}, next_states {}'
                                  .format(self.states.shape, self.actions.shape, self.next_states.shape))
        if len(self.actions) != count or self.rewards.shape != (count,) or self.terminals.shape != (count,):
            raise ValidationError('inconsistent dataset row counts')
        if not (self.rewards >= 0.0).all():
            raise ValidationError('rewards are non-negative')

    def __len__(self):
        return len(self.states)

    def __getitem__(self, index):
        return Transition(self.states[index], self.actions[index], self.next_states[index],
                          self.rewards[index], self.terminals[index])

    @property
    def state_dim(self):
        return self.states.shape[1]

    @property
    def action_dim(self):
        return self.actions.shape[1]

    @classmethod
    def from_transitions(cls, transitions, metadata=None):
        transitions = list(transitions)
        if not transitions:
            raise EmptyDataset('dataset has no transitions')
        return cls(states=[t.state for t in transitions],
                   actions=[t.action for t in transitions],
                   next_states=[t.next_state for t in transitions],
                   rewards=[t.reward for t in transitions],
                   terminals=[t.terminal for t in transitions],
                   metadata=dict(metadata or {}))

    def select(self, indices, **metadata):
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            raise EmptyDataset('selection leaves no transitions')
        meta = dict(self.metadata)
        meta.update(metadata)
        return Dataset(self.states[indices], self.actions[indices], self.next_states[indices],
                       self.rewards[indices], self.terminals[indices], meta)

    def with_rewards(self, rewards, **metadata):
        meta = dict(self.metadata)
        meta.update(metadata)
        return Dataset(self.states, self.actions, self.next_states, rewards, self.terminals, meta)

    def sample_indices(self, batch_size, rng):
        return rng.integers(0, len(self), size=batch_size)

    def identical_to(self, other):
        return (self.states.tobytes() == other.states.tobytes() and
                self.actions.tobytes() == other.actions.tobytes() and
                self.next_states.tobytes() == other.next_states.tobytes() and
                self.rewards.tobytes() == other.rewards.tobytes() and
                self.terminals.tobytes() == other.terminals.tobytes() and
                self.metadata == other.metadata)

    @property
    def is_relabelled(self):
        return bool((self.rewards > 0).any())


@attr.s
class DatasetConfig(object):
    policy = attr.ib(default='explore', type=str)
    episodes = attr.ib(default=settings.DATASET_EPISODES, type=int)
    subsample = attr.ib(default=settings.DATASET_SUBSAMPLE, type=int)
    filter_left = attr.ib(default=False, type=bool)
    seed = attr.ib(default=settings.SEED, type=int)
