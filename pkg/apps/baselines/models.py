import copy

import attr
import numpy as np

from apps.fb.models import as_batch
from project import settings
from utils.autodiff import no_grad, ops
from utils.autodiff.layers import MLP, MLPSpec, Module
from utils.exceptions import ValidationError

BASELINES = ('td3', 'cql')


@attr.s
class BaselineConfig(object):
    task = attr.ib(default='top_left', type=str)
    hidden_dim = attr.ib(default=settings.HIDDEN_DIM, type=int)
    hidden_layers = attr.ib(default=settings.HIDDEN_LAYERS, type=int)
    cql_alpha = attr.ib(default=settings.CQL_ALPHA, type=float)
    lagrange = attr.ib(default=False, type=bool)
    policy_delay = attr.ib(default=settings.POLICY_DELAY, type=int)

    @lagrange.validator
    def _no_lagrange(self, attribute, value):
        if value:
            raise ValidationError({'lagrange': 'the CQL baseline keeps alpha fixed'})

    def mlp(self, input_dim, output_dim):
        return MLPSpec(input_dim=input_dim, hidden_dims=[self.hidden_dim] * self.hidden_layers,
                       output_dim=output_dim, first_layer_norm=False)


class Critic(Module):
    """Twin Q(s, a) networks."""

    def __init__(self, config, state_dim, action_dim, rng):
        super(Critic, self).__init__()
        self.state_dim, self.action_dim = state_dim, action_dim
        self.q1 = self.register_module('q1', MLP(config.mlp(state_dim + action_dim, 1), rng))
        self.q2 = self.register_module('q2', MLP(config.mlp(state_dim + action_dim, 1), rng))

    def __call__(self, states, actions):
        inputs = ops.concat([as_batch(states, self.state_dim, 'critic'), as_batch(actions, self.action_dim, 'critic')])
        n = inputs.shape[0]
        return ops.reshape(self.q1(inputs), (n,)), ops.reshape(self.q2(inputs), (n,))


class DeterministicActor(Module):
    def __init__(self, config, state_dim, action_dim, rng, noise_std=settings.ACTOR_NOISE_STD,
                 noise_clip=settings.ACTOR_NOISE_CLIP):
        super(DeterministicActor, self).__init__()
        self.state_dim = state_dim
        self.noise_std, self.noise_clip = noise_std, noise_clip
        self.net = self.register_module('net', MLP(config.mlp(state_dim, action_dim), rng))

    def __call__(self, states, noise=None):
        mean = ops.tanh(self.net(as_batch(states, self.state_dim, 'actor')))
        if noise is None or self.noise_std == 0.0:
            return mean
        noise = np.asarray(noise, dtype=np.float64).reshape(mean.shape)
        truncated = np.clip(self.noise_std * noise, -self.noise_clip, self.noise_clip) / self.noise_std
        return ops.clip(ops.gaussian_sample(mean, self.noise_std, truncated), -1.0, 1.0)


class BaselineModel(Module):
    """Single-task actor-critic with lagging targets; also serves as its own evaluation policy."""

    def __init__(self, config, state_dim, action_dim, rng, polyak=settings.POLYAK):
        super(BaselineModel, self).__init__()
        self.config = config
        self.task = config.task
        self.state_dim, self.action_dim = state_dim, action_dim
        self.polyak = polyak
        self.critic = self.register_module('critic', Critic(config, state_dim, action_dim, rng))
        self.actor = self.register_module('actor', DeterministicActor(config, state_dim, action_dim, rng))
        self.critic_target = self.register_module('critic_target', copy.deepcopy(self.critic))
        self.actor_target = self.register_module('actor_target', copy.deepcopy(self.actor))

    def online_parameters(self, name):
        return [(name + '.' + key, p) for key, p in self._children[name].named_parameters()]

    def act(self, states):
        with no_grad():
            return self.actor(np.atleast_2d(states)).data

    def q_values(self, states, actions):
        with no_grad():
            q1, q2 = self.critic(np.atleast_2d(states), np.atleast_2d(actions))
            return np.minimum(q1.data, q2.data)

    def polyak_update(self, coefficient=None):
        coefficient = self.polyak if coefficient is None else coefficient
        self.critic_target.polyak_from(self.critic, coefficient)
        self.actor_target.polyak_from(self.actor, coefficient)


def restore_baseline_model(checkpoint):
    config = checkpoint.config
    model = BaselineModel(BaselineConfig(**config['baseline']), checkpoint.manifest['state_dim'],
                          checkpoint.manifest['action_dim'], np.random.default_rng(0),
                          polyak=config['train']['polyak'])
    model.load_state_dict(checkpoint.module_state('baseline'))
    return model
