import copy

import attr
import numpy as np

from project import settings
from utils.autodiff import no_grad, ops
from utils.autodiff.layers import MLP, MLPSpec, Module
from utils.autodiff.tensor import as_tensor
from utils.exceptions import ShapeError, ValidationError

VARIANTS = ('none', 'vc', 'mc')
ALGORITHMS = {'fb': 'none', 'vcfb': 'vc', 'mcfb': 'mc'}


@attr.s
class ModelConfig(object):
    latent_dim = attr.ib(default=settings.LATENT_DIM, type=int)
    hidden_dim = attr.ib(default=settings.HIDDEN_DIM, type=int)
    hidden_layers = attr.ib(default=settings.HIDDEN_LAYERS, type=int)
    backward_hidden_dim = attr.ib(default=settings.BACKWARD_HIDDEN_DIM, type=int)
    backward_hidden_layers = attr.ib(default=settings.BACKWARD_HIDDEN_LAYERS, type=int)
    preprocessor_hidden_dim = attr.ib(default=settings.PREPROCESSOR_HIDDEN_DIM, type=int)
    preprocessor_hidden_layers = attr.ib(default=settings.PREPROCESSOR_HIDDEN_LAYERS, type=int)
    embedding_dim = attr.ib(default=settings.EMBEDDING_DIM, type=int)
    actor_noise_std = attr.ib(default=settings.ACTOR_NOISE_STD, type=float)
    actor_noise_clip = attr.ib(default=settings.ACTOR_NOISE_CLIP, type=float)

    def mlp(self, input_dim, width, layers, output_dim):
        return MLPSpec(input_dim=input_dim, hidden_dims=[width] * layers, output_dim=output_dim)

    def preprocessor(self, input_dim):
        return self.mlp(input_dim, self.preprocessor_hidden_dim, self.preprocessor_hidden_layers, self.embedding_dim)

    def head(self, output_dim):
        return self.mlp(2 * self.embedding_dim, self.hidden_dim, self.hidden_layers, output_dim)


@attr.s
class TrainConfig(object):
    learning_steps = attr.ib(default=settings.LEARNING_STEPS, type=int)
    batch_size = attr.ib(default=settings.BATCH_SIZE, type=int)
    discount = attr.ib(default=settings.DISCOUNT, type=float)
    learning_rate = attr.ib(default=settings.LEARNING_RATE, type=float)
    polyak = attr.ib(default=settings.POLYAK, type=float)
    z_mix_ratio = attr.ib(default=settings.Z_MIX_RATIO, type=float)
    eval_every = attr.ib(default=settings.EVAL_EVERY, type=int)
    checkpoint_every = attr.ib(default=settings.CHECKPOINT_EVERY, type=int)
    grad_clip = attr.ib(default=settings.GRAD_CLIP, type=float)
    seed = attr.ib(default=settings.SEED, type=int)

    def __attrs_post_init__(self):
        if not 0.0 < self.discount < 1.0:
            raise ValidationError({'discount': 'must lie in (0, 1), got {}'.format(self.discount)})


@attr.s
class PenaltyConfig(object):
    variant = attr.ib(default='none', type=str)
    budget = attr.ib(default=settings.PENALTY_BUDGET, type=float)
    n_uniform = attr.ib(default=settings.OOD_ACTION_SAMPLES, type=int)
    n_policy_current = attr.ib(default=settings.OOD_ACTION_SAMPLES, type=int)
    n_policy_next = attr.ib(default=settings.OOD_ACTION_SAMPLES, type=int)
    include_dataset_action = attr.ib(default=True, type=bool)
    alpha_max = attr.ib(default=settings.ALPHA_MAX, type=float)
    fixed_alpha = attr.ib(default=-1.0, type=float)

    def __attrs_post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError({'variant': '"{}" is not one of {}'.format(self.variant, list(VARIANTS))})
        if self.budget < 0:
            raise ValidationError({'budget': 'must be >= 0'})
        if self.enabled and min(self.n_uniform, self.n_policy_current, self.n_policy_next) < 1:
            raise ValidationError({'samples': 'sample counts must be >= 1 for a conservative variant'})

    @property
    def enabled(self):
        return self.variant != 'none'

    @property
    def tuned(self):
        """Negative ``fixed_alpha`` means alpha follows the budget by dual descent."""
        return self.fixed_alpha < 0

    @property
    def samples_per_row(self):
        count = self.n_uniform + self.n_policy_current + self.n_policy_next
        return count + (self.n_policy_current if self.include_dataset_action else 0)


def as_batch(value, width, primitive):
    value = as_tensor(value)
    if value.ndim == 1:
        value = ops.reshape(value, (1, value.shape[0]))
    if value.ndim != 2 or value.shape[1] != width:
        raise ShapeError(primitive, value.shape, (None, width))
    return value


class ForwardModel(Module):
    """Double-headed F(s, a, z); both heads read the same two embeddings."""

    def __init__(self, config, state_dim, action_dim, rng):
        super(ForwardModel, self).__init__()
        self.state_dim, self.action_dim, self.latent_dim = state_dim, action_dim, config.latent_dim
        self.sa = self.register_module('sa', MLP(config.preprocessor(state_dim + action_dim), rng))
        self.sz = self.register_module('sz', MLP(config.preprocessor(state_dim + config.latent_dim), rng))
        self.head1 = self.register_module('head1', MLP(config.head(config.latent_dim), rng))
        self.head2 = self.register_module('head2', MLP(config.head(config.latent_dim), rng))

    def __call__(self, states, actions, z):
        states = as_batch(states, self.state_dim, 'forward_embed')
        actions = as_batch(actions, self.action_dim, 'forward_embed')
        z = as_batch(z, self.latent_dim, 'forward_embed')
        if not states.shape[0] == actions.shape[0] == z.shape[0]:
            raise ShapeError('forward_embed', states.shape, actions.shape, z.shape)
        embedding = ops.concat([self.sa(ops.concat([states, actions])), self.sz(ops.concat([states, z]))])
        return self.head1(embedding), self.head2(embedding)


class BackwardModel(Module):
    """B(s) projected onto the sphere of radius sqrt(d)."""

    def __init__(self, config, state_dim, rng):
        super(BackwardModel, self).__init__()
        self.state_dim, self.latent_dim = state_dim, config.latent_dim
        spec = config.mlp(state_dim, config.backward_hidden_dim, config.backward_hidden_layers, config.latent_dim)
        self.net = self.register_module('net', MLP(spec, rng))

    @property
    def radius(self):
        return np.sqrt(self.latent_dim)

    def __call__(self, states):
        states = as_batch(states, self.state_dim, 'backward_embed')
        return ops.l2_normalize(self.net(states), radius=self.radius)


class Actor(Module):
    def __init__(self, config, state_dim, action_dim, rng):
        super(Actor, self).__init__()
        self.state_dim, self.action_dim, self.latent_dim = state_dim, action_dim, config.latent_dim
        self.noise_std = config.actor_noise_std
        self.noise_clip = config.actor_noise_clip
        self.s = self.register_module('s', MLP(config.preprocessor(state_dim), rng))
        self.sz = self.register_module('sz', MLP(config.preprocessor(state_dim + config.latent_dim), rng))
        self.head = self.register_module('head', MLP(config.head(action_dim), rng))

    def __call__(self, states, z, noise=None):
        states = as_batch(states, self.state_dim, 'act')
        z = as_batch(z, self.latent_dim, 'act')
        mean = ops.tanh(self.head(ops.concat([self.s(states), self.sz(ops.concat([states, z]))])))
        if noise is None or self.noise_std == 0.0:
            return mean
        noise = np.asarray(noise, dtype=np.float64).reshape(mean.shape)
        truncated = np.clip(self.noise_std * noise, -self.noise_clip, self.noise_clip) / self.noise_std
        return ops.clip(ops.gaussian_sample(mean, self.noise_std, truncated), -1.0, 1.0)


class FBModel(Module):
    def __init__(self, config, state_dim, action_dim, rng, polyak=settings.POLYAK):
        super(FBModel, self).__init__()
        self.config = config
        self.state_dim, self.action_dim = state_dim, action_dim
        self.polyak = polyak
        self.forward = self.register_module('forward', ForwardModel(config, state_dim, action_dim, rng))
        self.backward = self.register_module('backward', BackwardModel(config, state_dim, rng))
        self.actor = self.register_module('actor', Actor(config, state_dim, action_dim, rng))
        self.forward_target = self.register_module('forward_target', copy.deepcopy(self.forward))
        self.backward_target = self.register_module('backward_target', copy.deepcopy(self.backward))

    @property
    def latent_dim(self):
        return self.config.latent_dim

    def online_parameters(self, *names):
        return [(prefix + '.' + name, p) for prefix in names
                for name, p in self._children[prefix].named_parameters()]

    def forward_embed(self, states, actions, z):
        return self.forward(states, actions, z)

    def backward_embed(self, states):
        return self.backward(states)

    def act(self, states, z, sample=False, noise=None):
        if sample != (noise is not None):
            raise ValidationError('noise must be supplied exactly when sampling')
        return self.actor(states, z, noise=noise if sample else None)

    def polyak_update(self, coefficient=None):
        coefficient = self.polyak if coefficient is None else coefficient
        self.forward_target.polyak_from(self.forward, coefficient)
        self.backward_target.polyak_from(self.backward, coefficient)


def forward_embed(model, states, actions, z):
    return model.forward_embed(states, actions, z)


def backward_embed(model, states):
    return model.backward_embed(states)


def act(model, states, z, sample=False, noise=None):
    """Actions as a plain array; never records on the tape."""
    with no_grad():
        return model.act(states, z, sample=sample, noise=noise).data


def polyak_update(model, coefficient=None):
    model.polyak_update(coefficient)
