from contextlib import contextmanager

import attr
import numpy as np

from utils.autodiff import ops
from utils.autodiff.tensor import Parameter
from utils.exceptions import ShapeError, ValidationError


def _positive_dims(instance, attribute, value):
    dims = value if isinstance(value, (list, tuple)) else [value]
    if attribute.name == 'hidden_dims' and not dims:
        raise ValidationError('{}: hidden dims must be non-empty'.format(attribute.name))
    if any(int(d) <= 0 for d in dims):
        raise ValidationError('{}: all dims must be positive, got {}'.format(attribute.name, value))


@attr.s(frozen=True)
class MLPSpec(object):
    input_dim = attr.ib(converter=int, validator=_positive_dims)
    hidden_dims = attr.ib(converter=tuple, validator=_positive_dims)
    output_dim = attr.ib(converter=int, validator=_positive_dims)
    first_layer_norm = attr.ib(default=True)


class Module(object):
    def __init__(self):
        self._parameters = {}
        self._children = {}

    def register_parameter(self, name, value):
        param = Parameter(value, name=name)
        self._parameters[name] = param
        return param

    def register_module(self, name, module):
        self._children[name] = module
        return module

    def named_parameters(self, prefix=''):
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, child in self._children.items():
            for item in child.named_parameters('{}{}.'.format(prefix, name)):
                yield item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        if missing:
            raise ValidationError('missing parameters: {}'.format(missing))
        for name, param in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise ValidationError('parameter "{}" has shape {}, expected {}'.format(name, value.shape, param.shape))
            param.data = value.copy()

    @contextmanager
    def frozen(self):
        """Stops gradients into this module's parameters inside the block."""
        params = self.parameters()
        flags = [p.requires_grad for p in params]
        for param in params:
            param.requires_grad = False
        try:
            yield self
        finally:
            for param, flag in zip(params, flags):
                param.requires_grad = flag

    def polyak_from(self, online, coefficient):
        for (name, target), (_, source) in zip(self.named_parameters(), online.named_parameters()):
            if target.shape != source.shape:
                raise ShapeError('polyak', target.shape, source.shape)
            target.data = (1.0 - coefficient) * target.data + coefficient * source.data


class Linear(Module):
    def __init__(self, in_dim, out_dim, rng):
        super(Linear, self).__init__()
        bound = 1.0 / np.sqrt(in_dim)
        self.weight = self.register_parameter('weight', rng.uniform(-bound, bound, size=(in_dim, out_dim)))
        self.bias = self.register_parameter('bias', rng.uniform(-bound, bound, size=(out_dim,)))

    def __call__(self, x):
        if x.shape[-1] != self.weight.shape[0]:
            raise ShapeError('linear', x.shape, self.weight.shape)
        return ops.add(ops.matmul(x, self.weight), self.bias)


class LayerNorm(Module):
    def __init__(self, dim):
        super(LayerNorm, self).__init__()
        self.gain = self.register_parameter('gain', np.ones(dim))
        self.bias = self.register_parameter('bias', np.zeros(dim))

    def __call__(self, x):
        return ops.layer_norm(x, self.gain, self.bias)


class MLP(Module):
    """Linear stack; the first hidden layer is layer-normed and tanh-squashed,
    the rest use ReLU, the output layer is linear."""

    def __init__(self, spec, rng):
        super(MLP, self).__init__()
        self.spec = spec
        dims = [spec.input_dim] + list(spec.hidden_dims)
        self.hidden = [self.register_module('hidden{}'.format(i), Linear(dims[i], dims[i + 1], rng))
                       for i in range(len(spec.hidden_dims))]
        self.norm = self.register_module('norm', LayerNorm(dims[1])) if spec.first_layer_norm else None
        self.out = self.register_module('out', Linear(dims[-1], spec.output_dim, rng))

    def __call__(self, x):
        if x.shape[-1] != self.spec.input_dim:
            raise ShapeError('mlp', x.shape, (self.spec.input_dim,))
        h = x
        for i, layer in enumerate(self.hidden):
            h = layer(h)
            if i == 0 and self.norm is not None:
                h = ops.tanh(self.norm(h))
            else:
                h = ops.relu(h)
        return self.out(h)
