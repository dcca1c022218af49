import attr
import numpy as np

from utils.exceptions import GradientError, ValidationError


@attr.s
class AdamState(object):
    lr = attr.ib(default=1e-4)
    beta1 = attr.ib(default=0.9)
    beta2 = attr.ib(default=0.999)
    eps = attr.ib(default=1e-8)
    step = attr.ib(default=0)
    first_moments = attr.ib(factory=list)
    second_moments = attr.ib(factory=list)

    @classmethod
    def for_params(cls, params, **kwargs):
        state = cls(**kwargs)
        state.first_moments = [np.zeros_like(p.data) for p in params]
        state.second_moments = [np.zeros_like(p.data) for p in params]
        return state


def adam_step(named_params, state, grad_clip=1.0):
    """One bias-corrected Adam update after clamping gradients elementwise."""
    if len(named_params) != len(state.first_moments):
        raise ValidationError('optimizer holds {} moment buffers for {} parameters'
                              .format(len(state.first_moments), len(named_params)))
    for name, param in named_params:
        if param.grad is None:
            raise GradientError('parameter "{}" has no gradient'.format(name))

    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for (name, param), m, v in zip(named_params, state.first_moments, state.second_moments):
        grad = param.grad
        if grad_clip is not None:
            grad = np.clip(grad, -grad_clip, grad_clip)
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        param.data -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)


class Adam(object):
    def __init__(self, named_params, lr=1e-4, betas=(0.9, 0.999), eps=1e-8, grad_clip=1.0):
        self.named_params = list(named_params)
        self.grad_clip = grad_clip
        self.state = AdamState.for_params([p for _, p in self.named_params],
                                          lr=lr, beta1=betas[0], beta2=betas[1], eps=eps)

    @property
    def params(self):
        return [p for _, p in self.named_params]

    def zero_grad(self):
        for param in self.params:
            param.zero_grad()

    def step(self):
        adam_step(self.named_params, self.state, grad_clip=self.grad_clip)

    def state_dict(self):
        arrays = {}
        for (name, _), m, v in zip(self.named_params, self.state.first_moments, self.state.second_moments):
            arrays['{}.m'.format(name)] = m.copy()
            arrays['{}.v'.format(name)] = v.copy()
        return {'step': self.state.step, 'lr': self.state.lr}, arrays

    def load_state_dict(self, scalars, arrays):
        self.state.step = int(scalars['step'])
        self.state.lr = float(scalars['lr'])
        for i, (name, param) in enumerate(self.named_params):
            for key, buffers in (('m', self.state.first_moments), ('v', self.state.second_moments)):
                value = arrays['{}.{}'.format(name, key)]
                if value.shape != param.shape:
                    raise ValidationError('moment "{}.{}" has shape {}, expected {}'
                                          .format(name, key, value.shape, param.shape))
                buffers[i] = value.copy()
