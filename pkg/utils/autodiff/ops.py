"""Differentiable primitives over float64 tensors.

Every function accepts Tensors or array-likes (wrapped as constants) and
returns a Tensor recorded on the current tape when any input requires a
gradient.
"""
import numpy as np

from utils.autodiff.tensor import Tensor, as_tensor, make_node
from utils.exceptions import DegenerateEmbedding, ShapeError


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(primitive, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(primitive, a.shape, b.shape)


def _normalise_axis(primitive, x, axis):
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(primitive, x.shape, (axis,))
    return axis % x.ndim


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('add', a, b)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return make_node(a.data + b.data, (a, b), backward, 'add')


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('sub', a, b)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return make_node(a.data - b.data, (a, b), backward, 'sub')


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('multiply', a, b)

    def backward(grad):
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return make_node(a.data * b.data, (a, b), backward, 'multiply')


def neg(x):
    x = as_tensor(x)
    return make_node(-x.data, (x,), lambda grad: (-grad,), 'neg')


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError('matmul', a.shape, b.shape)

    def backward(grad):
        return grad @ b.data.T, a.data.T @ grad

    return make_node(a.data @ b.data, (a, b), backward, 'matmul')


def relu(x):
    x = as_tensor(x)
    mask = x.data > 0
    return make_node(np.where(mask, x.data, 0.0), (x,), lambda grad: (grad * mask,), 'relu')


def tanh(x):
    x = as_tensor(x)
    y = np.tanh(x.data)
    return make_node(y, (x,), lambda grad: (grad * (1.0 - y * y),), 'tanh')


def exp(x):
    x = as_tensor(x)
    y = np.exp(x.data)
    return make_node(y, (x,), lambda grad: (grad * y,), 'exp')


def square(x):
    x = as_tensor(x)
    return make_node(x.data * x.data, (x,), lambda grad: (2.0 * x.data * grad,), 'square')


def clip(x, low, high):
    x = as_tensor(x)
    mask = (x.data >= low) & (x.data <= high)
    return make_node(np.clip(x.data, low, high), (x,), lambda grad: (grad * mask,), 'clip')


def minimum(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError('minimum', a.shape, b.shape)
    pick_a = a.data <= b.data

    def backward(grad):
        return grad * pick_a, grad * ~pick_a

    return make_node(np.where(pick_a, a.data, b.data), (a, b), backward, 'minimum')


def reshape(x, shape):
    x = as_tensor(x)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError('reshape', x.shape, tuple(shape))
    return make_node(data, (x,), lambda grad: (grad.reshape(x.shape),), 'reshape')


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError('concat', ())
    first = tensors[0]
    axis = _normalise_axis('concat', first, axis)
    for t in tensors[1:]:
        if t.ndim != first.ndim or t.shape[:axis] + t.shape[axis + 1:] != first.shape[:axis] + first.shape[axis + 1:]:
            raise ShapeError('concat', first.shape, t.shape)

    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(grad):
        return tuple(np.split(grad, bounds, axis=axis))

    return make_node(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward, 'concat')


def reduce_sum(x, axis=None):
    x = as_tensor(x)
    if axis is not None:
        axis = _normalise_axis('reduce_sum', x, axis)

    def backward(grad):
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, x.shape).copy(),)

    return make_node(x.data.sum(axis=axis), (x,), backward, 'reduce_sum')


def reduce_mean(x, axis=None):
    x = as_tensor(x)
    if axis is not None:
        axis = _normalise_axis('reduce_mean', x, axis)
    count = x.size if axis is None else x.shape[axis]

    def backward(grad):
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad / count, x.shape).copy(),)

    return make_node(x.data.mean(axis=axis), (x,), backward, 'reduce_mean')


def logsumexp(x, axis=0):
    x = as_tensor(x)
    axis = _normalise_axis('logsumexp', x, axis)
    peak = x.data.max(axis=axis, keepdims=True)
    shifted = np.exp(x.data - peak)
    total = shifted.sum(axis=axis, keepdims=True)
    out = (peak + np.log(total)).squeeze(axis)
    softmax = shifted / total

    def backward(grad):
        return (np.expand_dims(grad, axis) * softmax,)

    return make_node(out, (x,), backward, 'logsumexp')


def rowdot(a, b):
    """einsum('sd,sd->s')"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or a.shape != b.shape:
        raise ShapeError('rowdot', a.shape, b.shape)

    def backward(grad):
        return grad[:, None] * b.data, grad[:, None] * a.data

    return make_node(np.einsum('sd,sd->s', a.data, b.data), (a, b), backward, 'rowdot')


def crossdot(a, b):
    """einsum('sd,td->st')"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError('crossdot', a.shape, b.shape)

    def backward(grad):
        return grad @ b.data, grad.T @ a.data

    return make_node(a.data @ b.data.T, (a, b), backward, 'crossdot')


def layer_norm(x, gain=None, bias=None, eps=1e-5):
    x = as_tensor(x)
    width = x.shape[-1]
    for param in (gain, bias):
        if param is not None and param.shape != (width,):
            raise ShapeError('layer_norm', x.shape, param.shape)

    mu = x.data.mean(axis=-1, keepdims=True)
    centred = x.data - mu
    inv_std = 1.0 / np.sqrt((centred ** 2).mean(axis=-1, keepdims=True) + eps)
    xhat = centred * inv_std
    y = xhat
    if gain is not None:
        y = y * gain.data
    if bias is not None:
        y = y + bias.data

    parents = [x] + [p for p in (gain, bias) if p is not None]

    def backward(grad):
        dxhat = grad * gain.data if gain is not None else grad
        dx = inv_std / width * (width * dxhat - dxhat.sum(axis=-1, keepdims=True) -
                                xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
        grads = [dx]
        if gain is not None:
            grads.append((grad * xhat).reshape(-1, width).sum(axis=0))
        if bias is not None:
            grads.append(grad.reshape(-1, width).sum(axis=0))
        return grads

    return make_node(y, parents, backward, 'layer_norm')


def l2_normalize(x, radius=1.0):
    """Projects each row onto the sphere of the given radius."""
    x = as_tensor(x)
    norm = np.sqrt((x.data ** 2).sum(axis=-1, keepdims=True))
    zero = np.flatnonzero(norm.reshape(-1) == 0.0)
    if zero.size:
        raise DegenerateEmbedding(zero)
    unit = x.data / norm

    def backward(grad):
        return (radius / norm * (grad - unit * (grad * unit).sum(axis=-1, keepdims=True)),)

    return make_node(radius * unit, (x,), backward, 'l2_normalize')


def gaussian_sample(mean, std, noise):
    """Reparameterised draw ``mean + std * noise`` with caller-supplied noise."""
    mean, std = as_tensor(mean), as_tensor(std)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != mean.shape:
        raise ShapeError('gaussian_sample', mean.shape, noise.shape)
    _broadcast_shape('gaussian_sample', mean, std)

    def backward(grad):
        return grad, _unbroadcast(grad * noise, std.shape)

    return make_node(mean.data + std.data * noise, (mean, std), backward, 'gaussian_sample')


def detach(x):
    return Tensor(as_tensor(x).data)
