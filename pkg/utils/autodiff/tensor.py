import itertools
import threading
from contextlib import contextmanager

import numpy as np

from utils.exceptions import GradientError

_local = threading.local()
_node_ids = itertools.count()


def _tape_stack():
    stack = getattr(_local, 'tapes', None)
    if stack is None:
        stack = _local.tapes = [Tape(retain=False)]
    return stack


def current_tape():
    return _tape_stack()[-1]


def is_grad_enabled():
    return getattr(_local, 'grad_enabled', True)


@contextmanager
def no_grad():
    previous = is_grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


class Tape(object):
    """Ordered record of the operations of one computation.

    Node ids grow monotonically, so the recorded order is a topological
    order. The implicit per-thread tape does not retain its nodes; enter a
    ``Tape`` explicitly to keep them for inspection.
    """

    def __init__(self, retain=True):
        self.retain = retain
        self.nodes = []

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _tape_stack().pop()

    def __len__(self):
        return len(self.nodes)

    def record(self, tensor):
        tensor.node_id = next(_node_ids)
        tensor.tape = self
        if self.retain:
            self.nodes.append(tensor)

    def clear(self):
        self.nodes = []


class Tensor(object):
    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.array(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self.op = None
        self.node_id = None
        self.tape = None
        self._parents = ()
        self._needs_grad = ()
        self._backward = None

    def __repr__(self):
        return 'Tensor(shape={}, op={}, requires_grad={})'.format(self.shape, self.op, self.requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return self._backward is None

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __add__(self, other):
        from utils.autodiff import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from utils.autodiff import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from utils.autodiff import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from utils.autodiff import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError('division is only defined by constants')
        return self * (1.0 / np.asarray(other, dtype=np.float64))

    def __neg__(self):
        from utils.autodiff import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from utils.autodiff import ops
        return ops.matmul(self, other)

    def sum(self, axis=None):
        from utils.autodiff import ops
        return ops.reduce_sum(self, axis=axis)

    def mean(self, axis=None):
        from utils.autodiff import ops
        return ops.reduce_mean(self, axis=axis)

    def reshape(self, *shape):
        from utils.autodiff import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)


class Parameter(Tensor):
    def __init__(self, data, name=None):
        super(Parameter, self).__init__(data, requires_grad=True, name=name)

    def __repr__(self):
        return 'Parameter({}, shape={})'.format(self.name, self.shape)


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def make_node(data, parents, backward_fn, op):
    """Wraps ``data`` as the output of ``op``.

    ``backward_fn`` maps the output gradient to one gradient per parent
    (``None`` for a parent that receives nothing).
    """
    out = Tensor(data)
    out.op = op
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._needs_grad = tuple(p.requires_grad for p in parents)
        out._backward = backward_fn
        current_tape().record(out)
    return out


def backward(root):
    if root.size != 1:
        raise GradientError('backward needs a scalar root, got shape {}'.format(root.shape))
    if not root.requires_grad:
        raise GradientError('root does not depend on any parameter')

    if root.is_leaf:
        root.grad = np.ones_like(root.data) if root.grad is None else root.grad + 1.0
        return

    interior = {}
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in interior:
            continue
        interior[id(node)] = node
        stack.extend(p for p, needs in zip(node._parents, node._needs_grad) if needs and not p.is_leaf)

    grads = {id(root): np.ones_like(root.data)}
    for node in sorted(interior.values(), key=lambda n: n.node_id, reverse=True):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        for parent, needs, parent_grad in zip(node._parents, node._needs_grad, node._backward(grad)):
            if parent_grad is None or not needs:
                continue
            if parent.is_leaf:
                parent.grad = parent_grad.copy() if parent.grad is None else parent.grad + parent_grad
            elif id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + parent_grad
            else:
                grads[id(parent)] = parent_grad
