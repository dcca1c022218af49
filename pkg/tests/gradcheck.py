"""Central finite differences against the tape's gradients."""
import numpy as np

from utils.autodiff import Parameter, Tensor, backward, no_grad


def numeric_gradient(fn, arrays, index, h=1e-5):
    base = [np.array(a, dtype=np.float64) for a in arrays]
    grad = np.zeros_like(base[index])
    flat = grad.reshape(-1)
    for i in range(flat.size):
        values = []
        for sign in (1.0, -1.0):
            shifted = [a.copy() for a in base]
            shifted[index].reshape(-1)[i] += sign * h
            with no_grad():
                values.append(fn(*[Tensor(a) for a in shifted]).item())
        flat[i] = (values[0] - values[1]) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return np.linalg.norm(analytic - numeric) / scale


def check_gradients(fn, *arrays, h=1e-5, tolerance=1e-6):
    """Asserts the tape gradient of the scalar ``fn(*arrays)`` matches finite differences."""
    params = [Parameter(np.array(a, dtype=np.float64)) for a in arrays]
    backward(fn(*params))
    for index, param in enumerate(params):
        numeric = numeric_gradient(fn, arrays, index, h)
        error = relative_error(param.grad, numeric)
        assert error < tolerance, 'input {}: relative error {:.3g}'.format(index, error)


def check_parameter_gradients(loss_fn, named_params, h=1e-6, rtol=1e-4, atol=1e-6):
    """Same check for model parameters; ``loss_fn()`` rebuilds the scalar loss on every call."""
    named_params = list(named_params)
    for _, param in named_params:
        param.zero_grad()
    backward(loss_fn())
    for name, param in named_params:
        analytic = np.zeros_like(param.data) if param.grad is None else param.grad.copy()
        original = param.data.copy()
        numeric = np.zeros_like(original)
        for index in np.ndindex(original.shape):
            values = []
            for sign in (1.0, -1.0):
                param.data = original.copy()
                param.data[index] += sign * h
                with no_grad():
                    values.append(loss_fn().item())
            numeric[index] = (values[0] - values[1]) / (2.0 * h)
        param.data = original
        assert np.allclose(analytic, numeric, rtol=rtol, atol=atol), '{}: max abs error {:.3g}'.format(
            name, np.abs(analytic - numeric).max())
