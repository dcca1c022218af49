from utils.autodiff.tensor import Parameter, Tape, Tensor, as_tensor, backward, no_grad  # noqa: F401
from utils.autodiff.optim import Adam, AdamState, adam_step  # noqa: F401
