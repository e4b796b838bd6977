from .autodiff import Tensor, no_grad, grad_enabled, assert_finite
from .adam import Adam, AdamState, adam_step
from .layers import Conv2d, Dense, BatchNorm
from .serialize import save_model, load_model, read_container, register_family

from . import autodiff
from . import functional
