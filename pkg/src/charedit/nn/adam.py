"""Bias-corrected Adam optimizer."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Moment estimates plus hyperparameters for a fixed parameter list."""

    first_moment: list
    second_moment: list
    step_count: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7

    @classmethod
    def for_params(cls, params, **hyper):
        return cls(first_moment=[np.zeros_like(p) for p in params],
                   second_moment=[np.zeros_like(p) for p in params],
                   **hyper)


def adam_step(params, grads, state):
    """One in-place Adam update; returns the updated params and state."""
    if len(params) != len(state.first_moment):
        raise ValueError("Adam state does not match parameter list")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, grads, state.first_moment,
                          state.second_moment):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * np.square(g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


class Adam:
    """Optimizer bound to a list of autodiff parameter tensors."""

    def __init__(self, tensors, **hyper):
        self.tensors = list(tensors)
        self.state = AdamState.for_params([t.data for t in self.tensors], **hyper)

    def step(self):
        grads = []
        for t in self.tensors:
            grads.append(t.grad if t.grad is not None
                         else np.zeros_like(t.data))
        adam_step([t.data for t in self.tensors], grads, self.state)

    def zero_grad(self):
        for t in self.tensors:
            t.grad = None
