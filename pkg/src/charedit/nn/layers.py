"""Parameterized layers: convolution, dense, batch normalization.

Initialization is He-style uniform over fan-in, drawn from a caller-supplied
seeded generator so that builds are reproducible.
"""

import numpy as np

from . import autodiff as ad


class Conv2d:
    kind = "conv2d"

    def __init__(self, cin, cout, rng, dtype=np.float32):
        limit = np.sqrt(6.0 / (9 * cin))
        w = rng.uniform(-limit, limit, size=(cout, cin, 3, 3)).astype(dtype)
        self.weights = ad.Tensor(w, requires_grad=True)
        self.bias = ad.Tensor(np.zeros(cout, dtype=dtype), requires_grad=True)
        self.cin = cin
        self.cout = cout

    def __call__(self, x):
        return ad.conv2d(x, self.weights, self.bias)

    def parameters(self):
        return [self.weights, self.bias]

    def arrays(self):
        return [("weights", self.weights.data), ("bias", self.bias.data)]

    def load_arrays(self, arrays):
        self.weights.data = arrays["weights"]
        self.bias.data = arrays["bias"]


class Dense:
    kind = "fully-connected"

    def __init__(self, nin, nout, rng, dtype=np.float32):
        limit = np.sqrt(6.0 / nin)
        w = rng.uniform(-limit, limit, size=(nout, nin)).astype(dtype)
        self.weights = ad.Tensor(w, requires_grad=True)
        self.bias = ad.Tensor(np.zeros(nout, dtype=dtype), requires_grad=True)
        self.nin = nin
        self.nout = nout

    def __call__(self, x):
        return ad.dense(x, self.weights, self.bias)

    def parameters(self):
        return [self.weights, self.bias]

    def arrays(self):
        return [("weights", self.weights.data), ("bias", self.bias.data)]

    def load_arrays(self, arrays):
        self.weights.data = arrays["weights"]
        self.bias.data = arrays["bias"]


class BatchNorm:
    kind = "batch-norm"

    def __init__(self, channels, momentum=0.1, eps=1e-5, dtype=np.float32):
        self.weights = ad.Tensor(np.ones(channels, dtype=dtype), requires_grad=True)
        self.bias = ad.Tensor(np.zeros(channels, dtype=dtype), requires_grad=True)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.momentum = momentum
        self.eps = eps
        self.channels = channels

    def __call__(self, x, train):
        if x.shape[1] != self.channels:
            raise ValueError(
                f"batch_norm channel mismatch: input {x.shape[1]}, "
                f"layer {self.channels}")
        if train:
            out, mu, var = ad.batch_norm_train(x, self.weights, self.bias, self.eps)
            m = self.momentum
            self.running_mean = ((1 - m) * self.running_mean + m * mu).astype(
                self.running_mean.dtype)
            self.running_var = ((1 - m) * self.running_var + m * var).astype(
                self.running_var.dtype)
            return out
        return ad.batch_norm_infer(x, self.weights, self.bias,
                                   self.running_mean, self.running_var, self.eps)

    def parameters(self):
        return [self.weights, self.bias]

    def arrays(self):
        return [("weights", self.weights.data), ("bias", self.bias.data),
                ("running_mean", self.running_mean),
                ("running_var", self.running_var)]

    def load_arrays(self, arrays):
        self.weights.data = arrays["weights"]
        self.bias.data = arrays["bias"]
        self.running_mean = arrays["running_mean"]
        self.running_var = arrays["running_var"]
