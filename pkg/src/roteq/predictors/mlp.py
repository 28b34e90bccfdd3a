import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple = (512, 4)
    activation: str = "logistic"
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive")
        if self.activation != "logistic":
            raise ValueError("only the logistic activation is supported")


def logistic(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class MLPRegressor:
    """Fully connected regressor: logistic hidden layers, linear output.

    All weights and biases live in one flat parameter vector; ``weights`` and
    ``biases`` are views into it, so Adam updates the whole model with a
    handful of vector operations.
    """

    kind = "mlp"

    def __init__(self, sizes):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError("need at least input and output sizes")
        total = sum(a * b + b for a, b in zip(self.sizes[:-1], self.sizes[1:]))
        self.params = np.zeros(total)
        self.weights, self.biases = self._views(self.params)
        self.loss_history = []

    @property
    def input_dim(self):
        return self.sizes[0]

    @property
    def output_dim(self):
        return self.sizes[-1]

    def _views(self, flat):
        ws, bs = [], []
        pos = 0
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            ws.append(flat[pos:pos + a * b].reshape(a, b))
            pos += a * b
            bs.append(flat[pos:pos + b])
            pos += b
        return ws, bs

    def init_params(self, rng):
        for w in self.weights:
            fan_in, fan_out = w.shape
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            w[...] = rng.uniform(-bound, bound, size=w.shape)
        for b in self.biases:
            b[...] = 0.0

    def _check_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None] if single else x
        if x2.ndim != 2 or x2.shape[1] != self.input_dim:
            raise ValueError(f"expected inputs of length {self.input_dim}, got shape {x.shape}")
        return x2, single

    def _forward(self, x):
        acts = [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            a = z if i == last else logistic(z)
            acts.append(a)
        return acts

    def predict(self, x):
        x2, single = self._check_x(x)
        out = self._forward(x2)[-1]
        return out[0] if single else out

    def loss(self, x, y):
        """Mean over samples of the squared 2-norm of the residual."""
        x2, _ = self._check_x(x)
        r = self._forward(x2)[-1] - np.asarray(y, dtype=np.float64).reshape(len(x2), -1)
        return float(np.einsum("ij,ij->", r, r) / len(x2))

    def gradient(self, x, y, out=None):
        """Loss and its gradient with respect to the flat parameter vector."""
        acts = self._forward(x)
        n = x.shape[0]
        r = acts[-1] - y
        loss = float(np.einsum("ij,ij->", r, r) / n)
        g = np.zeros_like(self.params) if out is None else out
        gw, gb = self._views(g)
        delta = (2.0 / n) * r
        for i in range(len(self.weights) - 1, -1, -1):
            np.matmul(acts[i].T, delta, out=gw[i])
            np.sum(delta, axis=0, out=gb[i])
            if i:
                a = acts[i]
                delta = (delta @ self.weights[i].T) * a * (1.0 - a)
        return loss, g

    def fit(self, x, y, config):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = x.shape[0]
        rng = np.random.default_rng(config.seed)
        self.init_params(rng)
        shuffle_rng = np.random.default_rng([config.seed, 1])
        m = np.zeros_like(self.params)
        v = np.zeros_like(self.params)
        g = np.zeros_like(self.params)
        step = np.empty_like(self.params)
        t = 0
        self.loss_history = []
        bs = config.batch_size
        for epoch in range(config.epochs):
            perm = shuffle_rng.permutation(n)
            xe = x[perm]
            ye = y[perm]
            total = 0.0
            for start in range(0, n, bs):
                xb = xe[start:start + bs]
                yb = ye[start:start + bs]
                loss, _ = self.gradient(xb, yb, out=g)
                total += loss * len(xb)
                t += 1
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                np.multiply(g, g, out=step)
                v += (1.0 - ADAM_BETA2) * step
                lr_t = config.learning_rate * np.sqrt(1.0 - ADAM_BETA2**t) / (1.0 - ADAM_BETA1**t)
                np.sqrt(v, out=step)
                step += ADAM_EPS
                np.divide(m, step, out=step)
                step *= lr_t
                self.params -= step
            self.loss_history.append(total / n)
            if epoch % 50 == 0:
                logger.debug("epoch %d loss %.6g", epoch, self.loss_history[-1])
        return self
