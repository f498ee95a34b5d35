"""Minimal two-layer ReLU MLP with hand-rolled backprop and Adam.

Kept native so the experiment pipeline stays single-language and exactly
reproducible from a seeded stream.  Architecture: Linear(d -> width),
ReLU, Linear(width -> 1), both layers trained on mean squared error.
Weights start uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
"""

from __future__ import annotations

import numpy as np

from .rng import SeededStream

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class Mlp:
    """Mutable training state; construct via init_mlp for seeded weights."""

    def __init__(self, W1, b1, W2, b2):
        self.W1 = W1          # width x d
        self.b1 = b1          # width
        self.W2 = W2          # width
        self.b2 = float(b2)
        self._moments = [
            (np.zeros_like(W1), np.zeros_like(W1)),
            (np.zeros_like(b1), np.zeros_like(b1)),
            (np.zeros_like(W2), np.zeros_like(W2)),
            (np.zeros(1), np.zeros(1)),
        ]
        self._steps = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        hidden = np.maximum(0.0, X @ self.W1.T + self.b1)
        return hidden @ self.W2 + self.b2

    def adam_step(self, X: np.ndarray, y: np.ndarray, lr: float) -> None:
        """One minibatch step on the mean squared error."""
        batch = X.shape[0]
        pre = X @ self.W1.T + self.b1
        hidden = np.maximum(0.0, pre)
        out = hidden @ self.W2 + self.b2
        dout = 2.0 * (out - y) / batch
        dW2 = hidden.T @ dout
        db2 = float(dout.sum())
        dhidden = np.outer(dout, self.W2) * (pre >= 0)
        dW1 = dhidden.T @ X
        db1 = dhidden.sum(axis=0)
        self._steps += 1
        corr1 = 1.0 - ADAM_BETA1 ** self._steps
        corr2 = 1.0 - ADAM_BETA2 ** self._steps
        params = [self.W1, self.b1, self.W2, np.array([self.b2])]
        grads = [dW1, db1, dW2, np.array([db2])]
        for i, (param, grad) in enumerate(zip(params, grads)):
            m, v = self._moments[i]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * grad
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * grad * grad
            param -= lr * (m / corr1) / (np.sqrt(v / corr2) + ADAM_EPS)
        self.b2 = float(params[3][0])


def init_mlp(d: int, width: int, rng: SeededStream) -> Mlp:
    k_in = 1.0 / np.sqrt(d)
    k_hid = 1.0 / np.sqrt(width)
    return Mlp(
        W1=rng.uniform(-k_in, k_in, (width, d)),
        b1=rng.uniform(-k_in, k_in, width),
        W2=rng.uniform(-k_hid, k_hid, width),
        b2=float(rng.uniform(-k_hid, k_hid, ())),
    )


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    width: int,
    lr: float,
    epochs: int,
    batch_size: int,
    rng: SeededStream,
) -> Mlp:
    """Train from a fresh seeded init; epoch order is a seeded shuffle."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    net = init_mlp(X.shape[1], width, rng)
    if lr == 0.0 or epochs == 0:
        return net
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            net.adam_step(X[idx], y[idx], lr)
    return net
