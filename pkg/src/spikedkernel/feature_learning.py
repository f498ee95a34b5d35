"""Two-stage training of a two-layer ReLU network at desk scale.

Stage one takes a single full-batch gradient step on the first layer with
the second layer frozen; stage two refits the second layer by ridge
regression on an independent sample.  The rank-one factorization of the
first step and the empirical feature kernel expose the quantities the
kernel and spectral modules predict.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionMismatch, SingularSystem
from .link_functions import LinkFunction
from .rng import SeededStream


@dataclass(frozen=True)
class SingleIndexDataset:
    """Gaussian inputs whose labels depend on one projection only."""

    inputs: np.ndarray        # n x d
    labels: np.ndarray        # n
    direction: np.ndarray     # unit vector
    noise_var: float


@dataclass(frozen=True)
class TwoLayerNet:
    """Width-m network x -> a^T act(W^T x) / sqrt(m); values are immutable."""

    first_layer: np.ndarray   # d x m, columns are neurons
    second_layer: np.ndarray  # m
    activation: str = "relu"

    @property
    def width(self) -> int:
        return self.first_layer.shape[1]

    @property
    def dim(self) -> int:
        return self.first_layer.shape[0]


@dataclass(frozen=True)
class RankOneUpdate:
    """Factored rank-one matrix scale * left right^T."""

    left: np.ndarray    # d
    right: np.ndarray   # m
    scale: float

    def matrix(self) -> np.ndarray:
        return self.scale * np.outer(self.left, self.right)

    def op_norm(self) -> float:
        return abs(self.scale) * float(np.linalg.norm(self.left) * np.linalg.norm(self.right))


def _act(name: str, t: np.ndarray) -> np.ndarray:
    if name != "relu":
        raise ValueError(f"unsupported activation {name!r}")
    return np.maximum(0.0, t)


def _act_deriv(name: str, t: np.ndarray) -> np.ndarray:
    if name != "relu":
        raise ValueError(f"unsupported activation {name!r}")
    # the kink value is assigned derivative 1; the event has measure zero
    return (t >= 0).astype(float)


def sample_dataset(
    link: LinkFunction, w_star: np.ndarray, n: int, noise_var: float, rng: SeededStream
) -> SingleIndexDataset:
    """Draw n rows x ~ N(0, I_d) with labels link(<w*, x>) + noise."""
    if n < 1:
        raise ValueError("need at least one sample")
    w_star = np.asarray(w_star, dtype=float)
    X = rng.standard_normal((n, w_star.shape[0]))
    y = link.eval(X @ w_star)
    if noise_var > 0.0:
        y = y + np.sqrt(noise_var) * rng.standard_normal(n)
    return SingleIndexDataset(inputs=X, labels=y, direction=w_star, noise_var=float(noise_var))


def init_network(d: int, m: int, activation: str, rng: SeededStream) -> TwoLayerNet:
    """Neurons w_j ~ N(0, I_d / d), readout a ~ N(0, I_m / m)."""
    if d < 1 or m < 1:
        raise ValueError("d and m must be positive")
    W = rng.standard_normal((d, m)) / np.sqrt(d)
    a = rng.standard_normal(m) / np.sqrt(m)
    return TwoLayerNet(first_layer=W, second_layer=a, activation=activation)


def forward(net: TwoLayerNet, x: np.ndarray) -> float:
    """Network output a^T act(W^T x) / sqrt(m) at a single input."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.dim,):
        raise DimensionMismatch(f"expected input of length {net.dim}, got {x.shape}")
    hidden = _act(net.activation, x @ net.first_layer)
    return float(hidden @ net.second_layer / np.sqrt(net.width))


def forward_batch(net: TwoLayerNet, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != net.dim:
        raise DimensionMismatch(f"expected inputs of width {net.dim}, got {X.shape}")
    return _act(net.activation, X @ net.first_layer) @ net.second_layer / np.sqrt(net.width)


def gradient_step(net: TwoLayerNet, data: SingleIndexDataset, eta: float) -> TwoLayerNet:
    """One full-batch step on the first layer; the readout stays frozen.

    The gradient is taken on the half mean squared error
    (1/2n) sum (f(x_i) - y_i)^2, i.e. column j moves by
    -eta/(n sqrt m) sum_i (f_i - y_i) a_j act'(<w_j, x_i>) x_i.
    """
    X = data.inputs
    n = X.shape[0]
    m = net.width
    pre = X @ net.first_layer                       # n x m
    resid = forward_batch(net, X) - data.labels     # n
    gate = _act_deriv(net.activation, pre)
    grad = X.T @ (resid[:, None] * gate * net.second_layer[None, :]) / (n * np.sqrt(m))
    return replace(net, first_layer=net.first_layer - eta * grad)


def rank_one_update(
    data: SingleIndexDataset, a0: np.ndarray, eta: float, mu1: float
) -> RankOneUpdate:
    """Factored dominant term of the first step: (mu1 eta / sqrt m) (X^T y / n) a^T."""
    a0 = np.asarray(a0, dtype=float)
    left = data.inputs.T @ data.labels / data.inputs.shape[0]
    return RankOneUpdate(left=left, right=a0, scale=float(mu1 * eta / np.sqrt(a0.shape[0])))


def fit_second_layer(net: TwoLayerNet, data2: SingleIndexDataset, lam: float) -> TwoLayerNet:
    """Ridge refit of the readout: argmin sum (y - f)^2 + lam ||a||^2.

    Solves (Phi^T Phi / m + lam I) a = Phi^T y / sqrt m with
    Phi_ij = act(<x_i, w_j>).  The m x m system is factored when
    m <= N, otherwise the algebraically identical N x N dual system;
    a Cholesky failure at lam = 0 means the Gram matrix is singular.
    """
    if lam < 0:
        raise ValueError("ridge parameter must be nonnegative")
    X = data2.inputs
    y = data2.labels
    m = net.width
    N = X.shape[0]
    phi = _act(net.activation, X @ net.first_layer)   # N x m
    try:
        if m <= N:
            gram = phi.T @ phi / m + lam * np.eye(m)
            coefs = cho_solve(cho_factor(gram, lower=True), phi.T @ y / np.sqrt(m))
        else:
            gram = phi @ phi.T / m + lam * np.eye(N)
            coefs = phi.T @ cho_solve(cho_factor(gram, lower=True), y) / np.sqrt(m)
    except LinAlgError as exc:
        raise SingularSystem(
            "feature Gram matrix is rank-deficient; use lam > 0"
        ) from exc
    return replace(net, second_layer=coefs)


def empirical_feature_kernel(net: TwoLayerNet, points: np.ndarray) -> np.ndarray:
    """Finite-width kernel (1/m) Phi Phi^T on the given points."""
    phi = _act(net.activation, np.asarray(points, dtype=float) @ net.first_layer)
    K = phi @ phi.T / net.width
    # mirror the upper triangle so symmetry holds bitwise
    return np.triu(K) + np.triu(K, 1).T
