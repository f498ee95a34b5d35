"""Closed-form and Monte-Carlo evaluation of the ReLU conjugate kernels.

k0 is the isotropic arc-cosine kernel of a random ReLU layer; k1 is its
spiked counterpart, obtained by warping inputs with the square root of a
rank-one-spiked covariance.  The two are linked by the exact identity
k1(x, x') = k0(G^(1/2) x, G^(1/2) x'), which the Monte-Carlo estimators
probe from the weight-space side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spiked_covariance as sc
from .errors import ZeroVector
from .link_functions import LinkFunction
from .rng import SeededStream

MC_CHUNK = 1 << 16
TRUE_LAW_CHUNK = 2048


@dataclass(frozen=True)
class KernelSpec:
    """Activation plus weight covariance; activation is 'relu' or a callable."""

    activation: object
    covariance: sc.SpikedCovariance

    def apply(self, t: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(0.0, t)
        return self.activation(t)


def _bracket(gamma):
    """gamma (pi - arccos gamma) + sqrt(1 - gamma^2), clamped to [-1, 1].

    Floating-point cosines can exceed 1 by an ulp; the expression is
    continuous at the endpoints so clamping is harmless.
    """
    g = np.clip(gamma, -1.0, 1.0)
    return g * (np.pi - np.arccos(g)) + np.sqrt(np.maximum(0.0, 1.0 - g * g))


def k0_relu(x: np.ndarray, xp: np.ndarray) -> float:
    """Isotropic ReLU kernel (||x|| ||x'|| / 2 pi d) * bracket(cos angle)."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    nx = np.linalg.norm(x)
    nxp = np.linalg.norm(xp)
    if nx == 0.0 or nxp == 0.0:
        raise ZeroVector("kernel inputs must be nonzero")
    d = x.shape[0]
    gamma = float(x @ xp) / (nx * nxp)
    return float(nx * nxp / (2.0 * np.pi * d) * _bracket(gamma))


def k1_relu(x: np.ndarray, xp: np.ndarray, g: sc.SpikedCovariance) -> float:
    """Spiked ReLU kernel driven by the warped cosine similarity.

    Quadratic forms x^T G x are evaluated in O(d) from the implicit
    (a, b, spike) representation.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if np.linalg.norm(x) == 0.0 or np.linalg.norm(xp) == 0.0:
        raise ZeroVector("kernel inputs must be nonzero")
    if g.b == 0.0:
        # a*I warps both inputs by sqrt(a); positive homogeneity of the
        # ReLU makes the reduction to a * k0 exact
        return g.a * k0_relu(x, xp)
    d = g.dim
    tx = float(g.spike @ x)
    txp = float(g.spike @ xp)
    qx = g.a * float(x @ x) + g.b * (tx * tx)
    qxp = g.a * float(xp @ xp) + g.b * (txp * txp)
    # grouping the projection product keeps the formula exactly symmetric
    cross = g.a * float(x @ xp) + g.b * (tx * txp)
    scale = np.sqrt(qx * qxp)
    return float(scale / (2.0 * np.pi * d) * _bracket(cross / scale))


# -- vectorized Gram builders (same formulas, N^2 at once) -------------------

def k0_gram(points: np.ndarray) -> np.ndarray:
    """Gram matrix of k0 on the rows of points; exactly symmetric."""
    X = np.asarray(points, dtype=float)
    d = X.shape[1]
    nrm = np.linalg.norm(X, axis=1)
    outer = np.outer(nrm, nrm)
    K = outer / (2.0 * np.pi * d) * _bracket((X @ X.T) / outer)
    return _mirror_upper(K)


def k1_gram(points: np.ndarray, g: sc.SpikedCovariance) -> np.ndarray:
    """Gram matrix of k1 on the rows of points; exactly symmetric."""
    X = np.asarray(points, dtype=float)
    if g.b == 0.0:
        return g.a * k0_gram(X)
    t = X @ g.spike
    q = g.a * np.einsum("ij,ij->i", X, X) + g.b * t * t
    scale = np.sqrt(np.outer(q, q))
    cross = g.a * (X @ X.T) + g.b * np.outer(t, t)
    K = scale / (2.0 * np.pi * g.dim) * _bracket(cross / scale)
    return _mirror_upper(K)


def k0_cross(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Rectangular k0 matrix between two point sets."""
    L = np.asarray(left, dtype=float)
    R = np.asarray(right, dtype=float)
    d = L.shape[1]
    outer = np.outer(np.linalg.norm(L, axis=1), np.linalg.norm(R, axis=1))
    return outer / (2.0 * np.pi * d) * _bracket((L @ R.T) / outer)


def k1_cross(left: np.ndarray, right: np.ndarray, g: sc.SpikedCovariance) -> np.ndarray:
    """Rectangular k1 matrix between two point sets."""
    L = np.asarray(left, dtype=float)
    R = np.asarray(right, dtype=float)
    if g.b == 0.0:
        return g.a * k0_cross(L, R)
    tl = L @ g.spike
    tr = R @ g.spike
    ql = g.a * np.einsum("ij,ij->i", L, L) + g.b * tl * tl
    qr = g.a * np.einsum("ij,ij->i", R, R) + g.b * tr * tr
    scale = np.sqrt(np.outer(ql, qr))
    cross = g.a * (L @ R.T) + g.b * np.outer(tl, tr)
    return scale / (2.0 * np.pi * g.dim) * _bracket(cross / scale)


def _mirror_upper(K: np.ndarray) -> np.ndarray:
    # keep the upper triangle, mirror it below: symmetry holds bitwise
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


# -- Monte-Carlo estimators ---------------------------------------------------

def k_mc(
    x: np.ndarray,
    xp: np.ndarray,
    spec: KernelSpec,
    samples: int,
    rng: SeededStream,
    chunk: int = MC_CHUNK,
) -> tuple[float, float]:
    """Estimate E_w[act(<w,x>) act(<w,x'>)] over w ~ N(0, G/d).

    Returns (mean, standard error).  Draws are consumed in fixed-size
    chunks with one substream per chunk, so the result is reproducible at
    a given chunk size and chunks could run in parallel.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    total = 0.0
    total_sq = 0.0
    done = 0
    for idx in range(-(-samples // chunk)):
        count = min(chunk, samples - done)
        w = sc.sample_weights(spec.covariance, count, rng.substream(idx))
        vals = spec.apply(w @ x) * spec.apply(w @ xp)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += count
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    return mean, float(np.sqrt(var / samples))


def k1_star_mc(
    x: np.ndarray,
    xp: np.ndarray,
    cfg: sc.LearningConfig,
    link: LinkFunction,
    w_star: np.ndarray,
    reps: int,
    rng: SeededStream,
    chunk: int = TRUE_LAW_CHUNK,
) -> tuple[float, float]:
    """Estimate the post-update kernel under the exact feature law.

    Each rep draws a fresh dataset of n = alpha*d labelled samples, a
    fresh initial weight w ~ N(0, I/d) and readout scalar a ~ N(0, 1/m),
    and forms the updated feature z = w + (mu1 eta / (n sqrt(m))) a v
    with the label-weighted sum v = X^T y.  Returns the ReLU product mean
    and its standard error over reps.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    w_star = np.asarray(w_star, dtype=float)
    d = cfg.dim
    n = cfg.n_samples
    m = cfg.width
    scale = link.mu1() * cfg.eta / (n * np.sqrt(m))
    sigma = np.sqrt(cfg.noise_var)
    total = 0.0
    total_sq = 0.0
    done = 0
    for idx in range(-(-reps // chunk)):
        count = min(chunk, reps - done)
        sub = rng.substream(idx)
        X = sub.standard_normal((count, n, d))
        y = link.eval(X @ w_star)
        if sigma > 0.0:
            y = y + sigma * sub.standard_normal((count, n))
        varsigma = np.einsum("cnd,cn->cd", X, y)
        w = sub.standard_normal((count, d)) / np.sqrt(d)
        a = sub.standard_normal(count) / np.sqrt(m)
        z = w + scale * a[:, None] * varsigma
        vals = np.maximum(0.0, z @ x) * np.maximum(0.0, z @ xp)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += count
    mean = total / reps
    var = max(0.0, total_sq / reps - mean * mean)
    return mean, float(np.sqrt(var / reps))
