"""Rank-one-spiked covariance in implicit (a, b, spike) form.

The d x d matrix a*I + b*u u^T is never materialized.  Matvec, inverse,
square root, log-determinant and Gaussian sampling all run in O(d) via the
closed rank-one update formulas: the inverse follows Sherman-Morrison,
the square root shifts the spike eigenvalue from a+b to sqrt(a+b), and the
determinant is a^(d-1) (a+b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLink, DimensionMismatch, NonPositiveDefinite, ZeroSpike
from .link_functions import LinkFunction
from .rng import SeededStream


@dataclass(frozen=True)
class SpikedCovariance:
    """Implicit form of a*I_d + b*spike spike^T with unit spike."""

    a: float
    b: float
    spike: np.ndarray
    dim: int

    def __post_init__(self):
        if self.a <= 0.0 or self.a + self.b <= 0.0:
            raise NonPositiveDefinite(f"need a > 0 and a + b > 0, got a={self.a}, b={self.b}")
        if abs(float(self.spike @ self.spike) - 1.0) > 1e-10:
            raise ValueError("spike must be a unit vector")
        if self.spike.shape != (self.dim,):
            raise DimensionMismatch("spike length disagrees with dim")


@dataclass(frozen=True)
class LearningConfig:
    """Training-regime parameters at finite dimension d.

    alpha and beta are the sample and width ratios n/d and m/d, zeta the
    step-size exponent, eta_tilde the normalized step size eta / d^zeta,
    noise_var the label noise variance.
    """

    alpha: float
    beta: float
    zeta: float
    eta_tilde: float
    noise_var: float
    dim: int

    def __post_init__(self):
        if not (0.5 <= self.zeta < 1.0):
            raise ValueError(f"zeta must lie in [1/2, 1), got {self.zeta}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        # eta_tilde = 0 is allowed as the no-update limit
        if self.eta_tilde < 0 or self.noise_var < 0:
            raise ValueError("eta_tilde and noise_var must be nonnegative")
        if self.dim < 1:
            raise ValueError("dim must be positive")

    @property
    def eta(self) -> float:
        """Raw step size eta = eta_tilde * d^zeta."""
        return self.eta_tilde * self.dim ** self.zeta

    @property
    def n_samples(self) -> int:
        return int(round(self.alpha * self.dim))

    @property
    def width(self) -> int:
        return int(round(self.beta * self.dim))


def make_spiked(a: float, b: float, u: np.ndarray) -> SpikedCovariance:
    """Validate and normalize into a SpikedCovariance.

    The direction u is renormalized internally.  A zero u is only legal
    when b = 0 (the spike is then irrelevant and an arbitrary axis is
    stored to keep the unit invariant).
    """
    if a <= 0.0 or a + b <= 0.0:
        raise NonPositiveDefinite(f"need a > 0 and a + b > 0, got a={a}, b={b}")
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        if b != 0.0:
            raise ZeroSpike("zero spike direction with nonzero spike weight")
        unit = np.zeros_like(u)
        unit[0] = 1.0
    else:
        unit = u / norm
    return SpikedCovariance(a=float(a), b=float(b), spike=unit, dim=u.shape[0])


def matvec(g: SpikedCovariance, x: np.ndarray) -> np.ndarray:
    """Apply a*x + b*<u, x>*u without forming the matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim,):
        raise DimensionMismatch(f"expected vector of length {g.dim}, got shape {x.shape}")
    return g.a * x + g.b * float(g.spike @ x) * g.spike


def inverse(g: SpikedCovariance) -> SpikedCovariance:
    """Rank-one inverse: (1/a) I - b / (a (a+b)) u u^T."""
    return SpikedCovariance(
        a=1.0 / g.a, b=-g.b / (g.a * (g.a + g.b)), spike=g.spike, dim=g.dim
    )


def sqrt(g: SpikedCovariance) -> SpikedCovariance:
    """Matrix square root: sqrt(a) I + (sqrt(a+b) - sqrt(a)) u u^T."""
    ra = np.sqrt(g.a)
    return SpikedCovariance(a=ra, b=np.sqrt(g.a + g.b) - ra, spike=g.spike, dim=g.dim)


def log_det(g: SpikedCovariance) -> float:
    """ln det = (d - 1) ln a + ln(a + b)."""
    return (g.dim - 1) * float(np.log(g.a)) + float(np.log(g.a + g.b))


def sample_weights(g: SpikedCovariance, count: int, rng: SeededStream) -> np.ndarray:
    """Draw count i.i.d. rows from N(0, (a I + b u u^T) / d).

    Each row is (sqrt(a) xi + (sqrt(a+b) - sqrt(a)) <u, xi> u) / sqrt(d)
    with xi standard normal, i.e. the implicit square root applied to a
    white vector.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    root = sqrt(g)
    xi = rng.standard_normal((count, g.dim))
    proj = xi @ root.spike
    return (root.a * xi + root.b * np.outer(proj, root.spike)) / np.sqrt(g.dim)


def coefficients_from_config(cfg: LearningConfig, link: LinkFunction) -> tuple[float, float]:
    """Isotropic and spike coefficients (A, B) induced by one update.

    A = 1 + (eta^2 lam / d^2) (E[g(Z)^2] + noise_var)
    B = (eta^2 / d) (mu1^4 / (alpha beta^2)) (alpha - 1/d + 2 s / (mu1^2 d))

    with lam = mu1^2 / (alpha beta^2).  Requires mu1 != 0; links whose
    first Gaussian derivative moment vanishes carry no rank-one signal at
    this order.
    """
    mu1 = link.mu1()
    if abs(mu1) < 1e-12:
        raise DegenerateLink(f"link {link.kind!r} has mu1 = {mu1}; need mu1 != 0")
    d = cfg.dim
    eta2 = cfg.eta ** 2
    lam = mu1 ** 2 / (cfg.alpha * cfg.beta ** 2)
    a = 1.0 + eta2 * lam / d ** 2 * (link.second_moment() + cfg.noise_var)
    s = link.s_coefficient()
    b = (eta2 / d) * (mu1 ** 4 / (cfg.alpha * cfg.beta ** 2)) * (
        cfg.alpha - 1.0 / d + 2.0 * s / (mu1 ** 2 * d)
    )
    return a, b
