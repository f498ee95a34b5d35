"""First-order spike expansion of the warped ReLU kernel.

k1 splits as A*k0 + (B/2d)*S + R where S is an explicit closed form in
the angle between the inputs and their projections on the spike, and the
residual R collects all higher orders.  The module provides the S term,
the first-order predictor, a decay probe that checks R shrinks like
B^2/d^2, and the combinatorial series identity that powers that bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientData, ZeroVector
from .kernels import k0_relu, k1_relu
from .spiked_covariance import make_spiked
from .rng import SeededStream


@dataclass(frozen=True)
class ExpansionTerm:
    """One term of the spike expansion: value weighted by (b/2d)^j / j!."""

    order: int
    coefficient: float
    value: float


def angle_between(x: np.ndarray, xp: np.ndarray) -> float:
    """Angle in [0, pi] via 2 atan2(||u - v||, ||u + v||) on unit vectors.

    The two-argument form is accurate near 0 and pi where arccos of the
    cosine loses digits, and it is exactly symmetric in its arguments.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    nx = np.linalg.norm(x)
    nxp = np.linalg.norm(xp)
    if nx == 0.0 or nxp == 0.0:
        raise ZeroVector("angle undefined for zero vectors")
    u = x / nx
    v = xp / nxp
    return float(2.0 * np.arctan2(np.linalg.norm(u - v), np.linalg.norm(u + v)))


def s_term_relu(x: np.ndarray, xp: np.ndarray, w_star: np.ndarray) -> float:
    """First-order spike term for the ReLU kernel.

    ((pi - theta)/pi) <x,w*><x',w*>
      + (sin theta / 2 pi) ((||x'||/||x||) <x,w*>^2 + (||x||/||x'||) <x',w*>^2)
    """
    theta = angle_between(x, xp)
    nx = float(np.linalg.norm(x))
    nxp = float(np.linalg.norm(xp))
    tx = float(np.asarray(x, dtype=float) @ w_star)
    txp = float(np.asarray(xp, dtype=float) @ w_star)
    # grouping (tx * txp) keeps the expression exactly symmetric in x, x'
    return (np.pi - theta) / np.pi * (tx * txp) + np.sin(theta) / (2.0 * np.pi) * (
        nxp / nx * tx * tx + nx / nxp * txp * txp
    )


def first_order_prediction(
    x: np.ndarray, xp: np.ndarray, a_coef: float, b_coef: float, w_star: np.ndarray
) -> float:
    """a*k0(x,x') + (b/2d) * S(x,x'): the expansion truncated after order 1."""
    d = np.asarray(x).shape[0]
    return a_coef * k0_relu(x, xp) + b_coef / (2.0 * d) * s_term_relu(x, xp, w_star)


def expansion_terms(
    x: np.ndarray, xp: np.ndarray, a_coef: float, b_coef: float, w_star: np.ndarray
) -> list[ExpansionTerm]:
    """The two explicitly computable terms (orders 0 and 1)."""
    d = np.asarray(x).shape[0]
    return [
        ExpansionTerm(order=0, coefficient=1.0, value=a_coef * k0_relu(x, xp)),
        ExpansionTerm(order=1, coefficient=b_coef / (2.0 * d), value=s_term_relu(x, xp, w_star)),
    ]


def residual_decay_probe(
    d_list,
    b_exponent: float,
    pairs_per_d: int,
    rng: SeededStream,
    b_scale: float = 5.0,
    a_coef: float = 1.0,
) -> list[tuple]:
    """Measure |k1 - first order| on Gaussian pairs across dimensions.

    For each d the spike weight is b_scale * d^b_exponent and the probe
    reports (d, b_value, max_residual, mean_residual, predicted_scale)
    with predicted_scale = B^2/d^2, the expected residual rate.  Pairs
    are drawn from per-dimension substreams so rows are independently
    re-derivable.
    """
    d_list = list(d_list)
    if len(d_list) < 3:
        raise InsufficientData("need at least 3 dimensions to probe a decay rate")
    if any(d_list[i] >= d_list[i + 1] for i in range(len(d_list) - 1)):
        raise ValueError("d_list must be strictly increasing")
    rows = []
    for di, d in enumerate(d_list):
        b = b_scale * d ** b_exponent
        w_star = np.zeros(d)
        w_star[0] = 1.0
        cov = make_spiked(a_coef, b, w_star)
        sub = rng.substream(di)
        residuals = np.empty(pairs_per_d)
        for p in range(pairs_per_d):
            x = sub.standard_normal(d)
            xp = sub.standard_normal(d)
            pred = first_order_prediction(x, xp, a_coef, b, w_star)
            residuals[p] = abs(k1_relu(x, xp, cov) - pred)
        rows.append((d, b, float(residuals.max()), float(residuals.mean()), (b / d) ** 2))
    return rows


def fit_residual_slope(rows) -> float:
    """Log-log slope of max residual against the predicted B^2/d^2 scale."""
    scale = np.array([r[4] for r in rows])
    max_res = np.array([r[2] for r in rows])
    if np.any(max_res <= 0.0) or np.any(scale <= 0.0):
        raise DomainError("residuals or scales are nonpositive; nothing to fit")
    return float(np.polyfit(np.log(scale), np.log(max_res), 1)[0])


def series_identity(i: int, y: float, terms: int) -> tuple[float, float]:
    """Partial sum and closed form of the spike-moment series.

    sum_{k>=i} C(2k,2i) (2k-2i-1)!!/k! y^k = (y^i/i!) (1-2y)^(-(i+1/2)),
    with the convention (-1)!! = 1.  Terms are accumulated through the
    ratio recurrence term_{k+1} = term_k * (2k+1)/(k+1-i) * y, so no
    factorial ever overflows.  Convergence requires |y| < 1/2.
    """
    if i < 0:
        raise ValueError("index i must be nonnegative")
    if terms < 1:
        raise ValueError("need at least one term")
    if not -0.5 < y < 0.5:
        raise DomainError(f"series converges only for |y| < 1/2, got y={y}")
    # term at k = i is y^i / i!
    term = 1.0
    for k in range(1, i + 1):
        term *= y / k
    partial = term
    k = i
    for _ in range(terms - 1):
        term *= (2 * k + 1) * y / (k + 1 - i)
        partial += term
        k += 1
    closed = term_closed_form(i, y)
    return partial, closed


def term_closed_form(i: int, y: float) -> float:
    """(y^i / i!) (1 - 2y)^(-(i + 1/2))."""
    lead = 1.0
    for k in range(1, i + 1):
        lead *= y / k
    return lead * (1.0 - 2.0 * y) ** (-(i + 0.5))
