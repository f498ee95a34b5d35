"""Scalar link functions with their Gaussian statistics.

Each link g reports three scalars under Z ~ N(0, 1): the mean derivative
mu1 = E[g'(Z)], the curvature weight s = E[(Z^2 - 1) g(Z)^2] / 2, and the
second moment E[g(Z)^2].  The defaults use 200-node Gauss-Hermite
quadrature, which is exact to ~1e-15 for polynomial-times-smooth
integrands.  The two indicator links use exact normal CDF/PDF expressions
instead, because quadrature rings at jump discontinuities.  The s weight
is always evaluated through the derivative-free identity
E[h''(Z)] = E[(Z^2 - 1) h(Z)] with h = g^2, so kinked links need no
pointwise second derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.stats import norm

from .errors import QuadratureFailure

QUADRATURE_NODES = 200

_gh_x, _gh_w = hermgauss(QUADRATURE_NODES)
_GH_POINTS = np.sqrt(2.0) * _gh_x          # abscissas on the N(0,1) scale
_GH_WEIGHTS = _gh_w / np.sqrt(np.pi)       # weights summing to 1


def gauss_expectation(fn) -> float:
    """E[fn(Z)] for Z ~ N(0,1) by fixed-order Gauss-Hermite quadrature."""
    vals = np.asarray(fn(_GH_POINTS), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("integrand produced non-finite values at quadrature nodes")
    return float(_GH_WEIGHTS @ vals)


def _interp(t, xs, ys):
    # constant extension outside the table keeps the integrand bounded
    return np.interp(t, xs, ys)


# kind -> (eval, derivative or None)
_KINDS = {
    "identity": (lambda t: np.asarray(t, dtype=float), lambda t: np.ones_like(np.asarray(t, dtype=float))),
    "quadratic": (lambda t: np.square(t), lambda t: 2.0 * np.asarray(t, dtype=float)),
    "relu": (lambda t: np.maximum(0.0, t), lambda t: (np.asarray(t) >= 0).astype(float)),
    "gauss_bump": (lambda t: np.exp(-np.square(t) / 2.0), lambda t: -t * np.exp(-np.square(t) / 2.0)),
    "indicator_inside": (lambda t: (np.abs(t) < 1.0).astype(float), None),
    "indicator_outside": (lambda t: (np.abs(t) > 1.0).astype(float), None),
    "paper_target": (
        lambda t: 2.0 * np.square(t) + 3.0 * np.asarray(t, dtype=float) + 4.0 * np.sin(2.0 * t),
        lambda t: 4.0 * np.asarray(t, dtype=float) + 3.0 + 8.0 * np.cos(2.0 * t),
    ),
}

CATALOGUE = tuple(_KINDS)

# Exact stats for the jump links: the distributional derivative of
# 1{|t|<1} is delta(t+1) - delta(t-1), whose Gaussian mean cancels by
# symmetry, and E[(Z^2-1) 1{|Z|<1}] integrates to -2 phi(1) in closed form.
_PHI1 = float(norm.pdf(1.0))
_INSIDE_MASS = float(norm.cdf(1.0) - norm.cdf(-1.0))
_CLOSED_STATS = {
    "indicator_inside": {"mu1": 0.0, "s": -_PHI1, "second_moment": _INSIDE_MASS},
    "indicator_outside": {"mu1": 0.0, "s": _PHI1, "second_moment": 1.0 - _INSIDE_MASS},
}


@dataclass(frozen=True)
class LinkFunction:
    """A scalar link g with evaluation and Gaussian moment queries."""

    kind: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "custom_table":
            xs, ys = self.params
            xs = np.asarray(xs, dtype=float)
            if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise ValueError("custom_table needs a strictly increasing abscissa grid")
            if len(ys) != len(xs):
                raise ValueError("custom_table abscissas and values differ in length")
        elif self.kind not in _KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")

    # -- evaluation ---------------------------------------------------------

    def eval(self, t):
        if self.kind == "custom_table":
            xs, ys = self.params
            return _interp(t, np.asarray(xs, float), np.asarray(ys, float))
        return _KINDS[self.kind][0](t)

    __call__ = eval

    def derivative(self, t):
        """Pointwise a.e. derivative; undefined for table and jump links."""
        if self.kind == "custom_table" or _KINDS[self.kind][1] is None:
            raise ValueError(f"link kind {self.kind!r} has no pointwise derivative")
        return _KINDS[self.kind][1](t)

    # -- Gaussian statistics ------------------------------------------------

    def mu1(self) -> float:
        """Mean derivative E[g'(Z)].

        Jump links use their closed form; the table link uses the
        integration-by-parts identity E[g'(Z)] = E[Z g(Z)], which needs no
        derivative at the grid kinks.
        """
        closed = _CLOSED_STATS.get(self.kind)
        if closed is not None:
            return closed["mu1"]
        if self.kind == "custom_table":
            return gauss_expectation(lambda t: t * self.eval(t))
        return gauss_expectation(self.derivative)

    def s_coefficient(self) -> float:
        """Curvature weight s = E[(Z^2 - 1) g(Z)^2] / 2."""
        closed = _CLOSED_STATS.get(self.kind)
        if closed is not None:
            return closed["s"]
        return 0.5 * gauss_expectation(lambda t: (t * t - 1.0) * np.square(self.eval(t)))

    def second_moment(self) -> float:
        """E[g(Z)^2]."""
        closed = _CLOSED_STATS.get(self.kind)
        if closed is not None:
            return closed["second_moment"]
        return gauss_expectation(lambda t: np.square(self.eval(t)))


def from_name(name: str) -> LinkFunction:
    """Look up a catalogue link by its config-facing name."""
    return LinkFunction(name)


def table_link(xs, ys) -> LinkFunction:
    """Piecewise-linear link through (xs, ys) with constant extension."""
    return LinkFunction("custom_table", (tuple(float(x) for x in xs), tuple(float(y) for y in ys)))
