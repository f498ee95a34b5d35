"""Kernel-matrix spectra, harmonic features, and eigenstructure predictions.

Operator eigenvalues are estimated by the empirical scaling K/N on sampled
points: the Rayleigh quotient f^T K f / (N f^T f) converges to the integral
operator eigenvalue when f samples an eigenfunction.  Closed-form
predictions cover the linear eigenspace split (aligned direction boosted to
(A+B)/4d, orthogonal ones fixed at A/4d) and the two-mode coupling of the
radial and quadratic-harmonic modes at the top of the spectrum.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, GapCollapse, ZeroFeature, ZeroVector

_MAGIC = b"SPEC"


@dataclass(frozen=True)
class SpectralReport:
    """Full symmetric eigendecomposition, eigenvalues sorted descending."""

    eigenvalues: np.ndarray   # N, descending
    eigenvectors: np.ndarray  # N x N, columns match eigenvalues
    matrix_dim: int


@dataclass(frozen=True)
class HarmonicFeatures:
    """Per-point samples of the low-order modes used in spectral probes.

    y0 is the constant mode, y2_hat the centered quadratic zonal harmonic
    <w, w*>^2 - 1/d of the normalized inputs, psi_star the linear mode
    <x, w*>, and radial the norm mode ||x|| / sqrt(d).
    """

    y0: np.ndarray
    y2_hat: np.ndarray
    psi_star: np.ndarray
    radial: np.ndarray


def harmonic_features(points: np.ndarray, w_star: np.ndarray) -> HarmonicFeatures:
    X = np.asarray(points, dtype=float)
    w_star = np.asarray(w_star, dtype=float)
    d = X.shape[1]
    norms = np.linalg.norm(X, axis=1)
    proj = X @ w_star
    return HarmonicFeatures(
        y0=np.ones(X.shape[0]),
        y2_hat=(proj / norms) ** 2 - 1.0 / d,
        psi_star=proj,
        radial=norms / np.sqrt(d),
    )


def gram_matrix(kernel, points: np.ndarray) -> np.ndarray:
    """Gram matrix of an arbitrary kernel closure on the rows of points.

    Only the upper triangle is evaluated and mirrored, so the result is
    exactly symmetric.  For the built-in closed-form kernels prefer the
    vectorized builders in the kernels module.
    """
    X = np.asarray(points, dtype=float)
    N = X.shape[0]
    if N < 2:
        raise ValueError("need at least two points")
    K = np.zeros((N, N))
    for i in range(N):
        for j in range(i, N):
            K[i, j] = kernel(X[i], X[j])
            K[j, i] = K[i, j]
    return K


def eigh_descending(K: np.ndarray, residual_tol: float = 1e-8) -> SpectralReport:
    """Dense symmetric eigendecomposition with eigenvalues sorted descending.

    Verifies the per-pair residual ||K v - lam v|| <= tol * ||K|| before
    returning.
    """
    K = np.asarray(K, dtype=float)
    try:
        vals, vecs = scipy.linalg.eigh(K)
    except scipy.linalg.LinAlgError as exc:
        raise ConvergenceFailure("symmetric eigensolver failed") from exc
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    resid = np.linalg.norm(K @ vecs - vecs * vals[None, :], axis=0)
    if scale > 0 and np.any(resid > residual_tol * scale):
        raise ConvergenceFailure(f"eigenpair residual {resid.max():.3e} exceeds tolerance")
    return SpectralReport(eigenvalues=vals, eigenvectors=vecs, matrix_dim=K.shape[0])


def top_eigenvector(K: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the largest eigenvalue only (cheaper than full eigh)."""
    N = K.shape[0]
    _, vec = scipy.linalg.eigh(K, subset_by_index=[N - 1, N - 1])
    return vec[:, 0]


def alignment(v: np.ndarray, feature: np.ndarray) -> float:
    """|<v, feature/||feature||>| for a unit vector v; lies in [0, 1]."""
    feature = np.asarray(feature, dtype=float)
    norm = np.linalg.norm(feature)
    if norm == 0.0:
        raise ZeroFeature("cannot align against a zero feature")
    return float(abs(np.asarray(v, dtype=float) @ feature) / norm)


def rayleigh_eigenvalue(K: np.ndarray, f: np.ndarray) -> float:
    """f^T K f / (N f^T f): empirical estimate of the operator eigenvalue."""
    f = np.asarray(f, dtype=float)
    sq = float(f @ f)
    if sq == 0.0:
        raise ZeroVector("Rayleigh quotient undefined for the zero vector")
    return float(f @ (K @ f) / (K.shape[0] * sq))


def predicted_linear_eigenvalues(a_coef: float, b_coef: float, d: int) -> tuple[float, float]:
    """Operator eigenvalues of the linear modes: spike-aligned and orthogonal."""
    if a_coef <= 0 or a_coef + b_coef <= 0:
        raise ValueError("coefficients must define a positive-definite covariance")
    return (a_coef + b_coef) / (4.0 * d), a_coef / (4.0 * d)


@dataclass(frozen=True)
class TopEigenPrediction:
    """Two-mode prediction for the top of the spiked spectrum.

    lambda_tilde is the first-order top eigenvalue A lam_max + B/(2 pi d),
    tau the weight of the normalized quadratic harmonic in the top
    eigenfunction, and lambda_exact the larger eigenvalue of the full
    2x2 coupling matrix between the radial and quadratic modes.
    """

    lambda_tilde: float
    tau: float
    lambda_exact: float


def predicted_top_eigenpair(
    a_coef: float, b_coef: float, d: int, lambda_max0: float, lambda2_0: float
) -> TopEigenPrediction:
    """Predict the top eigenvalue and its quadratic-harmonic mixing weight.

    lambda_max0 and lambda2_0 are the isotropic-kernel eigenvalues of the
    radial mode and of the radially weighted quadratic harmonic; at desk
    scale they are estimated with rayleigh_eigenvalue on a k0 Gram matrix.
    """
    if lambda_max0 <= lambda2_0 or lambda2_0 <= 0:
        raise ValueError("need lambda_max0 > lambda2_0 > 0")
    lam_tilde = a_coef * lambda_max0 + b_coef / (2.0 * np.pi * d)
    if lam_tilde <= a_coef * lambda2_0:
        raise GapCollapse("top eigenvalue does not clear the quadratic mode")
    tau = (
        y2_norm(d) * b_coef / (4.0 * np.pi * (lam_tilde - a_coef * lambda2_0))
    )
    # exact eigenvalue of the coupling matrix
    # [[A lmax + B/(2 pi d), B (d-1) / (2 pi d^2 (d+2))], [B/(4 pi), A lam2]]
    top_left = lam_tilde
    bottom_right = a_coef * lambda2_0
    off = b_coef * b_coef * (d - 1) / (2.0 * np.pi ** 2 * d * d * (d + 2))
    disc = np.sqrt((top_left - bottom_right) ** 2 + off)
    lam_exact = 0.5 * (top_left + bottom_right + disc)
    return TopEigenPrediction(lambda_tilde=float(lam_tilde), tau=float(tau), lambda_exact=float(lam_exact))


def y2_norm(d: int) -> float:
    """L2 norm of the centered quadratic zonal harmonic on the sphere."""
    if d < 2:
        raise ValueError("need d >= 2")
    return float(np.sqrt((2.0 * d - 2.0) / (d + 2.0)) / d)


# -- serialization ------------------------------------------------------------

def eigenvalues_to_csv(report: SpectralReport, path) -> None:
    """Write (index, eigenvalue) rows with a header."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("index,eigenvalue\n")
        for i, val in enumerate(report.eigenvalues):
            fh.write(f"{i},{val:.17g}\n")


def eigenvectors_to_binary(report: SpectralReport, path) -> None:
    """Write eigenvectors column-major after a 16-byte header.

    Header layout: magic 'SPEC', u32 matrix dim N, u32 column count, u32
    reserved zero; then float64 entries in column-major order.
    """
    vecs = np.asarray(report.eigenvectors, dtype="<f8")
    header = _MAGIC + struct.pack("<III", report.matrix_dim, vecs.shape[1], 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asfortranarray(vecs).tobytes(order="F"))


def eigenvectors_from_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _MAGIC:
            raise ValueError("not an eigenvector file")
        n, count, _ = struct.unpack("<III", header[4:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * count:
        raise ValueError("truncated eigenvector payload")
    return data.reshape((n, count), order="F")
