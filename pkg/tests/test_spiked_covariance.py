"""Implicit rank-one covariance against dense-matrix oracles."""

import numpy as np
import pytest

from spikedkernel import (
    DegenerateLink,
    DimensionMismatch,
    LearningConfig,
    NonPositiveDefinite,
    ZeroSpike,
    coefficients_from_config,
    from_name,
    inverse,
    log_det,
    make_spiked,
    matvec,
    sample_weights,
    sqrt,
)
from spikedkernel.rng import SeededStream


def dense(g):
    """Entrywise dense reconstruction a*I + b*u u^T (the test oracle)."""
    return g.a * np.eye(g.dim) + g.b * np.outer(g.spike, g.spike)


def e(d, i=0):
    v = np.zeros(d)
    v[i] = 1.0
    return v


def test_make_spiked_validates():
    with pytest.raises(NonPositiveDefinite):
        make_spiked(-1.0, 0.5, e(4))
    with pytest.raises(NonPositiveDefinite):
        make_spiked(1.0, -1.0, e(4))
    with pytest.raises(ZeroSpike):
        make_spiked(1.0, 2.0, np.zeros(4))
    # zero direction is fine when the spike weight is zero
    g = make_spiked(1.0, 0.0, np.zeros(4))
    assert np.isclose(np.linalg.norm(g.spike), 1.0)


def test_make_spiked_renormalizes():
    g = make_spiked(1.0, 2.0, 3.0 * e(5))
    assert abs(np.linalg.norm(g.spike) - 1.0) < 1e-12


def test_identity_case_matvec():
    g = make_spiked(1.0, 0.0, e(6))
    rng = SeededStream(1)
    for _ in range(5):
        x = rng.standard_normal(6)
        np.testing.assert_allclose(matvec(g, x), x, rtol=0, atol=0)


def test_forced_eigenstructure():
    g = make_spiked(2.0, 2.0, e(3))
    np.testing.assert_allclose(matvec(g, e(3, 0)), 4.0 * e(3, 0))
    np.testing.assert_allclose(matvec(g, e(3, 1)), 2.0 * e(3, 1))


def test_experiment_covariance_construction():
    d = 300
    w = SeededStream(7).standard_normal(d)
    g = make_spiked(1.2, 5.0 * d ** 0.5, w)
    assert g.a == 1.2
    assert g.b == pytest.approx(5.0 * np.sqrt(300))
    assert abs(np.linalg.norm(g.spike) - 1.0) < 1e-12


def test_matvec_matches_dense_oracle():
    rng = SeededStream(2)
    for trial in range(10):
        u = rng.standard_normal(8)
        g = make_spiked(0.5 + trial * 0.3, float(trial) - 0.3, u)
        x = rng.standard_normal(8)
        np.testing.assert_allclose(matvec(g, x), dense(g) @ x, rtol=1e-13, atol=1e-13)


def test_matvec_dimension_mismatch():
    g = make_spiked(1.0, 1.0, e(4))
    with pytest.raises(DimensionMismatch):
        matvec(g, np.zeros(5))


def test_inverse_identity_fixed_point():
    g = make_spiked(1.0, 0.0, e(4))
    gi = inverse(g)
    assert gi.a == 1.0 and gi.b == 0.0


def test_inverse_example():
    # dense oracle at d=4 gives diag 0.25 on the spike, 0.5 off it
    gi = inverse(make_spiked(2.0, 2.0, e(4)))
    assert gi.a == pytest.approx(0.5)
    assert gi.b == pytest.approx(-0.25)
    np.testing.assert_allclose(dense(gi), np.linalg.inv(dense(make_spiked(2.0, 2.0, e(4)))))


def test_inverse_dense_multiply_oracle():
    rng = SeededStream(3)
    u = rng.standard_normal(16)
    g = make_spiked(1.7, 2.4, u)
    prod = dense(g) @ dense(inverse(g))
    assert np.max(np.abs(prod - np.eye(16))) < 1e-12


@pytest.mark.parametrize("d", [8, 16, 32, 64])
def test_inverse_and_sqrt_dense_invariants(d):
    rng = SeededStream(40 + d)
    u = rng.standard_normal(d)
    g = make_spiked(0.8, 3.1, u)
    assert np.max(np.abs(dense(g) @ dense(inverse(g)) - np.eye(d))) < 1e-12
    r = dense(sqrt(g))
    assert np.max(np.abs(r @ r - dense(g))) < 1e-12


def test_sqrt_examples():
    r = sqrt(make_spiked(4.0, 0.0, e(3)))
    assert r.a == pytest.approx(2.0) and r.b == pytest.approx(0.0)
    r = sqrt(make_spiked(1.0, 3.0, e(3)))
    assert r.a == pytest.approx(1.0) and r.b == pytest.approx(1.0)


def test_sqrt_eigendecomposition_oracle():
    rng = SeededStream(4)
    u = rng.standard_normal(8)
    g = make_spiked(1.3, 0.9, u)
    vals, vecs = np.linalg.eigh(dense(g))
    root_oracle = (vecs * np.sqrt(vals)) @ vecs.T
    np.testing.assert_allclose(dense(sqrt(g)), root_oracle, atol=1e-12)


def test_log_det():
    assert log_det(make_spiked(1.0, 0.0, e(7))) == 0.0
    assert log_det(make_spiked(2.0, 2.0, e(3))) == pytest.approx(np.log(16.0))
    rng = SeededStream(5)
    u = rng.standard_normal(6)
    g = make_spiked(2.2, -1.1, u)
    sign, logdet = np.linalg.slogdet(dense(g))
    assert sign > 0
    assert abs(log_det(g) - logdet) < 1e-10


def test_sample_weights_rejects_empty():
    with pytest.raises(ValueError):
        sample_weights(make_spiked(1.0, 0.0, e(3)), 0, SeededStream(0))


def test_sample_weights_isotropic_moments():
    d, count = 10, 10 ** 6
    g = make_spiked(1.0, 0.0, e(d))
    z = sample_weights(g, count, SeededStream(6))
    emp = z.T @ z / count
    target = np.eye(d) / d
    # std error of each empirical covariance entry under the Gaussian law
    se = np.sqrt((np.outer(np.diag(target), np.diag(target)) + target ** 2) / count)
    assert np.all(np.abs(emp - target) < 5.0 * se)


def test_sample_weights_spiked_variance():
    d, count = 50, 10 ** 6
    g = make_spiked(1.2, 10.0, e(d))
    z = sample_weights(g, count, SeededStream(7))
    spike_var = float(np.mean(z[:, 0] ** 2))
    target = (1.2 + 10.0) / d
    se = target * np.sqrt(2.0 / count)
    assert abs(spike_var - target) < 3.0 * se


def test_positive_definiteness_property():
    rng = SeededStream(8)
    u = rng.standard_normal(12)
    g = make_spiked(0.7, -0.5, u)
    floor = min(g.a, g.a + g.b)
    for _ in range(1000):
        x = rng.standard_normal(12)
        quad = float(x @ matvec(g, x))
        assert quad >= floor * float(x @ x) - 1e-10


def cfg(d, *, alpha=1.0, beta=1.0, zeta=0.5, eta_tilde=1.0, noise=0.0):
    return LearningConfig(alpha=alpha, beta=beta, zeta=zeta, eta_tilde=eta_tilde,
                          noise_var=noise, dim=d)


def test_coefficients_zero_step():
    a, b = coefficients_from_config(cfg(100, eta_tilde=0.0), from_name("identity"))
    assert a == 1.0 and b == 0.0


def test_coefficients_identity_link():
    # independent substitution: eta^2 = d, lam = 1, so
    # A = 1 + (d * 1 / d^2) * 1 and B = 1 - 1/d + 2/d at d = 100
    a, b = coefficients_from_config(cfg(100), from_name("identity"))
    assert a == pytest.approx(1.01, abs=1e-12)
    assert b == pytest.approx(1.01, abs=1e-12)


def test_coefficients_relu_link():
    # substitution oracle with mu1 = 1/2, s = 1/2, E[g^2] = 1/2:
    # A = 1 + (100 * (1/4) / 10^4) * (1/2), B = (1/16)(1 - 1/100 + 4/100)
    a, b = coefficients_from_config(cfg(100), from_name("relu"))
    assert a == pytest.approx(1.00125, abs=1e-9)
    assert b == pytest.approx(0.064375, abs=1e-9)


def test_coefficients_degenerate_links():
    for kind in ("quadratic", "gauss_bump", "indicator_inside", "indicator_outside"):
        with pytest.raises(DegenerateLink):
            coefficients_from_config(cfg(50), from_name(kind))


@pytest.mark.parametrize("kind", ["identity", "relu", "paper_target"])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_spike_weight_positive_for_all_dims(kind, alpha):
    link = from_name(kind)
    for d in range(4, 200, 7):
        _, b = coefficients_from_config(cfg(d, alpha=alpha), link)
        assert b > 0.0


def test_learning_config_validation():
    with pytest.raises(ValueError):
        cfg(10, zeta=0.4)
    with pytest.raises(ValueError):
        cfg(10, zeta=1.0)
    with pytest.raises(ValueError):
        cfg(10, alpha=0.0)
    c = cfg(64)
    assert c.eta == pytest.approx(8.0)
    assert c.n_samples == 64 and c.width == 64
