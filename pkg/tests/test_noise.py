from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

import skillest as sk
from skillest.errors import InvalidParameterError
from skillest.noise import DEFAULT_RANGES, kernel_batch

from .oracles import gauss_pdf_2d

params_strategy = st.builds(
    sk.ExecutionSkillParams,
    sigma_x=st.floats(3.0, 150.5),
    sigma_y=st.floats(3.0, 150.5),
    rho=st.floats(-0.75, 0.75),
)


def test_covariance_diagonal_case():
    cov = sk.covariance(sk.ExecutionSkillParams(10.0, 10.0, 0.0))
    assert np.allclose(cov, [[100.0, 0.0], [0.0, 100.0]])


def test_covariance_formula_substitution():
    cov = sk.covariance(sk.ExecutionSkillParams(10.0, 100.0, 0.75))
    assert np.allclose(cov, [[100.0, 750.0], [750.0, 10000.0]])


def test_covariance_determinant():
    cov = sk.covariance(sk.ExecutionSkillParams(3.0, 3.0, 0.75))
    assert np.isclose(np.linalg.det(cov), 35.4375)


@pytest.mark.parametrize("bad", [(0.0, 10.0, 0.0), (-5.0, 10.0, 0.0), (10.0, 10.0, 1.0), (10.0, 10.0, -1.2)])
def test_invalid_params_rejected(bad):
    with pytest.raises(InvalidParameterError):
        sk.ExecutionSkillParams(*bad)


@given(params=params_strategy)
def test_covariance_positive_definite(params):
    # Cholesky must never fail for in-range parameters.
    np.linalg.cholesky(params.covariance())


def test_pdf_peak_isotropic():
    p = sk.ExecutionSkillParams(10.0, 10.0, 0.0)
    assert np.isclose(sk.pdf(p, (0.0, 0.0)), 1.0 / (2 * np.pi * 100.0))


@given(params=params_strategy, x=st.floats(-300, 300), y=st.floats(-300, 300))
def test_pdf_even_symmetry(params, x, y):
    assert sk.pdf(params, (x, y)) == sk.pdf(params, (-x, -y))


@given(params=params_strategy)
def test_pdf_maximum_at_origin(params):
    peak = sk.pdf(params, (0.0, 0.0))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-300, 300, size=(50, 2))
    assert np.all(sk.pdf(params, pts) <= peak)


def test_pdf_matches_matrix_formula():
    p = sk.ExecutionSkillParams(12.0, 40.0, -0.35)
    pts = np.random.default_rng(3).uniform(-100, 100, size=(20, 2))
    for pt in pts:
        assert np.isclose(sk.pdf(p, pt), gauss_pdf_2d(pt, (0, 0), p.covariance()), rtol=1e-12)


def test_pdf_integrates_to_one():
    p = sk.ExecutionSkillParams(9.0, 21.0, 0.4)
    span_x, span_y = 6 * p.sigma_x, 6 * p.sigma_y
    n = 801
    xs = np.linspace(-span_x, span_x, n)
    ys = np.linspace(-span_y, span_y, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = sk.pdf(p, np.stack([gx, gy], axis=-1))
    integral = vals.sum() * (xs[1] - xs[0]) * (ys[1] - ys[0])
    assert abs(integral - 1.0) < 1e-4


def test_sample_moment_matching():
    p = sk.ExecutionSkillParams(10.0, 10.0, 0.0)
    rng = np.random.default_rng(42)
    draws = sk.sample(p, rng, size=100_000)
    emp = np.cov(draws.T)
    assert abs(emp[0, 0] - 100.0) < 3.0
    assert abs(emp[1, 1] - 100.0) < 3.0
    assert abs(emp[0, 1]) < 3.0


def test_sample_correlated_moments():
    p = sk.ExecutionSkillParams(20.0, 5.0, 0.6)
    rng = np.random.default_rng(42)
    emp = np.cov(sk.sample(p, rng, size=100_000).T)
    assert np.allclose(emp, p.covariance(), rtol=0.05)


def test_sample_tiny_sigma_clusters_at_origin():
    eps = 1e-3
    p = sk.ExecutionSkillParams(eps, eps, 0.0)
    draws = sk.sample(p, np.random.default_rng(0), size=10_000)
    frac = (np.hypot(draws[:, 0], draws[:, 1]) < 5 * eps).mean()
    assert frac > 0.999


def test_sample_deterministic_per_stream():
    p = sk.ExecutionSkillParams(30.0, 90.0, 0.3)
    a = sk.sample(p, sk.substream(4, "agent-noise"), size=10)
    b = sk.sample(p, sk.substream(4, "agent-noise"), size=10)
    assert np.array_equal(a, b)


def test_kernel_sums_to_one(board_grid):
    k = sk.discretized_kernel(sk.ExecutionSkillParams(25.0, 60.0, -0.5), board_grid)
    assert np.isclose(k.sum(), 1.0, atol=1e-12)
    assert np.all(k >= 0)


def test_kernel_reflection_symmetry_rho0(board_grid):
    k = sk.discretized_kernel(sk.ExecutionSkillParams(30.0, 50.0, 0.0), board_grid)
    assert np.allclose(k, k[::-1, :])
    assert np.allclose(k, k[:, ::-1])


def test_kernel_centroid_near_origin(board_grid):
    k = sk.discretized_kernel(sk.ExecutionSkillParams(40.0, 40.0, 0.25), board_grid)
    x, y = board_grid.mesh
    cx = (k * x).sum()
    cy = (k * y).sum()
    assert abs(cx) < board_grid.resolution / 10
    assert abs(cy) < board_grid.resolution / 10


def test_kernel_factorizes_for_rho0(board_grid):
    k = sk.discretized_kernel(sk.ExecutionSkillParams(22.0, 47.0, 0.0), board_grid)
    kx = k.sum(axis=1)
    ky = k.sum(axis=0)
    outer = np.outer(kx, ky)
    mask = outer > 0
    assert np.allclose(k[mask], outer[mask], rtol=1e-10)


def test_kernel_warns_when_grid_coarser_than_sigma(board_grid):
    with pytest.warns(UserWarning, match="subgrid"):
        sk.discretized_kernel(sk.ExecutionSkillParams(3.0, 80.0, 0.0), board_grid)


def test_kernel_near_delta_concentrates(board_grid):
    with pytest.warns(UserWarning):
        k = sk.discretized_kernel(sk.ExecutionSkillParams(0.5, 0.5, 0.0), board_grid)
    center = (board_grid.n_per_side - 1) // 2
    assert k[center, center] > 0.999


def test_kernel_batch_matches_scalar(board_grid):
    rng = np.random.default_rng(5)
    sx = rng.uniform(3.0, 150.0, 8)
    sy = rng.uniform(3.0, 150.0, 8)
    rho = rng.uniform(-0.75, 0.75, 8)
    with np.errstate(all="ignore"):
        batch = kernel_batch(sx, sy, rho, board_grid, dtype=np.float64)
    import warnings

    for i in range(8):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            single = sk.discretized_kernel(
                sk.ExecutionSkillParams(sx[i], sy[i], rho[i]), board_grid
            )
        assert np.allclose(batch[i], single, rtol=1e-12, atol=1e-300)


def test_skill_ranges_validation():
    with pytest.raises(InvalidParameterError):
        sk.SkillRanges(sigma_range=(5.0, 5.0))
    with pytest.raises(InvalidParameterError):
        sk.SkillRanges(sigma_range=(-1.0, 10.0))
    assert DEFAULT_RANGES.widths[0] == pytest.approx(147.5)
