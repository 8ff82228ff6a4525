"""Baseline reconstructions and the 2-D forward/adjoint pair."""

import numpy as np
import pytest

from acmri.baselines import (
    BaselineSpec,
    adjoint_2d,
    forward_2d,
    reconstruct_baseline,
    tv2d_objective,
)
from acmri.coilstack import CoilStack
from acmri.fourier import fftc
from acmri.geometry import Grid, SamplingMask, make_accelerated_mask
from acmri.operators import prepare_data
from acmri.solver import sos_combine


def full_mask(n):
    return SamplingMask(acquired=np.ones(n, dtype=bool))


def random_sens(rng, coils, maps, n, m):
    data = rng.standard_normal((coils, maps, n, m)) + 1j * rng.standard_normal(
        (coils, maps, n, m)
    )
    return CoilStack(data=data, kind="sensitivity")


def random_kspace(rng, coils, n, m):
    data = rng.standard_normal((coils, n, m)) + 1j * rng.standard_normal((coils, n, m))
    return CoilStack.from_images(data, "kspace")


# ------------------------------------------------------- forward and adjoint


def test_forward_unit_sensitivity_is_centered_dft():
    rng = np.random.default_rng(0)
    n, m = 8, 6
    f = rng.standard_normal((1, n, m)) + 1j * rng.standard_normal((1, n, m))
    sens = CoilStack.from_images(np.ones((1, n, m), dtype=complex), "sensitivity")
    out = forward_2d(f, sens, full_mask(n))
    assert out.kind == "kspace"
    assert np.allclose(out.data[0, 0], fftc(f[0]), atol=1e-12)


def test_forward_zero_input_zero_output():
    sens = random_sens(np.random.default_rng(1), 3, 2, 8, 8)
    out = forward_2d(np.zeros((2, 8, 8)), sens, full_mask(8))
    assert not out.data.any()


def test_forward_masks_missing_lines_exactly():
    rng = np.random.default_rng(2)
    n, m = 12, 5
    mask = make_accelerated_mask(n, rate=3, acs=2)
    sens = random_sens(rng, 2, 1, n, m)
    f = rng.standard_normal((1, n, m)) + 1j * rng.standard_normal((1, n, m))
    out = forward_2d(f, sens, mask)
    missing = mask.missing_indices()
    assert np.all(out.data[:, :, missing, :] == 0)
    assert np.any(out.data[:, :, mask.acquired_indices(), :] != 0)


def test_forward_adjoint_inner_product_identity():
    # <E x, y> == <x, E* y> over random complex pairs pins the adjoint
    rng = np.random.default_rng(3)
    n, m = 10, 7
    for maps in (1, 2):
        sens = random_sens(rng, 3, maps, n, m)
        mask = make_accelerated_mask(n, rate=2, acs=2)
        for _ in range(10):
            x = rng.standard_normal((maps, n, m)) + 1j * rng.standard_normal(
                (maps, n, m)
            )
            y = random_kspace(rng, 3, n, m)
            lhs = np.vdot(forward_2d(x, sens, mask).data, y.data)
            rhs = np.vdot(x, adjoint_2d(y, sens, mask))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_forward_adjoint_validation():
    rng = np.random.default_rng(4)
    sens = random_sens(rng, 2, 1, 8, 8)
    with pytest.raises(ValueError):
        forward_2d(np.zeros((2, 8, 8)), sens, full_mask(8))
    with pytest.raises(ValueError):
        forward_2d(np.zeros((1, 8, 8)), sens, full_mask(6))
    image = CoilStack.from_images(np.zeros((2, 8, 8), dtype=complex), "image")
    with pytest.raises(ValueError):
        adjoint_2d(image, sens, full_mask(8))
    small = random_kspace(rng, 1, 8, 8)
    with pytest.raises(ValueError):
        adjoint_2d(small, sens, full_mask(8))


# ------------------------------------------------------------------ zero fill


def test_zero_fill_is_sos_of_prepared_data():
    rng = np.random.default_rng(5)
    n, m = 16, 12
    data = random_kspace(rng, 4, n, m)
    sens = random_sens(rng, 4, 1, n, m)
    mask = make_accelerated_mask(n, rate=4, acs=4)
    result = reconstruct_baseline(data, sens, mask, BaselineSpec(method="zero_fill"))
    expected = sos_combine(prepare_data(data, Grid(n=n, m=m)))
    assert np.array_equal(result.magnitude, expected)
    assert result.map_images is None
    assert result.method == "zero_fill"
    assert result.diagnostics[0]["failed"] is False
    assert result.failed_columns == ()


# ------------------------------------------------------------------ tikhonov


def test_tikhonov_full_data_recovers_image():
    # full sampling and a unit coil make the normal operator the
    # identity, so one CG step lands on the answer
    rng = np.random.default_rng(6)
    n, m = 8, 8
    f = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    sens = CoilStack.from_images(np.ones((1, n, m), dtype=complex), "sensitivity")
    data = CoilStack.from_images(fftc(f[None]), "kspace")
    spec = BaselineSpec(method="tikhonov", alpha=0.0, max_iter=50, tolerance=1e-12)
    result = reconstruct_baseline(data, sens, full_mask(n), spec)
    assert result.diagnostics[0]["converged"]
    assert np.allclose(result.map_images[0], f, atol=1e-6)
    assert np.allclose(result.magnitude, np.abs(f), atol=1e-6)


def materialize_normal(sens, mask, alpha):
    """Dense matrix of f -> E*E f + alpha f via basis probes."""
    size = sens.maps * sens.n * sens.m
    mat = np.zeros((size, size), dtype=np.complex128)
    for k in range(size):
        basis = np.zeros(size, dtype=np.complex128)
        basis[k] = 1.0
        f = basis.reshape(sens.maps, sens.n, sens.m)
        out = adjoint_2d(forward_2d(f, sens, mask), sens, mask) + alpha * f
        mat[:, k] = out.reshape(-1)
    return mat


def test_tikhonov_matches_dense_normal_equations():
    rng = np.random.default_rng(7)
    n, m, coils = 6, 6, 2
    alpha = 0.05
    sens = random_sens(rng, coils, 1, n, m)
    data = random_kspace(rng, coils, n, m)
    mask = make_accelerated_mask(n, rate=2, acs=2)

    spec = BaselineSpec(method="tikhonov", alpha=alpha, max_iter=500, tolerance=1e-13)
    result = reconstruct_baseline(data, sens, mask, spec)

    masked = data.data.copy()
    masked[:, :, mask.missing_indices(), :] = 0.0
    rhs = adjoint_2d(CoilStack(data=masked, kind="kspace"), sens, mask).reshape(-1)
    normal = materialize_normal(sens, mask, alpha)
    expected = np.linalg.solve(normal, rhs).reshape(1, n, m)
    assert np.allclose(result.map_images, expected, atol=1e-8)
    assert np.allclose(result.magnitude, np.abs(expected[0]), atol=1e-8)


def test_tikhonov_error_decreases_in_operator_norm():
    # CG minimizes the N-norm of the error over growing Krylov spaces,
    # so that error must be monotone along the iteration
    rng = np.random.default_rng(8)
    n, m, coils = 6, 6, 2
    alpha = 0.1
    sens = random_sens(rng, coils, 1, n, m)
    data = random_kspace(rng, coils, n, m)
    mask = make_accelerated_mask(n, rate=3, acs=2)

    masked = data.data.copy()
    masked[:, :, mask.missing_indices(), :] = 0.0
    rhs = adjoint_2d(CoilStack(data=masked, kind="kspace"), sens, mask).reshape(-1)
    normal = materialize_normal(sens, mask, alpha)
    star = np.linalg.solve(normal, rhs)

    norms = []

    def track(x):
        err = x.reshape(-1) - star
        norms.append(float(np.sqrt(np.vdot(err, normal @ err).real)))

    spec = BaselineSpec(method="tikhonov", alpha=alpha, max_iter=40, tolerance=1e-12)
    reconstruct_baseline(data, sens, mask, spec, callback=track)
    assert len(norms) > 3
    for before, after in zip(norms, norms[1:]):
        assert after <= before * (1 + 1e-10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_tikhonov_flags_non_finite_data():
    rng = np.random.default_rng(9)
    n, m = 8, 8
    data = random_kspace(rng, 2, n, m)
    data.data[0, 0, 0, 0] = np.nan
    sens = random_sens(rng, 2, 1, n, m)
    spec = BaselineSpec(method="tikhonov", alpha=0.1)
    result = reconstruct_baseline(data, sens, full_mask(n), spec)
    assert result.diagnostics[0]["failed"]
    assert not result.diagnostics[0]["converged"]


# ----------------------------------------------------------------------- tv2d


def test_tv2d_objective_gradient_matches_differences():
    rng = np.random.default_rng(10)
    n, m = 4, 4
    sens = random_sens(rng, 2, 1, n, m)
    mask = make_accelerated_mask(n, rate=2, acs=2)
    data = random_kspace(rng, 2, n, m)
    masked = data.data.copy()
    masked[:, :, mask.missing_indices(), :] = 0.0
    b = CoilStack(data=masked, kind="kspace")
    for alpha in (0.0, 0.3):
        z = rng.standard_normal(2 * n * m)
        _, grad = tv2d_objective(z, b, sens, mask, alpha, 0.05)
        num = np.zeros_like(z)
        for i in range(z.size):
            zp = z.copy()
            zp[i] += 1e-6
            zm = z.copy()
            zm[i] -= 1e-6
            num[i] = (
                tv2d_objective(zp, b, sens, mask, alpha, 0.05)[0]
                - tv2d_objective(zm, b, sens, mask, alpha, 0.05)[0]
            ) / 2e-6
        assert np.allclose(grad, num, atol=1e-5)


def test_tv2d_full_data_recovers_image():
    rng = np.random.default_rng(11)
    n, m = 8, 8
    f = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    sens = CoilStack.from_images(np.ones((1, n, m), dtype=complex), "sensitivity")
    data = CoilStack.from_images(fftc(f[None]), "kspace")
    spec = BaselineSpec(method="tv2d", alpha=0.0, max_iter=500, tolerance=1e-10)
    result = reconstruct_baseline(data, sens, full_mask(n), spec)
    assert not result.diagnostics[0]["failed"]
    assert np.allclose(result.map_images[0], f, atol=1e-6)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_tv2d_flags_non_finite_data():
    rng = np.random.default_rng(12)
    n, m = 8, 8
    data = random_kspace(rng, 2, n, m)
    data.data[1, 0, 2, 3] = np.inf
    sens = random_sens(rng, 2, 1, n, m)
    spec = BaselineSpec(method="tv2d", alpha=1e-3)
    result = reconstruct_baseline(data, sens, full_mask(n), spec)
    assert result.diagnostics[0]["failed"]
    assert np.all(np.isfinite(result.magnitude))


# ----------------------------------------------------------------- validation


def test_baseline_spec_validation():
    with pytest.raises(ValueError):
        BaselineSpec(method="grappa")
    with pytest.raises(ValueError):
        BaselineSpec(alpha=-1.0)
    with pytest.raises(ValueError):
        BaselineSpec(beta=0.0)
    with pytest.raises(ValueError):
        BaselineSpec(max_iter=0)


def test_reconstruct_baseline_requires_kspace():
    rng = np.random.default_rng(13)
    image = CoilStack.from_images(
        rng.standard_normal((1, 8, 8)) + 0j, "image"
    )
    sens = random_sens(rng, 1, 1, 8, 8)
    with pytest.raises(ValueError):
        reconstruct_baseline(image, sens, full_mask(8), BaselineSpec())
