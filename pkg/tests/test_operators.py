import numpy as np
import pytest
from scipy.integrate import quad

from acmri.coilstack import CoilStack
from acmri.fourier import dft_matrix, fftc, ifftc
from acmri.geometry import BandSet, Grid, SamplingMask, make_random_mask, mask_to_bands
from acmri.operators import (
    assemble_slice,
    build_matrix,
    build_matrix_analytic,
    build_matrix_dft,
    kernel_eval,
    prepare_data,
    realify,
    slice_matrix,
)


def quad_kernel(bands, x2):
    """Adaptive-quadrature evaluation of (2pi)^-1 integral of e^{i k x2}
    over each band; the independent oracle for kernel_eval."""
    import warnings
    from scipy.integrate import IntegrationWarning

    total = 0.0 + 0.0j
    with warnings.catch_warnings():
        # tolerances are pushed to the roundoff floor on purpose
        warnings.simplefilter("ignore", IntegrationWarning)
        for c, w in bands:
            re = quad(lambda k: np.cos(k * x2), c - w, c + w, epsabs=1e-14, epsrel=1e-14, limit=400)[0]
            im = quad(lambda k: np.sin(k * x2), c - w, c + w, epsabs=1e-14, epsrel=1e-14, limit=400)[0]
            total += (re + 1j * im) / (2 * np.pi)
    return total


def random_mask(rng, n):
    acs = int(rng.integers(0, max(1, n // 4)))
    scan = float(rng.uniform(max(0.3, (acs + 1) / n), 0.95))
    return make_random_mask(n, scan, acs, seed=int(rng.integers(1 << 30)))


# ------------------------------------------------------------------- kernel


def test_kernel_empty_bands_is_zero():
    bands = BandSet(bands=())
    assert kernel_eval(bands, 0.3) == 0
    assert np.all(kernel_eval(bands, np.linspace(-1, 1, 7)) == 0)


def test_kernel_at_zero_sums_widths():
    bands = BandSet(bands=((0.0, 2.0),))
    assert kernel_eval(bands, 0.0) == pytest.approx(2.0 / np.pi)
    two = BandSet(bands=((-5.0, 1.5), (5.0, 0.5)))
    assert kernel_eval(two, 0.0) == pytest.approx(2.0 / np.pi)


def test_kernel_matches_quadrature_spot():
    bands = BandSet(bands=((1.0, 0.5),))
    value = complex(kernel_eval(bands, 0.7))
    assert abs(value - quad_kernel(bands, 0.7)) < 1e-10


def test_kernel_matches_quadrature_random():
    rng = np.random.default_rng(10)
    for _ in range(10):
        c = float(rng.uniform(-40, 40))
        w = float(rng.uniform(0.05, 8.0))
        x2 = float(rng.uniform(-1, 1))
        bands = BandSet(bands=((c, w),))
        assert abs(complex(kernel_eval(bands, x2)) - quad_kernel(bands, x2)) < 1e-10


def test_kernel_hermitian_symmetry():
    rng = np.random.default_rng(11)
    bands = BandSet(bands=((-12.0, 2.0), (3.0, 1.0), (20.0, 0.25)))
    for x2 in rng.uniform(-1, 1, size=20):
        assert complex(kernel_eval(bands, -x2)) == pytest.approx(
            np.conj(complex(kernel_eval(bands, x2))), abs=1e-14
        )


# ---------------------------------------------------------------- matrices


def test_analytic_empty_bands_identity():
    out = build_matrix_analytic(BandSet(bands=()), Grid(n=12, m=3))
    assert np.array_equal(out.matrix, np.eye(12))
    assert out.source == "analytic"


def test_analytic_centered_band_real_symmetric():
    out = build_matrix_analytic(BandSet(bands=((0.0, 3.0),)), Grid(n=10, m=2))
    kernel_part = np.eye(10) - out.matrix
    assert np.abs(kernel_part.imag).max() == 0
    assert np.allclose(kernel_part, kernel_part.T)


def test_analytic_toeplitz_structure():
    out = build_matrix_analytic(BandSet(bands=((7.0, 1.5),)), Grid(n=9, m=2))
    a = out.matrix
    for diag in range(-2, 3):
        vals = np.diagonal(a, offset=diag)
        assert np.allclose(vals, vals[0])


def test_analytic_columns_match_quadrature_oracle():
    # delta probes: column b of A must equal delta_ab - (1/n) L(v_a - v_b)
    # with L evaluated by adaptive quadrature instead of the closed form
    n = 16
    bands = BandSet(bands=((-9.0, 2.5),))
    a = build_matrix_analytic(bands, Grid(n=n, m=2)).matrix
    for b in (0, 5, 15):
        probe = np.zeros(n)
        probe[b] = 1.0
        column = a @ probe
        oracle = np.array(
            [(1.0 if i == b else 0.0) - quad_kernel(bands, (i - b) / n) / n for i in range(n)]
        )
        assert np.abs(column - oracle).max() < 1e-12


def test_dft_full_mask_identity():
    mask = SamplingMask(acquired=np.ones(8, dtype=bool), acs=0)
    out = build_matrix_dft(mask, Grid(n=8, m=2))
    assert np.abs(out.matrix - np.eye(8)).max() < 1e-12


def test_dft_single_line_rank_one():
    # the fewest-lines mask a SamplingMask admits: one acquired line,
    # giving the rank-one projection onto that frequency's basis vector
    acquired = np.zeros(8, dtype=bool)
    acquired[5] = True
    mask = SamplingMask(acquired=acquired, acs=0)
    out = build_matrix_dft(mask, Grid(n=8, m=2)).matrix
    w = dft_matrix(8)
    expected = np.outer(w.conj().T[:, 5], w[5])
    assert np.abs(out - expected).max() < 1e-12
    assert np.linalg.matrix_rank(out) == 1


def test_dft_projection_properties():
    rng = np.random.default_rng(12)
    for _ in range(5):
        n = int(rng.integers(8, 33))
        mask = random_mask(rng, n)
        a = build_matrix_dft(mask, Grid(n=n, m=2)).matrix
        assert np.abs(a @ a - a).max() < 1e-12
        assert np.abs(a - a.conj().T).max() < 1e-12
        assert np.trace(a).real == pytest.approx(mask.num_acquired, abs=1e-10)


def test_dft_mask_length_checked():
    mask = SamplingMask(acquired=np.ones(8, dtype=bool), acs=0)
    with pytest.raises(ValueError):
        build_matrix_dft(mask, Grid(n=9, m=2))


def test_build_matrix_dispatch():
    mask = make_random_mask(16, 0.6, 4, seed=0)
    grid = Grid(n=16, m=2)
    dft = build_matrix(mask, grid, source="dft")
    ana = build_matrix(mask, grid, source="analytic")
    assert dft.source == "dft"
    assert ana.source == "analytic"
    assert np.array_equal(
        ana.matrix, build_matrix_analytic(mask_to_bands(mask), grid).matrix
    )
    with pytest.raises(ValueError):
        build_matrix(mask, grid, source="other")


# ------------------------------------------------------------- data prepare


def _simulate(rng, n, m, coils, mask):
    image = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    sens = rng.standard_normal((coils, n, m)) + 1j * rng.standard_normal((coils, n, m))
    coil_images = sens * image[None]
    kspace = fftc(coil_images, axes=(1, 2))
    kspace[:, ~mask.acquired, :] = 0.0
    return coil_images, CoilStack.from_images(kspace, kind="kspace")


def test_prepare_full_data_roundtrip():
    rng = np.random.default_rng(13)
    n = m = 12
    mask = SamplingMask(acquired=np.ones(n, dtype=bool), acs=0)
    coil_images, kspace = _simulate(rng, n, m, 3, mask)
    g = prepare_data(kspace, Grid(n=n, m=m))
    assert g.kind == "image"
    assert np.abs(g.data[:, 0] - coil_images).max() < 1e-10


def test_prepare_zero_data():
    kspace = CoilStack(data=np.zeros((2, 1, 8, 8), dtype=complex), kind="kspace")
    g = prepare_data(kspace, Grid(n=8, m=8))
    assert np.all(g.data == 0)


def test_prepare_columns_match_matrix():
    rng = np.random.default_rng(14)
    n = m = 16
    mask = random_mask(rng, n)
    image = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    sens = rng.standard_normal((2, n, m)) + 1j * rng.standard_normal((2, n, m))
    coil_images = sens * image[None]
    kspace = fftc(coil_images, axes=(1, 2))
    kspace[:, ~mask.acquired, :] = 0.0
    g = prepare_data(CoilStack.from_images(kspace, kind="kspace"), Grid(n=n, m=m))
    a = build_matrix_dft(mask, Grid(n=n, m=m)).matrix
    for j in range(2):
        for i in range(m):
            assert np.abs(g.data[j, 0, :, i] - a @ coil_images[j, :, i]).max() < 1e-10


def test_prepare_validation():
    stack = CoilStack(data=np.zeros((1, 1, 8, 8), dtype=complex), kind="image")
    with pytest.raises(ValueError):
        prepare_data(stack, Grid(n=8, m=8))
    kspace = CoilStack(data=np.zeros((1, 1, 8, 8), dtype=complex), kind="kspace")
    with pytest.raises(ValueError):
        prepare_data(kspace, Grid(n=8, m=9))


def test_prepare_linear_in_data():
    rng = np.random.default_rng(15)
    grid = Grid(n=8, m=8)
    a = rng.standard_normal((1, 1, 8, 8)) + 1j * rng.standard_normal((1, 1, 8, 8))
    b = rng.standard_normal((1, 1, 8, 8)) + 1j * rng.standard_normal((1, 1, 8, 8))
    ga = prepare_data(CoilStack(data=a, kind="kspace"), grid).data
    gb = prepare_data(CoilStack(data=b, kind="kspace"), grid).data
    gab = prepare_data(CoilStack(data=a + 2j * b, kind="kspace"), grid).data
    assert np.abs(gab - (ga + 2j * gb)).max() < 1e-12


# ------------------------------------------------------------ slice systems


def _sens_stack(rng, coils, maps, n, m):
    data = rng.standard_normal((coils, maps, n, m)) + 1j * rng.standard_normal(
        (coils, maps, n, m)
    )
    return CoilStack(data=data, kind="sensitivity")


def test_assemble_identity_sensitivities():
    rng = np.random.default_rng(16)
    n = m = 10
    grid = Grid(n=n, m=m)
    mask = random_mask(rng, n)
    op = build_matrix_dft(mask, grid)
    sens = CoilStack(data=np.ones((1, 1, n, m), dtype=complex), kind="sensitivity")
    g = CoilStack(
        data=rng.standard_normal((1, 1, n, m)) + 1j * rng.standard_normal((1, 1, n, m)),
        kind="image",
    )
    system = assemble_slice(op, sens, g, 4)
    assert np.array_equal(system.lhs, op.matrix)
    assert np.array_equal(system.rhs, g.data[0, 0, :, 4])
    assert system.n == n
    assert system.num_maps == 1


def test_assemble_coil_blocks_entrywise():
    rng = np.random.default_rng(17)
    n, m = 8, 6
    grid = Grid(n=n, m=m)
    op = build_matrix_dft(random_mask(rng, n), grid)
    sens = _sens_stack(rng, 2, 1, n, m)
    g = CoilStack(
        data=rng.standard_normal((2, 1, n, m)) + 1j * rng.standard_normal((2, 1, n, m)),
        kind="image",
    )
    i = 3
    system = assemble_slice(op, sens, g, i)
    assert system.lhs.shape == (2 * n, n)
    for j in range(2):
        expected = op.matrix @ np.diag(sens.data[j, 0, :, i])
        assert np.abs(system.lhs[j * n : (j + 1) * n] - expected).max() < 1e-14
        assert np.array_equal(system.rhs[j * n : (j + 1) * n], g.data[j, 0, :, i])


def test_assemble_map_major_columns():
    rng = np.random.default_rng(18)
    n, m = 6, 4
    grid = Grid(n=n, m=m)
    op = build_matrix_dft(random_mask(rng, n), grid)
    sens = _sens_stack(rng, 2, 2, n, m)
    i = 1
    lhs = slice_matrix(op, sens, i)
    assert lhs.shape == (2 * n, 2 * n)
    for j in range(2):
        for q in range(2):
            block = lhs[j * n : (j + 1) * n, q * n : (q + 1) * n]
            expected = op.matrix @ np.diag(sens.data[j, q, :, i])
            assert np.abs(block - expected).max() < 1e-14


def test_assemble_validation():
    rng = np.random.default_rng(19)
    n, m = 8, 4
    grid = Grid(n=n, m=m)
    op = build_matrix_dft(random_mask(rng, n), grid)
    sens = _sens_stack(rng, 2, 1, n, m)
    g = CoilStack(data=np.zeros((2, 1, n, m), dtype=complex), kind="image")
    with pytest.raises(ValueError):
        assemble_slice(op, sens, g, m)  # column out of range
    with pytest.raises(ValueError):
        assemble_slice(op, sens.take_coils([0]), g, 0)  # coil count mismatch
    with pytest.raises(ValueError):
        slice_matrix(op, g, 0)  # wrong stack kind
    bad = CoilStack(data=np.zeros((2, 1, n + 1, m), dtype=complex), kind="sensitivity")
    with pytest.raises(ValueError):
        slice_matrix(op, bad, 0)


def test_assemble_rhs_superposition():
    rng = np.random.default_rng(20)
    n, m = 8, 5
    grid = Grid(n=n, m=m)
    op = build_matrix_dft(random_mask(rng, n), grid)
    sens = _sens_stack(rng, 2, 1, n, m)
    da = rng.standard_normal((2, 1, n, m)) + 1j * rng.standard_normal((2, 1, n, m))
    db = rng.standard_normal((2, 1, n, m)) + 1j * rng.standard_normal((2, 1, n, m))
    ga = CoilStack(data=da, kind="image")
    gb = CoilStack(data=db, kind="image")
    gab = CoilStack(data=da + 3.0 * db, kind="image")
    ra = assemble_slice(op, sens, ga, 2).rhs
    rb = assemble_slice(op, sens, gb, 2).rhs
    rab = assemble_slice(op, sens, gab, 2).rhs
    assert np.abs(rab - (ra + 3.0 * rb)).max() < 1e-12


# ----------------------------------------------------------------- realify


def test_realify_identity_and_rotation():
    rng = np.random.default_rng(21)
    n = 4
    grid = Grid(n=n, m=2)
    op_i = build_matrix_dft(SamplingMask(acquired=np.ones(n, dtype=bool), acs=0), grid)
    sens = CoilStack(data=np.ones((1, 1, n, 1), dtype=complex), kind="sensitivity")
    g = CoilStack(
        data=rng.standard_normal((1, 1, n, 1)) + 1j * rng.standard_normal((1, 1, n, 1)),
        kind="image",
    )
    system = assemble_slice(op_i, sens, g, 0)
    real = realify(system)
    expected = np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), np.eye(n)]])
    assert np.abs(real.matrix - expected).max() < 1e-12

    sens_i = CoilStack(data=1j * np.ones((1, 1, n, 1), dtype=complex), kind="sensitivity")
    real_i = realify(assemble_slice(op_i, sens_i, g, 0))
    expected_i = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    assert np.abs(real_i.matrix - expected_i).max() < 1e-12


def test_realify_multiplication_equivalence():
    rng = np.random.default_rng(22)
    n, m = 6, 3
    grid = Grid(n=n, m=m)
    op = build_matrix_dft(random_mask(rng, n), grid)
    sens = _sens_stack(rng, 2, 2, n, m)
    g = CoilStack(
        data=rng.standard_normal((2, 1, n, m)) + 1j * rng.standard_normal((2, 1, n, m)),
        kind="image",
    )
    system = assemble_slice(op, sens, g, 0)
    real = realify(system)
    z = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    complex_out = system.lhs @ z
    real_out = real.matrix @ np.concatenate([z.real, z.imag])
    assert np.abs(real_out[: 2 * n] - complex_out.real).max() < 1e-12
    assert np.abs(real_out[2 * n :] - complex_out.imag).max() < 1e-12
    assert np.array_equal(real.rhs, np.concatenate([system.rhs.real, system.rhs.imag]))


# ----------------------------------------------------------------- fourier


def test_fftc_unitary_and_centered():
    rng = np.random.default_rng(23)
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert np.linalg.norm(fftc(x)) == pytest.approx(np.linalg.norm(x))
    assert np.abs(ifftc(fftc(x)) - x).max() < 1e-12
    # zero frequency lands at index n//2: a constant transforms to a spike
    spike = fftc(np.ones(16) / 4.0)
    assert spike[8] == pytest.approx(1.0)
    assert np.abs(np.delete(spike, 8)).max() < 1e-12


def test_dft_matrix_matches_fftc():
    rng = np.random.default_rng(24)
    w = dft_matrix(8)
    assert np.abs(w.conj().T @ w - np.eye(8)).max() < 1e-12
    x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.abs(w @ x - fftc(x)).max() < 1e-12
    with pytest.raises(ValueError):
        dft_matrix(0)
