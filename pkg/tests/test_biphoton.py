"""Phase mismatch, kernels, pump envelope, and dense amplitude grids."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdcsim.biphoton import (
    DEFAULT_MEMORY_BUDGET_BYTES,
    EvanescentInputError,
    GridMemoryError,
    PumpSpec,
    TransverseSlice,
    amplitude,
    evaluate_grid,
    mismatch,
    pump_envelope,
    sinc_efficiency,
)
from spdcsim.dispersion import CrystalSetup, SellmeierSet, SpdcWavelengths

BBO = SellmeierSet.bbo()
SINC_MIN = -0.21723362821122166  # global minimum of sin(u)/u


def make_setup(signal_nm=810.0, length_m=1e-3, waist_m=500e-6):
    wl = SpdcWavelengths.from_pump_signal(405.0, signal_nm)
    crystal = CrystalSetup.collinear(wl, BBO, length_m)
    pump = PumpSpec.from_crystal(405.0, waist_m, crystal)
    return wl, crystal, pump


# -- mismatch ---------------------------------------------------------------


def test_mismatch_zero_at_aligned_point():
    wl, crystal, pump = make_setup()
    mm = mismatch((0.0, 0.0), (0.0, 0.0), wl, crystal, pump)
    assert float(mm.dk_x) == 0.0
    assert float(mm.dk_y) == 0.0
    assert float(mm.dk_z) == 0.0  # exact by re-centering


def test_mismatch_against_paraxial_oracle():
    # Degenerate 810 nm, q_sx = -q_ix = 1e5 rad/m, y components zero.
    # Independent paraxial evaluation: q^2/(2 k_s) + q^2/(2 k_i).
    wl, crystal, pump = make_setup()
    mm = mismatch((1e5, 0.0), (-1e5, 0.0), wl, crystal, pump)
    assert float(mm.dk_z) == pytest.approx(776.4902952648699, rel=1e-12)
    assert float(mm.dk_z) == pytest.approx(776.4785910710019, rel=1e-3)


def test_mismatch_x_mirror_symmetry():
    wl, crystal, pump = make_setup()
    a = mismatch((3e4, 0.0), (1e4, 0.0), wl, crystal, pump)
    b = mismatch((-3e4, 0.0), (-1e4, 0.0), wl, crystal, pump)
    assert float(a.dk_z) == float(b.dk_z)


def test_mismatch_y_walkoff_breaks_mirror_symmetry():
    wl, crystal, pump = make_setup()
    a = mismatch((0.0, 3e4), (0.0, 1e4), wl, crystal, pump)
    b = mismatch((0.0, -3e4), (0.0, -1e4), wl, crystal, pump)
    assert float(a.dk_z) != pytest.approx(float(b.dk_z), rel=1e-6)


def test_mismatch_rejects_evanescent_input():
    wl, crystal, pump = make_setup()
    with pytest.raises(EvanescentInputError):
        mismatch((2e7, 0.0), (0.0, 0.0), wl, crystal, pump)


@given(q=st.floats(-1e6, 1e6))
@settings(max_examples=25, deadline=None)
def test_mismatch_transverse_components_are_negated_sums(q):
    wl, crystal, pump = make_setup()
    mm = mismatch((q, 0.0), (0.5 * q, 0.0), wl, crystal, pump)
    assert float(mm.dk_x) == -(q + 0.5 * q)
    assert float(mm.dk_y) == 0.0


def test_exact_vs_paraxial_within_cone():
    # Agreement to 1e-3 relative for |q| <= 0.02 k, on both arms.
    wl, crystal, pump = make_setup()
    k_s = 2 * math.pi * BBO.index_ordinary(810.0) / 810e-9
    for frac in (0.005, 0.01, 0.02):
        q = frac * k_s
        mm = mismatch((q, 0.0), (q, 0.0), wl, crystal, pump)
        paraxial = q * q / (2 * k_s) + q * q / (2 * k_s)
        assert float(mm.dk_z) == pytest.approx(paraxial, rel=1e-3)


# -- kernels ----------------------------------------------------------------


def test_sinc_efficiency_peak_and_first_zero():
    L = 1e-3
    assert sinc_efficiency(0.0, L) == 1.0
    assert sinc_efficiency(2 * math.pi / L, L) < 1e-12


def test_sinc_efficiency_half_lobe():
    # dk_z L/2 = pi/2 -> sinc = 2/pi -> efficiency (2/pi)^2
    L = 2e-3
    dkz = math.pi / L
    assert sinc_efficiency(dkz, L) == pytest.approx((2 / math.pi) ** 2, rel=1e-12)


def test_sinc_efficiency_rejects_bad_length():
    with pytest.raises(ValueError):
        sinc_efficiency(0.0, 0.0)


@given(dkz=st.floats(-1e6, 1e6), length_mm=st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_sinc_efficiency_bounded(dkz, length_mm):
    val = float(sinc_efficiency(dkz, length_mm * 1e-3))
    assert 0.0 <= val <= 1.0


def test_pump_envelope_values():
    w0 = 500e-6
    assert pump_envelope(0.0, 0.0, w0) == 1.0
    assert pump_envelope(2.0 / w0, 0.0, w0) == pytest.approx(math.exp(-1), rel=1e-12)
    # magnitude 2/w0 split across both components
    r = 2.0 / w0 / math.sqrt(2)
    assert pump_envelope(r, r, w0) == pytest.approx(math.exp(-1), rel=1e-12)


@given(dkx=st.floats(-4e4, 4e4), dky=st.floats(-4e4, 4e4))
@settings(max_examples=50, deadline=None)
def test_pump_envelope_even_and_bounded(dkx, dky):
    w0 = 500e-6
    v = float(pump_envelope(dkx, dky, w0))
    assert 0.0 < v <= 1.0
    assert v == float(pump_envelope(-dkx, -dky, w0))


def test_pump_envelope_underflows_cleanly():
    # Far outside the pump cone the Gaussian underflows to exactly 0.0
    # rather than raising.
    assert float(pump_envelope(1e7, 0.0, 500e-6)) == 0.0


# -- pump spec ---------------------------------------------------------------


def test_pump_spec_decomposition():
    wl, crystal, pump = make_setup()
    assert pump.k_x == 0.0
    assert pump.k_y == pytest.approx(pump.k_mag * math.sin(crystal.rho), rel=1e-14)
    assert pump.k_y**2 + pump.k_z**2 == pytest.approx(pump.k_mag**2, rel=1e-12)
    # Collinear phase matching: the longitudinal pump carrier nearly
    # matches k_s + k_i (equality holds for the untilted magnitude).
    assert pump.k_mag > pump.k_z > 0.99 * pump.k_mag


def test_pump_spec_rejects_nonpositive_waist():
    wl, crystal, _ = make_setup()
    with pytest.raises(ValueError):
        PumpSpec.from_crystal(405.0, 0.0, crystal)


# -- amplitude ---------------------------------------------------------------


def test_amplitude_peak_at_aligned_point():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=16)
    assert float(amplitude(0.0, 0.0, sl, crystal, pump, wl)) == 1.0


def test_amplitude_on_antidiagonal_is_kernel_only():
    # q_i = -q_s kills the envelope argument exactly.
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=16)
    q = 2e5
    mm = mismatch((q, 0.0), (-q, 0.0), wl, crystal, pump)
    u = float(mm.dk_z) * crystal.length_m / 2
    expected = math.sin(u) / u
    assert float(amplitude(q, -q, sl, crystal, pump, wl)) == pytest.approx(
        expected, rel=1e-12
    )


def test_amplitude_decays_with_envelope():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=16)
    # Along the diagonal q_s = q_i the kernel stays near 1 for small q
    # and the envelope dominates: amplitude ~ exp(-w0^2 (2q)^2 / 4).
    q = 1.0 / pump.waist_m
    got = float(amplitude(q, q, sl, crystal, pump, wl))
    env = math.exp(-(pump.waist_m**2) * (2 * q) ** 2 / 4)
    assert got == pytest.approx(env, rel=1e-3)


@given(q=st.floats(-4e5, 4e5))
@settings(max_examples=40, deadline=None)
def test_amplitude_bounded(q):
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("y", wl, crystal, pump, n=16)
    val = float(amplitude(q, 0.3 * q, sl, crystal, pump, wl))
    assert SINC_MIN - 1e-12 <= val <= 1.0


def test_gauss_kernel_matches_sinc_curvature():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=16)
    q = 8e4  # keeps the kernel argument u ~ 0.25, inside the O(u^2) regime
    a_sinc = float(amplitude(q, -q, sl, crystal, pump, wl, kernel="sinc"))
    a_gauss = float(amplitude(q, -q, sl, crystal, pump, wl, kernel="gauss"))
    mm = mismatch((q, 0.0), (-q, 0.0), wl, crystal, pump)
    u = float(mm.dk_z) * crystal.length_m / 2
    # Both agree with 1 - u^2/6 at small argument.
    assert a_sinc == pytest.approx(1 - u * u / 6, abs=1e-4)
    assert a_gauss == pytest.approx(1 - u * u / 6, abs=1e-4)


def test_unknown_kernel_rejected():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=16)
    with pytest.raises(ValueError):
        amplitude(0.0, 0.0, sl, crystal, pump, wl, kernel="lorentzian")


# -- slices and grids ---------------------------------------------------------


def test_centered_slice_grid_shape():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=256)
    assert sl.q_signal.size == 256
    assert sl.q_signal[0] == -sl.q_signal[-1]
    assert sl.dq_signal > 0
    # grid must cover both correlation scales
    k_bar = 2 * math.pi * BBO.index_ordinary(810.0) / 810e-9
    dmax = 5 * math.sqrt(4 * math.pi * k_bar / crystal.length_m)
    smax = 5 * 2 / pump.waist_m
    assert sl.q_signal[-1] == pytest.approx((smax + dmax) / 2, rel=1e-12)


def test_slice_rejects_nonuniform_grid():
    wl, crystal, pump = make_setup()
    bad = np.array([-1.0, -0.5, 0.2, 1.0]) * 1e5
    with pytest.raises(ValueError):
        TransverseSlice("x", bad, bad.copy(), 810.0, 810.0)


def test_slice_rejects_asymmetric_grid():
    grid = np.linspace(-1e5, 2e5, 64)
    with pytest.raises(ValueError):
        TransverseSlice("x", grid, grid.copy(), 810.0, 810.0)


def test_with_pair_keeps_grids():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("y", wl, crystal, pump, n=32)
    sl2 = sl.with_pair(812.0, 808.01)
    assert sl2.lambda_signal_nm == 812.0
    assert sl2.q_signal is sl.q_signal


def test_evaluate_grid_matches_pointwise():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("y", wl, crystal, pump, n=64)
    mat = evaluate_grid(sl, crystal, pump, wl)
    assert mat.shape == (64, 64)
    rng = np.random.default_rng(7)
    for _ in range(10):
        k = int(rng.integers(0, 64))
        l = int(rng.integers(0, 64))
        pt = float(
            amplitude(sl.q_signal[k], sl.q_idler[l], sl, crystal, pump, wl)
        )
        assert mat[k, l] == pt


def test_evaluate_grid_point_inversion_symmetry():
    # Degenerate x-axis setup: no walk-off term, so the amplitude is
    # invariant under (q_s, q_i) -> (-q_s, -q_i).
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=33)
    mat = evaluate_grid(sl, crystal, pump, wl)
    np.testing.assert_allclose(mat, mat[::-1, ::-1], rtol=0, atol=1e-15)


def test_evaluate_grid_memory_budget():
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=2048)
    with pytest.raises(GridMemoryError):
        evaluate_grid(sl, crystal, pump, wl, memory_budget_bytes=2**20)
    assert 2048 * 2048 * 8 * 10 < DEFAULT_MEMORY_BUDGET_BYTES


def test_degenerate_x_jid_is_antidiagonal():
    # Intensity-weighted principal axis of the momentum JID: slope -1.
    wl, crystal, pump = make_setup()
    sl = TransverseSlice.centered("x", wl, crystal, pump, n=512)
    weights = evaluate_grid(sl, crystal, pump, wl) ** 2
    qs, qi = sl.q_signal, sl.q_idler
    total = weights.sum()
    mu_s = (weights.sum(axis=1) * qs).sum() / total
    mu_i = (weights.sum(axis=0) * qi).sum() / total
    v_s = (weights.sum(axis=1) * (qs - mu_s) ** 2).sum() / total
    v_i = (weights.sum(axis=0) * (qi - mu_i) ** 2).sum() / total
    c = ((qs - mu_s)[:, None] * weights * (qi - mu_i)[None, :]).sum() / total
    cov = np.array([[v_s, c], [c, v_i]])
    evals, evecs = np.linalg.eigh(cov)
    principal = evecs[:, np.argmax(evals)]
    slope = principal[1] / principal[0]
    assert slope == pytest.approx(-1.0, abs=0.01)
