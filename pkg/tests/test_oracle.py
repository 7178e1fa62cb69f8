import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.errors import InvalidState, OutOfRange, TooLarge
from app.physics.emitter import gaussian_state
from app.physics.oracle import (
    AnalyticGaussianCase,
    analytic_coherence,
    analytic_density_matrix,
    fourier_quadrature,
    quadrature_temporal,
    sellmeier_reference,
)
from app.physics.radiation import (
    PhotonDensityMatrix,
    emission_amplitude,
    make_detection_window,
    spectral_autocorrelation,
    temporal_autocorrelation,
)

NM = 1e-9


def _random_pdm(silica, kin, n_points, rng):
    win = make_detection_window(silica, kin, 400 * NM, 700 * NM, n_points=n_points)
    a = rng.standard_normal((n_points, n_points)) + 1j * rng.standard_normal((n_points, n_points))
    return PhotonDensityMatrix(
        omega_grid=win.omega_grid,
        matrix=a @ a.conj().T / n_points,
        omega_0=win.omega_0,
        group_velocity=2e8,
        refractive_index=1.46,
        beta=kin.beta,
        r_hat_c=win.r_hat_c,
    )


def test_analytic_coherence_closed_form():
    case = AnalyticGaussianCase(size=254 * NM, v_g=2e8, band=(2.7e15, 4.7e15))
    assert analytic_coherence(case, 3e15, 3e15) == 1.0
    d_omega = case.v_g / case.size
    assert analytic_coherence(case, 3e15 + d_omega, 3e15).real == pytest.approx(np.exp(-0.5), rel=1e-14)


def test_analytic_case_validation():
    with pytest.raises(InvalidState):
        AnalyticGaussianCase(size=0.0, v_g=2e8, band=(1.0, 2.0))
    with pytest.raises(InvalidState):
        AnalyticGaussianCase(size=NM, v_g=2e8, band=(2.0, 1.0))


def test_gaussian_fast_path_matches_analytic(silica, kin, small_window):
    pdm = spectral_autocorrelation(gaussian_state(254 * NM), kin, silica, small_window, dispersion="linear")
    case = AnalyticGaussianCase(size=254 * NM, v_g=pdm.group_velocity, band=small_window.band)
    amplitude = emission_amplitude(silica, kin, small_window.omega_grid) * small_window.acceptance
    reference = analytic_density_matrix(case, amplitude, small_window.omega_grid)
    assert_allclose(pdm.matrix, reference, rtol=1e-8, atol=1e-8 * np.abs(reference).max())


@pytest.mark.parametrize("n_points", [64, 128, 256])
def test_fast_transform_matches_quadrature(silica, kin, rng, n_points):
    pdm = _random_pdm(silica, kin, n_points, rng)
    profile = temporal_autocorrelation(pdm)
    reference = quadrature_temporal(pdm, profile.time_grid, profile.time_grid)
    error = np.linalg.norm(profile.correlation - reference) / np.linalg.norm(reference)
    assert error < 1e-6


def test_quadrature_scalar_times(silica, kin, rng):
    pdm = _random_pdm(silica, kin, 64, rng)
    value = quadrature_temporal(pdm, 0.0, 0.0)
    assert isinstance(value, complex)
    assert value.real == pytest.approx(np.sum(pdm.matrix).real * pdm.d_omega**2)


def test_quadrature_zero_matrix(silica, kin, rng):
    pdm = _random_pdm(silica, kin, 64, rng)
    empty = PhotonDensityMatrix(
        omega_grid=pdm.omega_grid,
        matrix=np.zeros_like(pdm.matrix),
        omega_0=pdm.omega_0,
        group_velocity=pdm.group_velocity,
        refractive_index=pdm.refractive_index,
        beta=pdm.beta,
        r_hat_c=pdm.r_hat_c,
    )
    assert not np.any(quadrature_temporal(empty, np.linspace(-1e-14, 1e-14, 5), [0.0]))


def test_quadrature_refuses_large_grids(silica, kin, rng):
    with pytest.raises(TooLarge):
        quadrature_temporal(_random_pdm(silica, kin, 512, rng), 0.0, 0.0)


def test_sellmeier_reference_range(silica, water):
    with pytest.raises(OutOfRange):
        sellmeier_reference(silica, 100 * NM)
    assert float(sellmeier_reference(water, 500 * NM)) == 1.33


def test_fourier_quadrature_normalization():
    x = np.linspace(-10, 10, 2001)
    density = np.exp(-0.5 * x**2) / np.sqrt(2 * np.pi)
    values = fourier_quadrature(x, density, [0.0, 1.0])
    assert_allclose(values, [1.0, np.exp(-0.5)], rtol=1e-10)
