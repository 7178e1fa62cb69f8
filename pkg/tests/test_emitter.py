import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.errors import (
    GridTooCoarse,
    GridTooNarrow,
    InvalidState,
    NonPositiveRadius,
    TruncationFailure,
    UnsupportedVariant,
)
from app.physics.emitter import (
    Z_HAT,
    EmpiricalDensity,
    ExplicitPhases,
    GaussianPure,
    GaussianSchell,
    QuadraticPhase,
    energy_size_map,
    gaussian_state,
    make_pinem,
    momentum_coherence,
    parse_phase_rule,
    projected_density,
    projected_std,
    projected_variance,
    radius_from_energy_spread,
    schell_uncertainties,
    spheroidal_state,
)
from app.physics.medium import HBAR
from app.physics.oracle import fourier_quadrature, schell_bruteforce

NM = 1e-9
UM = 1e-6
OMEGA_200THZ = 2 * np.pi * 200e12


@pytest.fixture(scope="module")
def comb(kin):
    return make_pinem(1.5, OMEGA_200THZ, 3 * UM, QuadraticPhase(0.3), kin)


@pytest.fixture(scope="module")
def empirical():
    x = np.linspace(-2 * UM, 2 * UM, 1024)
    rho = np.exp(-0.5 * ((x - 0.1 * UM) / (200 * NM)) ** 2) * (1 + 0.3 * np.cos(x / (150 * NM))) ** 2
    return EmpiricalDensity(x, rho / np.trapezoid(rho, x))


def _cone(theta):
    return np.array([np.sin(theta), 0.0, np.cos(theta)])


# Gaussian states


def test_isotropic_projected_variance():
    state = gaussian_state(254 * NM)
    for theta in (0.0, 0.4, 1.2):
        assert projected_variance(state, _cone(theta)) == pytest.approx((254 * NM) ** 2, rel=1e-12)


def test_spheroidal_projected_variance():
    state = spheroidal_state(2 * UM, 1 * UM)
    theta = np.deg2rad(43.3)
    expected = (2 * UM * np.cos(theta)) ** 2 + (1 * UM * np.sin(theta)) ** 2
    assert projected_variance(state, _cone(theta)) == pytest.approx(expected, rel=1e-12)


def test_projected_variance_normalizes_direction():
    state = spheroidal_state(2 * UM, 1 * UM)
    assert projected_variance(state, [0, 0, 5.0]) == pytest.approx((2 * UM) ** 2)


def test_projected_variance_non_gaussian(comb):
    with pytest.raises(UnsupportedVariant):
        projected_variance(comb, Z_HAT)
    with pytest.raises(UnsupportedVariant):
        projected_variance(GaussianSchell(1 * UM, 0.5 * UM), Z_HAT)


@pytest.mark.parametrize(
    "variance",
    [
        np.diag([1.0, 1.0, -1.0]) * 1e-14,
        np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]) * 1e-14,
        np.eye(2) * 1e-14,
    ],
)
def test_invalid_gaussian_variance(variance):
    with pytest.raises(InvalidState):
        GaussianPure(variance)


def test_gaussian_coherence_closed_form():
    sigma = 254 * NM
    state = gaussian_state(sigma)
    assert momentum_coherence(state, 0.0) == 1.0
    assert momentum_coherence(state, 1 / sigma) == pytest.approx(np.exp(-0.5), rel=1e-12)


def test_gaussian_density_second_moment():
    sigma = 254 * NM
    x = np.linspace(-10 * sigma, 10 * sigma, 2048)
    rho = projected_density(gaussian_state(sigma), Z_HAT, x)
    assert np.trapezoid(rho, x) == pytest.approx(1.0, abs=1e-6)
    assert np.trapezoid(x**2 * rho, x) == pytest.approx(sigma**2, rel=1e-3)


def test_gaussian_coherence_is_transform_of_density():
    state = spheroidal_state(400 * NM, 250 * NM)
    direction = _cone(0.75)
    sigma = projected_std(state, direction)
    x = np.linspace(-12 * sigma, 12 * sigma, 4096)
    dq = np.linspace(0, 6 / sigma, 25)
    numeric = fourier_quadrature(x, projected_density(state, direction, x), dq)
    assert_allclose(numeric, momentum_coherence(state, dq, direction), rtol=1e-6, atol=1e-12)


# Density grid policy


def test_density_grid_too_few_points():
    with pytest.raises(GridTooNarrow):
        projected_density(gaussian_state(UM), Z_HAT, np.linspace(-10 * UM, 10 * UM, 256))


def test_density_grid_too_short():
    with pytest.raises(GridTooNarrow):
        projected_density(gaussian_state(UM), Z_HAT, np.linspace(-3 * UM, 3 * UM, 1024))


# Gaussian-Schell


def test_schell_coherence_ignores_coherence_length():
    dq = np.linspace(-5e6, 5e6, 11)
    assert_allclose(
        momentum_coherence(GaussianSchell(UM, 0.1 * UM), dq),
        momentum_coherence(GaussianSchell(UM, 10 * UM), dq),
    )


def test_schell_invalid_widths():
    with pytest.raises(InvalidState):
        GaussianSchell(0.0, UM)
    with pytest.raises(InvalidState):
        schell_uncertainties(UM, -1.0)


def test_schell_fully_coherent_limit():
    total, coherent = schell_uncertainties(UM, np.inf)
    assert total == pytest.approx(coherent, rel=1e-12)
    assert coherent * UM == pytest.approx(HBAR / 2)


def test_schell_short_coherence_ratio():
    total, coherent = schell_uncertainties(UM, 0.1 * UM)
    assert coherent / total == pytest.approx(0.2235, rel=1e-3)
    total, coherent = schell_uncertainties(UM, 0.05 * UM)
    assert coherent / total == pytest.approx(np.sqrt(0.05 / 2), rel=1e-3)
    assert coherent < total


def test_schell_coherent_spread_above_heisenberg_floor():
    for xi in (0.01, 0.1, 1.0, 10.0, 1e4):
        total, coherent = schell_uncertainties(UM, xi * UM)
        assert coherent * UM >= 0.5 * HBAR * (1 - 1e-9)
        assert coherent <= total * (1 + 1e-12)


@pytest.mark.parametrize("xi", [0.5 * UM, 0.1 * UM])
def test_schell_against_kernel_diagonalization(xi):
    total, coherent = schell_uncertainties(UM, xi)
    ref_total, ref_coherent = schell_bruteforce(UM, xi)
    assert total == pytest.approx(ref_total, rel=2e-3)
    assert coherent == pytest.approx(ref_coherent, rel=1e-3)


# PINEM comb


def test_pinem_sideband_weights_normalized(comb):
    assert np.sum(np.abs(comb.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-8)
    assert comb.n_max >= 4
    assert comb.orders[0] == -comb.n_max


def test_pinem_harmonic_weights(comb):
    m, weights = comb.harmonic_weights()
    centre = 2 * comb.n_max
    assert m[centre] == 0
    assert weights[centre] == pytest.approx(1.0, abs=1e-12)
    assert_allclose(weights[::-1], np.conj(weights), atol=1e-14)


def test_pinem_without_propagation_phase_is_unbunched(kin):
    state = make_pinem(1.5, OMEGA_200THZ, 3 * UM, QuadraticPhase(0.0), kin)
    _, weights = state.harmonic_weights()
    assert abs(weights[2 * state.n_max + 1]) < 1e-12


def test_pinem_propagation_phase_bunches(comb):
    _, weights = comb.harmonic_weights()
    assert abs(weights[2 * comb.n_max + 1]) > 0.1


def test_pinem_zero_coupling_is_envelope(kin):
    state = make_pinem(0.0, OMEGA_200THZ, 3 * UM, QuadraticPhase(0.3), kin)
    assert state.n_max == 0
    dq = np.linspace(-1e6, 1e6, 9)
    assert_allclose(momentum_coherence(state, dq), np.exp(-0.5 * (dq * 3 * UM) ** 2), rtol=1e-12)


def test_pinem_period(comb, kin):
    assert comb.period == pytest.approx(2 * np.pi * kin.speed / OMEGA_200THZ)


def test_pinem_coherence_peaks_at_modulation_harmonics(comb):
    _, weights = comb.harmonic_weights()
    k_mod = comb.modulation_wavenumber
    for order in (1, 2):
        dq = order * k_mod * np.linspace(0.9, 1.1, 2001)
        values = np.abs(momentum_coherence(comb, dq))
        assert dq[np.argmax(values)] == pytest.approx(order * k_mod, abs=dq[1] - dq[0])
        assert values.max() == pytest.approx(abs(weights[2 * comb.n_max + order]), rel=1e-6)


def test_pinem_coherence_is_transform_of_density(comb):
    sigma = comb.envelope_sigma
    x = np.linspace(-10 * sigma, 10 * sigma, 8192)
    dq = np.linspace(-1.5 * comb.modulation_wavenumber, 1.5 * comb.modulation_wavenumber, 41)
    numeric = fourier_quadrature(x, projected_density(comb, Z_HAT, x), dq)
    assert_allclose(numeric, momentum_coherence(comb, dq), rtol=1e-6, atol=1e-10)


def test_pinem_hermitian_symmetry(comb):
    dq = np.linspace(0, 3 * comb.modulation_wavenumber, 17)
    direction = _cone(0.75)
    assert_allclose(momentum_coherence(comb, -dq, direction), np.conj(momentum_coherence(comb, dq, direction)))


def test_pinem_truncation_cap(kin):
    with pytest.raises(TruncationFailure):
        make_pinem(5.0, OMEGA_200THZ, 3 * UM, QuadraticPhase(0.3), kin, n_max_cap=3)


def test_pinem_requires_positive_frequency(kin):
    with pytest.raises(InvalidState):
        make_pinem(1.0, -OMEGA_200THZ, 3 * UM, QuadraticPhase(0.3), kin)


def test_parse_phase_rule():
    assert parse_phase_rule("quadratic(0.3)") == QuadraticPhase(0.3)
    assert parse_phase_rule("explicit(1:0.5, -1:0.25)") == ExplicitPhases({1: 0.5, -1: 0.25})
    assert_allclose(parse_phase_rule("explicit(2:1.0)").phase(np.arange(-2, 3)), [0, 0, 0, 0, 1.0])
    with pytest.raises(ValueError):
        parse_phase_rule("cubic(1)")


# Empirical densities


def test_empirical_coherence_at_zero(empirical):
    assert momentum_coherence(empirical, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_empirical_bounded_and_hermitian(empirical):
    dq = np.linspace(0, 2e7, 64)
    values = momentum_coherence(empirical, dq)
    assert np.all(np.abs(values) <= 1 + 1e-9)
    assert_allclose(momentum_coherence(empirical, -dq), np.conj(values), atol=1e-14)


def test_empirical_density_passthrough(empirical):
    assert_allclose(projected_density(empirical, Z_HAT, empirical.grid), empirical.density, rtol=1e-9)


def test_empirical_nyquist(empirical):
    with pytest.raises(GridTooCoarse):
        momentum_coherence(empirical, 1.01 * np.pi / empirical.spacing)


def test_empirical_validation():
    x = np.linspace(0, 1, 11)
    with pytest.raises(InvalidState):
        EmpiricalDensity(x, np.full(11, 2.0))
    with pytest.raises(InvalidState):
        EmpiricalDensity(x**2, np.ones(11))
    with pytest.raises(InvalidState):
        EmpiricalDensity(x, np.where(x < 0.5, 2.0, -0.1))


# Energy-size pairing


def test_energy_size_small_wavepacket(kin):
    assert energy_size_map(50 * NM, kin) == pytest.approx(3.72, rel=0.01)


def test_energy_size_micron_wavepacket(kin):
    # hbar v / r gives 0.186 eV; quoted pairings round it to 0.19
    assert energy_size_map(UM, kin) == pytest.approx(0.19, abs=0.005)


def test_energy_size_inverse(kin):
    assert radius_from_energy_spread(energy_size_map(254 * NM, kin), kin) == pytest.approx(254 * NM, rel=1e-12)


def test_energy_size_limits(kin):
    assert energy_size_map(np.inf, kin) == 0.0
    for bad in (0.0, -1 * NM):
        with pytest.raises(NonPositiveRadius):
            energy_size_map(bad, kin)
    with pytest.raises(NonPositiveRadius):
        radius_from_energy_spread(0.0, kin)
