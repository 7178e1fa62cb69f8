"""
Slow reference paths for auditing the engine: closed forms evaluated in
arbitrary precision and brute-force quadratures. Nothing here is used by
the simulation itself.
"""

from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy import linalg

from app.config import NumericsConfig
from app.errors import InvalidState, OutOfRange, TooLarge
from app.physics.emitter import ElectronState, projected_density
from app.physics.medium import HBAR, DispersionModel
from app.physics.radiation import PhotonDensityMatrix

PRECISION = 40


@dataclass(frozen=True)
class AnalyticGaussianCase:
    size: float
    v_g: float
    band: tuple[float, float]
    acceptance: str = "raised_cosine"

    def __post_init__(self):
        if not self.size > 0:
            raise InvalidState("Emitter size must be positive", size=self.size)
        if not self.band[0] < self.band[1]:
            raise InvalidState("Band must be non-empty", band=self.band)


def analytic_coherence(case: AnalyticGaussianCase, omega: float, omega_prime: float) -> complex:
    """
    exp(-(q_w - q_w')^2 sigma^2 / 2) with the linearized wavenumber
    q_w - q_w' = (w - w') / v_g, evaluated in decimal arithmetic.
    """
    with localcontext() as ctx:
        ctx.prec = PRECISION
        dq = (_decimal(omega) - _decimal(omega_prime)) / _decimal(case.v_g)
        exponent = -(dq * _decimal(case.size)) ** 2 / 2
        return complex(float(exponent.exp()), 0.0)


def analytic_density_matrix(case: AnalyticGaussianCase, amplitude: np.ndarray, omega_grid: np.ndarray) -> np.ndarray:
    """Reference matrix a_i rho(w_i, w_j) a_j* built element by element."""
    n = omega_grid.size
    matrix = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            matrix[i, j] = amplitude[i] * analytic_coherence(case, omega_grid[i], omega_grid[j]) * np.conj(amplitude[j])
    return matrix


def quadrature_temporal(pdm: PhotonDensityMatrix, t, t_prime) -> complex | np.ndarray:
    """
    Direct sum C(t, t') = sum_ij exp(-i (w_i - w_0) t) M_ij exp(i (w_j - w_0) t') dw^2
    at arbitrary times (s).
    """
    if pdm.n_points > NumericsConfig.quadrature_max_points:
        raise TooLarge(
            "Grid too large for the quadrature reference",
            n_points=pdm.n_points,
            limit=NumericsConfig.quadrature_max_points,
        )
    times = np.atleast_1d(np.asarray(t, dtype=float))
    times_prime = np.atleast_1d(np.asarray(t_prime, dtype=float))
    detuning = pdm.omega_grid - pdm.omega_0
    left = np.exp(-1j * np.outer(times, detuning))
    right = np.exp(1j * np.outer(detuning, times_prime))
    result = left @ pdm.matrix @ right * pdm.d_omega**2
    if np.ndim(t) == 0 and np.ndim(t_prime) == 0:
        return complex(result[0, 0])
    return result


def _decimal(value) -> Decimal:
    # numpy scalars repr as "np.float64(...)"
    return Decimal(repr(float(value)))


def _decimal_sellmeier_n2(b, c, lam_um2: Decimal) -> Decimal:
    n2 = Decimal(1)
    for bi, ci in zip(b, c):
        n2 += _decimal(bi) * lam_um2 / (lam_um2 - _decimal(ci))
    return n2


def sellmeier_reference(model: DispersionModel, wavelength: float) -> Decimal:
    """Refractive index at `wavelength` (m) in decimal arithmetic."""
    lo, hi = model.valid_range
    if not lo <= wavelength <= hi:
        raise OutOfRange(f"Wavelength outside validity of {model.name}", wavelength=wavelength)
    with localcontext() as ctx:
        ctx.prec = PRECISION
        if model.is_constant:
            return _decimal(model.n_const)
        lam_um = _decimal(wavelength) * Decimal(10) ** 6
        return _decimal_sellmeier_n2(model.sellmeier_B, model.sellmeier_C, lam_um * lam_um).sqrt()


def finite_difference_group_index(model: DispersionModel, wavelength: float, step: float = 1e-11) -> float:
    """n_g = n - lambda dn/dlambda with a central difference of the decimal reference."""
    with localcontext() as ctx:
        ctx.prec = PRECISION
        n = sellmeier_reference(model, wavelength)
        slope = (sellmeier_reference(model, wavelength + step) - sellmeier_reference(model, wavelength - step)) / (
            2 * _decimal(step)
        )
        return float(n - _decimal(wavelength) * slope)


def schell_bruteforce(sigma_x: float, xi: float, points: int = 1024, span: float = 16.0) -> tuple[float, float]:
    """
    Total and coherent momentum spreads of the Gaussian-Schell kernel
    exp(-(x^2 + x'^2)/(4 sigma^2)) exp(-(x - x')^2/(2 xi^2)), discretized.

    Both come from diagonalizing the kernel: the total spread is the
    momentum standard deviation of the eigenmode mixture, the coherent
    spread that of the eigenmode with the largest weight.
    """
    x = np.linspace(-0.5 * span * sigma_x, 0.5 * span * sigma_x, points)
    dx = x[1] - x[0]
    kernel = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (4 * sigma_x**2))
    kernel = kernel * np.exp(-((x[:, None] - x[None, :]) ** 2) / (2 * xi**2)) * dx
    eigenvalues, modes = linalg.eigh(kernel)
    weights = np.clip(eigenvalues, 0.0, None)
    weights = weights / weights.sum()

    k = 2 * np.pi * np.fft.fftfreq(points, d=dx)
    spectra = np.abs(np.fft.fft(modes, axis=0)) ** 2
    spectra = spectra / spectra.sum(axis=0)
    per_mode = (k**2) @ spectra
    total = HBAR * np.sqrt(np.sum(weights * per_mode))

    coherent = HBAR * np.sqrt(per_mode[np.argmax(weights)])
    return float(total), float(coherent)


def convolved_envelope(
    time_grid: np.ndarray,
    point_power: np.ndarray,
    state: ElectronState,
    direction,
    v_g: float,
) -> np.ndarray:
    """
    Point-emitter envelope convolved with the emitter density mapped to
    time by t = x / v_g, summed directly over delays on the (periodic)
    time grid. Exact for non-dispersive media, where each emitter position
    delays the classical pulse rigidly.
    """
    dt = time_grid[1] - time_grid[0]
    x = time_grid * v_g
    weights = projected_density(state, direction, x) * v_g * dt
    shifts = np.rint(time_grid / dt).astype(int)
    result = np.zeros(point_power.shape, dtype=float)
    for shift, weight in zip(shifts, weights):
        if weight > 0:
            result += weight * np.roll(point_power, shift)
    return result


def fourier_quadrature(x: np.ndarray, density: np.ndarray, delta_q) -> np.ndarray:
    """Trapezoid transform sum exp(i dq x) rho(x) dx of sampled densities."""
    dq = np.atleast_1d(np.asarray(delta_q, dtype=float))
    return np.trapezoid(np.exp(1j * dq[:, None] * x[None, :]) * density[None, :], x, axis=1)
