"""
Photon density matrix of Cherenkov light in the frequency domain, its
two-time transform and the envelope, coherence and width observables
derived from it.

Conventions:
    * element (i, j) of a density matrix is <E(-)(w_j) E(+)(w_i)>, scaled
      by 2 r^2 eps0 n c;
    * the temporal matrix is reported in the retarded frame, rotating at
      the window centre w_0, on the time grid t = s * dt with s centred on 0.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import fft

from app.config import NumericsConfig
from app.errors import (
    BelowThreshold,
    DegenerateEnvelope,
    GridTooCoarse,
    InvalidWindow,
    OutOfRange,
    OutOfWindow,
)
from app.physics.emitter import ElectronState, momentum_coherence, projected_std
from app.physics.medium import (
    ALPHA,
    C_LIGHT,
    HBAR,
    DispersionModel,
    ParticleKinematics,
    cone_geometry,
    group_velocity,
    omega_from_wavelength,
    refractive_index,
    wavelength_from_omega,
)
from app.utils.hashing import descriptor_hash
from app.utils.logger import logger

ACCEPTANCE_PROFILES = ("raised_cosine", "rect", "gaussian")
DISPERSION_MODES = ("exact", "linear")

# |T| at the ends of a gaussian acceptance grid
_GAUSSIAN_EDGE = 1e-4


@dataclass(frozen=True, eq=False)
class DetectionWindow:
    omega_grid: np.ndarray
    acceptance: np.ndarray
    omega_0: float
    distance: float
    r_hat_c: np.ndarray
    azimuth: float = 0.0
    profile: str = "raised_cosine"
    band: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        grid = np.asarray(self.omega_grid, dtype=float)
        size = grid.size
        if size < 64 or size & (size - 1):
            raise InvalidWindow("Grid size must be a power of two and at least 64", n_points=size)
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidWindow("Frequency grid must be uniform and increasing")
        if grid[0] <= 0:
            raise InvalidWindow("Frequency grid must stay at positive frequencies", omega_min=grid[0])
        t = np.asarray(self.acceptance, dtype=complex)
        if t.shape != grid.shape:
            raise InvalidWindow("Acceptance must have one sample per grid frequency")
        magnitude = np.abs(t)
        if np.any(magnitude > 1 + 1e-12):
            raise InvalidWindow("Acceptance magnitude exceeds one")
        peak = magnitude.max()
        if peak > 0 and max(magnitude[0], magnitude[-1]) > NumericsConfig.acceptance_floor * peak:
            raise InvalidWindow("Acceptance must vanish at the grid edges", edge=max(magnitude[0], magnitude[-1]))
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "acceptance", t)

    @property
    def n_points(self) -> int:
        return self.omega_grid.size

    @property
    def d_omega(self) -> float:
        return float(self.omega_grid[1] - self.omega_grid[0])

    @property
    def bandwidth(self) -> float:
        """Nominal band width in rad/s (half-amplitude points for tapered profiles)."""
        return self.band[1] - self.band[0]


def acceptance_profile(
    omega: np.ndarray, band: tuple[float, float], profile: str, rolloff: float = 0.25
) -> np.ndarray:
    lo, hi = band
    centre = 0.5 * (lo + hi)
    width = hi - lo
    offset = np.abs(omega - centre)
    if profile == "rect":
        return (offset <= 0.5 * width).astype(float)
    if profile == "raised_cosine":
        flat = 0.5 * (1 - rolloff) * width
        edge = 0.5 * (1 + rolloff) * width
        taper = 0.5 * (1 + np.cos(np.pi * (offset - flat) / (rolloff * width)))
        return np.where(offset <= flat, 1.0, np.where(offset < edge, taper, 0.0))
    if profile == "gaussian":
        # power FWHM equals the nominal band
        sigma = width / (2 * np.sqrt(2 * np.log(2)))
        return np.exp(-((omega - centre) ** 2) / (4 * sigma**2))
    raise InvalidWindow(f"Unknown acceptance profile '{profile}'", supported=ACCEPTANCE_PROFILES)


def _grid_half_span(width: float, profile: str, rolloff: float, padding: float) -> float:
    if profile == "rect":
        return 0.5 * width * (1 + 2 * padding)
    if profile == "raised_cosine":
        return 0.5 * width * (1 + rolloff)
    return width * np.sqrt(np.log(1 / _GAUSSIAN_EDGE) / (2 * np.log(2)))


def make_detection_window(
    model: DispersionModel,
    kinematics: ParticleKinematics,
    lambda_min: float,
    lambda_max: float,
    n_points: int = 256,
    acceptance: str = "raised_cosine",
    rolloff: float = 0.25,
    padding: float = 0.125,
    distance: float = 1e-2,
    azimuth: float = 0.0,
) -> DetectionWindow:
    """
    Build a uniform frequency grid around the nominal band [lambda_min,
    lambda_max] (vacuum wavelengths, m) with the requested acceptance.

    The grid is extended past the nominal band so the acceptance reaches
    zero inside it. The observation direction is fixed at the cone angle of
    the grid centre.
    """
    if acceptance not in ACCEPTANCE_PROFILES:
        raise InvalidWindow(f"Unknown acceptance profile '{acceptance}'", supported=ACCEPTANCE_PROFILES)
    if not 0 < lambda_min < lambda_max:
        raise InvalidWindow("Wavelength band must satisfy 0 < lambda_min < lambda_max")
    if acceptance == "raised_cosine" and not 0 < rolloff <= 1:
        raise InvalidWindow("Raised-cosine rolloff must lie in (0, 1]", rolloff=rolloff)
    if acceptance == "rect" and padding <= 0:
        raise InvalidWindow("Rect acceptance needs positive padding", padding=padding)

    band = (float(omega_from_wavelength(lambda_max)), float(omega_from_wavelength(lambda_min)))
    if n_points < 64 or n_points & (n_points - 1):
        raise InvalidWindow("Grid size must be a power of two and at least 64", n_points=n_points)
    centre = 0.5 * (band[0] + band[1])
    half_span = _grid_half_span(band[1] - band[0], acceptance, rolloff, padding)

    # centre on index N/2, upper end on the support edge, one extra sample below
    step = half_span / (n_points // 2 - 1)
    omega_grid = centre + step * (np.arange(n_points) - n_points // 2)
    if omega_grid[0] <= 0:
        raise InvalidWindow(
            "Detection grid would reach non-positive frequencies",
            band_nm=(lambda_min * 1e9, lambda_max * 1e9),
        )
    t = acceptance_profile(omega_grid, band, acceptance, rolloff)

    try:
        n = refractive_index(model, wavelength_from_omega(omega_grid))
    except OutOfRange as e:
        raise InvalidWindow(f"Detection grid leaves the validity range of {model.name}", **e.context)
    failing = kinematics.beta * n <= 1
    if np.any(failing):
        bad = omega_grid[failing][0]
        raise BelowThreshold(
            f"No Cherenkov emission at {bad:.4e} rad/s ({wavelength_from_omega(bad) * 1e9:.1f} nm)",
            omega=float(bad),
            beta_n=float(kinematics.beta * n[failing][0]),
        )

    omega_0 = float(omega_grid[n_points // 2])
    geometry = cone_geometry(model, kinematics, omega_0, azimuth, distance)
    logger.debug(f"Detection window: N={n_points}, profile={acceptance}, d_omega={step:.4e} rad/s")
    return DetectionWindow(
        omega_grid=omega_grid,
        acceptance=t,
        omega_0=omega_0,
        distance=float(distance),
        r_hat_c=geometry.r_hat_c,
        azimuth=float(azimuth),
        profile=acceptance,
        band=band,
    )


@dataclass(frozen=True, eq=False)
class PhotonDensityMatrix:
    omega_grid: np.ndarray
    matrix: np.ndarray
    omega_0: float
    group_velocity: float
    refractive_index: float
    beta: float
    r_hat_c: np.ndarray
    emitter_hash: str = ""
    acceptance: np.ndarray | None = None
    dispersion: str = "exact"

    @property
    def n_points(self) -> int:
        return self.omega_grid.size

    @property
    def d_omega(self) -> float:
        return float(self.omega_grid[1] - self.omega_grid[0])

    @property
    def centre_index(self) -> int:
        return self.n_points // 2


def emission_amplitude(model: DispersionModel, kinematics: ParticleKinematics, omega: np.ndarray) -> np.ndarray:
    """sqrt(U0 / 2 pi) with U0 = hbar w alpha beta sin^2(theta_c(w))."""
    n = np.asarray(refractive_index(model, wavelength_from_omega(omega)))
    bn = kinematics.beta * n
    if np.any(bn <= 1):
        bad = omega[bn <= 1][0]
        raise BelowThreshold(
            f"No Cherenkov emission at {bad:.4e} rad/s ({wavelength_from_omega(bad) * 1e9:.1f} nm)",
            omega=float(bad),
        )
    sin2 = 1.0 - 1.0 / bn**2
    return np.sqrt(HBAR * omega * ALPHA * kinematics.beta * sin2 / (2 * np.pi))


def photon_wavenumber(model: DispersionModel, win: DetectionWindow, dispersion: str = "exact") -> np.ndarray:
    """Wavenumber along the observation axis, up to a constant offset in `linear` mode."""
    if dispersion == "exact":
        n = np.asarray(refractive_index(model, wavelength_from_omega(win.omega_grid)))
        return n * win.omega_grid / C_LIGHT
    if dispersion == "linear":
        return (win.omega_grid - win.omega_0) / group_velocity(model, win.omega_0)
    raise ValueError(f"Unknown dispersion mode '{dispersion}', expected one of {DISPERSION_MODES}")


def spectral_autocorrelation(
    state: ElectronState,
    kin: ParticleKinematics,
    model: DispersionModel,
    win: DetectionWindow,
    dispersion: str = "exact",
) -> PhotonDensityMatrix:
    """
    Frequency-domain photon density matrix

        M(w, w') = a(w) T(w) rho_e(q_w - q_w') a(w') T*(w'),   a = sqrt(U0 / 2 pi)

    with the emission prefactor split symmetrically between both
    frequencies so that M is Hermitian.

    Args:
        state: Emitter state
        kin: Carrier kinematics
        model: Radiator dispersion
        win: Detection window
        dispersion: "exact" uses q = n(w) w / c, "linear" expands it to
            first order around the window centre

    Raises:
        BelowThreshold: some grid frequency does not radiate
        GridTooCoarse: the state decoheres faster than the grid resolves
    """
    omega = win.omega_grid
    amplitude = emission_amplitude(model, kin, omega) * win.acceptance
    q = photon_wavenumber(model, win, dispersion)

    width = projected_std(state, win.r_hat_c)
    step = float(np.max(np.abs(np.diff(q))))
    if step * width > np.pi:
        raise GridTooCoarse(
            "Frequency grid too coarse for the emitter size",
            dq_step=step,
            emitter_width=width,
        )

    coherence = momentum_coherence(state, q[:, None] - q[None, :], win.r_hat_c)
    matrix = amplitude[:, None] * coherence * np.conj(amplitude)[None, :]
    matrix = 0.5 * (matrix + matrix.conj().T)
    logger.debug(f"Density matrix assembled: N={omega.size}, variant={state.variant}, dispersion={dispersion}")

    return PhotonDensityMatrix(
        omega_grid=omega,
        matrix=matrix,
        omega_0=win.omega_0,
        group_velocity=group_velocity(model, win.omega_0),
        refractive_index=float(refractive_index(model, wavelength_from_omega(win.omega_0))),
        beta=kin.beta,
        r_hat_c=win.r_hat_c,
        emitter_hash=descriptor_hash(state),
        acceptance=win.acceptance,
        dispersion=dispersion,
    )


def power_spectrum(pdm: PhotonDensityMatrix) -> np.ndarray:
    return np.real(np.diag(pdm.matrix)).copy()


@dataclass(frozen=True, eq=False)
class ShockwaveProfile:
    time_grid: np.ndarray
    correlation: np.ndarray
    power: np.ndarray
    g1_values: np.ndarray
    source: PhotonDensityMatrix
    oversample: int

    @property
    def tau_grid(self) -> np.ndarray:
        return self.time_grid

    @property
    def dt(self) -> float:
        return float(self.time_grid[1] - self.time_grid[0])

    @property
    def omega_0(self) -> float:
        return self.source.omega_0

    @property
    def group_velocity(self) -> float:
        return self.source.group_velocity


def _transform_phases(n_points: int, length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centred sample indices, grid-centre rotation and the (-1)^i shift."""
    shifted = np.arange(length) - length // 2
    rotation = np.exp(2j * np.pi * (n_points // 2) * shifted / length)
    sign = np.where(np.arange(n_points) % 2 == 0, 1.0, -1.0)
    return shifted, rotation, sign


def _wrapped_diagonal_sums(correlation: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    length = correlation.shape[0]
    columns = np.arange(length)
    rows = (columns[None, :] + shifted[:, None]) % length
    return correlation[rows, columns[None, :]].sum(axis=1)


def temporal_autocorrelation(pdm: PhotonDensityMatrix, oversample: int | None = None) -> ShockwaveProfile:
    """
    Two-time field correlation

        C(t, t') = sum_ij exp(-i (w_i - w_0) t) M_ij exp(+i (w_j - w_0) t') dw^2

    evaluated with zero-padded FFTs. The frequency axis is padded to
    `oversample` * N points, so dt = 2 pi / (oversample N dw) and the time
    window spans one period 2 pi / dw.
    """
    factor = NumericsConfig.oversample if oversample is None else int(oversample)
    n = pdm.n_points
    length = factor * n
    d_omega = pdm.d_omega
    shifted, rotation, sign = _transform_phases(n, length)

    padded = np.zeros((length, length), dtype=complex)
    padded[:n, :n] = pdm.matrix * sign[:, None] * sign[None, :]
    transformed = length * fft.ifft(fft.fft(padded, axis=0), axis=1)
    correlation = rotation[:, None] * transformed * np.conj(rotation)[None, :] * d_omega**2

    power = np.real(np.diag(correlation)).copy()
    dt = 2 * np.pi / (length * d_omega)
    time_grid = shifted * dt

    sums = _wrapped_diagonal_sums(correlation, shifted)
    zero = length // 2
    if abs(sums[zero]) > 0:
        g1_values = sums / sums[zero]
    else:
        g1_values = np.zeros(length, dtype=complex)
    g1_values[zero] = 1.0

    logger.debug(f"Temporal transform: L={length}, dt={dt:.4e} s")
    return ShockwaveProfile(
        time_grid=time_grid,
        correlation=correlation,
        power=power,
        g1_values=g1_values,
        source=pdm,
        oversample=factor,
    )


def inverse_temporal(profile: ShockwaveProfile) -> PhotonDensityMatrix:
    """Recover the frequency-domain matrix from a temporal profile."""
    n = profile.source.n_points
    length = profile.correlation.shape[0]
    d_omega = profile.source.d_omega
    _, rotation, sign = _transform_phases(n, length)

    unrotated = np.conj(rotation)[:, None] * profile.correlation * rotation[None, :] / d_omega**2
    padded = fft.ifft(fft.fft(unrotated, axis=1) / length, axis=0)
    matrix = padded[:n, :n] * sign[:, None] * sign[None, :]
    return replace(profile.source, matrix=matrix)


def g1(profile: ShockwaveProfile, tau) -> complex | np.ndarray:
    """
    Degree of first-order coherence, time-integrated normalization:
    g1(tau) = sum_t C(t + tau, t) / sum_t C(t, t).

    Off-grid delays are interpolated linearly.
    """
    delays = np.asarray(tau, dtype=float)
    grid = profile.tau_grid
    if np.any(delays < grid[0]) or np.any(delays > grid[-1]):
        raise OutOfWindow(
            "Delay outside the time window",
            window_fs=(grid[0] * 1e15, grid[-1] * 1e15),
        )
    values = np.interp(delays, grid, profile.g1_values.real) + 1j * np.interp(delays, grid, profile.g1_values.imag)
    return complex(values) if values.ndim == 0 else values


def envelope_std(time_grid: np.ndarray, power: np.ndarray) -> float:
    """Standard deviation of the normalized envelope P / sum(P)."""
    p = np.asarray(power, dtype=float)
    total = p.sum()
    if not total > 0 or not p.max() > 0:
        raise DegenerateEnvelope("Power envelope vanishes", total=float(total))
    mean = np.sum(time_grid * p) / total
    return float(np.sqrt(np.sum((time_grid - mean) ** 2 * p) / total))


def full_width_half_max(x: np.ndarray, y: np.ndarray) -> float:
    """FWHM of a single-peaked curve, half-maximum crossings linearly interpolated."""
    values = np.asarray(y, dtype=float)
    peak = int(np.argmax(values))
    half = 0.5 * values[peak]
    if not half > 0:
        raise DegenerateEnvelope("Curve vanishes, no half maximum")

    left = peak
    while left > 0 and values[left - 1] > half:
        left -= 1
    right = peak
    while right < values.size - 1 and values[right + 1] > half:
        right += 1
    if left == 0 or right == values.size - 1:
        raise DegenerateEnvelope("Half maximum not reached inside the window")

    def crossing(i_out: int, i_in: int) -> float:
        frac = (half - values[i_out]) / (values[i_in] - values[i_out])
        return x[i_out] + frac * (x[i_in] - x[i_out])

    return float(crossing(right + 1, right) - crossing(left - 1, left))


def envelope_fwhm(profile: ShockwaveProfile) -> float:
    return full_width_half_max(profile.time_grid, profile.power)


def g1_fwhm(profile: ShockwaveProfile) -> float:
    return full_width_half_max(profile.tau_grid, np.abs(profile.g1_values))


def shock_position_width(profile: ShockwaveProfile, v_g: float | None = None) -> float:
    """Spatial shockwave width v_g * std(t); v_g defaults to the window-centre value."""
    speed = profile.group_velocity if v_g is None else v_g
    return speed * envelope_std(profile.time_grid, profile.power)


def uncertainty_check(delta_x_shw: float, delta_p: float) -> float:
    """Ratio of the shockwave uncertainty product to hbar / 2."""
    if not (delta_x_shw > 0 and delta_p > 0):
        raise OutOfRange("Widths must be positive", delta_x_shw=delta_x_shw, delta_p=delta_p)
    return delta_x_shw * delta_p / (HBAR / 2)


def add_noise(pdm: PhotonDensityMatrix, amplitude: float, rng: np.random.Generator) -> PhotonDensityMatrix:
    """
    Add Hermitian complex Gaussian noise with standard deviation
    `amplitude` relative to the largest diagonal element.
    """
    if amplitude < 0:
        raise OutOfRange("Noise amplitude must be non-negative", amplitude=amplitude)
    if amplitude == 0:
        return pdm
    n = pdm.n_points
    scale = amplitude * float(np.max(power_spectrum(pdm)))
    draw = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    noise = scale * 0.5 * (draw + draw.conj().T)
    return replace(pdm, matrix=pdm.matrix + noise)


def project_psd(pdm: PhotonDensityMatrix) -> PhotonDensityMatrix:
    """Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to zero."""
    hermitian = 0.5 * (pdm.matrix + pdm.matrix.conj().T)
    eigenvalues, vectors = np.linalg.eigh(hermitian)
    clipped = np.clip(eigenvalues, 0.0, None)
    matrix = (vectors * clipped) @ vectors.conj().T
    return replace(pdm, matrix=0.5 * (matrix + matrix.conj().T))


def density_matrix_diagnostics(pdm: PhotonDensityMatrix) -> dict:
    """Hermiticity error, eigenvalue extremes and diagonal sign of a density matrix."""
    m = pdm.matrix
    norm = np.linalg.norm(m)
    hermitian_error = float(np.linalg.norm(m - m.conj().T) / norm) if norm > 0 else 0.0
    eigenvalues = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    diagonal = np.diag(m)
    max_eig = float(eigenvalues[-1])
    min_eig = float(eigenvalues[0])
    hermitian = hermitian_error <= NumericsConfig.hermitian_tolerance
    psd = min_eig >= -NumericsConfig.psd_tolerance * max(max_eig, 0.0)
    diagonal_ok = bool(np.all(diagonal.real >= -NumericsConfig.psd_tolerance * max(max_eig, 0.0)))
    return {
        "hermitian_error": hermitian_error,
        "min_eigenvalue": min_eig,
        "max_eigenvalue": max_eig,
        "hermitian": hermitian,
        "positive_semidefinite": psd,
        "diagonal_non_negative": diagonal_ok,
        "physical": hermitian and psd and diagonal_ok,
    }
