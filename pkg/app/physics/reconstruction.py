"""
Inversion of spectral coherence into emitter dimensions.

The 1-sigma width of the normalized antidiagonal coherence profile gives
the projected emitter size v_g / dw along the observation direction;
measurements along several cone angles fix the longitudinal and
transverse sizes of an axially symmetric emitter.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from app.config import NumericsConfig
from app.errors import (
    BelowThreshold,
    FitFailure,
    IllConditioned,
    IoError,
    NegativeVariance,
    NondispersiveDivergence,
    OutOfRange,
)
from app.physics.medium import C_LIGHT, DispersionModel, group_index, refractive_index
from app.physics.radiation import PhotonDensityMatrix
from app.utils.logger import logger

FWHM_PER_SIGMA = 2 * np.sqrt(2 * np.log(2))
CONVENTIONS = ("sigma", "fwhm")

# profile rise above its running minimum that counts as a revival
REVIVAL_THRESHOLD = 0.1
FIT_RESIDUAL_LIMIT = 0.05
MIN_CONE_SEPARATION = np.deg2rad(1.0)


@dataclass(frozen=True, eq=False)
class CoherenceProfile:
    delta: np.ndarray
    values: np.ndarray
    omega_0: float


@dataclass(frozen=True)
class CoherenceMeasurement:
    delta_omega_coh: float
    omega_0: float
    v_g: float
    r_hat_c: tuple[float, float, float]
    n_used: float
    convention: str = "sigma"
    method: str = "gaussian_fit"
    residual: float = 0.0
    band_limited: bool = False

    def __post_init__(self):
        if not self.delta_omega_coh > 0:
            raise OutOfRange("Coherence width must be positive", delta_omega_coh=self.delta_omega_coh)
        if not 0 < self.v_g < C_LIGHT:
            raise OutOfRange("Group velocity must lie in (0, c)", v_g=self.v_g)
        if self.convention not in CONVENTIONS:
            raise OutOfRange(f"Unknown width convention '{self.convention}'", supported=CONVENTIONS)

    @property
    def theta_c(self) -> float:
        """Cone angle of the observation direction relative to the carrier axis."""
        return float(np.arccos(np.clip(self.r_hat_c[2], -1.0, 1.0)))

    @property
    def sigma_width(self) -> float:
        if self.convention == "fwhm":
            return self.delta_omega_coh / FWHM_PER_SIGMA
        return self.delta_omega_coh


@dataclass(frozen=True)
class ReconstructionResult:
    sizes: tuple[float, ...]
    residual: float
    condition: float
    negative_variance: bool = False
    variances: tuple[float, ...] = field(default=())


def antidiagonal_profile(pdm: PhotonDensityMatrix) -> CoherenceProfile:
    """
    Normalized coherence |M_ab| / sqrt(M_aa M_bb) along the antidiagonal
    through the window centre, for separations delta = (a - b) * dw.

    Pairs whose diagonal falls below the acceptance floor are dropped.
    """
    diagonal = np.real(np.diag(pdm.matrix))
    centre = pdm.centre_index
    if not diagonal[centre] > 0:
        raise OutOfRange("Density matrix has no power at the band centre")
    cutoff = NumericsConfig.profile_floor**2 * diagonal.max()

    deltas, values = [], []
    k = 0
    while True:
        a = centre + (k + 1) // 2
        b = centre - k // 2
        if a >= pdm.n_points or b < 0 or diagonal[a] < cutoff or diagonal[b] < cutoff:
            break
        deltas.append(k * pdm.d_omega)
        values.append(abs(pdm.matrix[a, b]) / np.sqrt(diagonal[a] * diagonal[b]))
        k += 1
    return CoherenceProfile(np.array(deltas), np.array(values), pdm.omega_0)


def _gaussian(delta, sigma):
    return np.exp(-0.5 * (delta / sigma) ** 2)


def _initial_sigma(profile: CoherenceProfile) -> float:
    """Log-linear estimate from ln f = -delta^2 / (2 sigma^2)."""
    usable = (profile.values > 0.05) & (profile.delta > 0)
    if not np.any(usable):
        # decays within one grid step
        return float(profile.delta[1])
    d2 = profile.delta[usable] ** 2
    slope = np.sum(d2 * np.log(profile.values[usable])) / np.sum(d2**2)
    if slope >= 0:
        return float(profile.delta[-1])
    return float(np.sqrt(-0.5 / slope))


def _second_moment(profile: CoherenceProfile) -> float:
    return float(np.sqrt(np.sum(profile.delta**2 * profile.values) / np.sum(profile.values)))


def coherence_width(pdm: PhotonDensityMatrix, convention: str = "sigma") -> CoherenceMeasurement:
    """
    Width of the spectral coherence profile.

    A Gaussian is fitted to the antidiagonal profile. The second moment is
    used instead when the relative fit residual exceeds 5%. Profiles that
    never decay report the sampled span and are flagged band-limited.

    Raises:
        FitFailure: the profile revives (comb states); the exception carries
            the fringe-resolved profile
    """
    if convention not in CONVENTIONS:
        raise OutOfRange(f"Unknown width convention '{convention}'", supported=CONVENTIONS)
    profile = antidiagonal_profile(pdm)
    if profile.delta.size < 3:
        raise FitFailure("Coherence profile too short to fit", profile=profile, points=profile.delta.size)

    revival = float(np.max(profile.values - np.minimum.accumulate(profile.values)))
    if revival > REVIVAL_THRESHOLD:
        raise FitFailure("Coherence profile is not monotonically decaying", profile=profile, revival=revival)

    span = float(profile.delta[-1])
    method, residual, band_limited = "gaussian_fit", 0.0, False
    if profile.values.min() > 0.99:
        sigma, method, band_limited = span, "band_limited", True
    else:
        p0 = _initial_sigma(profile)
        (sigma,), _ = curve_fit(_gaussian, profile.delta, profile.values, p0=[p0])
        sigma = abs(float(sigma))
        if not (np.isfinite(sigma) and sigma > 0):
            raise FitFailure("Gaussian fit of the coherence profile diverged", profile=profile, sigma=sigma)
        residual = float(
            np.linalg.norm(profile.values - _gaussian(profile.delta, sigma)) / np.linalg.norm(profile.values)
        )
        if residual > FIT_RESIDUAL_LIMIT:
            logger.warning(f"Gaussian fit residual {residual:.3f} too large, using second moment")
            sigma, method = _second_moment(profile), "second_moment"
        if sigma > span:
            band_limited = True
    if band_limited:
        logger.warning(f"Coherence width limited by the detection band ({span:.3e} rad/s)")

    width = sigma * FWHM_PER_SIGMA if convention == "fwhm" else sigma
    logger.debug(f"Coherence width {width:.4e} rad/s ({method}, {convention})")
    return CoherenceMeasurement(
        delta_omega_coh=width,
        omega_0=pdm.omega_0,
        v_g=pdm.group_velocity,
        r_hat_c=tuple(float(c) for c in pdm.r_hat_c),
        n_used=pdm.refractive_index,
        convention=convention,
        method=method,
        residual=residual,
        band_limited=band_limited,
    )


def size_from_coherence(m: CoherenceMeasurement) -> float:
    """1-sigma emitter extent v_g / dw along the observation direction."""
    return m.v_g / m.sigma_width


def multi_cone_fit(measurements: list[CoherenceMeasurement], strict: bool = False) -> ReconstructionResult:
    """
    Longitudinal and transverse sizes of an axially symmetric emitter from
    least squares on

        size_par^2 cos^2(theta_i) + size_perp^2 sin^2(theta_i) = (v_g,i / dw_i)^2

    A negative variance is clamped to zero and flagged, or raised when
    `strict` is set.
    """
    if len(measurements) < 2:
        raise IllConditioned("At least two cone measurements are needed", count=len(measurements))
    theta = np.array([m.theta_c for m in measurements])
    if np.ptp(theta) <= MIN_CONE_SEPARATION:
        raise IllConditioned(
            "Cone angles must differ by more than one degree",
            theta_deg=tuple(np.round(np.rad2deg(theta), 3)),
        )

    design = np.column_stack([np.cos(theta) ** 2, np.sin(theta) ** 2])
    target = np.array([size_from_coherence(m) ** 2 for m in measurements])
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    condition = float(np.linalg.cond(design))
    residual = float(np.linalg.norm(design @ solution - target) / np.linalg.norm(target))

    negative = bool(np.any(solution < 0))
    if negative:
        if strict:
            raise NegativeVariance("Least-squares variance is negative", variances=tuple(solution))
        logger.warning(f"Negative variance {solution} clamped to zero")
    variances = np.clip(solution, 0.0, None)
    logger.debug(f"Multi-cone fit: cond={condition:.2f}, residual={residual:.2e}")
    return ReconstructionResult(
        sizes=tuple(float(s) for s in np.sqrt(variances)),
        residual=residual,
        condition=condition,
        negative_variance=negative,
        variances=tuple(float(v) for v in solution),
    )


@dataclass(frozen=True)
class InteractionWindow:
    l_min: float
    l_max: float
    interaction_length: float | None = None
    valid: bool | None = None

    @property
    def unbounded(self) -> bool:
        return np.isinf(self.l_max)


def interaction_length_window(
    wavelength: float,
    delta_lambda: float,
    model: DispersionModel,
    beta: float,
    interaction_length: float | None = None,
    strict: bool = False,
) -> InteractionWindow:
    """
    Range of radiator lengths over which the emission stays far-field and
    dispersion does not blur the coherence:

        lambda / n  <<  L_int  <<  (n / |n - n_g|) (lambda / d_lambda) beta lambda

    "<<" is read as a factor of ten.
    """
    if not delta_lambda > 0:
        raise OutOfRange("Detection bandwidth must be positive", delta_lambda=delta_lambda)
    n = float(refractive_index(model, wavelength))
    if beta * n <= 1:
        raise BelowThreshold("No Cherenkov emission: beta * n <= 1", beta_n=beta * n)
    dn = abs(n - float(group_index(model, wavelength)))

    l_min = wavelength / n
    if dn == 0:
        if strict:
            raise NondispersiveDivergence(f"{model.name} is non-dispersive, upper length bound is infinite")
        logger.warning(f"{model.name} is non-dispersive, interaction length unbounded")
        l_max = float("inf")
    else:
        l_max = (n / dn) * (wavelength / delta_lambda) * beta * wavelength

    valid = None
    if interaction_length is not None:
        valid = bool(10 * l_min <= interaction_length <= l_max / 10)
    return InteractionWindow(l_min=l_min, l_max=l_max, interaction_length=interaction_length, valid=valid)


def format_report(
    measurement: CoherenceMeasurement,
    inputs: dict | None = None,
    window: InteractionWindow | None = None,
) -> str:
    """Plain key = value reconstruction report."""
    lines = [f"{key} = {value}" for key, value in (inputs or {}).items()]
    lines += [
        f"omega_0 = {measurement.omega_0!r}",
        f"group_velocity = {measurement.v_g!r}",
        f"refractive_index = {measurement.n_used!r}",
        f"theta_c_deg = {np.rad2deg(measurement.theta_c)!r}",
        f"convention = {measurement.convention}",
        f"delta_omega_coh = {measurement.delta_omega_coh!r}",
        f"fit_method = {measurement.method}",
        f"fit_residual = {measurement.residual!r}",
        f"band_limited = {str(measurement.band_limited).lower()}",
        f"size_estimate_m = {size_from_coherence(measurement)!r}",
        f"size_estimate_nm = {size_from_coherence(measurement) * 1e9:.1f}",
    ]
    if window is not None:
        verdict = "unchecked" if window.valid is None else ("valid" if window.valid else "invalid")
        lines += [
            f"interaction_length_min_m = {window.l_min!r}",
            f"interaction_length_max_m = {'unbounded' if window.unbounded else repr(window.l_max)}",
            f"interaction_length_verdict = {verdict}",
        ]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, str]:
    report = {}
    for line in text.splitlines():
        if "=" in line and not line.startswith("#"):
            key, value = line.split("=", 1)
            report[key.strip()] = value.strip()
    return report


def write_report(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write report {path}", reason=str(e))
    return path
