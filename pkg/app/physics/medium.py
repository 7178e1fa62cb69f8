"""
Optical medium dispersion, relativistic kinematics and Cherenkov cone geometry.

Wavelengths are vacuum wavelengths in meters at the API boundary; the
Sellmeier constants themselves are tabulated in micrometers.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from app.errors import BelowThreshold, NearResonance, NegativeEnergy, OutOfRange

C_LIGHT = constants.c
HBAR = constants.hbar
ALPHA = constants.fine_structure
EV = constants.electron_volt

SPECIES_REST_ENERGY_EV = {
    "electron": constants.physical_constants["electron mass energy equivalent in MeV"][0] * 1e6,
    "muon": constants.physical_constants["muon mass energy equivalent in MeV"][0] * 1e6,
    "pion": 139.57039e6,
    "kaon": 493.677e6,
    "proton": constants.physical_constants["proton mass energy equivalent in MeV"][0] * 1e6,
}

# lambda^2 closer than this (relative) to a Sellmeier pole is rejected
RESONANCE_GUARD = 1e-6


@dataclass(frozen=True)
class DispersionModel:
    name: str
    sellmeier_B: tuple[float, float, float]
    sellmeier_C: tuple[float, float, float]
    valid_range: tuple[float, float]
    n_const: float | None = None

    def __post_init__(self):
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise OutOfRange(f"Invalid validity range for {self.name}", valid_range=self.valid_range)
        if self.n_const is not None and self.n_const < 1.0:
            raise OutOfRange(f"Constant index below 1 for {self.name}", n_const=self.n_const)

    @property
    def is_constant(self) -> bool:
        return self.n_const is not None


def constant_model(n: float, valid_range: tuple[float, float] = (200e-9, 4e-6), name: str = "constant") -> DispersionModel:
    return DispersionModel(name, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), valid_range, n_const=n)


def _as_output(value: np.ndarray, like) -> float | np.ndarray:
    return float(value) if np.ndim(like) == 0 else value


def _checked_um2(model: DispersionModel, wavelength, strict: bool) -> np.ndarray:
    lam = np.asarray(wavelength, dtype=float)
    lo, hi = model.valid_range
    outside = (lam <= lo) | (lam >= hi) if strict else (lam < lo) | (lam > hi)
    if np.any(outside):
        bad = lam[outside].flat[0]
        raise OutOfRange(
            f"Wavelength {bad * 1e9:.2f} nm outside validity of {model.name}",
            valid_nm=(lo * 1e9, hi * 1e9),
        )
    lam_um2 = (lam * 1e6) ** 2
    if not model.is_constant:
        for c in model.sellmeier_C:
            if c > 0 and np.any(np.abs(lam_um2 - c) <= RESONANCE_GUARD * c):
                raise NearResonance(f"Wavelength too close to a resonance of {model.name}", c_um2=c)
    return lam_um2


def _sellmeier_terms(model: DispersionModel, lam_um2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return n and sum B*C/(lambda^2 - C)^2 (the latter in 1/um^2)."""
    n2 = np.ones_like(lam_um2)
    slope = np.zeros_like(lam_um2)
    for b, c in zip(model.sellmeier_B, model.sellmeier_C):
        denom = lam_um2 - c
        n2 = n2 + b * lam_um2 / denom
        slope = slope + b * c / denom**2
    return np.sqrt(n2), slope


def refractive_index(model: DispersionModel, wavelength) -> float | np.ndarray:
    lam_um2 = _checked_um2(model, wavelength, strict=False)
    if model.is_constant:
        return _as_output(np.full_like(lam_um2, model.n_const), wavelength)
    n, _ = _sellmeier_terms(model, lam_um2)
    return _as_output(n, wavelength)


def group_index(model: DispersionModel, wavelength) -> float | np.ndarray:
    """
    Group index n_g = n - lambda dn/dlambda from the analytic derivative
    of the Sellmeier form: n_g = n + lambda^2 * sum(B C / (lambda^2 - C)^2) / n.
    """
    lam_um2 = _checked_um2(model, wavelength, strict=True)
    if model.is_constant:
        return _as_output(np.full_like(lam_um2, model.n_const), wavelength)
    n, slope = _sellmeier_terms(model, lam_um2)
    return _as_output(n + lam_um2 * slope / n, wavelength)


def wavelength_from_omega(omega):
    return 2 * np.pi * C_LIGHT / np.asarray(omega, dtype=float)


def omega_from_wavelength(wavelength):
    return 2 * np.pi * C_LIGHT / np.asarray(wavelength, dtype=float)


def group_velocity(model: DispersionModel, omega: float) -> float:
    return C_LIGHT / float(group_index(model, wavelength_from_omega(omega)))


@dataclass(frozen=True)
class ParticleKinematics:
    kinetic_energy: float
    rest_energy: float
    beta: float
    gamma: float
    v0: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))

    @property
    def speed(self) -> float:
        return self.beta * C_LIGHT


def kinematics_from_kinetic(
    kinetic_energy: float, rest_energy: float | None = None, species: str = "electron"
) -> ParticleKinematics:
    """
    Build kinematics from kinetic energy (eV) and a rest energy (eV) or a
    species name. The carrier velocity points along +z.
    """
    if kinetic_energy < 0:
        raise NegativeEnergy("Kinetic energy must be non-negative", kinetic_energy=kinetic_energy)
    if rest_energy is None:
        if species not in SPECIES_REST_ENERGY_EV:
            raise OutOfRange(f"Unknown species '{species}'", known=sorted(SPECIES_REST_ENERGY_EV))
        rest_energy = SPECIES_REST_ENERGY_EV[species]
    gamma = 1.0 + kinetic_energy / rest_energy
    # sqrt(E(E + 2m))/(E + m) keeps precision for slow particles
    beta = np.sqrt(kinetic_energy * (kinetic_energy + 2 * rest_energy)) / (kinetic_energy + rest_energy)
    return ParticleKinematics(
        kinetic_energy=float(kinetic_energy),
        rest_energy=float(rest_energy),
        beta=float(beta),
        gamma=float(gamma),
        v0=(0.0, 0.0, float(beta * C_LIGHT)),
    )


def cherenkov_angle(beta, n) -> float | np.ndarray:
    b = np.asarray(beta, dtype=float)
    idx = np.asarray(n, dtype=float)
    if np.any((b <= 0) | (b >= 1)):
        raise OutOfRange("Velocity must satisfy 0 < beta < 1", beta=beta)
    if np.any(idx <= 0):
        raise OutOfRange("Refractive index must be positive", n=n)
    bn = b * idx
    if np.any(bn < 1):
        raise BelowThreshold("No Cherenkov emission: beta * n < 1", beta_n=float(np.min(bn)))
    theta = np.arccos(np.minimum(1.0, 1.0 / bn))
    return float(theta) if theta.ndim == 0 else theta


def cherenkov_wavevector(model: DispersionModel, omega) -> float | np.ndarray:
    w = np.asarray(omega, dtype=float)
    q = np.zeros_like(w)
    emitting = w != 0
    if np.any(emitting):
        n = np.asarray(refractive_index(model, wavelength_from_omega(w[emitting])))
        q[emitting] = n * w[emitting] / C_LIGHT
    return _as_output(q, omega)


@dataclass(frozen=True)
class ConeGeometry:
    model: DispersionModel
    kinematics: ParticleKinematics
    omega_0: float
    azimuth: float = 0.0
    distance: float = 1e-2

    def theta_c(self, omega) -> float | np.ndarray:
        n = refractive_index(self.model, wavelength_from_omega(omega))
        return cherenkov_angle(self.kinematics.beta, n)

    @property
    def theta_0(self) -> float:
        return float(self.theta_c(self.omega_0))

    @property
    def r_hat_c(self) -> np.ndarray:
        theta = self.theta_0
        return np.array(
            [
                np.sin(theta) * np.cos(self.azimuth),
                np.sin(theta) * np.sin(self.azimuth),
                np.cos(theta),
            ]
        )


def cone_geometry(
    model: DispersionModel,
    kinematics: ParticleKinematics,
    omega_0: float,
    azimuth: float = 0.0,
    distance: float = 1e-2,
) -> ConeGeometry:
    geometry = ConeGeometry(model, kinematics, float(omega_0), float(azimuth), float(distance))
    _ = geometry.theta_0  # raises below threshold
    return geometry
