"""
Free-electron states and the two functionals radiation needs from them:
the position density projected on the observation axis and its Fourier
transform, the momentum coherence function

    rho(dq) = integral exp(i dq x) G(x, x) dx.

Only the 1D projection along the observation direction is ever built.
The carrier moves along +z.
"""

from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np
from scipy import special

from app.config import NumericsConfig
from app.errors import (
    GridTooCoarse,
    GridTooNarrow,
    InvalidState,
    NonPositiveRadius,
    TruncationFailure,
    UnsupportedVariant,
)
from app.physics.medium import EV, HBAR, ParticleKinematics
from app.utils.logger import logger

Z_HAT = np.array([0.0, 0.0, 1.0])

# chunking bound for empirical transforms (elements of the phase matrix)
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class GaussianPure:
    variance: np.ndarray
    kinematics: ParticleKinematics | None = None
    variant: ClassVar[str] = "gaussian_pure"

    def __post_init__(self):
        var = np.asarray(self.variance, dtype=float)
        if var.shape != (3, 3):
            raise InvalidState("Variance matrix must be 3x3", shape=var.shape)
        if not np.allclose(var, var.T, rtol=1e-12, atol=0.0):
            raise InvalidState("Variance matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(var)) <= 0:
            raise InvalidState("Variance matrix must be positive definite")
        object.__setattr__(self, "variance", var)


@dataclass(frozen=True, eq=False)
class GaussianSchell:
    sigma_x: float
    xi: float
    variant: ClassVar[str] = "gaussian_schell"

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.xi > 0):
            raise InvalidState("Gaussian-Schell widths must be positive", sigma_x=self.sigma_x, xi=self.xi)


@dataclass(frozen=True, eq=False)
class PinemComb:
    coupling: complex
    modulation_frequency: float
    envelope_sigma: float
    velocity: float
    orders: np.ndarray
    amplitudes: np.ndarray
    transverse_sigma: float = 0.0
    variant: ClassVar[str] = "pinem"

    def __post_init__(self):
        if self.modulation_frequency <= 0 or self.envelope_sigma <= 0 or self.velocity <= 0:
            raise InvalidState("PINEM frequency, envelope and velocity must be positive")
        weight = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(weight - 1.0) > NumericsConfig.pinem_truncation:
            raise InvalidState("Sideband weights must sum to one", weight=weight)

    @property
    def n_max(self) -> int:
        return int(np.max(np.abs(self.orders)))

    @property
    def modulation_wavenumber(self) -> float:
        return self.modulation_frequency / self.velocity

    @property
    def period(self) -> float:
        """Pulse-train period along the carrier axis."""
        return 2 * np.pi / self.modulation_wavenumber

    def harmonic_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Weights W_m = sum_n c_n c*_{n-m} of the density harmonics
        exp(i m K z); W_0 = 1 and W_{-m} = conj(W_m).
        """
        m = np.arange(-2 * self.n_max, 2 * self.n_max + 1)
        c = self.amplitudes
        # full[m + 2 n_max] = sum_n c[n + m] conj(c[n])
        return m, np.correlate(c, c, mode="full")


@dataclass(frozen=True, eq=False)
class EmpiricalDensity:
    grid: np.ndarray
    density: np.ndarray
    normalization: float = 1.0
    variant: ClassVar[str] = "empirical"

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        rho = np.asarray(self.density, dtype=float)
        if x.ndim != 1 or x.shape != rho.shape or x.size < 2:
            raise InvalidState("Empirical density needs matching 1D grid and samples")
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidState("Empirical density grid must be uniform and increasing")
        if np.any(rho < 0):
            raise InvalidState("Empirical density must be non-negative")
        total = np.trapezoid(rho, x)
        if abs(total - 1.0) > 1e-9:
            raise InvalidState("Empirical density must integrate to one", integral=total)
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "density", rho)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


ElectronState = Union[GaussianPure, GaussianSchell, PinemComb, EmpiricalDensity]


def gaussian_state(sigma: float, kinematics: ParticleKinematics | None = None) -> GaussianPure:
    """Spherical Gaussian wavepacket with 1-sigma size `sigma` in every direction."""
    return GaussianPure(np.eye(3) * sigma**2, kinematics)


def spheroidal_state(
    sigma_parallel: float, sigma_perpendicular: float, kinematics: ParticleKinematics | None = None
) -> GaussianPure:
    """Axially symmetric Gaussian, `sigma_parallel` along the carrier velocity."""
    return GaussianPure(np.diag([sigma_perpendicular**2, sigma_perpendicular**2, sigma_parallel**2]), kinematics)


def point_emitter(kinematics: ParticleKinematics | None = None) -> GaussianPure:
    """Classical limit: a 1 fm Gaussian, coherence indistinguishable from one."""
    return gaussian_state(1e-15, kinematics)


def _unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if d.shape != (3,) or norm == 0:
        raise InvalidState("Direction must be a non-zero 3-vector")
    return d / norm


def projected_variance(state: ElectronState, direction) -> float:
    if not isinstance(state, GaussianPure):
        raise UnsupportedVariant(
            f"Projected variance is defined for Gaussian states only, got {state.variant}; "
            "use the second moment of projected_density"
        )
    d = _unit(direction)
    return float(d @ state.variance @ d)


def _pinem_projection(state: PinemComb, direction) -> tuple[float, float, float]:
    """cos of the angle to the carrier axis, transverse blur and projected envelope width."""
    d = _unit(direction)
    cos_t = float(d @ Z_HAT)
    tau = state.transverse_sigma * np.sqrt(max(0.0, 1.0 - cos_t**2))
    width = float(np.sqrt((cos_t * state.envelope_sigma) ** 2 + tau**2))
    if width == 0:
        raise UnsupportedVariant("PINEM comb has no extent along this direction")
    return cos_t, tau, width


def projected_std(state: ElectronState, direction=Z_HAT) -> float:
    """Characteristic width along the direction (envelope width for combs)."""
    if isinstance(state, GaussianPure):
        return float(np.sqrt(projected_variance(state, direction)))
    if isinstance(state, GaussianSchell):
        return state.sigma_x
    if isinstance(state, PinemComb):
        return _pinem_projection(state, direction)[2]
    x, rho = state.grid, state.density
    mean = np.trapezoid(x * rho, x)
    return float(np.sqrt(np.trapezoid((x - mean) ** 2 * rho, x)))


def _empirical_coherence(state: EmpiricalDensity, dq: np.ndarray) -> np.ndarray:
    nyquist = np.pi / state.spacing
    if np.any(np.abs(dq) > nyquist):
        raise GridTooCoarse(
            "Empirical density grid cannot resolve the requested momentum transfer",
            max_dq=float(np.max(np.abs(dq))),
            nyquist=nyquist,
        )
    weights = np.full(state.grid.size, state.spacing)
    weights[[0, -1]] *= 0.5
    wr = weights * state.density
    flat = dq.ravel()
    out = np.empty(flat.size, dtype=complex)
    chunk = max(1, _CHUNK_ELEMENTS // state.grid.size)
    for start in range(0, flat.size, chunk):
        block = flat[start : start + chunk]
        out[start : start + chunk] = np.exp(1j * np.outer(block, state.grid)) @ wr
    return out.reshape(dq.shape)


def _pinem_coherence(state: PinemComb, dq: np.ndarray, direction) -> np.ndarray:
    cos_t, tau, _ = _pinem_projection(state, direction)
    m, weights = state.harmonic_weights()
    k_mod = state.modulation_wavenumber
    out = np.zeros(dq.shape, dtype=complex)
    blur = np.exp(-0.5 * (dq * tau) ** 2)
    for order, w in zip(m, weights):
        if abs(w) < 1e-16:
            continue
        out += w * np.exp(-0.5 * ((dq * cos_t + order * k_mod) * state.envelope_sigma) ** 2)
    return out * blur


def momentum_coherence(state: ElectronState, delta_q, direction=Z_HAT) -> complex | np.ndarray:
    """
    Momentum coherence function at momentum transfer `delta_q` (1/m) along
    `direction`.

    Args:
        state: Emitter state
        delta_q: Scalar or array of momentum transfers
        direction: Observation direction (ignored by 1D variants)

    Returns complex values with the shape of `delta_q`.
    """
    dq = np.asarray(delta_q, dtype=float)
    if isinstance(state, GaussianPure):
        value = np.exp(-0.5 * dq**2 * projected_variance(state, direction)).astype(complex)
    elif isinstance(state, GaussianSchell):
        value = np.exp(-0.5 * (dq * state.sigma_x) ** 2).astype(complex)
    elif isinstance(state, PinemComb):
        value = _pinem_coherence(state, dq, direction)
    else:
        value = _empirical_coherence(state, dq)
    return complex(value) if value.ndim == 0 else value


def _gaussian_samples(x: np.ndarray, variance: float) -> np.ndarray:
    return np.exp(-0.5 * x**2 / variance) / np.sqrt(2 * np.pi * variance)


def projected_density(state: ElectronState, direction, grid) -> np.ndarray:
    """
    Position probability density along `direction`, sampled on `grid` (m).

    The grid must be uniform, hold at least 512 points and span eight
    widths of the state. Samples are rescaled so their trapezoid integral
    is exactly one.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 512:
        raise GridTooNarrow("Density grid needs at least 512 points", points=x.size)
    width = projected_std(state, direction)
    if x[-1] - x[0] < 8 * width:
        raise GridTooNarrow(
            "Density grid must span at least eight standard deviations",
            span=float(x[-1] - x[0]),
            std=width,
        )

    if isinstance(state, GaussianPure):
        rho = _gaussian_samples(x, projected_variance(state, direction))
    elif isinstance(state, GaussianSchell):
        rho = _gaussian_samples(x, state.sigma_x**2)
    elif isinstance(state, PinemComb):
        cos_t, tau, s = _pinem_projection(state, direction)
        k_mod = state.modulation_wavenumber
        k_proj = cos_t * k_mod * state.envelope_sigma**2 / s**2
        damping = 0.5 * (k_mod * state.envelope_sigma * tau / s) ** 2
        m, weights = state.harmonic_weights()
        comb = np.zeros(x.shape, dtype=complex)
        for order, w in zip(m, weights):
            if abs(w) < 1e-16:
                continue
            comb += w * np.exp(-damping * order**2) * np.exp(1j * order * k_proj * x)
        rho = _gaussian_samples(x, s**2) * np.clip(comb.real, 0.0, None)
    else:
        rho = np.interp(x, state.grid, state.density, left=0.0, right=0.0)

    total = np.trapezoid(rho, x)
    if total <= 0:
        raise GridTooNarrow("Density grid does not overlap the state")
    return rho / total


def energy_size_map(radius: float, kinematics: ParticleKinematics) -> float:
    """Energy spread (eV) of a wavepacket of the given radius: hbar * v / radius."""
    if not radius > 0:
        raise NonPositiveRadius("Wavepacket radius must be positive", radius=radius)
    return HBAR * kinematics.speed / radius / EV


def radius_from_energy_spread(energy_spread: float, kinematics: ParticleKinematics) -> float:
    """Inverse of energy_size_map: radius (m) for an energy spread (eV)."""
    if not energy_spread > 0:
        raise NonPositiveRadius("Energy spread must be positive", energy_spread=energy_spread)
    return HBAR * kinematics.speed / (energy_spread * EV)


def schell_uncertainties(sigma_x: float, xi: float) -> tuple[float, float]:
    """
    Total and coherent momentum spreads of the Gaussian-Schell state
    exp(-(x^2 + x'^2)/(4 sigma^2)) exp(-(x - x')^2/(2 xi^2)).

    The coherent spread is the momentum spread of the most populated
    eigenmode of the density operator, a Gaussian exp(-c x^2) with
    c = sqrt(a^2 + 2 a b), a = 1/(4 sigma^2), b = 1/(2 xi^2).

    Returns (dp_total, dp_coherent) in kg m/s; xi may be infinite.
    """
    if not (sigma_x > 0 and xi > 0):
        raise InvalidState("Gaussian-Schell widths must be positive", sigma_x=sigma_x, xi=xi)
    a = 1.0 / (4 * sigma_x**2)
    b = 0.5 / xi**2
    total = HBAR * np.sqrt(a + 2 * b)
    coherent = HBAR * (a**2 + 2 * a * b) ** 0.25
    return float(total), float(coherent)


@dataclass(frozen=True)
class QuadraticPhase:
    b: float

    def phase(self, n: np.ndarray) -> np.ndarray:
        return self.b * n.astype(float) ** 2


@dataclass(frozen=True)
class ExplicitPhases:
    phases: dict[int, float] = field(default_factory=dict)

    def phase(self, n: np.ndarray) -> np.ndarray:
        return np.array([self.phases.get(int(k), 0.0) for k in n])


PhaseRule = Union[QuadraticPhase, ExplicitPhases]


def parse_phase_rule(text: str) -> PhaseRule:
    """Parse "quadratic(b)" or "explicit(n:phase, ...)"."""
    text = text.strip().replace(" ", "")
    if text.startswith("quadratic(") and text.endswith(")"):
        return QuadraticPhase(float(text[len("quadratic(") : -1]))
    if text.startswith("explicit(") and text.endswith(")"):
        body = text[len("explicit(") : -1]
        phases = {}
        for item in filter(None, body.split(",")):
            order, value = item.split(":")
            phases[int(order)] = float(value)
        return ExplicitPhases(phases)
    raise ValueError(f"Unknown phase rule '{text}'")


def sideband_cutoff(coupling_magnitude: float, tolerance: float, cap: int) -> int:
    """Smallest n_max whose dropped Bessel weight is below `tolerance`."""
    x = 2 * coupling_magnitude
    kept = special.jv(0, x) ** 2
    n = 0
    while 1.0 - kept >= tolerance:
        n += 1
        if n > cap:
            raise TruncationFailure(
                "PINEM sideband cutoff exceeds the configured cap", coupling=coupling_magnitude, cap=cap
            )
        kept += 2 * special.jv(n, x) ** 2
    return n


def make_pinem(
    g: complex,
    omega: float,
    envelope_sigma: float,
    phase_rule: PhaseRule,
    kinematics: ParticleKinematics,
    transverse_sigma: float = 0.0,
    n_max_cap: int | None = None,
) -> PinemComb:
    """
    Laser-modulated comb state with amplitudes c_n = J_n(2|g|) exp(i n arg g)
    exp(i phi_n), truncated where the dropped weight is below the configured
    tolerance and renormalized.
    """
    if omega <= 0:
        raise InvalidState("Modulation frequency must be positive", omega=omega)
    cap = NumericsConfig.pinem_n_max_cap if n_max_cap is None else n_max_cap
    magnitude = abs(g)
    n_max = sideband_cutoff(magnitude, NumericsConfig.pinem_truncation, cap)
    orders = np.arange(-n_max, n_max + 1)
    amplitudes = special.jv(orders, 2 * magnitude) * np.exp(1j * orders * np.angle(g))
    amplitudes = amplitudes * np.exp(1j * phase_rule.phase(orders))
    amplitudes = amplitudes / np.sqrt(np.sum(np.abs(amplitudes) ** 2))
    logger.debug(f"PINEM comb: |g|={magnitude:.3f}, n_max={n_max}")
    return PinemComb(
        coupling=complex(g),
        modulation_frequency=float(omega),
        envelope_sigma=float(envelope_sigma),
        velocity=kinematics.speed,
        orders=orders,
        amplitudes=amplitudes,
        transverse_sigma=float(transverse_sigma),
    )
