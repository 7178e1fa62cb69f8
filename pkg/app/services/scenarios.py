"""
Scenario configuration and execution.

A scenario file is INI-like: section headers, `key = value` pairs and
`#`/`;` comments. It is parsed with configparser and validated by the
pydantic models below; every problem becomes one `section.key: message`
diagnostic of a ConfigError.
"""

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import PathsConfig
from app.errors import BelowThreshold, ConfigError, FitFailure, InvalidWindow, IoError, PhysicsError
from app.physics import emitter, radiation, reconstruction
from app.physics.emitter import ElectronState
from app.physics.medium import (
    SPECIES_REST_ENERGY_EV,
    ParticleKinematics,
    kinematics_from_kinetic,
    wavelength_from_omega,
)
from app.services import export, formats
from app.services.manifest import write_manifest
from app.services.materials import get_material, material_names
from app.utils.logger import logger

EMITTER_VARIANTS = ("gaussian_pure", "gaussian_schell", "pinem", "empirical", "point")
OUTPUTS = ("density_matrix", "spectrum", "envelope", "temporal_matrix", "coherence_profile", "report")
FILE_FORMATS = ("text", "binary", "both")

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioSection(_Section):
    id: str
    seed: int = 0
    outputs: list[str] = Field(default_factory=lambda: ["density_matrix", "report"])
    description: str = ""

    @field_validator("id")
    @classmethod
    def file_safe(cls, value: str) -> str:
        if not _ID_PATTERN.match(value):
            raise ValueError("must contain only letters, digits, '_' and '-'")
        return value

    @field_validator("outputs", mode="before")
    @classmethod
    def split_outputs(cls, value):
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        unknown = [v for v in value if v not in OUTPUTS]
        if unknown:
            raise ValueError(f"unknown outputs {unknown}, supported are {list(OUTPUTS)}")
        return value


class GaussianPureSpec(_Section):
    variant: Literal["gaussian_pure"]
    sigma_nm: float | None = Field(default=None, gt=0)
    sigma_parallel_nm: float | None = Field(default=None, gt=0)
    sigma_perpendicular_nm: float | None = Field(default=None, gt=0)
    energy_spread_ev: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def one_size(self):
        spheroid = self.sigma_parallel_nm is not None or self.sigma_perpendicular_nm is not None
        if spheroid and (self.sigma_parallel_nm is None or self.sigma_perpendicular_nm is None):
            raise ValueError("sigma_parallel_nm and sigma_perpendicular_nm go together")
        given = sum([self.sigma_nm is not None, spheroid, self.energy_spread_ev is not None])
        if given != 1:
            raise ValueError("give exactly one of sigma_nm, sigma_parallel_nm/sigma_perpendicular_nm, energy_spread_ev")
        return self


class GaussianSchellSpec(_Section):
    variant: Literal["gaussian_schell"]
    sigma_nm: float = Field(gt=0)
    xi_nm: float = Field(gt=0)


class PinemSpec(_Section):
    variant: Literal["pinem"]
    coupling: float = Field(ge=0)
    coupling_phase_deg: float = 0.0
    omega_thz: float = Field(gt=0, description="modulation frequency Omega / 2 pi in THz")
    envelope_sigma_nm: float = Field(gt=0)
    transverse_sigma_nm: float = Field(default=0.0, ge=0)
    phase_rule: str = "quadratic(0.3)"

    @field_validator("phase_rule")
    @classmethod
    def parsable(cls, value: str) -> str:
        emitter.parse_phase_rule(value)
        return value


class EmpiricalSpec(_Section):
    variant: Literal["empirical"]
    path: str


class PointSpec(_Section):
    variant: Literal["point"]


EmitterSpec = Annotated[
    Union[GaussianPureSpec, GaussianSchellSpec, PinemSpec, EmpiricalSpec, PointSpec],
    Field(discriminator="variant"),
]


class KinematicsSection(_Section):
    kinetic_energy_ev: float = Field(ge=0)
    species: str = "electron"
    rest_energy_ev: float | None = Field(default=None, gt=0)

    @field_validator("species")
    @classmethod
    def known_species(cls, value: str) -> str:
        if value not in SPECIES_REST_ENERGY_EV:
            raise ValueError(f"unknown species, known are {sorted(SPECIES_REST_ENERGY_EV)}")
        return value


class MediumSection(_Section):
    material: str

    @field_validator("material")
    @classmethod
    def registered(cls, value: str) -> str:
        if value not in material_names():
            raise ValueError(f"unknown material, known are {material_names()}")
        return value


class DetectionSection(_Section):
    lambda_min_nm: float = Field(gt=0)
    lambda_max_nm: float = Field(gt=0)
    n_points: int = 256
    acceptance: Literal["raised_cosine", "rect", "gaussian"] = "raised_cosine"
    rolloff: float = Field(default=0.25, gt=0, le=1)
    padding: float = Field(default=0.125, gt=0)
    distance_m: float = Field(default=1e-2, gt=0)
    azimuth_deg: float = 0.0

    @field_validator("n_points")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        if value < 64 or value & (value - 1):
            raise ValueError("grid policy: n_points must be a power of two and at least 64")
        return value

    @model_validator(mode="after")
    def ordered_band(self):
        if self.lambda_min_nm >= self.lambda_max_nm:
            raise ValueError("lambda_min_nm must be below lambda_max_nm")
        return self


class NoiseSection(_Section):
    amplitude: float = Field(default=0.0, ge=0)


class ReconstructionSection(_Section):
    convention: Literal["sigma", "fwhm"] = "sigma"
    interaction_length_um: float | None = Field(default=None, gt=0)


class ScenarioConfig(_Section):
    scenario: ScenarioSection
    emitter: EmitterSpec
    kinematics: KinematicsSection
    medium: MediumSection
    detection: DetectionSection
    noise: NoiseSection = Field(default_factory=NoiseSection)
    reconstruction: ReconstructionSection = Field(default_factory=ReconstructionSection)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every `key = value` entry, by (section, key)."""
    lines, section = {}, ""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
        elif stripped and stripped[0] not in "#;" and ("=" in stripped or ":" in stripped):
            key = re.split(r"[=:]", stripped, maxsplit=1)[0].strip().lower()
            lines[(section, key)] = number
    return lines


def _section_lines(text: str) -> dict[str, int]:
    return {
        line.strip()[1:-1].strip(): number
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip().startswith("[") and line.strip().endswith("]")
    }


def _diagnostics(error: ValidationError, text: str) -> list[str]:
    key_lines, section_lines = _key_lines(text), _section_lines(text)
    messages = []
    for item in error.errors():
        loc = [str(p) for p in item["loc"]]
        section = loc[0] if loc else "scenario"
        # discriminated unions insert the variant tag into the location
        keys = [p for p in loc[1:] if p not in EMITTER_VARIANTS]
        key = keys[0] if keys else ""
        line = key_lines.get((section, key)) or section_lines.get(section)
        where = f"{section}.{key}" if key else section
        suffix = f" (line {line})" if line else ""
        messages.append(f"{where}: {item['msg']}{suffix}")
    return messages


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(f"Syntax error in {source}", diagnostics=[f"line {e.lineno}: expected a [section] header"])
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"Syntax error in {source}", diagnostics=[f"{e.section}.{e.option}: duplicate key (line {e.lineno})"])
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"Syntax error in {source}", diagnostics=[f"{e.section}: duplicate section (line {e.lineno})"])
    except configparser.ParsingError as e:
        raise ConfigError(
            f"Syntax error in {source}",
            diagnostics=[f"line {lineno}: cannot parse {line.strip()}" for lineno, line in e.errors],
        )

    raw = {section: dict(parser[section]) for section in parser.sections()}
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid scenario {source}", diagnostics=_diagnostics(e, text))


def load_config(path: Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot read scenario {path}", reason=str(e))
    return parse_config(text, source=str(path))


def list_presets() -> list[str]:
    return sorted(p.stem for p in PathsConfig.presets_dir.glob("*.ini"))


def resolve_config(name_or_path: str) -> Path:
    """A scenario file path, or the bundled preset of that name."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    preset = PathsConfig.presets_dir / f"{name_or_path}.ini"
    if preset.is_file():
        return preset
    raise ConfigError(
        f"No scenario file or preset named '{name_or_path}'",
        diagnostics=[f"presets: {', '.join(list_presets())}"],
    )


def build_kinematics(config: ScenarioConfig) -> ParticleKinematics:
    section = config.kinematics
    return kinematics_from_kinetic(section.kinetic_energy_ev, section.rest_energy_ev, section.species)


def build_window(config: ScenarioConfig, model, kin: ParticleKinematics) -> radiation.DetectionWindow:
    d = config.detection
    return radiation.make_detection_window(
        model,
        kin,
        d.lambda_min_nm * 1e-9,
        d.lambda_max_nm * 1e-9,
        n_points=d.n_points,
        acceptance=d.acceptance,
        rolloff=d.rolloff,
        padding=d.padding,
        distance=d.distance_m,
        azimuth=np.deg2rad(d.azimuth_deg),
    )


def build_state(spec, kin: ParticleKinematics, base_dir: Path | None = None) -> ElectronState:
    """Electron state for an emitter section; empirical paths are relative to `base_dir`."""
    if isinstance(spec, GaussianPureSpec):
        if spec.energy_spread_ev is not None:
            return emitter.gaussian_state(emitter.radius_from_energy_spread(spec.energy_spread_ev, kin), kin)
        if spec.sigma_nm is not None:
            return emitter.gaussian_state(spec.sigma_nm * 1e-9, kin)
        return emitter.spheroidal_state(spec.sigma_parallel_nm * 1e-9, spec.sigma_perpendicular_nm * 1e-9, kin)
    if isinstance(spec, GaussianSchellSpec):
        return emitter.GaussianSchell(spec.sigma_nm * 1e-9, spec.xi_nm * 1e-9)
    if isinstance(spec, PinemSpec):
        coupling = spec.coupling * np.exp(1j * np.deg2rad(spec.coupling_phase_deg))
        return emitter.make_pinem(
            coupling,
            2 * np.pi * spec.omega_thz * 1e12,
            spec.envelope_sigma_nm * 1e-9,
            emitter.parse_phase_rule(spec.phase_rule),
            kin,
            transverse_sigma=spec.transverse_sigma_nm * 1e-9,
        )
    if isinstance(spec, EmpiricalSpec):
        path = Path(spec.path)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        state, _ = formats.load_empirical_density(path)
        return state
    return emitter.point_emitter(kin)


def validate_config(path: Path) -> list[str]:
    """
    Schema validation plus physics lint (material range, Cherenkov
    threshold over the grid, grid resolution) without simulating.

    Returns informational notes; raises ConfigError listing every problem.
    """
    config = load_config(path)
    diagnostics = []
    kin = build_kinematics(config)
    model = get_material(config.medium.material)
    try:
        win = build_window(config, model, kin)
    except InvalidWindow as e:
        raise ConfigError(f"Invalid detection window in {path}", diagnostics=[f"detection: {e}"])
    except BelowThreshold as e:
        omega = e.context.get("omega")
        where = f" at {omega:.4e} rad/s ({wavelength_from_omega(omega) * 1e9:.1f} nm)" if omega else ""
        raise ConfigError(
            f"Cherenkov threshold not met in {path}",
            diagnostics=[f"detection: beta * n <= 1{where} for {config.medium.material}"],
        )

    try:
        state = build_state(config.emitter, kin, Path(path).parent)
        q = radiation.photon_wavenumber(model, win)
        step = float(np.max(np.abs(np.diff(q))))
        width = emitter.projected_std(state, win.r_hat_c)
        if step * width > np.pi:
            diagnostics.append(
                f"detection.n_points: grid policy: frequency step too coarse for a {width * 1e9:.0f} nm emitter"
            )
    except (PhysicsError, ValueError) as e:
        diagnostics.append(f"emitter: {e}")
    if diagnostics:
        raise ConfigError(f"Scenario {path} fails physics lint", diagnostics=diagnostics)

    return [
        f"scenario {config.scenario.id}: {config.emitter.variant} emitter in {config.medium.material}",
        f"grid: N={win.n_points}, d_omega={win.d_omega:.4e} rad/s, omega_0={win.omega_0:.4e} rad/s",
        f"beta = {kin.beta:.6f}, theta_c = {np.rad2deg(np.arccos(win.r_hat_c[2])):.3f} deg",
    ]


@dataclass
class ScenarioResult:
    scenario_id: str
    files: list[Path] = field(default_factory=list)
    manifest: Path | None = None
    density_matrix: radiation.PhotonDensityMatrix | None = None
    profile: radiation.ShockwaveProfile | None = None
    measurement: reconstruction.CoherenceMeasurement | None = None


def _report(
    config: ScenarioConfig, pdm, profile, kin, model, win
) -> tuple[str, reconstruction.CoherenceMeasurement | None]:
    inputs = {
        "scenario": config.scenario.id,
        "emitter": config.emitter.variant,
        "emitter_hash": pdm.emitter_hash,
        "material": config.medium.material,
        "band_nm": f"{config.detection.lambda_min_nm} {config.detection.lambda_max_nm}",
        "n_points": config.detection.n_points,
        "acceptance": config.detection.acceptance,
        "seed": config.scenario.seed,
        "noise_amplitude": config.noise.amplitude,
    }
    lambda_0 = float(wavelength_from_omega(win.omega_0))
    band = config.detection.lambda_max_nm * 1e-9 - config.detection.lambda_min_nm * 1e-9
    length = config.reconstruction.interaction_length_um
    window = reconstruction.interaction_length_window(
        lambda_0, band, model, kin.beta, None if length is None else length * 1e-6
    )

    try:
        measurement = reconstruction.coherence_width(pdm, config.reconstruction.convention)
    except FitFailure as e:
        logger.warning(f"Coherence fit failed for {config.scenario.id}: {e}")
        lines = [f"{k} = {v}" for k, v in inputs.items()]
        lines += ["fit_status = failed", f"fit_error = {e.detail}"]
        return "\n".join(lines) + "\n", None

    text = reconstruction.format_report(measurement, inputs, window)
    if profile is not None:
        text += (
            f"envelope_fwhm_s = {radiation.envelope_fwhm(profile)!r}\n"
            f"g1_fwhm_s = {radiation.g1_fwhm(profile)!r}\n"
            f"shock_position_width_m = {radiation.shock_position_width(profile)!r}\n"
        )
    return text, measurement


def run_scenario(
    config: ScenarioConfig,
    out_dir: Path,
    file_format: str = "text",
    seed: int | None = None,
    base_dir: Path | None = None,
) -> ScenarioResult:
    """
    Forward-simulate a scenario and write the requested outputs plus a
    manifest into `out_dir`. Outputs depend only on the configuration
    and the seed.
    """
    if file_format not in FILE_FORMATS:
        raise ConfigError(f"Unknown file format '{file_format}'", diagnostics=[f"--format: one of {list(FILE_FORMATS)}"])
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"Cannot create output directory {out_dir}", reason=str(e))

    scenario = config.scenario
    outputs = set(scenario.outputs)
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    result = ScenarioResult(scenario.id)
    stem = out_dir / scenario.id
    logger.info(f"Running scenario {scenario.id}")

    kin = build_kinematics(config)
    model = get_material(config.medium.material)
    win = build_window(config, model, kin)
    if outputs:
        state = build_state(config.emitter, kin, base_dir)
        pdm = radiation.spectral_autocorrelation(state, kin, model, win)
        if config.noise.amplitude > 0:
            pdm = radiation.project_psd(radiation.add_noise(pdm, config.noise.amplitude, rng))
        result.density_matrix = pdm

        matrix_tags = {"text": ["matrix-text"], "binary": ["matrix-binary"], "both": ["matrix-text", "matrix-binary"]}
        if "density_matrix" in outputs:
            for tag in matrix_tags[file_format]:
                result.files.append(export.export_density(pdm, tag, out_dir / f"{scenario.id}_density"))
        if "spectrum" in outputs:
            result.files.append(export.export_density(pdm, "spectrum", stem))

        if outputs & {"envelope", "temporal_matrix"}:
            result.profile = radiation.temporal_autocorrelation(pdm)
        if "envelope" in outputs:
            result.files.append(export.export_profile(result.profile, "envelope", stem))
        if "temporal_matrix" in outputs:
            for tag in matrix_tags[file_format]:
                result.files.append(export.export_profile(result.profile, tag, stem))

        if "coherence_profile" in outputs:
            profile = reconstruction.antidiagonal_profile(pdm)
            result.files.append(
                formats.write_columns(
                    out_dir / f"{scenario.id}_coherence.txt", "delta_omega[rad/s] |rho|", [profile.delta, profile.values]
                )
            )
        if "report" in outputs:
            text, result.measurement = _report(config, pdm, result.profile, kin, model, win)
            result.files.append(reconstruction.write_report(out_dir / f"{scenario.id}_report.txt", text))

    for path in result.files:
        logger.info(f"Wrote {path}")
    result.manifest = write_manifest(out_dir, scenario.id, result.files)
    return result


def reconstruct_file(
    path: Path,
    convention: str = "sigma",
    wavelength_band: tuple[float, float] | None = None,
    model_name: str | None = None,
    interaction_length: float | None = None,
) -> tuple[str, reconstruction.CoherenceMeasurement]:
    """Coherence width and size estimate from a stored density matrix."""
    pdm = formats.read_density_matrix(path)
    measurement = reconstruction.coherence_width(pdm, convention)
    window = None
    if wavelength_band is not None and model_name is not None:
        lambda_0 = float(wavelength_from_omega(pdm.omega_0))
        window = reconstruction.interaction_length_window(
            lambda_0, wavelength_band[1] - wavelength_band[0], get_material(model_name), pdm.beta, interaction_length
        )
    inputs = {"source": Path(path).name, "emitter_hash": pdm.emitter_hash or "none", "n_points": pdm.n_points}
    return reconstruction.format_report(measurement, inputs, window), measurement

