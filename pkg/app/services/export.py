"""Plot-ready exports of density matrices and shockwave profiles."""

from pathlib import Path

import numpy as np

from app.errors import UnknownFormat
from app.physics.medium import wavelength_from_omega
from app.physics.radiation import PhotonDensityMatrix, ShockwaveProfile, power_spectrum
from app.services import formats

DENSITY_FORMATS = ("matrix-text", "matrix-binary", "abs-text", "spectrum")
PROFILE_FORMATS = ("envelope", "abs-text", "matrix-binary", "matrix-text")

ENVELOPE_HEADER = "t[s] P[W] |g1|"
SPECTRUM_HEADER = "omega[rad/s] lambda[m] S[J s/rad]"


def export_density(pdm: PhotonDensityMatrix, tag: str, stem: Path) -> Path:
    header = formats.pdm_header(pdm)
    if tag == "matrix-text":
        return formats.write_matrix_text(stem.with_suffix(".txt"), pdm.matrix, header)
    if tag == "matrix-binary":
        return formats.write_matrix_binary(stem.with_suffix(".bin"), pdm.matrix, header)
    if tag == "abs-text":
        return formats.write_matrix_text(stem.with_name(stem.name + "_abs.txt"), np.abs(pdm.matrix), header)
    if tag == "spectrum":
        return formats.write_columns(
            stem.with_name(stem.name + "_spectrum.txt"),
            SPECTRUM_HEADER,
            [pdm.omega_grid, wavelength_from_omega(pdm.omega_grid), power_spectrum(pdm)],
        )
    raise UnknownFormat(f"Unknown export format '{tag}' for density matrices", supported=DENSITY_FORMATS)


def export_profile(profile: ShockwaveProfile, tag: str, stem: Path) -> Path:
    header = formats.profile_header(profile)
    if tag == "envelope":
        return formats.write_columns(
            stem.with_name(stem.name + "_envelope.txt"),
            ENVELOPE_HEADER,
            [profile.time_grid, profile.power, np.abs(profile.g1_values)],
        )
    if tag == "abs-text":
        return formats.write_matrix_text(
            stem.with_name(stem.name + "_temporal_abs.txt"), np.abs(profile.correlation), header
        )
    if tag == "matrix-text":
        return formats.write_matrix_text(stem.with_name(stem.name + "_temporal.txt"), profile.correlation, header)
    if tag == "matrix-binary":
        return formats.write_matrix_binary(stem.with_name(stem.name + "_temporal.bin"), profile.correlation, header)
    raise UnknownFormat(f"Unknown export format '{tag}' for shockwave profiles", supported=PROFILE_FORMATS)


def export_plotdata(artifact: PhotonDensityMatrix | ShockwaveProfile, tag: str, stem: Path) -> Path:
    """Write `artifact` in the format named by `tag`; the suffix is chosen from the tag."""
    if isinstance(artifact, ShockwaveProfile):
        return export_profile(artifact, tag, stem)
    return export_density(artifact, tag, stem)
