"""
Matrix and column file formats.

Text matrix: `#` header lines `key = value`, then one row per matrix row
holding `re im` pairs. Values are written with repr so a reload is
bit-exact.

Binary matrix: magic b"CQCL", u16 version, u32 N, then N*N little-endian
complex128 values in row-major order. The header block lives beside it
in `<file>.hdr` using the text header grammar.
"""

import struct
from pathlib import Path

import numpy as np

from app.errors import IoError
from app.physics.emitter import EmpiricalDensity
from app.physics.radiation import PhotonDensityMatrix, ShockwaveProfile
from app.utils.logger import logger

MAGIC = b"CQCL"
VERSION = 1
BINARY_HEADER = struct.Struct("<4sHI")
HEADER_SUFFIX = ".hdr"


def _format_value(value) -> str:
    if isinstance(value, np.ndarray):
        return " ".join(_format_value(v) for v in value.tolist())
    if isinstance(value, (list, tuple)):
        return " ".join(_format_value(v) for v in value)
    if isinstance(value, complex):
        return f"{value.real!r} {value.imag!r}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_header(header: dict) -> str:
    return "".join(f"# {key} = {_format_value(value)}\n" for key, value in header.items())


def parse_header(lines: list[str]) -> dict[str, str]:
    header = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, value = body.split("=", 1)
            header[key.strip()] = value.strip()
    return header


def pdm_header(pdm: PhotonDensityMatrix) -> dict:
    header = {
        "kind": "density_matrix",
        "n_points": pdm.n_points,
        "units": "J s / rad (per frequency pair, scaled by 2 r^2 eps0 n c)",
        "omega_0": float(pdm.omega_0),
        "group_velocity": float(pdm.group_velocity),
        "refractive_index": float(pdm.refractive_index),
        "beta": float(pdm.beta),
        "r_hat_c": np.asarray(pdm.r_hat_c, dtype=float),
        "emitter_hash": pdm.emitter_hash or "none",
        "dispersion": pdm.dispersion,
        "omega_grid": np.asarray(pdm.omega_grid, dtype=float),
    }
    if pdm.acceptance is not None:
        header["acceptance"] = np.asarray(pdm.acceptance).astype(complex).view(float)
    return header


def profile_header(profile: ShockwaveProfile) -> dict:
    return {
        "kind": "shockwave",
        "n_points": profile.time_grid.size,
        "units": "W",
        "dt": profile.dt,
        "t_first": float(profile.time_grid[0]),
        "oversample": profile.oversample,
        "omega_0": float(profile.omega_0),
        "group_velocity": float(profile.group_velocity),
        "emitter_hash": profile.source.emitter_hash or "none",
    }


def _floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split()])


def pdm_from_header(header: dict[str, str], matrix: np.ndarray) -> PhotonDensityMatrix:
    try:
        acceptance = None
        if "acceptance" in header:
            acceptance = _floats(header["acceptance"]).view(complex)
        return PhotonDensityMatrix(
            omega_grid=_floats(header["omega_grid"]),
            matrix=matrix,
            omega_0=float(header["omega_0"]),
            group_velocity=float(header["group_velocity"]),
            refractive_index=float(header["refractive_index"]),
            beta=float(header["beta"]),
            r_hat_c=_floats(header["r_hat_c"]),
            emitter_hash="" if header.get("emitter_hash") == "none" else header.get("emitter_hash", ""),
            acceptance=acceptance,
            dispersion=header.get("dispersion", "exact"),
        )
    except (KeyError, ValueError) as e:
        raise IoError("Matrix header is incomplete", missing=str(e))


def write_matrix_text(path: Path, matrix: np.ndarray, header: dict) -> Path:
    rows = (" ".join(f"{v.real!r} {v.imag!r}" for v in row) + "\n" for row in matrix.astype(complex).tolist())
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(format_header(header))
            handle.writelines(rows)
    except OSError as e:
        raise IoError(f"Cannot write {path}", reason=str(e))
    return path


def read_matrix_text(path: Path) -> tuple[np.ndarray, dict[str, str]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"Cannot read {path}", reason=str(e))
    header = parse_header([line for line in lines if line.startswith("#")])
    body = [line for line in lines if line.strip() and not line.startswith("#")]
    try:
        values = [_floats(line) for line in body]
        n = len(values)
        if n == 0 or any(v.size != 2 * n for v in values):
            raise ValueError("matrix is not square")
        matrix = np.array(values).view(complex)
    except ValueError as e:
        raise IoError(f"Malformed text matrix {path}", reason=str(e))
    return matrix, header


def write_matrix_binary(path: Path, matrix: np.ndarray, header: dict) -> Path:
    n = matrix.shape[0]
    try:
        with open(path, "wb") as handle:
            handle.write(BINARY_HEADER.pack(MAGIC, VERSION, n))
            handle.write(np.ascontiguousarray(matrix, dtype="<c16").tobytes())
        Path(f"{path}{HEADER_SUFFIX}").write_text(format_header(header), encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write {path}", reason=str(e))
    return path


def read_matrix_binary(path: Path) -> tuple[np.ndarray, dict[str, str]]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"Cannot read {path}", reason=str(e))
    if len(data) < BINARY_HEADER.size:
        raise IoError(f"Truncated binary matrix {path}")
    magic, version, n = BINARY_HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IoError(f"Bad magic in {path}", magic=magic)
    if version != VERSION:
        raise IoError(f"Unsupported binary matrix version {version} in {path}")
    payload = data[BINARY_HEADER.size :]
    if len(payload) != 16 * n * n:
        raise IoError(f"Binary matrix {path} has {len(payload)} bytes, expected {16 * n * n}")
    matrix = np.frombuffer(payload, dtype="<c16").reshape(n, n).astype(complex)

    sidecar = Path(f"{path}{HEADER_SUFFIX}")
    header = {}
    if sidecar.exists():
        header = parse_header(sidecar.read_text(encoding="utf-8").splitlines())
    else:
        logger.warning(f"No header file beside {path}, grid metadata unavailable")
    return matrix, header


def read_density_matrix(path: Path) -> PhotonDensityMatrix:
    """Load a density matrix written in either matrix format (binary detected by magic)."""
    try:
        with open(path, "rb") as handle:
            binary = handle.read(len(MAGIC)) == MAGIC
    except OSError as e:
        raise IoError(f"Cannot read {path}", reason=str(e))
    matrix, header = read_matrix_binary(path) if binary else read_matrix_text(path)
    if header.get("kind", "density_matrix") != "density_matrix":
        raise IoError(f"{path} does not hold a density matrix", kind=header.get("kind"))
    return pdm_from_header(header, matrix)


def write_columns(path: Path, header: str, columns: list[np.ndarray]) -> Path:
    try:
        np.savetxt(path, np.column_stack(columns), fmt="%.17g", header=header, comments="# ")
    except OSError as e:
        raise IoError(f"Cannot write {path}", reason=str(e))
    return path


def load_empirical_density(path: Path) -> tuple[EmpiricalDensity, float]:
    """
    Read a two-column file (position nm, density 1/nm) and return the
    normalized density in SI units together with the applied factor.
    """
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except OSError as e:
        raise IoError(f"Cannot read {path}", reason=str(e))
    except ValueError as e:
        raise IoError(f"Malformed density file {path}", reason=str(e))
    if data.shape[1] != 2:
        raise IoError(f"Density file {path} must have two columns", columns=data.shape[1])
    x = data[:, 0] * 1e-9
    rho = data[:, 1] * 1e9
    integral = np.trapezoid(rho, x)
    if not integral > 0:
        raise IoError(f"Density in {path} does not integrate to a positive value")
    factor = 1.0 / integral
    logger.info(f"Empirical density {path} renormalized by {factor:.6g}")
    return EmpiricalDensity(grid=x, density=rho * factor, normalization=float(factor)), float(factor)
