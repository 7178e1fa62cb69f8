import hashlib
import struct

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.errors import ConfigError, IoError, UnknownFormat
from app.physics.emitter import Z_HAT, EmpiricalDensity, gaussian_state, projected_density
from app.physics.radiation import spectral_autocorrelation, temporal_autocorrelation
from app.services import formats
from app.services.export import DENSITY_FORMATS, ENVELOPE_HEADER, export_plotdata
from app.services.manifest import SCALE_NOTE, read_manifest, write_manifest
from app.services.materials import get_material, load_materials, material_names


@pytest.fixture(scope="module")
def profile(small_pdm):
    return temporal_autocorrelation(small_pdm)


@pytest.fixture(scope="module")
def small_pdm(silica, kin, small_window):
    return spectral_autocorrelation(gaussian_state(254e-9), kin, silica, small_window)


# Matrix files


def test_text_round_trip_is_bit_exact(small_pdm, tmp_path):
    path = formats.write_matrix_text(tmp_path / "m.txt", small_pdm.matrix, formats.pdm_header(small_pdm))
    loaded = formats.read_density_matrix(path)
    assert np.array_equal(loaded.matrix, small_pdm.matrix)
    assert np.array_equal(loaded.omega_grid, small_pdm.omega_grid)
    assert np.array_equal(loaded.acceptance, small_pdm.acceptance)
    assert loaded.omega_0 == small_pdm.omega_0
    assert loaded.group_velocity == small_pdm.group_velocity
    assert loaded.emitter_hash == small_pdm.emitter_hash


def test_binary_layout(small_pdm, tmp_path):
    path = formats.write_matrix_binary(tmp_path / "m.bin", small_pdm.matrix, formats.pdm_header(small_pdm))
    data = path.read_bytes()
    n = small_pdm.n_points
    assert data[:4] == b"CQCL"
    assert struct.unpack("<HI", data[4:10]) == (1, n)
    assert len(data) == 10 + 16 * n * n
    assert np.array_equal(np.frombuffer(data[10:], dtype="<c16").reshape(n, n), small_pdm.matrix)
    assert (tmp_path / "m.bin.hdr").exists()


def test_binary_round_trip(small_pdm, tmp_path):
    path = formats.write_matrix_binary(tmp_path / "m.bin", small_pdm.matrix, formats.pdm_header(small_pdm))
    loaded = formats.read_density_matrix(path)
    assert np.array_equal(loaded.matrix, small_pdm.matrix)
    assert loaded.r_hat_c == pytest.approx(small_pdm.r_hat_c)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda data: b"XXXX" + data[4:],
        lambda data: data[:4] + struct.pack("<H", 2) + data[6:],
        lambda data: data[:-16],
        lambda data: data[:6],
    ],
)
def test_binary_corruption(small_pdm, tmp_path, mutate):
    path = formats.write_matrix_binary(tmp_path / "m.bin", small_pdm.matrix, formats.pdm_header(small_pdm))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(IoError):
        formats.read_matrix_binary(path)


def test_binary_without_header_has_no_grid(small_pdm, tmp_path):
    path = formats.write_matrix_binary(tmp_path / "m.bin", small_pdm.matrix, formats.pdm_header(small_pdm))
    (tmp_path / "m.bin.hdr").unlink()
    matrix, header = formats.read_matrix_binary(path)
    assert header == {}
    with pytest.raises(IoError):
        formats.read_density_matrix(path)
    assert matrix.shape == small_pdm.matrix.shape


def test_malformed_text_matrix(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# kind = density_matrix\n1.0 0.0 2.0 0.0\n")
    with pytest.raises(IoError):
        formats.read_matrix_text(path)


def test_missing_matrix_file(tmp_path):
    with pytest.raises(IoError):
        formats.read_density_matrix(tmp_path / "absent.txt")


def test_temporal_matrix_is_not_a_density_matrix(profile, tmp_path):
    stem = tmp_path / "run"
    path = export_plotdata(profile, "matrix-text", stem)
    with pytest.raises(IoError):
        formats.read_density_matrix(path)


def test_header_round_trip():
    header = {"kind": "density_matrix", "omega_0": 3.7e15, "r_hat_c": np.array([0.5, 0.0, 0.75])}
    parsed = formats.parse_header(formats.format_header(header).splitlines())
    assert parsed["kind"] == "density_matrix"
    assert float(parsed["omega_0"]) == 3.7e15
    assert parsed["r_hat_c"] == "0.5 0.0 0.75"


# Empirical densities


def test_load_empirical_density(tmp_path):
    x_nm = np.linspace(-2000, 2000, 1024)
    rho = 3.0 * np.exp(-0.5 * (x_nm / 200) ** 2)
    path = tmp_path / "density.txt"
    np.savetxt(path, np.column_stack([x_nm, rho]), header="x[nm] rho[1/nm]")
    state, factor = formats.load_empirical_density(path)
    assert isinstance(state, EmpiricalDensity)
    assert np.trapezoid(state.density, state.grid) == pytest.approx(1.0, abs=1e-9)
    assert factor == pytest.approx(1 / np.trapezoid(rho, x_nm))
    assert state.normalization == factor
    assert_allclose(projected_density(state, Z_HAT, state.grid), state.density, rtol=1e-9)


def test_empirical_density_needs_two_columns(tmp_path):
    path = tmp_path / "density.txt"
    np.savetxt(path, np.ones((10, 3)))
    with pytest.raises(IoError):
        formats.load_empirical_density(path)


# Exports


def test_envelope_export(profile, tmp_path):
    path = export_plotdata(profile, "envelope", tmp_path / "run")
    assert path.name == "run_envelope.txt"
    lines = path.read_text().splitlines()
    assert lines[0] == f"# {ENVELOPE_HEADER}"
    data = np.loadtxt(path)
    assert data.shape == (profile.time_grid.size, 3)
    assert_allclose(data[:, 0], profile.time_grid, rtol=1e-15)
    assert_allclose(data[:, 2], np.abs(profile.g1_values), rtol=1e-15)


def test_spectrum_export(small_pdm, tmp_path):
    path = export_plotdata(small_pdm, "spectrum", tmp_path / "run")
    data = np.loadtxt(path)
    assert data.shape == (small_pdm.n_points, 3)
    assert_allclose(data[:, 2], np.real(np.diag(small_pdm.matrix)), rtol=1e-15)


@pytest.mark.parametrize("tag", DENSITY_FORMATS)
def test_density_exports_write_files(small_pdm, tmp_path, tag):
    assert export_plotdata(small_pdm, tag, tmp_path / "run").exists()


def test_unknown_export_format(small_pdm, profile, tmp_path):
    with pytest.raises(UnknownFormat) as excinfo:
        export_plotdata(small_pdm, "png", tmp_path / "run")
    assert "matrix-text" in excinfo.value.context["supported"]
    with pytest.raises(UnknownFormat):
        export_plotdata(profile, "spectrum", tmp_path / "run")


# Manifest


def test_manifest(tmp_path):
    first = tmp_path / "a.txt"
    first.write_text("alpha\n")
    second = tmp_path / "b.bin"
    second.write_bytes(b"\x00\x01")
    path = write_manifest(tmp_path, "demo", [first, second])
    assert path.name == "demo_manifest.txt"
    text = path.read_text()
    assert f"# note = {SCALE_NOTE}" in text
    entries = read_manifest(path)
    assert entries == [
        ("a.txt", 6, hashlib.sha256(b"alpha\n").hexdigest()),
        ("b.bin", 2, hashlib.sha256(b"\x00\x01").hexdigest()),
    ]


# Materials


def test_material_registry():
    assert {"fused_silica", "n_bk7", "water_const", "vacuum"} <= set(material_names())
    assert get_material("water_const").is_constant
    with pytest.raises(ConfigError):
        get_material("unobtainium")


def test_material_registry_validation(tmp_path):
    path = tmp_path / "materials.ini"
    path.write_text("[broken]\nsellmeier_B = 1, 0, 0\nrange_nm = 200, 2000\n\n[extra]\nn_const = 1.5\nrange_nm = 200, 2000\ncolour = blue\n")
    with pytest.raises(ConfigError) as excinfo:
        load_materials(path)
    joined = "\n".join(excinfo.value.diagnostics)
    assert "broken" in joined
    assert "extra.colour" in joined


def test_material_registry_missing(tmp_path):
    with pytest.raises(IoError):
        load_materials(tmp_path / "absent.ini")
