import pytest
from typer.testing import CliRunner

from app.main import app
from app.services.manifest import read_manifest

runner = CliRunner()

SCENARIO = """\
[scenario]
id = cli
outputs = density_matrix, report

[emitter]
variant = gaussian_pure
sigma_nm = 254

[kinematics]
kinetic_energy_ev = {energy}

[medium]
material = fused_silica

[detection]
lambda_min_nm = 400
lambda_max_nm = 700
n_points = {n_points}
"""


@pytest.fixture
def scenario_file(tmp_path):
    def write(energy="1e6", n_points=256):
        path = tmp_path / "cli.ini"
        path.write_text(SCENARIO.format(energy=energy, n_points=n_points))
        return path

    return write


def test_presets_list():
    result = runner.invoke(app, ["presets", "list"])
    assert result.exit_code == 0
    assert "fig3d" in result.stdout
    assert "fig4" in result.stdout


def test_presets_show():
    result = runner.invoke(app, ["presets", "show", "fig4"])
    assert result.exit_code == 0
    assert "pinem" in result.stdout


def test_presets_show_unknown():
    assert runner.invoke(app, ["presets", "show", "fig9"]).exit_code == 2


def test_validate_preset():
    result = runner.invoke(app, ["validate", "fig3d", "fig4"])
    assert result.exit_code == 0
    assert result.stdout.count("ok") == 2


def test_validate_bad_file(scenario_file):
    assert runner.invoke(app, ["validate", str(scenario_file(n_points=100))]).exit_code == 2


def test_simulate_writes_outputs(tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(app, ["simulate", "fig3d", "--out-dir", str(out), "--format", "both"])
    assert result.exit_code == 0
    for name in ("fig3d_density.txt", "fig3d_density.bin", "fig3d_density.bin.hdr", "fig3d_report.txt"):
        assert (out / name).exists()
    names = {name for name, _, _ in read_manifest(out / "fig3d_manifest.txt")}
    assert {"fig3d_density.txt", "fig3d_density.bin", "fig3d_report.txt"} <= names
    assert "Estimated size" in result.stdout


def test_simulate_below_threshold(tmp_path, scenario_file):
    result = runner.invoke(app, ["simulate", str(scenario_file(energy="1e4")), "--out-dir", str(tmp_path / "out")])
    assert result.exit_code == 3


def test_simulate_unknown_file_format(tmp_path):
    result = runner.invoke(app, ["simulate", "fig3d", "--out-dir", str(tmp_path), "--format", "hdf5"])
    assert result.exit_code == 2


def test_reconstruct_and_export(tmp_path, scenario_file):
    out = tmp_path / "out"
    assert runner.invoke(app, ["simulate", str(scenario_file()), "--out-dir", str(out)]).exit_code == 0
    matrix = out / "cli_density.txt"

    result = runner.invoke(
        app,
        [
            "reconstruct",
            str(matrix),
            "--material",
            "fused_silica",
            "--lambda-min-nm",
            "400",
            "--lambda-max-nm",
            "700",
            "--out-dir",
            str(tmp_path / "reports"),
        ],
    )
    assert result.exit_code == 0
    report = (tmp_path / "reports" / "cli_density_report.txt").read_text()
    assert "size_estimate_nm" in report
    assert "interaction_length_verdict = unchecked" in report

    result = runner.invoke(app, ["export", str(matrix), "--format", "spectrum", "--out-dir", str(tmp_path / "plots")])
    assert result.exit_code == 0
    assert (tmp_path / "plots" / "cli_density_spectrum.txt").exists()

    result = runner.invoke(app, ["export", str(matrix), "--target", "shockwave", "--format", "envelope", "--out-dir", str(tmp_path / "plots")])
    assert result.exit_code == 0
    assert (tmp_path / "plots" / "cli_density_envelope.txt").exists()


def test_export_unknown_format(tmp_path, scenario_file):
    out = tmp_path / "out"
    runner.invoke(app, ["simulate", str(scenario_file()), "--out-dir", str(out)])
    result = runner.invoke(app, ["export", str(out / "cli_density.txt"), "--format", "hologram", "--out-dir", str(out)])
    assert result.exit_code == 2


def test_reconstruct_missing_matrix(tmp_path):
    assert runner.invoke(app, ["reconstruct", str(tmp_path / "absent.txt")]).exit_code == 4
