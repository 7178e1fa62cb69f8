from pathlib import Path
from typing import Annotated

import numpy as np
import typer
from rich.table import Table

from app.physics.reconstruction import multi_cone_fit, size_from_coherence, write_report
from app.services.scenarios import reconstruct_file
from app.utils.cli import console, exit_on_error


def reconstruct(
    matrices: Annotated[list[Path], typer.Argument(help="Density matrix files (text or binary), one per cone")],
    convention: Annotated[str, typer.Option("--convention", help="Width convention: sigma or fwhm")] = "sigma",
    material: Annotated[str | None, typer.Option("--material", help="Radiator, for the interaction-length check")] = None,
    lambda_min_nm: Annotated[float | None, typer.Option("--lambda-min-nm")] = None,
    lambda_max_nm: Annotated[float | None, typer.Option("--lambda-max-nm")] = None,
    interaction_length_um: Annotated[float | None, typer.Option("--interaction-length-um")] = None,
    out_dir: Annotated[Path | None, typer.Option("--out-dir", help="Write reports here instead of printing")] = None,
    strict: Annotated[bool, typer.Option("--strict", help="Fail on negative variances")] = False,
):
    """Estimate emitter size from stored density matrices; two or more cones give a multi-cone fit."""
    band = None
    if lambda_min_nm is not None and lambda_max_nm is not None:
        band = (lambda_min_nm * 1e-9, lambda_max_nm * 1e-9)
    length = None if interaction_length_um is None else interaction_length_um * 1e-6

    with exit_on_error():
        measurements = []
        for path in matrices:
            text, measurement = reconstruct_file(path, convention, band, material, length)
            measurements.append(measurement)
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
                write_report(out_dir / f"{path.stem}_report.txt", text)
            else:
                console.print(text)
        result = multi_cone_fit(measurements, strict=strict) if len(measurements) > 1 else None

    table = Table(title="Reconstruction")
    table.add_column("Matrix")
    table.add_column("theta_c [deg]", justify="right")
    table.add_column("size [nm]", justify="right")
    for path, m in zip(matrices, measurements):
        table.add_row(path.name, f"{np.rad2deg(m.theta_c):.3f}", f"{size_from_coherence(m) * 1e9:.1f}")
    console.print(table)
    if result is not None:
        parallel, perpendicular = result.sizes
        console.print(
            f"parallel = {parallel * 1e9:.1f} nm, perpendicular = {perpendicular * 1e9:.1f} nm, "
            f"residual = {result.residual:.2e}, condition = {result.condition:.1f}"
        )
        if result.negative_variance:
            console.print("[yellow]negative variance clamped to zero[/]")
