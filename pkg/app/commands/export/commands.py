from pathlib import Path
from typing import Annotated

import typer

from app.errors import UnknownFormat
from app.physics.radiation import temporal_autocorrelation
from app.services.export import DENSITY_FORMATS, PROFILE_FORMATS, export_plotdata
from app.services.formats import read_density_matrix
from app.utils.cli import console, exit_on_error, output_dir


def export(
    artifact: Annotated[Path, typer.Argument(help="Density matrix file (text or binary)")],
    tag: Annotated[
        str,
        typer.Option(
            "--format",
            help=f"density: {', '.join(DENSITY_FORMATS)}; shockwave: {', '.join(PROFILE_FORMATS)}",
        ),
    ] = "matrix-text",
    target: Annotated[str, typer.Option("--target", help="density or shockwave")] = "density",
    out_dir: Annotated[Path | None, typer.Option("--out-dir", help="Output directory")] = None,
):
    """Export plot-ready data from a stored density matrix."""
    with exit_on_error():
        if target not in ("density", "shockwave"):
            raise UnknownFormat(f"Unknown export target '{target}'", supported=("density", "shockwave"))
        pdm = read_density_matrix(artifact)
        item = temporal_autocorrelation(pdm) if target == "shockwave" else pdm
        directory = output_dir(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        written = export_plotdata(item, tag, directory / artifact.stem)
    console.print(f"Wrote {written}")
