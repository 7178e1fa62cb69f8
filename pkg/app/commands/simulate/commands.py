from pathlib import Path
from typing import Annotated

import typer
from rich.table import Table

from app.physics.reconstruction import size_from_coherence
from app.services.scenarios import load_config, resolve_config, run_scenario
from app.utils.cli import FORMAT_HELP, console, exit_on_error, output_dir


def simulate(
    scenario: Annotated[str, typer.Argument(help="Scenario file or preset name")],
    seed: Annotated[int | None, typer.Option("--seed", help="Override the scenario seed")] = None,
    out_dir: Annotated[Path | None, typer.Option("--out-dir", help="Output directory")] = None,
    file_format: Annotated[str, typer.Option("--format", help=FORMAT_HELP)] = "text",
):
    """Run a scenario and write its outputs and manifest."""
    with exit_on_error():
        path = resolve_config(scenario)
        config = load_config(path)
        result = run_scenario(config, output_dir(out_dir), file_format, seed, base_dir=path.parent)

    table = Table(title=f"Scenario {result.scenario_id}")
    table.add_column("File")
    table.add_column("Bytes", justify="right")
    for file in result.files + [result.manifest]:
        table.add_row(str(file), str(file.stat().st_size))
    console.print(table)
    if result.measurement is not None:
        size = size_from_coherence(result.measurement)
        console.print(f"Estimated size along the cone: [bold]{size * 1e9:.1f} nm[/]")
