from typing import Annotated

import typer

from app.services.scenarios import resolve_config, validate_config
from app.utils.cli import console, exit_on_error


def validate(
    scenarios: Annotated[list[str], typer.Argument(help="Scenario files or preset names")],
):
    """Check scenarios against the schema and the physics lint without running them."""
    with exit_on_error():
        for scenario in scenarios:
            path = resolve_config(scenario)
            notes = validate_config(path)
            console.print(f"[green]ok[/] {path}")
            for note in notes:
                console.print(f"  {note}")
