from typing import Annotated

import typer
from rich.syntax import Syntax
from rich.table import Table

from app.config import PathsConfig
from app.services.scenarios import list_presets, load_config, resolve_config
from app.utils.cli import console, exit_on_error

presets = typer.Typer(help="Bundled example scenarios", no_args_is_help=True)


@presets.command("list")
def list_command():
    """List bundled presets."""
    table = Table(title="Presets")
    table.add_column("Name")
    table.add_column("Emitter")
    table.add_column("Description")
    with exit_on_error():
        for name in list_presets():
            config = load_config(PathsConfig.presets_dir / f"{name}.ini")
            table.add_row(name, config.emitter.variant, config.scenario.description)
    console.print(table)


@presets.command("show")
def show(name: Annotated[str, typer.Argument(help="Preset name")]):
    """Print a preset file."""
    with exit_on_error():
        path = resolve_config(name)
        console.print(Syntax(path.read_text(encoding="utf-8"), "ini"))
