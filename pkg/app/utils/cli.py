from contextlib import contextmanager
from pathlib import Path

import typer
from rich.console import Console

from app.config import PathsConfig
from app.errors import ConfigError, IoError, QCherenkovError
from app.utils.logger import logger

console = Console()
err_console = Console(stderr=True)

FORMAT_HELP = "Matrix file format: text, binary or both"


@contextmanager
def exit_on_error():
    """Translate package errors into CLI exit codes with a readable message."""
    try:
        yield
    except QCherenkovError as e:
        err_console.print(f"[bold red]{type(e).__name__}[/]: {e}")
        if isinstance(e, ConfigError):
            for line in e.diagnostics:
                err_console.print(f"  {line}")
        logger.debug(f"Exit {e.exit_code} after {type(e).__name__}")
        raise typer.Exit(code=e.exit_code)
    except OSError as e:
        err_console.print(f"[bold red]IoError[/]: {e}")
        raise typer.Exit(code=IoError.exit_code)


def output_dir(value: Path | None) -> Path:
    return value if value is not None else PathsConfig.output_dir
