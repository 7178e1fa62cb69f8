import typer

from app.config import CliConfig, ENV
from app.utils.logger import logger

from app.commands.simulate.commands import simulate
from app.commands.reconstruct.commands import reconstruct
from app.commands.validate.commands import validate
from app.commands.presets.commands import presets
from app.commands.export.commands import export

# Initialize Typer application
app = typer.Typer(**CliConfig.dict())


@app.callback()
def main():
    if ENV.startswith("dev"):
        logger.debug(f"{CliConfig.name} {CliConfig.version} in {ENV} mode")


# Commands
app.command("simulate")(simulate)
app.command("reconstruct")(reconstruct)
app.command("validate")(validate)
app.command("export")(export)
app.add_typer(presets, name="presets")
