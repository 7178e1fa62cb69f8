import os

from pathlib import Path
from dotenv import load_dotenv
from app.utils.logger import logger, setup_logger

load_dotenv()

ENV = os.getenv("QCH_ENV", "dev")
if ENV.startswith("dev"):
    logger.warning(f"Running in {ENV} mode!")

PACKAGE_DIR = Path(__file__).resolve().parent


def load_cli_description() -> str:
    return (PACKAGE_DIR / "docs" / "cli_description.md").read_text(encoding="utf-8")


class CliConfig:
    name = os.getenv("QCH_CLI_NAME", "qcherenkov")
    version = os.getenv("QCH_VERSION", "v1.0.0")

    @classmethod
    def dict(cls):
        return {
            "name": cls.name,
            "help": load_cli_description(),
            "no_args_is_help": True,
            "add_completion": False,
        }


class LogConfig:
    level = os.getenv("QCH_LOG_LEVEL", "INFO")


setup_logger(LogConfig.level)


class NumericsConfig:
    # zero-padding factor of the frequency axis before the time transform
    oversample = int(os.getenv("QCH_OVERSAMPLE", "4"))
    pinem_n_max_cap = int(os.getenv("QCH_PINEM_NMAX_CAP", "60"))
    pinem_truncation = float(os.getenv("QCH_PINEM_TRUNCATION", "1e-8"))
    psd_tolerance = 1e-10
    hermitian_tolerance = 1e-12
    quadrature_max_points = int(os.getenv("QCH_QUADRATURE_MAX_POINTS", "256"))
    acceptance_floor = 1e-3
    # coherence profile points with |T| below this are not used for fitting
    profile_floor = 1e-3


class PathsConfig:
    data_dir = PACKAGE_DIR / "data"
    materials_file = Path(os.getenv("QCH_MATERIALS_FILE", str(data_dir / "materials.ini")))
    presets_dir = data_dir / "presets"
    output_dir = Path(os.getenv("QCH_OUTPUT_DIR", "out"))
