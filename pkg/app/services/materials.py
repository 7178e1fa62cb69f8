import configparser
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from app.config import PathsConfig
from app.errors import ConfigError, IoError
from app.physics.medium import DispersionModel, constant_model
from app.utils.logger import logger


def _floats(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(v) for v in value.split(",") if v.strip())
    return tuple(float(v) for v in value)


class MaterialEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    description: str = ""
    sellmeier_B: tuple[float, float, float] | None = None
    sellmeier_C: tuple[float, float, float] | None = None
    n_const: float | None = None
    range_nm: tuple[float, float]

    @field_validator("sellmeier_B", "sellmeier_C", "range_nm", mode="before")
    @classmethod
    def split_list(cls, value):
        return None if value is None else _floats(value)

    @model_validator(mode="after")
    def one_model(self):
        sellmeier = self.sellmeier_B is not None and self.sellmeier_C is not None
        if sellmeier == (self.n_const is not None):
            raise ValueError("give either sellmeier_B and sellmeier_C, or n_const")
        if not 0 < self.range_nm[0] < self.range_nm[1]:
            raise ValueError("range_nm must be increasing and positive")
        return self

    def to_model(self) -> DispersionModel:
        valid_range = (self.range_nm[0] * 1e-9, self.range_nm[1] * 1e-9)
        if self.n_const is not None:
            return constant_model(self.n_const, valid_range, self.name)
        return DispersionModel(self.name, self.sellmeier_B, self.sellmeier_C, valid_range)


def load_materials(path: Path | None = None) -> dict[str, MaterialEntry]:
    """Read and validate a material registry file."""
    path = path or PathsConfig.materials_file
    parser = configparser.ConfigParser(interpolation=None)
    # Sellmeier keys are case sensitive
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as e:
        raise IoError(f"Cannot read material registry {path}", reason=str(e))
    except configparser.Error as e:
        raise ConfigError(f"Malformed material registry {path}", diagnostics=[str(e)])

    entries, diagnostics = {}, []
    for section in parser.sections():
        try:
            entries[section] = MaterialEntry(name=section, **dict(parser[section]))
        except ValidationError as e:
            for error in e.errors():
                where = ".".join(str(p) for p in error["loc"]) or "entry"
                diagnostics.append(f"{section}.{where}: {error['msg']}")
    if diagnostics:
        raise ConfigError(f"Invalid material registry {path}", diagnostics=diagnostics)
    logger.debug(f"Loaded {len(entries)} materials from {path}")
    return entries


@lru_cache
def _default_registry() -> dict[str, MaterialEntry]:
    return load_materials(PathsConfig.materials_file)


def material_names() -> list[str]:
    return sorted(_default_registry())


def get_material(name: str) -> DispersionModel:
    registry = _default_registry()
    if name not in registry:
        raise ConfigError(f"Unknown material '{name}'", diagnostics=[f"medium.material: known are {sorted(registry)}"])
    return registry[name].to_model()
