"""
hyperlag configuration

Environment settings (log level, default output directory, post-step
admissibility assertions) are read from the environment or a .env file.
Run configurations are versioned YAML files validated into pydantic models.
"""

import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from hyperlag.errors import ConfigurationError
from hyperlag.solver.boundary import BcDescriptor

# Load environment variables from .env file if it exists
load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Output
    HYPERLAG_OUTPUT_DIR: str = os.getenv("HYPERLAG_OUTPUT_DIR", "output")

    class Config:
        case_sensitive = True
        env_file = ".env"


@lru_cache()
def get_settings() -> Settings:
    return Settings()


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MeshGenerateConfig(_Block):
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0
    nx: int = Field(gt=0)
    ny: int = Field(gt=0)
    pattern: Literal["right", "left", "alternate"] = "alternate"


class MeshConfig(_Block):
    path: Optional[str] = None
    generate: Optional[MeshGenerateConfig] = None
    refine: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _one_source(self) -> "MeshConfig":
        if self.path is not None and self.generate is not None:
            raise ValueError("mesh takes either 'path' or 'generate', not both")
        return self


class MaterialConfig(_Block):
    rho0: float = Field(gt=0)
    E: float = Field(ge=0)
    nu: float = Field(gt=-1.0, lt=0.5)
    a: float = Field(-1.0, ge=-1.0, le=0.5)
    eos: Literal["neo_hookean_volumetric", "stiffened_gas"] = "neo_hookean_volumetric"
    gamma: float = Field(1.4, gt=1.0)
    p_inf: float = 0.0


class BoundaryConfig(_Block):
    kind: Literal["free_traction", "prescribed_traction", "prescribed_velocity", "symmetry_plane",
                  "symmetry_line", "fixed_point", "evolving_contact"]
    velocity: Optional[List[float]] = Field(None, min_length=2, max_length=2)
    normal_only: bool = False
    traction: Optional[List[List[float]]] = None
    direction: Optional[List[float]] = Field(None, min_length=2, max_length=2)
    wall_point: List[float] = Field(default_factory=lambda: [0.0, 0.0], min_length=2, max_length=2)
    wall_normal: Optional[List[float]] = Field(None, min_length=2, max_length=2)
    threshold: float = Field(1e-12, gt=0)

    def to_descriptor(self) -> BcDescriptor:
        return BcDescriptor(
            kind=self.kind,
            velocity=self.velocity,
            normal_only=self.normal_only,
            traction=self.traction,
            direction=self.direction,
            wall_point=self.wall_point,
            wall_normal=self.wall_normal,
            threshold=self.threshold,
        )


class TimeConfig(_Block):
    t_final: Optional[float] = Field(None, ge=0)
    cfl: float = Field(0.4, gt=0, le=1)
    c_v: float = Field(0.2, gt=0, le=1)
    c_i: float = Field(0.1, gt=0, le=1)
    max_steps: Optional[int] = Field(None, gt=0)


class MoodConfig(_Block):
    cascade: Literal["P1-P1BJ-P0", "P1-P0"] = "P1-P1BJ-P0"
    delta0: float = Field(1e-4, gt=0)
    delta1: float = Field(1e-3, gt=0)
    rdmp_variable: Literal["density", "none"] = "density"
    check_involution: bool = True
    energy_tolerance: float = Field(1e-8, ge=0)


class PredictorConfig(_Block):
    iterations: int = Field(2, ge=1)
    tolerance: float = Field(1e-12, ge=0)


class OutputConfig(_Block):
    directory: Optional[str] = None
    every: int = Field(0, ge=0)
    times: Optional[List[float]] = None
    vtk: bool = True


class TestCaseConfig(_Block):
    __test__ = False  # not a pytest class

    name: Literal["swinging_plate", "beryllium_plate", "cantilever_beam", "uniform_block", "contact_drop"]
    params: Dict[str, Any] = Field(default_factory=dict)


class RunConfig(_Block):
    """A complete run description."""
    version: Literal[1]
    testcase: TestCaseConfig
    mesh: Optional[MeshConfig] = None
    material: Optional[MaterialConfig] = None
    boundary: Dict[int, BoundaryConfig] = Field(default_factory=dict)
    time: TimeConfig = Field(default_factory=TimeConfig)
    mood: MoodConfig = Field(default_factory=MoodConfig)
    predictor: PredictorConfig = Field(default_factory=PredictorConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def parse_config(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a configuration mapping.

    Raises:
        ConfigurationError: with the validation messages
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration must be a mapping, got {type(data).__name__}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and validate a YAML run configuration.

    Raises:
        ConfigurationError: unreadable file, bad YAML or invalid values
    """
    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Malformed YAML in {path}: {e}") from e
    config = parse_config(data)
    logger.debug(f"Loaded configuration {path}: test case {config.testcase.name}")
    return config
