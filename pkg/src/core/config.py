"""Run configuration.

Sources, highest priority first: keyword arguments built from command-line flags,
then the optional ``--config`` JSON file. Environment variables are not read.
"""

import hashlib
import json
from collections.abc import Generator
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from ..corpus.synthetic import SyntheticSpec
from ..models.captioner import CaptionerConfig
from ..models.purport import PurportConfig
from ..models.vlcmu import VLCMUConfig
from ..pipeline.config import InferenceConfig, TrainConfig

RUN_CONFIG_FILE = "run_config.json"

_config_file: ContextVar[Path | None] = ContextVar("config_file", default=None)


class LoggingSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    format: Literal["json", "console"] = "json"


class PathSettings(BaseModel):
    """Inputs a command read; outputs sit next to the saved config."""

    model_config = ConfigDict(extra="forbid")

    corpus: str | None = None
    model: str | None = None
    synopses: list[str] = Field(default_factory=list)
    references: str | None = None


class RunConfig(BaseSettings):
    """Everything needed to reproduce a command's outputs."""

    model_config = SettingsConfigDict(extra="forbid", case_sensitive=True)

    app_name: str = "text-synopsis-generator"
    app_version: str = "0.1.0"

    synthetic: SyntheticSpec | None = None
    captioner: CaptionerConfig = Field(default_factory=CaptionerConfig)
    vlcmu: VLCMUConfig = Field(default_factory=VLCMUConfig)
    purport: PurportConfig = Field(default_factory=PurportConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    inference: InferenceConfig = Field(default_factory=InferenceConfig)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    paths: PathSettings = Field(default_factory=PathSettings)

    # Held-out videos of the training run, read back by inference
    held_out: list[str] = Field(default_factory=list)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        path = _config_file.get()
        if path is None:
            return (init_settings,)
        return (init_settings, JsonConfigSettingsSource(settings_cls, json_file=path))

    @classmethod
    def load(cls, path: Path | None = None, **overrides: Any) -> "RunConfig":
        """Resolve a config from an optional JSON file and flag overrides."""
        with _use_config_file(path):
            return cls(**overrides)

    @property
    def seed(self) -> int:
        return self.train.seed

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of every setting that affects outputs."""
        payload = self.model_dump(mode="json", exclude={"logging", "paths"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def save(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / RUN_CONFIG_FILE
        path.write_text(self.model_dump_json(indent=2) + "\n")
        return path

    @classmethod
    def read(cls, directory: Path) -> "RunConfig":
        """Load a previously saved run_config.json without other sources."""
        return cls.load(directory / RUN_CONFIG_FILE)


@contextmanager
def _use_config_file(path: Path | None) -> Generator[None, None, None]:
    token = _config_file.set(path)
    try:
        yield
    finally:
        _config_file.reset(token)

