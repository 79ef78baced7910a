import os
import sys
import logging
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from dotenv import load_dotenv

from src.errors import ModelInputError

load_dotenv()

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class PlausikitConfig(BaseModel):
    """
    Runtime configuration for plausikit.
    Every field can be overridden from the environment (or a local .env file).
    """
    # Environment values arrive as strings; validate_default lets pydantic coerce them
    model_config = ConfigDict(validate_default=True)

    # Base seed for property suites and for `gen` when a GenSpec has no seed
    seed: int = Field(
        default_factory=lambda: os.getenv("PLAUSIKIT_SEED", "20240601"),
        description="Base seed for random model generation"
    )
    pair_cap: int = Field(
        default_factory=lambda: os.getenv("PLAUSIKIT_PAIR_CAP", "4096"),
        ge=1,
        description="Largest definable pair family computed before giving up"
    )
    log_level: str = Field(
        default_factory=lambda: os.getenv("PLAUSIKIT_LOG_LEVEL", "WARNING"),
        description="Minimum level for plausikit loggers"
    )


def load_config() -> PlausikitConfig:
    """
    Read the configuration from the environment.

    Raises:
        ModelInputError: when a PLAUSIKIT_* variable does not parse.
    """
    try:
        return PlausikitConfig()
    except ValidationError as e:
        fields = ", ".join(f"PLAUSIKIT_{str(err['loc'][0]).upper()}" for err in e.errors())
        raise ModelInputError(f"invalid configuration in {fields}: {e.errors()[0]['msg']}") from e


def configure_logging(level: str = "WARNING") -> None:
    """
    Route every plausikit logger to stderr; stdout is reserved for verdicts.
    """
    root = logging.getLogger("plausikit")
    root.setLevel(getattr(logging, level.upper(), logging.WARNING))
    # Replace our own handler so it writes to the current sys.stderr
    for old in [h for h in root.handlers if getattr(h, "_plausikit", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._plausikit = True
    root.addHandler(handler)
