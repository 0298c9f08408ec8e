"""Project configuration loader: YAML settings plus environment variables."""

import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

from convertible.errors import ParameterError

load_dotenv()

PROJECT_ROOT = Path(__file__).parent.parent.parent
CONFIG_PATH = Path(__file__).parent / "settings.yaml"


def load_settings(path: Path = CONFIG_PATH) -> dict:
    with open(path) as f:
        return yaml.safe_load(f)


def get_runtime_config() -> dict:
    """Settings that may be overridden per run from the environment (or a .env file)."""
    return {
        "field_bits": int(os.getenv("CONVERTIBLE_FIELD_BITS", SETTINGS["field"]["default_bits"])),
        "seed": int(os.getenv("CONVERTIBLE_SEED", SETTINGS["codes"]["seed"])),
        "log_level": os.getenv("CONVERTIBLE_LOG_LEVEL", SETTINGS["logging"]["level"]),
        "chunk_symbols": int(
            os.getenv("CONVERTIBLE_CHUNK_SYMBOLS", SETTINGS["storage"]["chunk_symbols"])
        ),
    }


def field_polynomial(bits: int) -> int:
    """Reduction polynomial configured for GF(2^bits)."""
    try:
        return int(SETTINGS["field"]["polynomials"][bits])
    except KeyError:
        raise ParameterError(f"no reduction polynomial configured for w={bits}") from None


SETTINGS = load_settings()
