#!/usr/bin/env python3
"""
config.py - Centralized configuration management
"""

import os
from dataclasses import dataclass, field

from errors import ConfigError

TOOLKIT_VERSION = "0.1.0"


@dataclass
class CapSettings:
    """Size guards for materialized bases, decoder search and exact MI"""
    basis_cap: int = 10**6
    decode_cap: int = 10**8
    mutual_info_cap: int = 10**5


@dataclass
class ToolkitConfig:
    """Toolkit configuration"""
    output_folder: str = "outputs"
    log_level: str = "INFO"
    ser_block_size: int = 2000
    caps: CapSettings = field(default_factory=CapSettings)


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(float(raw))
    except (ValueError, OverflowError):
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def get_config() -> ToolkitConfig:
    """Get toolkit configuration from environment variables"""

    caps = CapSettings(
        basis_cap=_int_env("ALIGN_BASIS_CAP", 10**6),
        decode_cap=_int_env("ALIGN_DECODE_CAP", 10**8),
        mutual_info_cap=_int_env("ALIGN_MI_CAP", 10**5),
    )

    return ToolkitConfig(
        output_folder=os.environ.get("OUT_DIR", "outputs"),
        log_level=os.environ.get("LOG_LEVEL", "INFO"),
        ser_block_size=_int_env("ALIGN_SER_BLOCK", 2000),
        caps=caps,
    )


# Global config instance
config = get_config()
