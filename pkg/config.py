"""
Centralized configuration for nslfa.

Loads environment variables and provides typed configuration objects.
Per-run settings (fit, optimizer, scenario) live in pydantic models next to
the code that consumes them; this module only carries process-wide knobs.
"""

import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

VERSION = "0.1.0"


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).lower() in ("1", "true", "yes")


@dataclass
class RuntimeConfig:
    """Process runtime configuration."""

    # -1 means "all cores" (joblib convention)
    threads: int = field(default_factory=lambda: int(
        os.getenv("NSLFA_THREADS", "-1")))
    log_level: str = field(
        default_factory=lambda: os.getenv("NSLFA_LOG_LEVEL", "INFO"))
    log_json: bool = field(
        default_factory=lambda: _env_bool("NSLFA_LOG_JSON"))
    output_dir: str = field(
        default_factory=lambda: os.getenv("NSLFA_OUTPUT_DIR", "out"))


@dataclass
class BoundsConfig:
    """Row-norm bounds for factor scores and loadings."""

    x_bound: float = field(default_factory=lambda: float(
        os.getenv("NSLFA_BOUND_X", "2.5")))
    a_bound: float = field(default_factory=lambda: float(
        os.getenv("NSLFA_BOUND_A", "2.5")))


@dataclass
class NumericsConfig:
    """Numerical safeguards shared by the GP and estimator packages."""

    jitter_start: float = 1e-10
    jitter_stop: float = 1e-6
    sigma2_floor_ratio: float = 1e-6
    condition_warning: float = 1e12
    # support of the uniform prior on log w, log tau and the noise coordinate
    log_theta_bound: float = field(default_factory=lambda: float(
        os.getenv("NSLFA_LOG_THETA_BOUND", "25.0")))


@dataclass
class Config:
    """
    Root configuration object aggregating all config sections.

    Usage:
        from config import config
        n_jobs = config.runtime.threads
    """

    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)

    def validate(self) -> list[str]:
        """
        Validate configuration and return list of warnings.

        Returns:
            List of validation messages (empty if all valid)
        """
        warnings = []

        if self.runtime.threads == 0 or self.runtime.threads < -1:
            warnings.append(
                f"NSLFA_THREADS={self.runtime.threads} is invalid - using 1")
            self.runtime.threads = 1

        if self.bounds.x_bound <= 0 or self.bounds.a_bound <= 0:
            warnings.append("Row-norm bounds must be positive - resetting to 2.5")
            self.bounds.x_bound = self.bounds.a_bound = 2.5

        if self.runtime.log_level.upper() not in (
                "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            warnings.append(
                f"Unknown NSLFA_LOG_LEVEL={self.runtime.log_level} - using INFO")
            self.runtime.log_level = "INFO"

        return warnings


# Global config instance - import and use this
config = Config()
