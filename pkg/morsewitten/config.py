"""
Configuration management for morse-witten-lab.

Numerical tolerances, solver limits, logging and harness options are read
from environment variables (and an optional ``.env`` file), with typed
defaults and validation. Experiment files are separate and live in
:mod:`morsewitten.models.experiment`.
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LandscapeSettings(BaseSettings):
    """Critical point search and Hessian tolerances."""

    newton_tol: float = Field(default=1e-12, gt=0, description="Gradient norm accepted as a root")
    newton_max_iter: int = Field(default=60, ge=1)
    merge_factor: float = Field(default=1e-8, gt=0, description="Merge tolerance relative to the domain diameter")
    degeneracy_factor: float = Field(default=1e-8, gt=0, description="Relative to max |Hessian entry|")
    value_factor: float = Field(default=1e-9, gt=0, description="Relative to max f - min f")
    symmetry_tol: float = Field(default=1e-12, gt=0)
    jacobi_max_sweeps: int = Field(default=50, ge=1)

    model_config = SettingsConfigDict(env_prefix="MW_LANDSCAPE_")


class PersistenceSettings(BaseSettings):
    """Filtration, reduction and matching options."""

    noise_floor_factor: float = Field(default=2.0, ge=0)
    match_tol_factor: float = Field(default=10.0, gt=0)
    oracle_max_cells: int = Field(default=5000, ge=1)
    max_grid_cells: int = Field(default=10**7, ge=1)

    model_config = SettingsConfigDict(env_prefix="MW_PERSISTENCE_")


class SpectralSettings(BaseSettings):
    """Witten operator assembly and eigen solver options."""

    eig_floor_factor: float = Field(default=1e-8, gt=0)
    dense_max_unknowns: int = Field(default=4096, ge=1)
    weight_guard: float = Field(default=5.0, gt=0, description="Max |f difference| / h across one incidence")
    shift_factor: float = Field(default=1e-12, gt=0)
    residual_factor: float = Field(default=1e-10, gt=0)
    psd_factor: float = Field(default=1e-10, gt=0)
    symmetry_factor: float = Field(default=1e-13, gt=0)
    kernel_factor: float = Field(default=1e-12, gt=0)
    cg_rtol: float = Field(default=1e-13, gt=0)
    cg_residual_tol: float = Field(default=1e-9, gt=0, description="Max true relative residual of a CG solve")
    max_iterations: int = Field(default=5000, ge=1)
    extra_vectors: int = Field(default=2, ge=0, description="Eigenpairs beyond m_p requested in sweeps")

    model_config = SettingsConfigDict(env_prefix="MW_SPECTRAL_")


class AsymptoticsSettings(BaseSettings):
    """Prediction options."""

    h_max_factor: float = Field(default=0.3, gt=0)
    error_band: float = Field(default=1.5, gt=0, description="C in the 1 +/- C h acceptance band")
    default_kappa: float = Field(default=1.0)

    model_config = SettingsConfigDict(env_prefix="MW_ASYMPTOTICS_")

    @field_validator("default_kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        """Kappa is a nonzero real."""
        if v == 0:
            raise ValueError("default_kappa must be nonzero")
        return v


class LoggingSettings(BaseSettings):
    """Logging configuration settings."""

    level: str = Field(default="INFO", description="Log level")
    format: str = Field(default="console", description="Log format (json or console)")
    file_path: Optional[str] = Field(default=None, description="Optional rotating log file")
    max_size_mb: int = Field(default=10, ge=1)
    backup_count: int = Field(default=3, ge=0)

    model_config = SettingsConfigDict(env_prefix="MW_LOG_")

    @field_validator("level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"level must be one of {valid_levels}")
        return v.upper()

    @field_validator("format")
    @classmethod
    def validate_format(cls, v: str) -> str:
        """Validate log format."""
        if v not in ("json", "console"):
            raise ValueError("format must be 'json' or 'console'")
        return v


class HarnessSettings(BaseSettings):
    """Pipeline and output options."""

    output_dir: str = Field(default="./results")
    max_workers: int = Field(default=4, ge=1)
    float_format: str = Field(default="%.17g")
    write_html_report: bool = Field(default=False)

    model_config = SettingsConfigDict(env_prefix="MW_HARNESS_")


class Settings(BaseSettings):
    """Main settings class that combines all configuration sections."""

    app_name: str = Field(default="morse-witten-lab")
    app_version: str = Field(default="0.1.0")

    landscape: LandscapeSettings = Field(default_factory=LandscapeSettings)
    persistence: PersistenceSettings = Field(default_factory=PersistenceSettings)
    spectral: SpectralSettings = Field(default_factory=SpectralSettings)
    asymptotics: AsymptoticsSettings = Field(default_factory=AsymptoticsSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)

    model_config = SettingsConfigDict(
        env_prefix="MW_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get application settings with caching.

    Settings are read from the environment once and shared afterwards.

    Returns:
        Settings: Application configuration object
    """
    return Settings()
