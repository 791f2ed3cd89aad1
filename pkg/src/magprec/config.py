"""Configuration management for magprec.

Uses Pydantic Settings for type-safe environment variable loading and a frozen
``RunConfig`` model for the fully resolved parameters of one CLI run.
"""

import re
import tomllib
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from magprec.physics.bounds import MixedNoiseSpec, depolarization_mapping
from magprec.physics.channel import NoiseModel
from magprec.physics.probes import Geometry

_SCHEDULE_PATTERN = re.compile(r"^(b|a:(?P<exponent>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))$")


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MAGPREC_",
        case_sensitive=False,
        extra="ignore",
    )

    # Environment
    environment: Literal["development", "staging", "production"] = "development"
    debug: bool = Field(default=False, description="Enable debug logging")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Root log level used by the CLI"
    )

    # Project paths
    project_root: Path = Field(
        default_factory=lambda: Path(__file__).parent.parent.parent,
        description="Root directory of the project",
    )

    @property
    def output_dir(self) -> Path:
        """Default directory for figure data and scan tables."""
        return self.project_root / "output"

    # Physical defaults (magnetometer operating point)
    default_gamma: float = Field(default=67.0, ge=0.0, description="Dephasing rate γ in 1/s")
    default_omega: float = Field(default=3.6e-3, description="Signal frequency ω in 1/s")
    default_n: int = Field(default=100_000_000_000, ge=1, description="Number of atoms")
    default_t: float = Field(default=1e-3, gt=0.0, description="Interrogation time in s")
    default_squeezing_db: float = Field(
        default=-8.0, le=0.0, description="Squeezing used when neither μ nor dB is given"
    )

    # Numerics
    oracle_max_qubits: int = Field(
        default=10, ge=1, le=12, description="Hard cap on dense oracle size"
    )
    rk4_max_step_rate: float = Field(
        default=1e-3, gt=0.0, description="Upper bound on rate·dt for RK4 integration"
    )
    optimizer_workers: int = Field(
        default=1, ge=1, description="Threads used for coarse-grid evaluation"
    )
    seed: int = Field(default=20_240_517, description="Seed for randomized oracle draws")

    # Verification suite sizes
    check_fast_draws: int = Field(default=5, ge=1)
    check_fast_max_qubits: int = Field(default=5, ge=2)
    check_full_draws: int = Field(default=50, ge=1)
    check_full_max_qubits: int = Field(default=8, ge=2)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance.

    Returns:
        Settings: Application configuration.
    """
    return Settings()


class RunConfig(BaseModel):
    """Fully resolved parameters of one CLI command.

    Exactly one noise source (α weights, ε or the T₁/T₂ pair), one squeezing source for the
    squeezed geometries (μ or dB) and one time source (t or a schedule name) must be present.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float | None = Field(default=None, ge=0.0, description="Dephasing rate γ in 1/s")
    alpha: tuple[float, float, float] | None = Field(
        default=None, description="Direction weights (α_x, α_y, α_z)"
    )
    epsilon: float | None = Field(
        default=None, ge=0.0, le=1.0, description="Parallel-noise fraction ε"
    )
    t1: float | None = Field(default=None, gt=0.0, description="Longitudinal relaxation time")
    t2: float | None = Field(default=None, gt=0.0, description="Transverse relaxation time")
    omega: float = Field(description="Signal frequency ω in 1/s")
    n: tuple[int, ...] = Field(min_length=1, description="Particle numbers to evaluate")
    geometry: Geometry = Geometry.SCENARIO_B
    mu: float | None = Field(default=None, ge=0.0, lt=np.pi)
    db: float | None = Field(default=None, le=0.0)
    t: float | None = Field(default=None, gt=0.0, description="Interrogation time in s")
    schedule: str | None = Field(default=None, description="'b' or 'a:<s>'")
    output_format: Literal["csv", "json"] = "csv"
    out: Path | None = None
    seed: int = 0

    @field_validator("n")
    @classmethod
    def _positive_counts(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(count < 1 for count in value):
            raise ValueError("particle numbers must be >= 1")
        return value

    @field_validator("schedule")
    @classmethod
    def _known_schedule(cls, value: str | None) -> str | None:
        if value is None:
            return value
        match = _SCHEDULE_PATTERN.match(value)
        if match is None:
            raise ValueError(f"unknown schedule {value!r}; expected 'b' or 'a:<s>'")
        exponent = match.group("exponent")
        if exponent is not None and float(exponent) <= 1.0:
            raise ValueError("schedule a:<s> requires s > 1")
        return value

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "RunConfig":
        has_pair = self.t1 is not None or self.t2 is not None
        sources = [self.alpha is not None, self.epsilon is not None, has_pair]
        if sum(sources) != 1:
            raise ValueError("give exactly one of alpha weights, epsilon or the T1/T2 pair")
        if has_pair and (self.t1 is None or self.t2 is None):
            raise ValueError("T1 and T2 must be given together")
        if has_pair and self.gamma is not None:
            raise ValueError("gamma is derived from T1/T2 and must not be given as well")
        if not has_pair and self.gamma is None:
            raise ValueError("gamma is required unless T1/T2 are given")

        if self.geometry.is_squeezed:
            if (self.mu is None) == (self.db is None):
                raise ValueError("give exactly one of mu or db for squeezed geometries")
        elif (self.mu or 0.0) != 0.0 or (self.db or 0.0) != 0.0:
            raise ValueError(f"geometry {self.geometry.value} takes no squeezing")

        if (self.t is None) == (self.schedule is None):
            raise ValueError("give exactly one of t or schedule")
        return self

    def mixed_noise(self) -> MixedNoiseSpec | None:
        """Mixed-noise description when the run was given ε or T₁/T₂."""
        if self.t1 is not None and self.t2 is not None:
            return depolarization_mapping(self.t1, self.t2)
        if self.epsilon is not None and self.gamma is not None:
            return MixedNoiseSpec(gamma=self.gamma, epsilon=self.epsilon)
        return None

    def noise_model(self) -> NoiseModel:
        """Build the single-qubit noise model of this run."""
        mixed = self.mixed_noise()
        if mixed is not None:
            return mixed.noise_model()
        if self.alpha is None or self.gamma is None:
            raise ValueError("alpha weights and gamma are required for this noise source")
        alpha_x, alpha_y, alpha_z = self.alpha
        return NoiseModel(gamma=self.gamma, alpha_x=alpha_x, alpha_y=alpha_y, alpha_z=alpha_z)

    @property
    def schedule_exponent(self) -> float | None:
        """Exponent s of an 'a:<s>' schedule, None otherwise."""
        if self.schedule is None or not self.schedule.startswith("a:"):
            return None
        return float(self.schedule.split(":", 1)[1])


def parse_n_values(value: object) -> tuple[int, ...]:
    """Parse particle numbers from a flag or config value.

    Accepts a single number (``"1e11"``), a comma list (``"10,100,1000"``) or a
    log-spaced range ``start:stop:count`` (``"1e2:1e6:9"``).

    Args:
        value: String, number or sequence of numbers.

    Returns:
        Tuple of positive integers in the given (or ascending, for ranges) order.
    """
    if isinstance(value, bool):
        raise ValueError("particle number must be numeric")
    if isinstance(value, int | float):
        return (int(round(float(value))),)
    if isinstance(value, list | tuple):
        return tuple(int(round(float(item))) for item in value)
    text = str(value).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must look like start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(float(parts[2]))
        if start <= 0 or stop < start or count < 1:
            raise ValueError(f"invalid range {text!r}")
        grid = np.unique(np.round(np.geomspace(start, stop, count)).astype(np.int64))
        return tuple(int(item) for item in grid)
    return tuple(int(round(float(item))) for item in text.split(",") if item.strip())


def _parse_alpha(value: object) -> tuple[float, float, float]:
    if isinstance(value, str):
        items: list[Any] = value.split(",")
    elif isinstance(value, list | tuple):
        items = list(value)
    else:
        raise ValueError("alpha needs three comma-separated weights")
    weights = tuple(float(item) for item in items)
    if len(weights) != 3:
        raise ValueError("alpha needs three comma-separated weights")
    return weights[0], weights[1], weights[2]


def resolve_run_config(
    command: str,
    flags: Mapping[str, Any],
    config_path: Path | None = None,
    settings: Settings | None = None,
) -> RunConfig:
    """Merge defaults, config file sections and flags into a validated RunConfig.

    Precedence (lowest first): settings defaults, ``[defaults]`` section of the config
    file, ``[<command>]`` section, command-line flags that were actually given.

    Args:
        command: Subcommand name, selects the config file section.
        flags: Parsed flag values; ``None`` means "not given".
        config_path: Optional TOML file with ``key = value`` lines in sections.
        settings: Settings instance, defaults to ``get_settings()``.

    Returns:
        RunConfig: Validated configuration.
    """
    settings = settings or get_settings()
    merged: dict[str, Any] = {}
    if config_path is not None:
        with config_path.open("rb") as handle:
            document = tomllib.load(handle)
        merged.update(document.get("defaults", {}))
        merged.update(document.get(command, {}))
    merged.update({key: value for key, value in flags.items() if value is not None})

    merged["n"] = parse_n_values(merged.get("n", settings.default_n))
    if "alpha" in merged:
        merged["alpha"] = _parse_alpha(merged["alpha"])
    if not any(key in merged for key in ("alpha", "epsilon", "t1", "t2")):
        merged["alpha"] = (1.0, 0.0, 0.0)
    if "t1" not in merged and "t2" not in merged:
        merged.setdefault("gamma", settings.default_gamma)
    merged.setdefault("omega", settings.default_omega)
    geometry = Geometry(merged.setdefault("geometry", Geometry.SCENARIO_B.value))
    if geometry.is_squeezed and "mu" not in merged and "db" not in merged:
        merged["db"] = settings.default_squeezing_db
    if "t" not in merged and "schedule" not in merged:
        merged["t"] = settings.default_t
    merged.setdefault("seed", settings.seed)
    return RunConfig.model_validate(merged)
