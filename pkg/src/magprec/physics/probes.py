"""Initial collective-spin moments of coherent and one-axis-twisted probes."""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
from typing import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq, minimize_scalar

from magprec.errors import DomainError, UnachievableSqueezingError

logger = logging.getLogger(__name__)

# ===== Constants =====

MU_MAX = math.pi

# Below this |x| the power cos(x)^k goes through log1p(-2 sin²(x/2))
SMALL_ANGLE = 0.5

LOG_FLOAT_MAX = math.log(np.finfo(float).max)
DB_PER_NEPER = 10.0 / math.log(10.0)

# μ grid for locating the squeezing optimum before bounded refinement
OPTIMUM_GRID = np.geomspace(1e-15, 3.0, 600)


class Axis(StrEnum):
    """Equatorial axis of a collective-spin component."""

    X = "x"
    Y = "y"

    @property
    def other(self) -> "Axis":
        """The perpendicular equatorial axis."""
        return Axis.Y if self is Axis.X else Axis.X


class Geometry(StrEnum):
    """Probe state and measured observable."""

    SCENARIO_A = "scenario-a"
    SCENARIO_B = "scenario-b"
    CSS_X = "css-x"
    CSS_Y = "css-y"
    GHZ = "ghz"

    @property
    def is_squeezed(self) -> bool:
        """True for the one-axis-twisted scenarios."""
        return self in (Geometry.SCENARIO_A, Geometry.SCENARIO_B)


class SqueezingConvention(StrEnum):
    """How the squeezing parameter is normalized."""

    WINELAND = "wineland"
    VARIANCE = "variance"


# Mean-spin axis and measured axis for each spin geometry
_AXES: dict[Geometry, tuple[Axis, Axis]] = {
    Geometry.SCENARIO_A: (Axis.X, Axis.Y),
    Geometry.SCENARIO_B: (Axis.Y, Axis.X),
    Geometry.CSS_X: (Axis.X, Axis.Y),
    Geometry.CSS_Y: (Axis.Y, Axis.X),
}


@dataclass(frozen=True, slots=True)
class SpinMoments:
    """First and second moments of the collective spin, with ⟨J_z⟩ = 0."""

    mean_jx: float
    mean_jy: float
    var_jx: float
    var_jy: float
    var_jz: float
    cov_jxjy: float = 0.0

    def mean(self, axis: Axis) -> float:
        return self.mean_jx if axis is Axis.X else self.mean_jy

    def variance(self, axis: Axis) -> float:
        return self.var_jx if axis is Axis.X else self.var_jy

    def rotated(self, phi: float) -> "SpinMoments":
        """Moments after turning the state by φ about z, mean moving from x towards y."""
        c, s = math.cos(phi), math.sin(phi)
        return SpinMoments(
            mean_jx=c * self.mean_jx - s * self.mean_jy,
            mean_jy=s * self.mean_jx + c * self.mean_jy,
            var_jx=c * c * self.var_jx + s * s * self.var_jy - 2.0 * c * s * self.cov_jxjy,
            var_jy=s * s * self.var_jx + c * c * self.var_jy + 2.0 * c * s * self.cov_jxjy,
            var_jz=self.var_jz,
            cov_jxjy=c * s * (self.var_jx - self.var_jy) + (c * c - s * s) * self.cov_jxjy,
        )


class ProbeSpec(BaseModel):
    """Probe size, geometry and twisting strength μ."""

    model_config = ConfigDict(frozen=True)

    n_particles: int = Field(ge=1, description="Number of spin-1/2 particles")
    geometry: Geometry
    mu: float = Field(default=0.0, ge=0.0, lt=MU_MAX, description="Twisting strength")

    @model_validator(mode="after")
    def _squeezing_matches_geometry(self) -> Self:
        if not self.geometry.is_squeezed and self.mu != 0.0:
            raise ValueError(f"geometry {self.geometry.value} requires mu = 0")
        if self.geometry.is_squeezed and self.n_particles < 2:
            raise ValueError("squeezed probes need at least two particles")
        return self

    @property
    def probe_axis(self) -> Axis:
        """Axis of the initial mean spin."""
        return self._axes()[0]

    @property
    def measured_axis(self) -> Axis:
        """Axis of the measured collective-spin component."""
        return self._axes()[1]

    def _axes(self) -> tuple[Axis, Axis]:
        if self.geometry is Geometry.GHZ:
            raise DomainError("GHZ probes are read out by parity, not a spin component")
        return _AXES[self.geometry]


# ===== Numerically stable powers =====


def _cos_power(x: float, k: float) -> float:
    """cos(x)^k for integer-valued k up to ~1e12."""
    if k == 0:
        return 1.0
    if abs(x) < SMALL_ANGLE:
        return math.exp(k * math.log1p(-2.0 * math.sin(0.5 * x) ** 2))
    c = math.cos(x)
    if c == 0.0:
        return 0.0
    magnitude = math.exp(k * math.log(abs(c)))
    return -magnitude if c < 0.0 and int(k) % 2 == 1 else magnitude


def _one_minus_cos_power(x: float, k: float) -> float:
    """1 − cos(x)^k without cancellation for small x."""
    if k == 0:
        return 0.0
    if abs(x) < SMALL_ANGLE:
        return -math.expm1(k * math.log1p(-2.0 * math.sin(0.5 * x) ** 2))
    return 1.0 - _cos_power(x, k)


def twist_terms(n: int, mu: float) -> tuple[float, float]:
    """The pair A = 1 − cos^{N−2}μ, B = 4 sin(μ/2) cos^{N−2}(μ/2) of the twisted variances."""
    a = _one_minus_cos_power(mu, n - 2)
    b = 4.0 * math.sin(0.5 * mu) * _cos_power(0.5 * mu, n - 2)
    return a, b


def _check_twist(n: int, mu: float) -> None:
    if n < 2:
        raise DomainError(f"twisted states need n >= 2, got {n}")
    if not 0.0 <= mu < MU_MAX:
        raise DomainError(f"mu must lie in [0, pi), got {mu!r}")


def _arrange(axis: Axis, mean: float, var_mean: float, var_squeezed: float, var_z: float) -> SpinMoments:
    if axis is Axis.X:
        return SpinMoments(mean, 0.0, var_mean, var_squeezed, var_z)
    return SpinMoments(0.0, mean, var_squeezed, var_mean, var_z)


def _squeezed_variances(n: int, mu: float) -> tuple[float, float]:
    a, b = twist_terms(n, mu)
    root = math.hypot(a, b)
    quarter = 0.25 * n
    if root == 0.0:
        return quarter, quarter
    # A − sqrt(A² + B²) rewritten as −B²/(A + sqrt(A² + B²))
    squeezed = quarter * (1.0 - 0.25 * (n - 1) * b * b / (a + root))
    anti_squeezed = quarter * (1.0 + 0.25 * (n - 1) * (a + root))
    return squeezed, anti_squeezed


def oatss_moments(n: int, mu: float, axis: Axis = Axis.X) -> SpinMoments:
    """Moments of a one-axis-twisted state with mean spin along ``axis``.

    The minimal-variance direction is the other equatorial axis; the anti-squeezed
    direction is z.

    Args:
        n: Number of particles, at least 2.
        mu: Twisting strength in [0, π).
        axis: Direction of the mean spin.

    Returns:
        SpinMoments: Means, variances and (vanishing) covariance.

    Raises:
        DomainError: If n < 2 or μ is outside [0, π).
    """
    _check_twist(n, mu)
    half = 0.5 * mu
    mean = 0.5 * n * _cos_power(half, n - 1)
    squeezed, anti_squeezed = _squeezed_variances(n, mu)
    a, _ = twist_terms(n, mu)
    along = 0.25 * n * (n * _one_minus_cos_power(half, 2 * (n - 1)) - 0.5 * (n - 1) * a)
    return _arrange(axis, mean, max(0.0, along), squeezed, anti_squeezed)


def css_moments(n: int, axis: Axis = Axis.X) -> SpinMoments:
    """Moments of the coherent spin state polarized along ``axis``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    quarter = 0.25 * n
    return _arrange(axis, 0.5 * n, 0.0, quarter, quarter)


def initial_moments(probe: ProbeSpec) -> SpinMoments:
    """Initial moments of a spin-measured probe."""
    if probe.geometry.is_squeezed:
        return oatss_moments(probe.n_particles, probe.mu, probe.probe_axis)
    return css_moments(probe.n_particles, probe.probe_axis)


# ===== Squeezing in decibels =====


def _log_squeezing_parameter(n: int, mu: float, convention: SqueezingConvention) -> float:
    """ln ξ², kept in log space because ⟨J⟩² underflows long before ξ² leaves range."""
    _check_twist(n, mu)
    squeezed, _ = _squeezed_variances(n, mu)
    if squeezed <= 0.0:
        raise DomainError(f"squeezed variance lost to rounding at n={n}, mu={mu!r}")
    if convention is SqueezingConvention.VARIANCE:
        return math.log(squeezed / (0.25 * n))
    # cos(μ/2) > 0 on [0, π), so ln⟨J⟩ = ln(N/2) + (N−1)·ln cos(μ/2)
    log_cos = math.log1p(-2.0 * math.sin(0.25 * mu) ** 2)
    log_mean = math.log(0.5 * n) + (n - 1) * log_cos
    return math.log(n * squeezed) - 2.0 * log_mean


def squeezing_parameter(
    n: int, mu: float, convention: SqueezingConvention = SqueezingConvention.WINELAND
) -> float:
    """Squeezing parameter ξ² of the twisted state, 1 for the coherent state.

    ``wineland`` is N·Δ²J_min/⟨J⟩²; ``variance`` is Δ²J_min/(N/4). Returns ``inf``
    once the mean spin has decayed beyond double range.
    """
    log_value = _log_squeezing_parameter(n, mu, convention)
    if log_value > LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_value)


def squeezing_db(
    n: int, mu: float, convention: SqueezingConvention = SqueezingConvention.WINELAND
) -> float:
    """10·log₁₀ ξ²; negative values mean squeezing."""
    return DB_PER_NEPER * _log_squeezing_parameter(n, mu, convention)


@lru_cache(maxsize=256)
def optimal_squeezing(
    n: int, convention: SqueezingConvention = SqueezingConvention.WINELAND
) -> tuple[float, float]:
    """Twisting strength of maximal squeezing and the squeezing it reaches.

    Returns:
        Pair (μ_opt, dB_min).
    """
    _check_twist(n, 0.0)
    values = np.array([squeezing_db(n, float(mu), convention) for mu in OPTIMUM_GRID])
    best = int(np.argmin(values))
    lower = OPTIMUM_GRID[max(best - 1, 0)]
    upper = OPTIMUM_GRID[min(best + 1, len(OPTIMUM_GRID) - 1)]
    result = minimize_scalar(
        lambda log_mu: squeezing_db(n, math.exp(log_mu), convention),
        bounds=(math.log(lower), math.log(upper)),
        method="bounded",
        options={"xatol": 1e-12},
    )
    mu_opt = math.exp(float(result.x))
    db_min = squeezing_db(n, mu_opt, convention)
    if values[best] < db_min:
        mu_opt, db_min = float(OPTIMUM_GRID[best]), float(values[best])
    logger.debug("optimal squeezing n=%d: mu=%.6g, %.4f dB", n, mu_opt, db_min)
    return mu_opt, db_min


def mu_from_db(
    n: int,
    target_db: float,
    convention: SqueezingConvention = SqueezingConvention.WINELAND,
) -> float:
    """Twisting strength on the small-μ branch that produces ``target_db``.

    Args:
        n: Number of particles.
        target_db: Requested squeezing, at most 0 dB.
        convention: Squeezing-parameter convention.

    Returns:
        μ with squeezing_db(n, μ) = target_db to better than 1e-6 dB.

    Raises:
        DomainError: If target_db is positive.
        UnachievableSqueezingError: If target_db lies below the optimum for this n.
    """
    if target_db > 0.0:
        raise DomainError(f"target squeezing must be <= 0 dB, got {target_db!r}")
    if target_db == 0.0:
        return 0.0
    mu_opt, db_min = optimal_squeezing(n, convention)
    if target_db < db_min:
        raise UnachievableSqueezingError(
            f"{target_db} dB is below the optimum {db_min:.4f} dB for n={n}"
        )
    if target_db == db_min:
        return mu_opt
    return float(
        brentq(
            lambda mu: squeezing_db(n, mu, convention) - target_db,
            0.0,
            mu_opt,
            xtol=mu_opt * 1e-14,
            rtol=1e-14,
        )
    )
