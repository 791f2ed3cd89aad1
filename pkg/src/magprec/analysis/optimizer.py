"""Interrogation-time and squeezing optimization, analytic schedules and grid scans.

The search runs in log(t), log(μ) coordinates: a coarse grid evaluated in a thread
pool, then Nelder-Mead refinement from the best grid cell.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Self

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize

from magprec.errors import DomainError, MagprecError, NoFinitePointError
from magprec.physics.bounds import m_quantity
from magprec.physics.channel import NoiseModel
from magprec.physics.ghz import ghz_precision
from magprec.physics.metrology import msqe
from magprec.physics.probes import Geometry, ProbeSpec

logger = logging.getLogger(__name__)

Objective = Callable[[float, float], float]

# ===== Configuration =====

DEFAULT_GRID_POINTS = 32
MIN_GRID_POINTS = 8
SIMPLEX_XATOL = 1e-9


class SearchDomain(BaseModel):
    """Box in (t, μ) searched on a log-spaced grid; ``mu_range=None`` fixes μ = 0."""

    model_config = ConfigDict(frozen=True)

    t_range: tuple[float, float]
    mu_range: tuple[float, float] | None = None
    t_points: int = Field(default=DEFAULT_GRID_POINTS, ge=MIN_GRID_POINTS)
    mu_points: int = Field(default=DEFAULT_GRID_POINTS, ge=MIN_GRID_POINTS)
    rel_tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=500, ge=1)

    @model_validator(mode="after")
    def _ordered_positive_ranges(self) -> Self:
        for name, bounds in (("t_range", self.t_range), ("mu_range", self.mu_range)):
            if bounds is None:
                continue
            low, high = bounds
            if not 0.0 < low < high:
                raise ValueError(f"{name} must satisfy 0 < low < high, got {bounds}")
        return self

    @classmethod
    def for_rate(cls, gamma: float, optimize_mu: bool = True) -> Self:
        """Default domain t ∈ [1e-6/γ, 1e2/γ], μ ∈ [1e-10, 1.5]."""
        if not gamma > 0.0:
            raise DomainError("the default search domain needs gamma > 0")
        mu_range = (1e-10, 1.5) if optimize_mu else None
        return cls(t_range=(1e-6 / gamma, 1e2 / gamma), mu_range=mu_range)

    def without_mu(self) -> Self:
        """Same domain with μ pinned to zero."""
        return self.model_copy(update={"mu_range": None})

    @property
    def dimension(self) -> int:
        return 1 if self.mu_range is None else 2

    def log_bounds(self) -> list[tuple[float, float]]:
        bounds = [(math.log(self.t_range[0]), math.log(self.t_range[1]))]
        if self.mu_range is not None:
            bounds.append((math.log(self.mu_range[0]), math.log(self.mu_range[1])))
        return bounds

    def grid(self) -> NDArray[np.float64]:
        """Grid points in log coordinates, t-major order, shape (points, dimension)."""
        sizes = (self.t_points, self.mu_points)
        axes = [
            np.linspace(low, high, size)
            for (low, high), size in zip(self.log_bounds(), sizes, strict=False)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([axis.ravel() for axis in mesh], axis=1)


@dataclass(frozen=True, slots=True)
class Optimum:
    """Best (t, μ) found and its Δ²ω·T."""

    t_star: float
    mu_star: float
    msqe_times_T: float
    evaluations: int
    converged: bool


def _safe(objective: Objective, t: float, mu: float) -> float:
    try:
        value = objective(t, mu)
    except (MagprecError, ValueError, ArithmeticError) as e:
        logger.debug("objective failed at t=%g, mu=%g: %s", t, mu, e)
        return math.inf
    return value if math.isfinite(value) else math.inf


def _point(x: Sequence[float]) -> tuple[float, float]:
    t = math.exp(x[0])
    mu = math.exp(x[1]) if len(x) > 1 else 0.0
    return t, mu


def _evaluate_all(
    objective: Objective, points: Sequence[tuple[float, float]], workers: int
) -> list[float]:
    if workers <= 1:
        return [_safe(objective, t, mu) for t, mu in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: _safe(objective, p[0], p[1]), points))


def _initial_simplex(
    start: NDArray[np.float64], steps: Sequence[float], bounds: Sequence[tuple[float, float]]
) -> NDArray[np.float64]:
    vertices = [start.copy()]
    for index, step in enumerate(steps):
        vertex = start.copy()
        low, high = bounds[index]
        vertex[index] = start[index] + step if start[index] + step <= high else start[index] - step
        vertex[index] = min(max(vertex[index], low), high)
        vertices.append(vertex)
    return np.array(vertices)


def optimize(objective: Objective, domain: SearchDomain, workers: int = 1) -> Optimum:
    """Minimize ``objective(t, μ)`` over ``domain``.

    Args:
        objective: Function of (t, μ); errors and non-finite values count as +∞.
        domain: Search box and grid sizes.
        workers: Threads used for the coarse grid; results do not depend on it.

    Returns:
        Optimum: Never worse than the best coarse-grid point.

    Raises:
        NoFinitePointError: If every grid point is degenerate.
    """
    grid = domain.grid()
    points = [_point(row) for row in grid]
    values = np.array(_evaluate_all(objective, points, workers))
    best = int(np.argmin(values))
    best_value = float(values[best])
    if not math.isfinite(best_value):
        raise NoFinitePointError(f"all {len(points)} grid points are degenerate")
    logger.debug("coarse grid best %.6g at t=%g, mu=%g", best_value, *points[best])

    bounds = domain.log_bounds()
    sizes = (domain.t_points, domain.mu_points)
    steps = [(high - low) / (size - 1) for (low, high), size in zip(bounds, sizes, strict=False)]
    start = grid[best].copy()
    scale = abs(best_value) if best_value != 0.0 else 1.0

    def scaled(x: NDArray[np.float64]) -> float:
        t, mu = _point(x)
        return _safe(objective, t, mu) / scale

    result = minimize(
        scaled,
        start,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "initial_simplex": _initial_simplex(start, steps, bounds),
            "fatol": domain.rel_tol,
            "xatol": SIMPLEX_XATOL,
            "maxiter": domain.max_iter,
        },
    )
    refined_value = float(result.fun) * scale
    evaluations = len(points) + int(result.nfev)
    logger.debug("simplex refinement: %.6g after %d evaluations", refined_value, result.nfev)

    if refined_value < best_value:
        t_star, mu_star = _point(result.x)
        return Optimum(t_star, mu_star, refined_value, evaluations, bool(result.success))
    t_star, mu_star = points[best]
    return Optimum(t_star, mu_star, best_value, evaluations, bool(result.success))


def optimize_precision(
    geometry: Geometry,
    noise: NoiseModel,
    omega: float,
    n: int,
    domain: SearchDomain,
    workers: int = 1,
) -> Optimum:
    """Best Δ²ω·T of one probe geometry over interrogation time (and μ when squeezed)."""
    if geometry is Geometry.GHZ:

        def objective(t: float, mu: float) -> float:
            return ghz_precision(n, noise, omega, t)

        return optimize(objective, domain.without_mu(), workers)

    if not geometry.is_squeezed:
        domain = domain.without_mu()

    def spin_objective(t: float, mu: float) -> float:
        return msqe(ProbeSpec(n_particles=n, geometry=geometry, mu=mu), noise, omega, t)

    return optimize(spin_objective, domain, workers)


def optimize_m_quantity(
    n: int, gamma: float, omega: float, domain: SearchDomain, workers: int = 1
) -> Optimum:
    """Minimum of the aligned-probe bound quantity M over (t, μ)."""

    def objective(t: float, mu: float) -> float:
        return m_quantity(n, gamma, omega, t, mu)

    return optimize(objective, domain, workers)


# ===== Analytic schedules =====


def schedule_b(n: float, gamma: float, omega: float) -> tuple[float, float]:
    """(t, μ) = ((γω)^{−1/2}·N^{−1/8}, (γ/ω)^{1/4}·(N/4)^{−4/5}) for the perpendicular probe."""
    if not (gamma > 0.0 and omega > 0.0):
        raise DomainError("schedule b needs gamma > 0 and omega > 0")
    t = (gamma * omega) ** -0.5 * n ** (-1.0 / 8.0)
    mu = (gamma / omega) ** 0.25 * (0.25 * n) ** (-0.8)
    return t, mu


def schedule_a(n: float, s: float, t0: float, mu0: float) -> tuple[float, float]:
    """(t, μ) = (t0·N^{−1/s}, mu0·N^{−s/(s+1)}) for the aligned probe, s > 1."""
    if not s > 1.0:
        raise DomainError(f"schedule a needs s > 1, got {s!r}")
    return t0 * n ** (-1.0 / s), mu0 * n ** (-s / (s + 1.0))


# ===== Scans =====


def scan(
    objective: Objective,
    t_values: Sequence[float],
    mu_values: Sequence[float] | None = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Evaluate ``objective`` on the product grid, t outermost.

    Failed points keep their row with a NaN value and the exception class name.

    Returns:
        DataFrame with columns t, mu, msqe, error.
    """
    mus = list(mu_values) if mu_values is not None else [0.0]
    points = [(float(t), float(mu)) for t in t_values for mu in mus]

    def evaluate(point: tuple[float, float]) -> tuple[float, str]:
        try:
            return float(objective(*point)), ""
        except (MagprecError, ValueError, ArithmeticError) as e:
            return math.nan, type(e).__name__

    if workers <= 1:
        results = [evaluate(point) for point in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, points))

    return pd.DataFrame(
        {
            "t": [t for t, _ in points],
            "mu": [mu for _, mu in points],
            "msqe": [value for value, _ in results],
            "error": [error for _, error in results],
        }
    )
