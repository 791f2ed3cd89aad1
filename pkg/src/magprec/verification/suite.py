"""Randomized equivalence checks between the closed forms and the dense oracle."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from magprec.config import Settings, get_settings
from magprec.physics.channel import (
    NoiseModel,
    channel_coefficients,
    coefficient_derivatives_check,
    kraus_set,
    s_matrix,
)
from magprec.physics.ghz import parity_stats
from magprec.physics.metrology import evolved_mean, evolved_variance, msqe
from magprec.physics.probes import Axis, Geometry, ProbeSpec, oatss_moments
from magprec.verification.oracle import (
    DenseState,
    ObservableKind,
    ObservableSpec,
    apply_channel,
    build_ghz,
    build_oatss,
    expectation,
    lindblad_rk4,
    moments,
    parity_precision_oracle,
    precision_oracle,
    process_s_matrix,
    rotate_about_z,
    trace_distance,
)

logger = logging.getLogger(__name__)

Depth = Literal["fast", "full"]

# ===== Tolerances =====

COMPLETENESS_TOL = 1e-10
EVOLUTION_TOL = 1e-8
DERIVATIVE_TOL = 1e-6
MOMENT_TOL = 1e-8
PRECISION_TOL = 1e-8

_SPIN_GEOMETRIES = (Geometry.SCENARIO_A, Geometry.SCENARIO_B, Geometry.CSS_X, Geometry.CSS_Y)


@dataclass(frozen=True, slots=True)
class Draw:
    """One random parameter point."""

    noise: NoiseModel
    omega: float
    t: float
    mu: float
    n: int


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.worst) and self.worst <= self.tolerance


@dataclass(slots=True)
class CheckReport:
    """Outcome of one suite run."""

    depth: Depth
    seed: int
    draws: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


def _draws(rng: np.random.Generator, count: int, max_qubits: int) -> list[Draw]:
    draws = []
    for _ in range(count):
        alpha = rng.dirichlet(np.ones(3))
        # keep the weights summing to one after float rounding
        alpha_z = max(0.0, 1.0 - float(alpha[0]) - float(alpha[1]))
        noise = NoiseModel(
            gamma=float(rng.uniform(0.1, 2.0)),
            alpha_x=float(alpha[0]),
            alpha_y=float(alpha[1]),
            alpha_z=alpha_z,
        )
        draws.append(
            Draw(
                noise=noise,
                omega=float(rng.uniform(0.05, 1.0)),
                t=float(rng.uniform(0.1, 1.0)),
                mu=float(rng.uniform(0.01, 0.5)),
                n=int(rng.integers(2, max_qubits + 1)),
            )
        )
    return draws


def _random_qubit_state(rng: np.random.Generator) -> DenseState:
    ginibre = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = ginibre @ ginibre.conj().T
    return DenseState(rho / np.trace(rho), 1)


# ===== Individual checks =====


def check_completeness(draws: list[Draw], rng: np.random.Generator) -> float:
    return max(abs(kraus_set(d.noise, d.omega, d.t).completeness - 1.0) for d in draws)


def check_kraus_against_rk4(draws: list[Draw], rng: np.random.Generator) -> float:
    worst = 0.0
    for d in draws:
        state = _random_qubit_state(rng)
        closed = apply_channel(state, kraus_set(d.noise, d.omega, d.t))
        integrated = lindblad_rk4(state, d.noise, d.omega, d.t).state
        worst = max(worst, trace_distance(closed, integrated))
        extracted = process_s_matrix(d.noise, d.omega, d.t)
        reference = s_matrix(d.noise, d.omega, d.t).as_array()
        worst = max(worst, float(np.max(np.abs(extracted - reference))))
    return worst


def check_derivatives(draws: list[Draw], rng: np.random.Generator) -> float:
    return max(coefficient_derivatives_check(d.noise, d.omega, d.t) for d in draws)


def check_evolved_moments(draws: list[Draw], rng: np.random.Generator) -> float:
    worst = 0.0
    for d in draws:
        scale = max(1.0, 0.25 * d.n * d.n)
        kraus = kraus_set(d.noise, d.omega, d.t)
        c = channel_coefficients(d.noise, d.omega, d.t)
        # an off-axis turn gives the state a nonzero J_x–J_y covariance
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        twisted = build_oatss(d.n, d.mu)
        cases = [
            (oatss_moments(d.n, d.mu, Axis.X), twisted),
            (oatss_moments(d.n, d.mu, Axis.Y), build_oatss(d.n, d.mu, Axis.Y)),
            (oatss_moments(d.n, d.mu, Axis.X).rotated(phi), rotate_about_z(twisted, phi)),
        ]
        for initial, state in cases:
            dense = moments(apply_channel(state, kraus))
            for measured in (Axis.X, Axis.Y):
                worst = max(
                    worst,
                    abs(evolved_mean(initial, c, measured) - dense.mean(measured)) / scale,
                    abs(evolved_variance(initial, c, d.n, measured) - dense.variance(measured)) / scale,
                )
    return worst


def check_precision(draws: list[Draw], rng: np.random.Generator) -> float:
    worst = 0.0
    for index, d in enumerate(draws):
        geometry = _SPIN_GEOMETRIES[index % len(_SPIN_GEOMETRIES)]
        mu = d.mu if geometry.is_squeezed else 0.0
        probe = ProbeSpec(n_particles=d.n, geometry=geometry, mu=mu)
        closed = msqe(probe, d.noise, d.omega, d.t)
        dense = precision_oracle(probe, d.noise, d.omega, d.t)
        worst = max(worst, abs(closed - dense) / abs(dense))
    return worst


def check_parity(draws: list[Draw], rng: np.random.Generator) -> float:
    worst = 0.0
    parity = ObservableSpec(ObservableKind.PARITY, "x")
    for d in draws:
        c = channel_coefficients(d.noise, d.omega, d.t)
        stats = parity_stats(d.n, c)
        evolved = apply_channel(build_ghz(d.n), kraus_set(d.noise, d.omega, d.t))
        dense_mean = expectation(evolved, parity)
        worst = max(worst, abs(stats.mean_parity - dense_mean))
        # skip near-nodes of the parity signal, where the relative error is meaningless
        if abs(stats.mean_derivative) > 1e-3 * d.n * d.t:
            closed = d.t * stats.variance / stats.mean_derivative**2
            dense = parity_precision_oracle(d.n, d.noise, d.omega, d.t)
            worst = max(worst, abs(closed - dense) / abs(dense))
    return worst


CHECKS: dict[str, tuple[Callable[[list[Draw], np.random.Generator], float], float]] = {
    "kraus completeness": (check_completeness, COMPLETENESS_TOL),
    "kraus vs rk4": (check_kraus_against_rk4, EVOLUTION_TOL),
    "coefficient derivatives": (check_derivatives, DERIVATIVE_TOL),
    "evolved moments vs dense": (check_evolved_moments, MOMENT_TOL),
    "precision vs dense": (check_precision, PRECISION_TOL),
    "parity vs dense": (check_parity, PRECISION_TOL),
}


def run_checks(
    depth: Depth = "fast", seed: int | None = None, settings: Settings | None = None
) -> CheckReport:
    """Run every equivalence check on random draws.

    Args:
        depth: ``fast`` or ``full``; selects draw count and largest N from settings.
        seed: Random seed, defaults to the configured seed.
        settings: Settings instance, defaults to ``get_settings()``.

    Returns:
        CheckReport: One CheckResult per check.
    """
    settings = settings or get_settings()
    seed = settings.seed if seed is None else seed
    if depth == "full":
        count, max_qubits = settings.check_full_draws, settings.check_full_max_qubits
    else:
        count, max_qubits = settings.check_fast_draws, settings.check_fast_max_qubits
    max_qubits = min(max_qubits, settings.oracle_max_qubits)

    rng = np.random.default_rng(seed)
    draws = _draws(rng, count, max_qubits)
    report = CheckReport(depth=depth, seed=seed, draws=count)
    for name, (check, tolerance) in CHECKS.items():
        worst = check(draws, rng)
        logger.debug("check %s: worst %.3e (tolerance %.1e)", name, worst, tolerance)
        report.results.append(CheckResult(name=name, worst=worst, tolerance=tolerance))
    return report
