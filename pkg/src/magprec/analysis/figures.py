"""Tables behind the precision figures: squeezing and time sweeps, mixed-noise scaling, M minima."""

import json
import logging
import math
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import pandas as pd

from magprec.analysis.optimizer import (
    SearchDomain,
    optimize_m_quantity,
    optimize_precision,
    scan,
)
from magprec.physics.bounds import MixedNoiseSpec, crossover_estimate, mixed_noise_floor
from magprec.physics.channel import NoiseModel
from magprec.physics.metrology import (
    asymptote_scenario_a,
    asymptote_scenario_b,
    msqe,
    scenario_a_mixed_asymptote,
)
from magprec.physics.probes import Geometry, ProbeSpec, mu_from_db, optimal_squeezing

logger = logging.getLogger(__name__)

# ===== Operating points =====

MAGNETOMETER_N = 100_000_000_000
MAGNETOMETER_GAMMA = 67.0
MAGNETOMETER_OMEGA = 3.6e-3
MAGNETOMETER_T = 1e-3
MAGNETOMETER_DB = -8.0

FIG4_PAIRS: tuple[tuple[float, float], ...] = ((10.0, 0.03), (1.0, 0.3), (0.1, 0.03))

CROSSOVER_FRACTION = 0.9


def _spin_msqe(
    geometry: Geometry, n: int, noise: NoiseModel, omega: float
) -> Callable[[float, float], float]:
    def objective(t: float, mu: float) -> float:
        return msqe(ProbeSpec(n_particles=n, geometry=geometry, mu=mu), noise, omega, t)

    return objective


def fig2_squeezing(
    n: int = MAGNETOMETER_N,
    gamma: float = MAGNETOMETER_GAMMA,
    omega: float = MAGNETOMETER_OMEGA,
    t: float = MAGNETOMETER_T,
    points: int = 121,
) -> pd.DataFrame:
    """Precision of both scenarios and the CSS at fixed t, squeezing swept from 0 dB to the optimum.

    Returns:
        DataFrame with columns squeezing_db, mu, msqe_a, msqe_b, msqe_css, gain_a, gain_b.
    """
    noise = NoiseModel.transversal(gamma)
    _, db_min = optimal_squeezing(n)
    levels = np.linspace(0.0, db_min, points)
    mus = [mu_from_db(n, float(level)) for level in levels]

    css = msqe(ProbeSpec(n_particles=n, geometry=Geometry.CSS_X), noise, omega, t)
    aligned = [_spin_msqe(Geometry.SCENARIO_A, n, noise, omega)(t, mu) for mu in mus]
    perpendicular = [_spin_msqe(Geometry.SCENARIO_B, n, noise, omega)(t, mu) for mu in mus]
    frame = pd.DataFrame(
        {
            "squeezing_db": levels,
            "mu": mus,
            "msqe_a": aligned,
            "msqe_b": perpendicular,
            "msqe_css": css,
        }
    )
    frame["gain_a"] = frame["msqe_css"] / frame["msqe_a"]
    frame["gain_b"] = frame["msqe_css"] / frame["msqe_b"]
    return frame


def fig2_time(
    n: int = MAGNETOMETER_N,
    gamma: float = MAGNETOMETER_GAMMA,
    omega: float = MAGNETOMETER_OMEGA,
    squeezing_db: float = MAGNETOMETER_DB,
    t_min: float = 1e-4,
    t_max: float = 10.0,
    points: int = 81,
    workers: int = 1,
) -> pd.DataFrame:
    """Precision against interrogation time at fixed squeezing.

    Returns:
        DataFrame with columns t, msqe_a, msqe_b, msqe_css, gain_a, gain_b.
    """
    noise = NoiseModel.transversal(gamma)
    mu = mu_from_db(n, squeezing_db)
    times = np.geomspace(t_min, t_max, points)
    curves = {
        column: scan(_spin_msqe(geometry, n, noise, omega), times, [value], workers)["msqe"]
        for column, geometry, value in (
            ("msqe_a", Geometry.SCENARIO_A, mu),
            ("msqe_b", Geometry.SCENARIO_B, mu),
            ("msqe_css", Geometry.CSS_X, 0.0),
        )
    }
    frame = pd.DataFrame({"t": times, **{key: value.to_numpy() for key, value in curves.items()}})
    frame["gain_a"] = frame["msqe_css"] / frame["msqe_a"]
    frame["gain_b"] = frame["msqe_css"] / frame["msqe_b"]
    return frame


def ninety_percent_crossover(
    n_values: Sequence[float],
    rescaled: Sequence[float],
    asymptote: float | Sequence[float],
    fraction: float = CROSSOVER_FRACTION,
) -> float:
    """Smallest N from which the curve stays within reach of ``fraction`` of its asymptotic gain.

    With a CSS reference that scales exactly as 1/N, reaching a fraction f of the
    asymptotic gain means rescaled ≤ asymptote/f. Returns NaN if the sweep never
    settles there.
    """
    ns = np.asarray(n_values, dtype=float)
    values = np.asarray(rescaled, dtype=float)
    limits = np.broadcast_to(np.asarray(asymptote, dtype=float), values.shape)
    inside = values <= limits / fraction
    outside = np.flatnonzero(~inside)
    first = 0 if outside.size == 0 else int(outside[-1]) + 1
    return float(ns[first]) if first < ns.size else math.nan


def fig3(
    gamma: float = 1.0,
    omega: float = 1.0,
    epsilon: float = 0.05,
    n_values: Sequence[float] | None = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Optimized Δ²ω·T·N against N under mixed noise, with asymptotes and crossover markers.

    Returns:
        DataFrame with columns n, rescaled_a, rescaled_b, rescaled_b_transversal,
        rescaled_css, asymptote_a, asymptote_a_caption, asymptote_b,
        asymptote_b_transversal, crossover_a, crossover_b, crossover_estimate.
    """
    if n_values is None:
        n_values = np.unique(np.round(np.geomspace(10, 1e12, 23)))
    mixed = MixedNoiseSpec(gamma=gamma, epsilon=epsilon)
    noise = mixed.noise_model()
    transversal = NoiseModel.transversal(gamma)
    domain = SearchDomain.for_rate(gamma).model_copy(update={"mu_range": (1e-14, 1.5)})

    rows: list[dict[str, float]] = []
    for value in n_values:
        n = int(value)
        aligned = optimize_precision(Geometry.SCENARIO_A, noise, omega, n, domain, workers)
        perpendicular = optimize_precision(Geometry.SCENARIO_B, noise, omega, n, domain, workers)
        pure = optimize_precision(Geometry.SCENARIO_B, transversal, omega, n, domain, workers)
        css = optimize_precision(Geometry.CSS_X, noise, omega, n, domain, workers)
        rows.append(
            {
                "n": float(n),
                "rescaled_a": aligned.msqe_times_T * n,
                "rescaled_b": perpendicular.msqe_times_T * n,
                "rescaled_b_transversal": pure.msqe_times_T * n,
                "rescaled_css": css.msqe_times_T * n,
                "asymptote_a": asymptote_scenario_a(n, gamma) * n,
                "asymptote_a_caption": scenario_a_mixed_asymptote(n, gamma, epsilon) * n,
                "asymptote_b": mixed_noise_floor(mixed),
                "asymptote_b_transversal": asymptote_scenario_b(n, omega) * n,
            }
        )
        logger.debug("fig3 n=%d: a=%.6g b=%.6g", n, rows[-1]["rescaled_a"], rows[-1]["rescaled_b"])

    frame = pd.DataFrame(rows)
    n90_a = ninety_percent_crossover(frame["n"], frame["rescaled_a"], frame["asymptote_a"])
    n90_b = ninety_percent_crossover(frame["n"], frame["rescaled_b"], frame["asymptote_b"])
    frame["crossover_a"] = frame["n"] == n90_a
    frame["crossover_b"] = frame["n"] == n90_b
    frame["crossover_estimate"] = crossover_estimate(gamma, omega, epsilon) if epsilon > 0 else math.nan
    return frame


def fig4(
    pairs: Sequence[tuple[float, float]] = FIG4_PAIRS,
    n_values: Sequence[float] | None = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Minimum of M over (t, μ) against the 2γ/N reference.

    Returns:
        DataFrame with columns gamma, omega, n, min_m, reference, ratio, t_star, mu_star.
    """
    if n_values is None:
        n_values = np.unique(np.round(np.geomspace(10, 1e4, 13)))
    rows: list[dict[str, float]] = []
    for gamma, omega in pairs:
        domain = SearchDomain.for_rate(gamma)
        for value in n_values:
            n = int(value)
            best = optimize_m_quantity(n, gamma, omega, domain, workers)
            reference = asymptote_scenario_a(n, gamma)
            rows.append(
                {
                    "gamma": gamma,
                    "omega": omega,
                    "n": float(n),
                    "min_m": best.msqe_times_T,
                    "reference": reference,
                    "ratio": best.msqe_times_T / reference,
                    "t_star": best.t_star,
                    "mu_star": best.mu_star,
                }
            )
    return pd.DataFrame(rows)


FIGURES: dict[str, Callable[..., pd.DataFrame]] = {
    "fig2-squeezing": fig2_squeezing,
    "fig2-time": fig2_time,
    "fig3": fig3,
    "fig4": fig4,
}


def render_table(frame: pd.DataFrame, output_format: str) -> str:
    """CSV with shortest round-trip floats, or JSON records with NaN as null."""
    if output_format == "csv":
        return str(frame.to_csv(index=False, lineterminator="\n"))
    records: list[dict[str, Any]] = [
        {key: _json_value(value) for key, value in row.items()}
        for row in frame.to_dict(orient="records")
    ]
    return json.dumps(records, indent=2) + "\n"


def _json_value(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
