"""Parity readout of GHZ probes and the ω = 0 limits of the entangled strategies."""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from magprec.errors import DegenerateSignalError, DomainError
from magprec.physics.channel import ChannelCoefficients, NoiseModel, channel_coefficients

logger = logging.getLogger(__name__)

# ===== Constants =====

# Lower envelope of Δ²ω·T·N^{5/3}/(γω²)^{1/3} for parity readout at the schedule time
PARITY_ENVELOPE_CONSTANT = math.e**2 / 3.0 ** (1.0 / 3.0)

DEGENERATE_DERIVATIVE = 1e-300

# Each envelope window spans a factor 10^{1/3} in N
WINDOW_RATIO = 10.0 ** (1.0 / 3.0)
DEFAULT_WINDOW_SAMPLES = 2000


@dataclass(frozen=True, slots=True)
class ParityStats:
    """Mean, variance and ω-derivative of the x-parity of an evolved GHZ state."""

    mean_parity: float
    variance: float
    mean_derivative: float


def parity_stats(n: int, c: ChannelCoefficients) -> ParityStats:
    """Parity statistics from ⟨P_x⟩ = Re[(ξ_x + iχ_x)^N].

    The power is taken in polar form, so N can be as large as the float range allows.

    Args:
        n: Number of qubits.
        c: Single-qubit channel coefficients.

    Returns:
        ParityStats: Mean parity, its variance 1 − ⟨P_x⟩² and ∂⟨P_x⟩/∂ω.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    radius_sq = c.xi_x * c.xi_x + c.chi_x * c.chi_x
    if radius_sq == 0.0:
        derivative = c.dxi_x if n == 1 else 0.0
        return ParityStats(mean_parity=0.0, variance=1.0, mean_derivative=derivative)

    # |ξ + iχ| ≤ 1 for a contraction; rounding above 1 would blow up at large N
    log_radius = min(0.0, 0.5 * math.log(radius_sq))
    phase = math.atan2(c.chi_x, c.xi_x)
    power = math.exp(n * log_radius)
    mean = power * math.cos(n * phase)
    # 1 − mean without cancellation when the parity stays close to +1
    deficit = -math.expm1(n * log_radius) + 2.0 * power * math.sin(0.5 * n * phase) ** 2
    variance = min(max(deficit * (1.0 + mean), 0.0), 1.0)

    lower = math.exp((n - 1) * log_radius)
    derivative = n * lower * (
        math.cos((n - 1) * phase) * c.dxi_x - math.sin((n - 1) * phase) * c.dchi_x
    )
    return ParityStats(mean_parity=mean, variance=variance, mean_derivative=derivative)


def ghz_precision(n: int, noise: NoiseModel, omega: float, t: float) -> float:
    """Δ²ω·T of an N-qubit GHZ probe read out by x-parity.

    Raises:
        DomainError: If t <= 0.
        DegenerateSignalError: At ω = 0 and at nodes of the parity signal.
    """
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    if omega == 0.0:
        raise DegenerateSignalError("parity signal is flat at omega = 0; use ghz_omega_zero")
    stats = parity_stats(n, channel_coefficients(noise, omega, t))
    if abs(stats.mean_derivative) < DEGENERATE_DERIVATIVE:
        raise DegenerateSignalError(f"parity derivative vanishes at n={n}, t={t!r}")
    return t * stats.variance / stats.mean_derivative**2


def ghz_schedule_time(n: float, gamma: float, omega: float) -> float:
    """Interrogation time (3/(γω²N))^{1/3}."""
    if not gamma > 0.0 or omega == 0.0:
        raise DomainError("the GHZ schedule needs gamma > 0 and omega != 0")
    return (3.0 / (gamma * omega * omega * n)) ** (1.0 / 3.0)


def ghz_asymptote_envelope(n: int, gamma: float, omega: float) -> float:
    """Parity precision under transversal noise at the schedule time."""
    t = ghz_schedule_time(n, gamma, omega)
    return ghz_precision(n, NoiseModel.transversal(gamma), omega, t)


def envelope_window_minima(
    gamma: float,
    omega: float,
    n_min: float = 1e3,
    n_max: float = 1e7,
    samples_per_window: int = DEFAULT_WINDOW_SAMPLES,
) -> pd.DataFrame:
    """Minima of Δ²ω·T·N^{5/3}/(γω²)^{1/3} over windows one third of a decade wide.

    The rescaled precision oscillates in N; its lower envelope is read off as the
    minimum inside each window. Degenerate sample points are skipped.

    Returns:
        DataFrame with columns window_start, window_end, min_rescaled, argmin_n.
    """
    scale = (gamma * omega * omega) ** (1.0 / 3.0)
    rows: list[dict[str, float]] = []
    start = float(n_min)
    while start < n_max * (1.0 - 1e-12):
        end = min(start * WINDOW_RATIO, float(n_max))
        counts = np.unique(np.round(np.geomspace(start, end, samples_per_window)).astype(np.int64))
        best_value = math.inf
        best_n = 0
        for count in counts:
            n = int(count)
            try:
                value = ghz_asymptote_envelope(n, gamma, omega) * n ** (5.0 / 3.0) / scale
            except DegenerateSignalError:
                continue
            if value < best_value:
                best_value, best_n = value, n
        rows.append(
            {
                "window_start": start,
                "window_end": end,
                "min_rescaled": best_value,
                "argmin_n": float(best_n),
            }
        )
        logger.debug("envelope window [%.4g, %.4g]: min %.6f", start, end, best_value)
        start = end
    return pd.DataFrame(rows, columns=["window_start", "window_end", "min_rescaled", "argmin_n"])


# ===== ω = 0 limits =====


def ghz_omega_zero(n: float, gamma: float, t: float) -> float:
    """Limit ω → 0 of the GHZ precision, tγ²/(1 − e^{−tγ})²·N^{−2}."""
    if not t > 0.0 or not gamma > 0.0:
        raise DomainError("the omega = 0 limit needs t > 0 and gamma > 0")
    loss = math.expm1(-t * gamma)
    return t * gamma * gamma / (loss * loss) / (n * n)


@lru_cache(maxsize=1)
def kappa_opt() -> float:
    """Root κ of e^x = 1 + 2x, the optimal γt of the ω = 0 limits."""
    return float(bisect(lambda x: math.expm1(x) - 2.0 * x, 0.5, 3.0, xtol=1e-15, rtol=1e-15))
