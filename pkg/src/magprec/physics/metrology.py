"""Evolved collective-spin statistics and error-propagation precision."""

import logging
import math
from dataclasses import dataclass

from magprec.errors import DegenerateSignalError, DomainError
from magprec.physics.channel import ChannelCoefficients, NoiseModel, channel_coefficients
from magprec.physics.probes import (
    Axis,
    Geometry,
    ProbeSpec,
    SpinMoments,
    initial_moments,
)

logger = logging.getLogger(__name__)

# ===== Constants =====

DEGENERATE_DERIVATIVE = 1e-300

# Prefactor of the symmetrized covariance in the evolved variance
COVARIANCE_WEIGHT = 2.0

_SERIES_TERMS = 20

OMEGA_ZERO_OATSS_PREFACTOR = 5.0 / (3.0 * 2.0 ** (2.0 / 3.0))


@dataclass(frozen=True, slots=True)
class PrecisionResult:
    """Mean-squared error of one probe at one interrogation time.

    ``msqe_times_T`` is Δ²ω·T in 1/s; T only enters through this product.
    """

    msqe_times_T: float
    t: float
    mu: float
    geometry: Geometry
    n_particles: int
    gain_vs_css: float


def _pair(c: ChannelCoefficients, axis: Axis) -> tuple[float, float]:
    """(ξ, χ) acting on (J_axis, J_other) for the evolved J_axis."""
    if axis is Axis.X:
        return c.xi_x, c.chi_x
    return c.xi_y, c.chi_y


def _derivative_pair(c: ChannelCoefficients, axis: Axis) -> tuple[float, float]:
    if axis is Axis.X:
        return c.dxi_x, c.dchi_x
    return c.dxi_y, c.dchi_y


def evolved_mean(m0: SpinMoments, c: ChannelCoefficients, axis: Axis) -> float:
    """⟨J_axis⟩ after the channel."""
    xi, chi = _pair(c, axis)
    return xi * m0.mean(axis) + chi * m0.mean(axis.other)


def evolved_mean_derivative(m0: SpinMoments, c: ChannelCoefficients, axis: Axis) -> float:
    """∂⟨J_axis⟩/∂ω after the channel."""
    dxi, dchi = _derivative_pair(c, axis)
    return dxi * m0.mean(axis) + dchi * m0.mean(axis.other)


def evolved_variance(m0: SpinMoments, c: ChannelCoefficients, n: int, axis: Axis) -> float:
    """Δ²J_axis after the channel.

    The noise adds (N/4)(1 − ξ² − χ²) because the single-qubit second moments of
    σ_x and σ_y are fixed at one; the rest is the linear image of the initial
    covariance matrix.
    """
    xi, chi = _pair(c, axis)
    return (
        0.25 * n * (1.0 - xi * xi - chi * chi)
        + xi * xi * m0.variance(axis)
        + chi * chi * m0.variance(axis.other)
        + COVARIANCE_WEIGHT * xi * chi * m0.cov_jxjy
    )


def msqe(probe: ProbeSpec, noise: NoiseModel, omega: float, t: float) -> float:
    """Δ²ω·T = t·Δ²Ĵ/(∂⟨Ĵ⟩/∂ω)² of a spin-measured probe.

    Raises:
        DomainError: If t <= 0 or the probe is a GHZ state.
        DegenerateSignalError: If the signal derivative vanishes.
    """
    if probe.geometry is Geometry.GHZ:
        raise DomainError("GHZ probes are handled by the parity readout")
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    m0 = initial_moments(probe)
    c = channel_coefficients(noise, omega, t)
    axis = probe.measured_axis
    derivative = evolved_mean_derivative(m0, c, axis)
    if abs(derivative) < DEGENERATE_DERIVATIVE:
        raise DegenerateSignalError(
            f"signal derivative vanishes for {probe.geometry.value} at omega={omega!r}, t={t!r}"
        )
    variance = evolved_variance(m0, c, probe.n_particles, axis)
    return t * variance / (derivative * derivative)


def precision(probe: ProbeSpec, noise: NoiseModel, omega: float, t: float) -> PrecisionResult:
    """Precision of ``probe`` with the gain over a CSS polarized along x and read out along y.

    Args:
        probe: Probe specification (any geometry except GHZ).
        noise: Noise model.
        omega: Signal frequency in 1/s.
        t: Interrogation time in s.

    Returns:
        PrecisionResult: Δ²ω·T and the CSS-relative gain at the same t.
    """
    value = msqe(probe, noise, omega, t)
    reference = msqe(
        ProbeSpec(n_particles=probe.n_particles, geometry=Geometry.CSS_X), noise, omega, t
    )
    return PrecisionResult(
        msqe_times_T=value,
        t=t,
        mu=probe.mu,
        geometry=probe.geometry,
        n_particles=probe.n_particles,
        gain_vs_css=reference / value,
    )


def css_precision_closed_form(n: int, gamma: float, omega: float, t: float) -> float:
    """Coherent-state precision under transversal noise as one closed expression.

    With Γ = 2ω/γ, Γ̄² = 1 − Γ², τ = γt/2 and s = e^{−τ}·sinh(τΓ̄)/Γ̄,

        Δ²ω·T = t·γ²·Γ̄⁴·(1 − Γ²s²) / (N·(2s − γtΓ²·e^{−τ}cosh(τΓ̄))²).

    Imaginary Γ̄ continues to sin/cos; for |τΓ̄| ≤ 1 the expression is evaluated
    from power series, which removes the Γ̄⁴/Γ̄⁴ cancellation near 2ω = γ.

    Raises:
        DomainError: If γ <= 0 or t <= 0.
        DegenerateSignalError: If the signal derivative vanishes.
    """
    if not gamma > 0.0:
        raise DomainError("the closed form needs gamma > 0")
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    ratio_sq = (2.0 * omega / gamma) ** 2
    bar_sq = 1.0 - ratio_sq
    tau = 0.5 * gamma * t
    w = tau * tau * bar_sq

    if abs(w) <= 1.0:
        scale = math.exp(-tau)
        sinhc = 0.0
        slope = 0.0
        term = 1.0
        for k in range(_SERIES_TERMS):
            # term = w^k/(2k+1)!
            sinhc += term
            if k + 1 < _SERIES_TERMS:
                slope += (k + 1) * term / ((2 * k + 2) * (2 * k + 3))
            term *= w / ((2 * k + 2) * (2 * k + 3))
        sinhc *= scale * tau
        slope *= scale * tau**3
        numerator = 1.0 - ratio_sq * sinhc * sinhc
        denominator = sinhc - 2.0 * ratio_sq * slope
        if abs(denominator) < DEGENERATE_DERIVATIVE:
            raise DegenerateSignalError("coherent-state signal derivative vanishes")
        return t * gamma * gamma * numerator / (4.0 * n * denominator * denominator)

    if bar_sq > 0.0:
        bar = math.sqrt(bar_sq)
        grow = math.exp(tau * (bar - 1.0))
        shrink = math.exp(-tau * (bar + 1.0))
        sinhc = 0.5 * (grow - shrink) / bar
        cosh_s = 0.5 * (grow + shrink)
    else:
        bar = math.sqrt(-bar_sq)
        scale = math.exp(-tau)
        sinhc = scale * math.sin(tau * bar) / bar
        cosh_s = scale * math.cos(tau * bar)
    numerator = 1.0 - ratio_sq * sinhc * sinhc
    denominator = 2.0 * sinhc - gamma * t * ratio_sq * cosh_s
    if abs(denominator) < DEGENERATE_DERIVATIVE:
        raise DegenerateSignalError("coherent-state signal derivative vanishes")
    return t * gamma * gamma * bar_sq * bar_sq * numerator / (n * denominator * denominator)


# ===== Asymptotes =====


def asymptote_scenario_b(n: float, omega: float) -> float:
    """Large-N precision of the perpendicular probe, (2ω/3)·N^{−5/4}."""
    return 2.0 * omega / 3.0 * n ** (-1.25)


def asymptote_scenario_a(n: float, gamma: float) -> float:
    """Standard-quantum-limit ceiling 2γ/N of the aligned probe."""
    return 2.0 * gamma / n


def scenario_a_mixed_asymptote(n: float, gamma: float, epsilon: float) -> float:
    """2γ(1−ε)/N, the aligned-probe reference quoted for mixed noise."""
    return 2.0 * gamma * (1.0 - epsilon) / n


def omega_zero_oatss_asymptote(n: float, gamma: float, t: float) -> float:
    """Twisted-probe precision at ω = 0 with μ = (N/4)^{−2/3}, leading order in N.

    Equals 5/(3·2^{2/3})·tγ²/(1 − e^{−tγ})²·N^{−5/3}.
    """
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    loss = math.expm1(-t * gamma)
    return OMEGA_ZERO_OATSS_PREFACTOR * t * gamma * gamma / (loss * loss) * n ** (-5.0 / 3.0)
