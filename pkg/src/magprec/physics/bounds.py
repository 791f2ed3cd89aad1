"""Precision bounds, mixed-noise floors and the aligned-probe lower-bound quantity M."""

import logging
import math

from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from magprec.errors import DegenerateSignalError, DomainError
from magprec.physics.channel import NoiseModel, channel_coefficients, s_matrix
from magprec.physics.metrology import asymptote_scenario_b, msqe
from magprec.physics.probes import Axis, Geometry, ProbeSpec, oatss_moments

logger = logging.getLogger(__name__)

# ===== Constants =====

GHZ_BOUND_PREFACTOR = 3.0 ** (2.0 / 3.0) / 2.0

# Natural-log bracket for intersecting the large-N asymptotes
_LOG_N_BRACKET = (-230.0, 230.0)


class MixedNoiseSpec(BaseModel):
    """Transversal noise of rate γ with a fraction ε directed along the signal axis."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(ge=0.0, description="Total noise rate in 1/s")
    epsilon: float = Field(ge=0.0, le=1.0, description="Parallel fraction")

    def noise_model(self) -> NoiseModel:
        """NoiseModel with α = (1 − ε, 0, ε)."""
        return NoiseModel.mixed(self.gamma, self.epsilon)


# ===== No-go coefficients =====


def c_z(gamma: float, t: float) -> float:
    """Short-time coefficient 2γ + 2γ²t of the bound for parallel noise (valid for t ≪ 1/γ)."""
    return 2.0 * gamma + 2.0 * gamma * gamma * t


def c_x(gamma: float, omega: float, t: float) -> float:
    """Leading short-time coefficient γ²ω³t³/12 of the bound for transversal noise."""
    return gamma * gamma * omega**3 * t**3 / 12.0


def ghz_qfi_bound(n: float, gamma: float, omega: float) -> float:
    """(3^{2/3}/2)·(γω²)^{1/3}·N^{−5/3}; carries no information as ω → 0."""
    return GHZ_BOUND_PREFACTOR * (gamma * omega * omega) ** (1.0 / 3.0) * n ** (-5.0 / 3.0)


def mixed_noise_floor(spec: MixedNoiseSpec) -> float:
    """Asymptotic floor 2εγ of Δ²ω·T·N under mixed noise."""
    return 2.0 * spec.epsilon * spec.gamma


def depolarizing_floor(gamma: float) -> float:
    """Floor 4γ/3 of Δ²ω·T·N for isotropic dephasing."""
    return 4.0 * gamma / 3.0


def depolarization_mapping(t1: float, t2: float) -> MixedNoiseSpec:
    """Effective (γ, ε) of a spin with relaxation times T₁ and T₂.

    ε = 2T₂/(3T₁ + 2T₂) and γ = 2(3T₁ + 2T₂)/(3T₁T₂), so 2γε = 8/(3T₁).

    Raises:
        DomainError: If either time is not positive.
    """
    if not (t1 > 0.0 and t2 > 0.0):
        raise DomainError(f"T1 and T2 must be positive, got {t1!r}, {t2!r}")
    total = 3.0 * t1 + 2.0 * t2
    return MixedNoiseSpec(gamma=2.0 * total / (3.0 * t1 * t2), epsilon=2.0 * t2 / total)


# ===== Crossover =====


def crossover_estimate(gamma: float, omega: float, epsilon: float) -> float:
    """N at which 2εγ/N meets (2ω/3)·N^{−5/4}, namely (ω/(3εγ))⁴."""
    if not (epsilon > 0.0 and gamma > 0.0):
        raise DomainError("crossover needs epsilon > 0 and gamma > 0")
    return (omega / (3.0 * epsilon * gamma)) ** 4


def asymptote_intersection(gamma: float, omega: float, epsilon: float) -> float:
    """Numerical intersection of the mixed-noise floor and the perpendicular-probe asymptote."""
    floor = mixed_noise_floor(MixedNoiseSpec(gamma=gamma, epsilon=epsilon))
    if floor <= 0.0 or omega == 0.0:
        raise DomainError("asymptotes only intersect for epsilon, gamma > 0 and omega != 0")

    def gap(log_n: float) -> float:
        n = math.exp(log_n)
        return math.log(floor / n) - math.log(asymptote_scenario_b(n, abs(omega)))

    return math.exp(float(brentq(gap, *_LOG_N_BRACKET, xtol=1e-14)))


# ===== Aligned-probe lower bound =====


def _transversal_setup(
    n: int, gamma: float, omega: float, t: float
) -> tuple[float, float, float, float]:
    if n < 2:
        raise DomainError(f"M needs n >= 2, got {n}")
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    noise = NoiseModel.transversal(gamma)
    c = channel_coefficients(noise, omega, t)
    # ξ_x − ξ_y = 2γ·e^{ct}·sinh(τ√v)/√v for transversal noise
    gap = 2.0 * s_matrix(noise, omega, t).b_minus_reduced
    one_minus_r = gap / c.xi_x
    r = c.xi_y / c.xi_x
    return c.chi_x, c.dchi_x, one_minus_r, r


def m_quantity(n: int, gamma: float, omega: float, t: float, mu: float) -> float:
    """M = Δ²ω_(a)·T − r²·Δ²ω_(b)·T with r = ξ_y/ξ_x under transversal noise.

    The squeezed-variance terms of the two scenarios cancel exactly, leaving

        M = t·(1 − r²)·[N/4·(1 − χ²) + χ²·Δ²J_∥] / (∂χ/∂ω·⟨J_∥⟩)²,

    where ∥ is the mean-spin direction. M lower-bounds the aligned-probe precision.

    Raises:
        DegenerateSignalError: If the signal derivative vanishes.
    """
    chi, dchi, one_minus_r, r = _transversal_setup(n, gamma, omega, t)
    moments = oatss_moments(n, mu, Axis.X)
    slope = dchi * moments.mean_jx
    if abs(slope) < 1e-300:
        raise DegenerateSignalError(f"signal derivative vanishes at t={t!r}, mu={mu!r}")
    contrast = one_minus_r * (1.0 + r)
    spread = 0.25 * n * (1.0 - chi * chi) + chi * chi * moments.var_jx
    return t * contrast * spread / (slope * slope)


def m_quantity_from_precisions(n: int, gamma: float, omega: float, t: float, mu: float) -> float:
    """M evaluated literally as the difference of the two scenario precisions."""
    noise = NoiseModel.transversal(gamma)
    c = channel_coefficients(noise, omega, t)
    r = c.xi_y / c.xi_x
    aligned = msqe(ProbeSpec(n_particles=n, geometry=Geometry.SCENARIO_A, mu=mu), noise, omega, t)
    perpendicular = msqe(
        ProbeSpec(n_particles=n, geometry=Geometry.SCENARIO_B, mu=mu), noise, omega, t
    )
    return aligned - r * r * perpendicular
