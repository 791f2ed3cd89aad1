"""Closed-form single-qubit dephasing channel: S-matrix, Kraus set and evolution coefficients.

The model is the Lindblad equation with Hamiltonian (ω/2)σ_z and dissipator
(γ/2)Σ_i α_i(σ_i ρ σ_i − ρ). On the equatorial Bloch components it acts as

    d/dt (x, y) = [[−γ(α_y+α_z), −ω], [ω, −γ(α_x+α_z)]] · (x, y)

whose exponential is written through the entire functions cosh(τ√v) and
sinh(τ√v)/√v of v = γ²α₋² − 4ω², τ = t/2. Working in v keeps every branch
real, removes the 0/0 at α̃ = 0 and makes γ = 0 an ordinary point.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from magprec.errors import DomainError, NonCPTPError

logger = logging.getLogger(__name__)

# ===== Numerical constants =====
SERIES_THRESHOLD = 1.0
SERIES_TERMS = 20
# S-matrix eigenvalues in (−EIGENVALUE_CLAMP, 0) are rounding and become 0; below
# −EIGENVALUE_FLOOR the channel is not completely positive
EIGENVALUE_CLAMP = 1e-10
EIGENVALUE_FLOOR = 1e-8
WEIGHT_TOLERANCE = 1e-12

_ORDERS = np.arange(SERIES_TERMS, dtype=float)
_EVEN_FACTORIALS = np.array([math.factorial(2 * k) for k in range(SERIES_TERMS)], dtype=float)
_ODD_FACTORIALS = np.array([math.factorial(2 * k + 1) for k in range(SERIES_TERMS)], dtype=float)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


class NoiseModel(BaseModel):
    """Dephasing strength γ (1/s) and direction weights α_x, α_y, α_z summing to one."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(ge=0.0, description="Overall noise rate in 1/s")
    alpha_x: float = Field(default=1.0, ge=0.0)
    alpha_y: float = Field(default=0.0, ge=0.0)
    alpha_z: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> Self:
        total = self.alpha_x + self.alpha_y + self.alpha_z
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"direction weights must sum to 1, got {total!r}")
        return self

    @classmethod
    def transversal(cls, gamma: float) -> Self:
        """Noise perpendicular to the signal rotation axis (along x)."""
        return cls(gamma=gamma, alpha_x=1.0, alpha_y=0.0, alpha_z=0.0)

    @classmethod
    def parallel(cls, gamma: float) -> Self:
        """Noise along the signal rotation axis (z)."""
        return cls(gamma=gamma, alpha_x=0.0, alpha_y=0.0, alpha_z=1.0)

    @classmethod
    def depolarizing(cls, gamma: float) -> Self:
        """Isotropic dephasing, α = (1/3, 1/3, 1/3)."""
        third = 1.0 / 3.0
        return cls(gamma=gamma, alpha_x=third, alpha_y=third, alpha_z=1.0 - 2.0 * third)

    @classmethod
    def mixed(cls, gamma: float, epsilon: float) -> Self:
        """Transversal noise with a parallel fraction ε."""
        if not 0.0 <= epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {epsilon!r}")
        return cls(gamma=gamma, alpha_x=1.0 - epsilon, alpha_y=0.0, alpha_z=epsilon)

    @property
    def alpha_minus(self) -> float:
        """α₋ = α_x − α_y."""
        return self.alpha_x - self.alpha_y

    @property
    def alpha_plus(self) -> float:
        """α₊ = α_x + α_y, the weight that relaxes ⟨σ_z⟩."""
        return self.alpha_x + self.alpha_y


@dataclass(frozen=True, slots=True)
class SMatrix:
    """Non-zero entries of the process matrix S (trace 2) in the Pauli basis (I, σ_x, σ_y, σ_z).

    ``s03`` and ``s30`` hold the imaginary parts of the (0,3) and (3,0) entries.
    """

    s00: float
    s11: float
    s22: float
    s33: float
    s03: float
    s30: float
    gamma_ratio: float
    alpha_minus: float
    a_plus: float
    a_minus: float
    b_plus: float
    b_minus_reduced: float

    @property
    def alpha_tilde(self) -> complex:
        """α̃ = sqrt(α₋² − Γ²), imaginary when the rotation dominates."""
        return complex(np.emath.sqrt(self.alpha_minus**2 - self.gamma_ratio**2))

    def as_array(self) -> NDArray[np.complex128]:
        """The full 4×4 Hermitian matrix."""
        matrix = np.zeros((4, 4), dtype=complex)
        matrix[0, 0] = self.s00
        matrix[1, 1] = self.s11
        matrix[2, 2] = self.s22
        matrix[3, 3] = self.s33
        matrix[0, 3] = 1j * self.s03
        matrix[3, 0] = 1j * self.s30
        return matrix


@dataclass(frozen=True, slots=True)
class KrausSet:
    """Coefficients of K₁ = a₁σ_y, K₂ = a₂σ_x, K₃ = a₃σ_z + i b₃ I, K₄ = a₄σ_z + i b₄ I."""

    a1: float
    a2: float
    a3: float
    a4: float
    b3: float
    b4: float

    @property
    def completeness(self) -> float:
        """Σ a_i² + Σ b_i², equal to one for a trace-preserving map."""
        return (
            self.a1**2 + self.a2**2 + self.a3**2 + self.a4**2 + self.b3**2 + self.b4**2
        )

    def operators(self) -> list[NDArray[np.complex128]]:
        """The four 2×2 Kraus operators."""
        return [
            self.a1 * SIGMA_Y,
            self.a2 * SIGMA_X,
            self.a3 * SIGMA_Z + 1j * self.b3 * IDENTITY,
            self.a4 * SIGMA_Z + 1j * self.b4 * IDENTITY,
        ]

    def apply(self, rho: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """Apply the map to a single-qubit density matrix."""
        result = np.zeros((2, 2), dtype=complex)
        for op in self.operators():
            result += op @ rho @ op.conj().T
        return result


@dataclass(frozen=True, slots=True)
class ChannelCoefficients:
    """Evolution coefficients of the equatorial Bloch components and their ω-derivatives.

    ⟨σ_x⟩_t = ξ_x⟨σ_x⟩ + χ_x⟨σ_y⟩ and ⟨σ_y⟩_t = χ_y⟨σ_x⟩ + ξ_y⟨σ_y⟩, with χ_y = −χ_x.
    """

    xi_x: float
    chi_x: float
    xi_y: float
    chi_y: float
    dxi_x: float
    dchi_x: float
    dxi_y: float
    dchi_y: float

    @classmethod
    def identity(cls) -> Self:
        """Coefficients of the zero-time channel."""
        return cls(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def bloch_map(self) -> NDArray[np.float64]:
        """2×2 matrix acting on (⟨σ_x⟩, ⟨σ_y⟩)."""
        return np.array([[self.xi_x, self.chi_x], [self.chi_y, self.xi_y]])


class _Kernels(NamedTuple):
    """e^{ct}·cosh(τ√v), e^{ct}·sinh(τ√v)/√v and its v-derivative, with τ = t/2."""

    cosh_term: float
    sinhc_term: float
    dsinhc_term: float
    half_t: float


def _kernels(v: float, half_t: float, decay: float) -> _Kernels:
    w = half_t * half_t * v
    if abs(w) <= SERIES_THRESHOLD:
        powers = w**_ORDERS
        scale = math.exp(decay)
        cosh_part = float(np.sum(powers / _EVEN_FACTORIALS))
        sinhc_part = half_t * float(np.sum(powers / _ODD_FACTORIALS))
        dsinhc_part = half_t**3 * float(np.sum(_ORDERS[1:] * powers[:-1] / _ODD_FACTORIALS[1:]))
        return _Kernels(scale * cosh_part, scale * sinhc_part, scale * dsinhc_part, half_t)

    if v > 0.0:
        root = math.sqrt(v)
        argument = half_t * root
        # decay + argument <= 0 always, so neither exponential overflows
        grow = math.exp(decay + argument)
        shrink = math.exp(decay - argument)
        cosh_term = 0.5 * (grow + shrink)
        sinhc_term = 0.5 * (grow - shrink) / root
    else:
        root = math.sqrt(-v)
        argument = half_t * root
        scale = math.exp(decay)
        cosh_term = scale * math.cos(argument)
        sinhc_term = scale * math.sin(argument) / root
    dsinhc_term = (half_t * cosh_term - sinhc_term) / (2.0 * v)
    return _Kernels(cosh_term, sinhc_term, dsinhc_term, half_t)


def _check_time(t: float) -> None:
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"interrogation time must be finite and >= 0, got {t!r}")


def _evaluate(noise: NoiseModel, omega: float, t: float) -> _Kernels:
    _check_time(t)
    gamma = noise.gamma
    v = (gamma * noise.alpha_minus) ** 2 - 4.0 * omega * omega
    decay = -0.5 * gamma * (1.0 + noise.alpha_z) * t
    return _kernels(v, 0.5 * t, decay)


def channel_coefficients(noise: NoiseModel, omega: float, t: float) -> ChannelCoefficients:
    """Evolution coefficients ξ_x, χ_x, ξ_y, χ_y and their analytic ω-derivatives.

    Args:
        noise: Noise model.
        omega: Signal frequency in 1/s.
        t: Interrogation time in s.

    Returns:
        ChannelCoefficients: Values and derivatives at (ω, t).

    Raises:
        DomainError: If t is negative or not finite.
    """
    k = _evaluate(noise, omega, t)
    drift = noise.gamma * noise.alpha_minus
    dv_domega = -8.0 * omega

    chi_x = -2.0 * omega * k.sinhc_term
    dcosh = 0.5 * k.half_t * k.sinhc_term * dv_domega
    dsinhc = k.dsinhc_term * dv_domega
    dchi_x = -2.0 * (k.sinhc_term + omega * dsinhc)
    return ChannelCoefficients(
        xi_x=k.cosh_term + drift * k.sinhc_term,
        chi_x=chi_x,
        xi_y=k.cosh_term - drift * k.sinhc_term,
        chi_y=-chi_x,
        dxi_x=dcosh + drift * dsinhc,
        dchi_x=dchi_x,
        dxi_y=dcosh - drift * dsinhc,
        dchi_y=-dchi_x,
    )


def s_matrix(noise: NoiseModel, omega: float, t: float) -> SMatrix:
    """Process matrix S of the channel, normalized to trace 2.

    Args:
        noise: Noise model.
        omega: Signal frequency in 1/s.
        t: Interrogation time in s.

    Returns:
        SMatrix: Non-zero entries and the derived quantities A±, B±.
    """
    k = _evaluate(noise, omega, t)
    drift = noise.gamma * noise.alpha_minus
    relaxation = -noise.gamma * noise.alpha_plus * t
    a_minus = -0.5 * math.expm1(relaxation)
    a_plus = 1.0 - a_minus
    off_diagonal = 2.0 * omega * k.sinhc_term

    if noise.gamma > 0.0:
        gamma_ratio = 2.0 * omega / noise.gamma
    else:
        gamma_ratio = math.copysign(math.inf, omega) if omega != 0.0 else 0.0
        logger.debug("gamma = 0: pure rotation channel at omega=%g", omega)

    return SMatrix(
        s00=a_plus + k.cosh_term,
        s11=a_minus + drift * k.sinhc_term,
        s22=a_minus - drift * k.sinhc_term,
        s33=a_plus - k.cosh_term,
        s03=off_diagonal,
        s30=-off_diagonal,
        gamma_ratio=gamma_ratio,
        alpha_minus=noise.alpha_minus,
        a_plus=a_plus,
        a_minus=a_minus,
        b_plus=k.cosh_term,
        b_minus_reduced=noise.gamma * k.sinhc_term,
    )


def _weight(value: float, label: str) -> float:
    if value < -EIGENVALUE_FLOOR:
        raise NonCPTPError(f"S-matrix eigenvalue {label} = {value!r} is negative")
    if value < -EIGENVALUE_CLAMP:
        logger.warning("S-matrix eigenvalue %s = %.3e clamped to zero", label, value)
    return max(value, 0.0)


def kraus_set(noise: NoiseModel, omega: float, t: float) -> KrausSet:
    """Kraus coefficients from the eigen-decomposition of the S-matrix.

    The σ_x and σ_y entries are already eigenvalues; the {I, σ_z} block is
    diagonalized with ``numpy.linalg.eigh`` and each eigenvector is rephased so the
    σ_z coefficient is real, which leaves the identity coefficient imaginary.

    Raises:
        NonCPTPError: If an eigenvalue is below −1e-8.
    """
    s = s_matrix(noise, omega, t)
    a1 = math.sqrt(0.5 * _weight(s.s22, "S22"))
    a2 = math.sqrt(0.5 * _weight(s.s11, "S11"))

    block = np.array([[s.s00, 1j * s.s03], [1j * s.s30, s.s33]], dtype=complex)
    eigenvalues, eigenvectors = np.linalg.eigh(block)
    pairs: list[tuple[float, float]] = []
    for index, eigenvalue in enumerate(eigenvalues):
        weight = _weight(float(eigenvalue), f"block[{index}]")
        identity_part, z_part = eigenvectors[:, index]
        if abs(z_part) >= abs(identity_part):
            phase = np.conj(z_part) / abs(z_part)
        else:
            phase = 1j * np.conj(identity_part) / abs(identity_part)
        scale = math.sqrt(0.5 * weight)
        pairs.append((scale * float((z_part * phase).real), scale * float((identity_part * phase).imag)))

    (a3, b3), (a4, b4) = pairs
    return KrausSet(a1=a1, a2=a2, a3=a3, a4=a4, b3=b3, b4=b4)


def coefficient_derivatives_check(
    noise: NoiseModel, omega: float, t: float, h: float = 1e-4
) -> float:
    """Worst relative deviation between analytic and finite-difference ω-derivatives.

    Central differences at steps h and h/2 are combined by one Richardson step. The
    deviation of each derivative is normalized by max(|analytic|, |numeric|, t).

    Args:
        noise: Noise model.
        omega: Signal frequency in 1/s.
        t: Interrogation time in s.
        h: Finite-difference step, within [1e-8, 1e-2]·max(1, |ω|).

    Returns:
        Largest relative deviation over dξ_x, dχ_x, dξ_y, dχ_y.
    """
    reach = max(1.0, abs(omega))
    if not 1e-8 * reach <= h <= 1e-2 * reach:
        raise DomainError(f"step h={h!r} outside [1e-8, 1e-2]·max(1, |omega|)")

    def sample(offset: float) -> NDArray[np.float64]:
        c = channel_coefficients(noise, omega + offset, t)
        return np.array([c.xi_x, c.chi_x, c.xi_y, c.chi_y])

    coarse = (sample(h) - sample(-h)) / (2.0 * h)
    fine = (sample(0.5 * h) - sample(-0.5 * h)) / h
    numeric = (4.0 * fine - coarse) / 3.0

    c = channel_coefficients(noise, omega, t)
    analytic = np.array([c.dxi_x, c.dchi_x, c.dxi_y, c.dchi_y])
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), t)
    return float(np.max(np.abs(analytic - numeric) / scale))
