"""Dense N-qubit reference: exact probe states, Kraus and RK4 evolution, expectation values.

Every closed form of the physics package is checked against this module for small N.
Qubit 0 is the most significant bit of the computational-basis index.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache, reduce
from typing import Self

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from magprec.config import get_settings
from magprec.errors import (
    ConventionMismatchError,
    DegenerateSignalError,
    DomainError,
    StepSizeError,
    VerificationError,
)
from magprec.physics.channel import PAULI_BASIS, KrausSet, NoiseModel, kraus_set
from magprec.physics.probes import (
    Axis,
    Geometry,
    ProbeSpec,
    SpinMoments,
    oatss_moments,
    twist_terms,
)

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

# ===== Tolerances =====

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10
CONVENTION_TOL = 1e-8

# Finite-difference step in ω is this fraction of 1/t
FD_STEP = 1e-3

_SINGLE_QUBIT: dict[str, ComplexMatrix] = {
    "x": PAULI_BASIS[1],
    "y": PAULI_BASIS[2],
    "z": PAULI_BASIS[3],
}
_POLARIZED: dict[str, ComplexMatrix] = {
    "x": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
    "y": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0),
    "z": np.array([1.0, 0.0], dtype=complex),
}


@dataclass(frozen=True, slots=True)
class DenseState:
    """Density matrix of ``n_qubits`` spins, shape (2^N, 2^N)."""

    matrix: ComplexMatrix
    n_qubits: int

    @classmethod
    def from_vector(cls, vector: ComplexMatrix, n_qubits: int) -> Self:
        """Pure state |ψ⟩⟨ψ|."""
        return cls(np.outer(vector, vector.conj()), n_qubits)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def check(self) -> None:
        """Verify Hermiticity, unit trace and positivity.

        Raises:
            VerificationError: If any of the three fails its tolerance.
        """
        asymmetry = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if asymmetry > HERMITIAN_TOL:
            raise VerificationError(f"state is not Hermitian (deviation {asymmetry:.3e})")
        trace = complex(np.trace(self.matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise VerificationError(f"state trace is {trace}")
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -EIGENVALUE_TOL:
            raise VerificationError(f"state has negative eigenvalue {lowest:.3e}")


class ObservableKind(StrEnum):
    SPIN = "spin"
    SPIN_SQUARED = "spin-squared"
    PARITY = "parity"


@dataclass(frozen=True, slots=True)
class ObservableSpec:
    """Collective spin J_a, its square J_a² or the parity ⊗σ_a, for a ∈ {x, y, z}."""

    kind: ObservableKind
    axis: str

    def __post_init__(self) -> None:
        if self.axis not in _SINGLE_QUBIT:
            raise DomainError(f"axis must be one of x, y, z, got {self.axis!r}")


@dataclass(frozen=True, slots=True)
class Rk4Result:
    """Integrated state, step count and (optionally) the step-halving deviation."""

    state: DenseState
    steps: int
    error_estimate: float | None = None


# ===== Operators =====


def _check_size(n: int) -> None:
    cap = get_settings().oracle_max_qubits
    if not 1 <= n <= cap:
        raise DomainError(f"dense oracle supports 1 <= n <= {cap}, got {n}")


@lru_cache(maxsize=64)
def _embedded(pauli: str, qubit: int, n: int) -> sparse.csr_matrix:
    factors = [sparse.identity(2, format="csr", dtype=complex)] * n
    factors[qubit] = sparse.csr_matrix(_SINGLE_QUBIT[pauli])
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), factors)


@lru_cache(maxsize=32)
def collective_spin(axis: str, n: int) -> sparse.csr_matrix:
    """J_a = ½ Σ_k σ_a^(k)."""
    total = sparse.csr_matrix((2**n, 2**n), dtype=complex)
    for qubit in range(n):
        total = total + _embedded(axis, qubit, n)
    return (0.5 * total).tocsr()


@lru_cache(maxsize=16)
def parity_operator(axis: str, n: int) -> sparse.csr_matrix:
    """⊗_k σ_a^(k)."""
    single = sparse.csr_matrix(_SINGLE_QUBIT[axis])
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), [single] * n)


def observable_matrix(observable: ObservableSpec, n: int) -> sparse.csr_matrix:
    if observable.kind is ObservableKind.PARITY:
        return parity_operator(observable.axis, n)
    spin = collective_spin(observable.axis, n)
    if observable.kind is ObservableKind.SPIN_SQUARED:
        return (spin @ spin).tocsr()
    return spin


def _apply_single(vector: ComplexMatrix, op: ComplexMatrix, qubit: int, n: int) -> ComplexMatrix:
    tensor = vector.reshape((2,) * n)
    moved = np.moveaxis(np.tensordot(op, tensor, axes=([1], [qubit])), 0, qubit)
    return moved.reshape(-1)


def _rotate_all(vector: ComplexMatrix, op: ComplexMatrix, n: int) -> ComplexMatrix:
    for qubit in range(n):
        vector = _apply_single(vector, op, qubit, n)
    return vector


def _rotation(pauli: str, angle: float) -> ComplexMatrix:
    """exp(−i·angle·σ/2)."""
    return math.cos(0.5 * angle) * PAULI_BASIS[0] - 1j * math.sin(0.5 * angle) * _SINGLE_QUBIT[pauli]


# ===== States =====


def build_css(n: int, axis: str = "x") -> DenseState:
    """Coherent spin state with all spins along ``axis``."""
    _check_size(n)
    single = _POLARIZED[axis]
    return DenseState.from_vector(reduce(np.kron, [single] * n), n)


def _twisted_vector(n: int, mu: float, delta: float) -> ComplexMatrix:
    vector = reduce(np.kron, [_POLARIZED["x"]] * n)
    jz = collective_spin("z", n).diagonal().real
    vector = vector * np.exp(-0.5j * mu * jz * jz)
    return _rotate_all(vector, _rotation("x", delta), n)


def _moments_match(moments: SpinMoments, expected: SpinMoments, n: int) -> bool:
    tolerance = CONVENTION_TOL * max(1.0, 0.25 * n * n)
    pairs = [
        (moments.mean_jx, expected.mean_jx),
        (moments.mean_jy, expected.mean_jy),
        (moments.var_jx, expected.var_jx),
        (moments.var_jy, expected.var_jy),
        (moments.var_jz, expected.var_jz),
        (moments.cov_jxjy, expected.cov_jxjy),
    ]
    return all(abs(actual - target) <= tolerance for actual, target in pairs)


def rotate_about_z(state: DenseState, phi: float) -> DenseState:
    """exp(−iφJ_z)·ρ·exp(iφJ_z), turning the mean spin from x towards y by φ."""
    turn = np.array([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    unitary = reduce(np.kron, [turn] * state.n_qubits)
    return DenseState(unitary[:, None] * state.matrix * unitary.conj()[None, :], state.n_qubits)


def build_oatss(n: int, mu: float, axis: Axis = Axis.X) -> DenseState:
    """One-axis-twisted state exp(−i(μ/2)J_z²)|CSS_x⟩ rotated so J_y carries the minimal variance.

    The twist leaves the minimal-variance direction at δ = ½·atan2(B, A) from z in
    the y–z plane, so the alignment turns about x by ±(π/2 − δ). The sign is chosen
    by comparing with the closed-form moments; for ``axis=y`` the state is then
    turned by π/2 about z.

    Raises:
        ConventionMismatchError: If neither candidate reproduces the closed-form moments.
    """
    _check_size(n)
    expected = oatss_moments(n, mu, Axis.X)
    a, b = twist_terms(n, mu)
    theta = 0.5 * math.pi - 0.5 * math.atan2(b, a)

    chosen: DenseState | None = None
    for sign in (1.0, -1.0):
        candidate = DenseState.from_vector(_twisted_vector(n, mu, sign * theta), n)
        if _moments_match(moments(candidate), expected, n):
            chosen = candidate
            break
    if chosen is None:
        raise ConventionMismatchError(f"twisted state n={n}, mu={mu!r} misses the closed form")
    logger.debug("twisted state n=%d, mu=%g aligned by %+.6f", n, mu, sign * theta)

    if axis is Axis.Y:
        chosen = rotate_about_z(chosen, 0.5 * math.pi)
    return chosen


def build_ghz(n: int) -> DenseState:
    """(|0…0⟩ + |1…1⟩)/√2."""
    _check_size(n)
    vector = np.zeros(2**n, dtype=complex)
    vector[0] = vector[-1] = 1.0 / math.sqrt(2.0)
    return DenseState.from_vector(vector, n)


def probe_state(probe: ProbeSpec) -> DenseState:
    if probe.geometry is Geometry.GHZ:
        return build_ghz(probe.n_particles)
    if probe.geometry.is_squeezed:
        return build_oatss(probe.n_particles, probe.mu, probe.probe_axis)
    return build_css(probe.n_particles, probe.probe_axis.value)


# ===== Evolution =====


def _apply_to_index(tensor: ComplexMatrix, op: ComplexMatrix, index: int) -> ComplexMatrix:
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [index])), 0, index)


def apply_channel(state: DenseState, kraus: KrausSet) -> DenseState:
    """Apply the single-qubit Kraus map to every qubit."""
    n = state.n_qubits
    operators = kraus.operators()
    tensor = state.matrix.reshape((2,) * (2 * n))
    for qubit in range(n):
        updated = np.zeros_like(tensor)
        for op in operators:
            left = _apply_to_index(tensor, op, qubit)
            updated += _apply_to_index(left, op.conj(), n + qubit)
        tensor = updated
    dim = 2**n
    return DenseState(tensor.reshape(dim, dim), n)


def _generator(noise: NoiseModel, omega: float, n: int) -> Callable[[ComplexMatrix], ComplexMatrix]:
    indices = np.arange(2**n)
    flips = [indices ^ (1 << (n - 1 - qubit)) for qubit in range(n)]
    signs = [1.0 - 2.0 * ((indices >> (n - 1 - qubit)) & 1) for qubit in range(n)]
    energy = omega * 0.5 * sum(signs)
    commutator = -1j * (energy[:, None] - energy[None, :])
    half_rate = 0.5 * noise.gamma
    weights = (noise.alpha_x, noise.alpha_y, noise.alpha_z)

    def derivative(rho: ComplexMatrix) -> ComplexMatrix:
        result = commutator * rho - half_rate * n * rho
        if half_rate == 0.0:
            return result
        for flip, sign in zip(flips, signs, strict=True):
            sign_outer = sign[:, None] * sign[None, :]
            flipped = rho[np.ix_(flip, flip)]
            if weights[0]:
                result += half_rate * weights[0] * flipped
            if weights[1]:
                # σ_y ρ σ_y = σ_x (σ_z ρ σ_z) σ_x
                result += half_rate * weights[1] * (sign_outer[np.ix_(flip, flip)] * flipped)
            if weights[2]:
                result += half_rate * weights[2] * (sign_outer * rho)
        return result

    return derivative


def _integrate(
    matrix: ComplexMatrix, noise: NoiseModel, omega: float, t: float, steps: int, n: int
) -> ComplexMatrix:
    derivative = _generator(noise, omega, n)
    dt = t / steps
    rho = matrix.astype(complex, copy=True)
    for _ in range(steps):
        k1 = derivative(rho)
        k2 = derivative(rho + 0.5 * dt * k1)
        k3 = derivative(rho + 0.5 * dt * k2)
        k4 = derivative(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def _step_count(noise: NoiseModel, omega: float, t: float, n: int, steps: int | None) -> int:
    limit = get_settings().rk4_max_step_rate
    rate = max(noise.gamma, n * abs(omega))
    if steps is None:
        return max(1, math.ceil(rate * t / limit))
    if steps < 1 or rate * t / steps > limit * (1.0 + 1e-12):
        raise StepSizeError(f"{steps} steps give rate·dt = {rate * t / max(steps, 1):.3e} > {limit}")
    return steps


def lindblad_rk4(
    state: DenseState,
    noise: NoiseModel,
    omega: float,
    t: float,
    steps: int | None = None,
    estimate_error: bool = False,
) -> Rk4Result:
    """Integrate the full master equation with classical fourth-order Runge-Kutta.

    Args:
        state: Initial state.
        noise: Noise model.
        omega: Signal frequency in 1/s.
        t: Evolution time in s.
        steps: Step count; by default the smallest with max(γ, N|ω|)·dt <= the configured limit.
        estimate_error: Also integrate with twice the steps and report the trace distance.

    Returns:
        Rk4Result: Final state, steps used and optional error estimate.

    Raises:
        StepSizeError: If ``steps`` violates the step-size limit.
    """
    if t < 0.0:
        raise DomainError(f"evolution time must be >= 0, got {t!r}")
    n = state.n_qubits
    if t == 0.0:
        return Rk4Result(state, 0, 0.0 if estimate_error else None)
    count = _step_count(noise, omega, t, n, steps)
    logger.debug("rk4: n=%d, t=%g, %d steps", n, t, count)
    final = DenseState(_integrate(state.matrix, noise, omega, t, count, n), n)
    error: float | None = None
    if estimate_error:
        finer = DenseState(_integrate(state.matrix, noise, omega, t, 2 * count, n), n)
        error = trace_distance(final, finer)
    return Rk4Result(final, count, error)


@lru_cache(maxsize=1)
def _pauli_product_system() -> NDArray[np.complex128]:
    # Q[(k, m), (i, j)] = ½ Tr(σ_k σ_i σ_m σ_j)
    system = np.zeros((16, 16), dtype=complex)
    for k, sk in enumerate(PAULI_BASIS):
        for m, sm in enumerate(PAULI_BASIS):
            for i, si in enumerate(PAULI_BASIS):
                for j, sj in enumerate(PAULI_BASIS):
                    system[4 * k + m, 4 * i + j] = 0.5 * np.trace(sk @ si @ sm @ sj)
    return system


def process_s_matrix(noise: NoiseModel, omega: float, t: float) -> ComplexMatrix:
    """Process matrix S (trace 2) from RK4 propagation of the single-qubit Pauli basis.

    Solves ½Tr(σ_k Φ(σ_m)) = Σ_ij χ_ij ½Tr(σ_k σ_i σ_m σ_j) for χ and returns S = 2χ.
    """
    steps = _step_count(noise, omega, t, 1, None) if t > 0.0 else 0
    transfer = np.zeros(16, dtype=complex)
    for m, sm in enumerate(PAULI_BASIS):
        image = _integrate(sm, noise, omega, t, steps, 1) if steps else sm.copy()
        for k, sk in enumerate(PAULI_BASIS):
            transfer[4 * k + m] = 0.5 * np.trace(sk @ image)
    chi = np.linalg.solve(_pauli_product_system(), transfer).reshape(4, 4)
    return 2.0 * chi


# ===== Statistics =====


def expectation(state: DenseState, observable: ObservableSpec) -> float:
    """⟨O⟩ = Tr(Oρ)."""
    op = observable_matrix(observable, state.n_qubits)
    return float(np.real(np.trace(op @ state.matrix)))


def moments(state: DenseState) -> SpinMoments:
    """Collective-spin moments with the symmetrized covariance ½⟨{J_x, J_y}⟩ − ⟨J_x⟩⟨J_y⟩."""
    n = state.n_qubits
    jx = collective_spin("x", n)
    jy = collective_spin("y", n)
    jz = collective_spin("z", n)
    rho = state.matrix

    def mean(op: sparse.csr_matrix) -> float:
        return float(np.real(np.trace(op @ rho)))

    mean_x, mean_y, mean_z = mean(jx), mean(jy), mean(jz)
    anticommutator = mean(jx @ jy + jy @ jx)
    return SpinMoments(
        mean_jx=mean_x,
        mean_jy=mean_y,
        var_jx=mean(jx @ jx) - mean_x**2,
        var_jy=mean(jy @ jy) - mean_y**2,
        var_jz=mean(jz @ jz) - mean_z**2,
        cov_jxjy=0.5 * anticommutator - mean_x * mean_y,
    )


def trace_distance(first: DenseState, second: DenseState) -> float:
    """½‖ρ − σ‖₁."""
    difference = first.matrix - second.matrix
    difference = 0.5 * (difference + difference.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(difference))))


# ===== Precision from dense evolution =====


def _richardson(function: Callable[[float], float], omega: float, h: float) -> float:
    coarse = (function(omega + h) - function(omega - h)) / (2.0 * h)
    fine = (function(omega + 0.5 * h) - function(omega - 0.5 * h)) / h
    return (4.0 * fine - coarse) / 3.0


def _evolved(state: DenseState, noise: NoiseModel, omega: float, t: float) -> DenseState:
    return apply_channel(state, kraus_set(noise, omega, t))


def precision_oracle(probe: ProbeSpec, noise: NoiseModel, omega: float, t: float) -> float:
    """Δ²ω·T of a spin-measured probe from dense expectations and finite differences in ω."""
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    state = probe_state(probe)
    axis = probe.measured_axis.value
    spin = ObservableSpec(ObservableKind.SPIN, axis)
    square = ObservableSpec(ObservableKind.SPIN_SQUARED, axis)

    def signal(frequency: float) -> float:
        return expectation(_evolved(state, noise, frequency, t), spin)

    evolved = _evolved(state, noise, omega, t)
    variance = expectation(evolved, square) - expectation(evolved, spin) ** 2
    slope = _richardson(signal, omega, FD_STEP / t)
    if slope == 0.0:
        raise DegenerateSignalError("dense signal derivative vanishes")
    return t * variance / slope**2


def parity_precision_oracle(n: int, noise: NoiseModel, omega: float, t: float) -> float:
    """Δ²ω·T of a GHZ probe with x-parity readout from dense expectations."""
    if not t > 0.0:
        raise DomainError(f"interrogation time must be positive, got {t!r}")
    state = build_ghz(n)
    parity = ObservableSpec(ObservableKind.PARITY, "x")

    def signal(frequency: float) -> float:
        return expectation(_evolved(state, noise, frequency, t), parity)

    mean = signal(omega)
    slope = _richardson(signal, omega, FD_STEP / t)
    if slope == 0.0:
        raise DegenerateSignalError("dense parity derivative vanishes")
    return t * (1.0 - mean * mean) / slope**2
