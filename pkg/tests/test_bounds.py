"""Test precision bounds, mixed-noise floors and the M quantity."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from magprec.errors import DomainError
from magprec.physics.bounds import (
    MixedNoiseSpec,
    asymptote_intersection,
    c_x,
    c_z,
    crossover_estimate,
    depolarization_mapping,
    depolarizing_floor,
    ghz_qfi_bound,
    m_quantity,
    m_quantity_from_precisions,
    mixed_noise_floor,
)
from magprec.physics.metrology import asymptote_scenario_b


def test_no_go_coefficients() -> None:
    """Test the short-time coefficients of the parallel and transversal bounds."""
    assert c_z(2.0, 0.5) == pytest.approx(4.0 + 4.0)
    assert c_x(2.0, 1.0, 3.0) == pytest.approx(4.0 * 27.0 / 12.0)


def test_ghz_bound() -> None:
    """Test (3^{2/3}/2)(γω²)^{1/3}N^{−5/3} and its collapse at ω = 0."""
    assert ghz_qfi_bound(1.0, 1.0, 1.0) == pytest.approx(3.0 ** (2.0 / 3.0) / 2.0)
    assert ghz_qfi_bound(8.0, 1.0, 1.0) == pytest.approx(ghz_qfi_bound(1.0, 1.0, 1.0) / 32.0)
    assert ghz_qfi_bound(10.0, 1.0, 0.0) == 0.0


def test_floors() -> None:
    """Test the mixed-noise and depolarizing floors."""
    assert mixed_noise_floor(MixedNoiseSpec(gamma=3.0, epsilon=0.1)) == pytest.approx(0.6)
    assert depolarizing_floor(3.0) == pytest.approx(4.0)


def test_mixed_spec_builds_noise_model() -> None:
    """Test that the mixed spec splits γ into transversal and parallel weights."""
    noise = MixedNoiseSpec(gamma=2.0, epsilon=0.3).noise_model()

    assert noise.gamma == 2.0
    assert noise.alpha_x == pytest.approx(0.7)
    assert noise.alpha_z == pytest.approx(0.3)


def test_mixed_spec_validates_epsilon() -> None:
    """Test that ε outside [0, 1] is rejected."""
    with pytest.raises(ValidationError):
        MixedNoiseSpec(gamma=1.0, epsilon=1.2)


@given(
    t1=st.floats(min_value=1e-6, max_value=1e3),
    t2=st.floats(min_value=1e-6, max_value=1e3),
)
def test_relaxation_mapping_floor(t1: float, t2: float) -> None:
    """Test that 2γε = 8/(3T₁) for any relaxation times."""
    spec = depolarization_mapping(t1, t2)

    assert mixed_noise_floor(spec) == pytest.approx(8.0 / (3.0 * t1), rel=1e-12)
    assert 0.0 < spec.epsilon < 1.0


def test_relaxation_mapping_rejects_nonpositive_times() -> None:
    """Test that T₁ or T₂ <= 0 is a domain error."""
    with pytest.raises(DomainError):
        depolarization_mapping(0.0, 1.0)


# ===== Crossover =====


def test_crossover_estimate() -> None:
    """Test N* = (ω/(3εγ))⁴."""
    assert crossover_estimate(1.0, 1.0, 0.05) == pytest.approx((1.0 / 0.15) ** 4)
    with pytest.raises(DomainError):
        crossover_estimate(1.0, 1.0, 0.0)


@pytest.mark.parametrize(
    ("gamma", "omega", "epsilon"),
    [(1.0, 1.0, 0.05), (67.0, 3.6e-3, 0.01), (0.1, 2.0, 0.5)],
)
def test_crossover_matches_asymptote_intersection(gamma: float, omega: float, epsilon: float) -> None:
    """Test that the closed-form crossover is where the two asymptotes meet."""
    intersection = asymptote_intersection(gamma, omega, epsilon)

    assert crossover_estimate(gamma, omega, epsilon) == pytest.approx(intersection, rel=1e-6)
    floor = mixed_noise_floor(MixedNoiseSpec(gamma=gamma, epsilon=epsilon))
    assert floor / intersection == pytest.approx(asymptote_scenario_b(intersection, omega), rel=1e-8)


# ===== M quantity =====


@given(
    n=st.integers(min_value=2, max_value=10_000),
    gamma=st.floats(min_value=0.1, max_value=10.0),
    t=st.floats(min_value=0.01, max_value=5.0),
    mu=st.floats(min_value=0.0, max_value=0.1),
)
def test_m_quantity_at_zero_frequency(n: int, gamma: float, t: float, mu: float) -> None:
    """Test M = tγ²·coth(γt/2)·cos^{2−2N}(μ/2)/N at ω = 0."""
    expected = t * gamma**2 / math.tanh(0.5 * gamma * t) * math.cos(0.5 * mu) ** (2 - 2 * n) / n

    assert m_quantity(n, gamma, 0.0, t, mu) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize(
    ("n", "gamma", "omega", "t", "mu"),
    [(10, 1.0, 0.3, 0.5, 0.1), (200, 0.1, 0.03, 2.0, 0.01), (50, 10.0, 0.03, 0.05, 0.05)],
)
def test_m_quantity_matches_literal_difference(
    n: int, gamma: float, omega: float, t: float, mu: float
) -> None:
    """Test the cancellation-free M against the difference of the two scenario precisions."""
    reduced = m_quantity(n, gamma, omega, t, mu)
    literal = m_quantity_from_precisions(n, gamma, omega, t, mu)

    assert reduced == pytest.approx(literal, rel=1e-7)


def test_m_quantity_lower_bounds_ceiling() -> None:
    """Test that M never drops below 2γ/N at ω = 0."""
    gamma, n = 1.0, 100
    for t in (0.01, 0.1, 1.0, 10.0):
        assert m_quantity(n, gamma, 0.0, t, 0.0) >= 2.0 * gamma / n


def test_m_quantity_needs_two_particles() -> None:
    """Test that N = 1 is rejected."""
    with pytest.raises(DomainError):
        m_quantity(1, 1.0, 0.5, 1.0, 0.0)
