"""Test probe states: coherent and one-axis-twisted moments, squeezing in dB."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from magprec.errors import DomainError, UnachievableSqueezingError
from magprec.physics.probes import (
    Axis,
    Geometry,
    ProbeSpec,
    SqueezingConvention,
    css_moments,
    initial_moments,
    mu_from_db,
    oatss_moments,
    optimal_squeezing,
    squeezing_db,
    squeezing_parameter,
    twist_terms,
)


def test_two_spin_moments_by_hand() -> None:
    """Test N = 2, μ = π/2 against the hand-computed moments."""
    moments = oatss_moments(2, math.pi / 2)

    assert moments.mean_jx == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-15)
    assert moments.mean_jy == 0.0
    assert moments.var_jx == pytest.approx(0.5, abs=1e-15)
    assert moments.var_jy == pytest.approx(0.5 - math.sqrt(2.0) / 4.0, abs=1e-15)
    assert moments.var_jz == pytest.approx(0.5 + math.sqrt(2.0) / 4.0, abs=1e-15)


def test_coherent_state_moments() -> None:
    """Test that the CSS has mean N/2 and variance N/4 in both perpendicular directions."""
    moments = css_moments(1000, Axis.Y)

    assert moments.mean_jy == 500.0
    assert moments.mean_jx == 0.0
    assert moments.var_jy == 0.0
    assert moments.var_jx == moments.var_jz == 250.0


@given(n=st.integers(min_value=2, max_value=10**12), axis=st.sampled_from(Axis))
def test_untwisted_state_is_coherent(n: int, axis: Axis) -> None:
    """Test that μ = 0 reproduces the coherent spin state."""
    assert oatss_moments(n, 0.0, axis) == css_moments(n, axis)


@given(n=st.integers(min_value=3, max_value=10**12), mu=st.floats(min_value=1e-12, max_value=0.5))
def test_twisting_squeezes_one_direction(n: int, mu: float) -> None:
    """Test that twisting reduces one variance below N/4 and raises the other above it."""
    moments = oatss_moments(n, mu)
    quarter = 0.25 * n

    assert 0.0 <= moments.var_jy <= quarter * (1.0 + 1e-12)
    assert moments.var_jz >= quarter * (1.0 - 1e-12)
    assert 0.0 <= moments.mean_jx <= 0.5 * n
    assert moments.var_jx >= 0.0


@given(n=st.integers(min_value=2, max_value=10**6), mu=st.floats(min_value=0.0, max_value=3.0))
def test_total_spin_of_symmetric_state(n: int, mu: float) -> None:
    """Test that ⟨J⟩² plus the three variances equals j(j + 1) with j = N/2."""
    moments = oatss_moments(n, mu)
    total = (
        moments.mean_jx**2
        + moments.mean_jy**2
        + moments.var_jx
        + moments.var_jy
        + moments.var_jz
    )

    assert total == pytest.approx(0.5 * n * (0.5 * n + 1.0), rel=1e-9)


@given(n=st.integers(min_value=2, max_value=10**9), mu=st.floats(min_value=0.0, max_value=3.0))
def test_twisted_state_respects_uncertainty_relation(n: int, mu: float) -> None:
    """Test Δ²J_y·Δ²J_z ≥ ⟨J_x⟩²/4."""
    moments = oatss_moments(n, mu)

    assert moments.var_jy * moments.var_jz >= 0.25 * moments.mean_jx**2 * (1.0 - 1e-9)


def test_turning_about_z_keeps_equatorial_totals() -> None:
    """Test that a z-turn moves the mean and creates covariance without changing totals."""
    moments = oatss_moments(40, 0.08)
    turned = moments.rotated(0.6)

    assert turned.mean_jx**2 + turned.mean_jy**2 == pytest.approx(moments.mean_jx**2)
    assert turned.var_jx + turned.var_jy == pytest.approx(moments.var_jx + moments.var_jy)
    assert turned.var_jz == moments.var_jz
    assert turned.cov_jxjy != 0.0
    assert moments.rotated(0.5 * math.pi).var_jx == pytest.approx(oatss_moments(40, 0.08, Axis.Y).var_jx)


def test_axis_swaps_equatorial_moments() -> None:
    """Test that a y-polarized twisted state is the x-polarized one rotated by π/2."""
    along_x = oatss_moments(50, 0.05, Axis.X)
    along_y = oatss_moments(50, 0.05, Axis.Y)

    assert along_y.mean_jy == along_x.mean_jx
    assert along_y.var_jy == along_x.var_jx
    assert along_y.var_jx == along_x.var_jy
    assert along_y.var_jz == along_x.var_jz


def test_twist_terms_vanish_without_twist() -> None:
    """Test that A and B are zero at μ = 0."""
    assert twist_terms(100, 0.0) == (0.0, 0.0)


@pytest.mark.parametrize("mu", [-0.1, math.pi, 4.0])
def test_twist_outside_range_rejected(mu: float) -> None:
    """Test that μ outside [0, π) is a domain error."""
    with pytest.raises(DomainError):
        oatss_moments(10, mu)


def test_single_particle_cannot_be_twisted() -> None:
    """Test that N = 1 is rejected for twisted states."""
    with pytest.raises(DomainError):
        oatss_moments(1, 0.1)


# ===== Probe specification =====


def test_probe_axes() -> None:
    """Test the mean-spin and measured axes of each spin geometry."""
    aligned = ProbeSpec(n_particles=10, geometry=Geometry.SCENARIO_A, mu=0.1)
    perpendicular = ProbeSpec(n_particles=10, geometry=Geometry.SCENARIO_B, mu=0.1)

    assert (aligned.probe_axis, aligned.measured_axis) == (Axis.X, Axis.Y)
    assert (perpendicular.probe_axis, perpendicular.measured_axis) == (Axis.Y, Axis.X)
    assert initial_moments(perpendicular).mean_jy > 0.0


def test_coherent_probe_with_twist_rejected() -> None:
    """Test that a CSS geometry with μ ≠ 0 is invalid."""
    with pytest.raises(ValidationError, match="requires mu = 0"):
        ProbeSpec(n_particles=10, geometry=Geometry.CSS_X, mu=0.1)


def test_ghz_probe_has_no_spin_readout() -> None:
    """Test that asking a GHZ probe for its measured axis is a domain error."""
    probe = ProbeSpec(n_particles=4, geometry=Geometry.GHZ)
    with pytest.raises(DomainError):
        _ = probe.measured_axis


# ===== Squeezing =====


def test_coherent_state_is_zero_db() -> None:
    """Test that the untwisted state has ξ² = 1 in both conventions."""
    assert squeezing_db(1000, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert squeezing_parameter(1000, 0.0, SqueezingConvention.VARIANCE) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [100, 10_000, 100_000_000_000])
@pytest.mark.parametrize("target", [-1.0, -3.0, -8.0])
def test_mu_from_db_inverts_squeezing(n: int, target: float) -> None:
    """Test that the returned μ produces the requested squeezing."""
    mu = mu_from_db(n, target)

    assert squeezing_db(n, mu) == pytest.approx(target, abs=1e-6)
    assert mu <= optimal_squeezing(n)[0]


def test_zero_db_needs_no_twist() -> None:
    """Test that 0 dB maps to μ = 0."""
    assert mu_from_db(1000, 0.0) == 0.0


def test_positive_db_rejected() -> None:
    """Test that anti-squeezing targets are a domain error."""
    with pytest.raises(DomainError):
        mu_from_db(1000, 1.0)


def test_squeezing_beyond_optimum_rejected() -> None:
    """Test that targets below the twisting optimum are unachievable."""
    _, db_min = optimal_squeezing(100)
    with pytest.raises(UnachievableSqueezingError):
        mu_from_db(100, db_min - 1.0)


def test_optimal_squeezing_deepens_with_n() -> None:
    """Test that the best squeezing improves with N and reaches about −73 dB at 1e11 atoms."""
    _, small = optimal_squeezing(100)
    _, large = optimal_squeezing(100_000_000_000)

    assert large < small < 0.0
    assert -76.0 < large < -70.0


def test_squeezing_survives_vanishing_mean_spin() -> None:
    """Test that ξ² stays defined at 1e11 atoms when ⟨J⟩² underflows a double."""
    n = 100_000_000_000
    db = squeezing_db(n, 1e-3)

    assert math.isfinite(db)
    assert db > 1e5
    assert squeezing_parameter(n, 1e-3) == math.inf
    assert math.isfinite(squeezing_db(n, 1e-4))
    assert squeezing_db(n, mu_from_db(n, -8.0)) == pytest.approx(-8.0, abs=1e-6)
