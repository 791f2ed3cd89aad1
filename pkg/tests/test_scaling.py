"""Test large-N scaling of both squeezed scenarios along their analytic schedules."""

import numpy as np
import pytest

from magprec.analysis.optimizer import schedule_a, schedule_b
from magprec.physics.channel import NoiseModel
from magprec.physics.metrology import asymptote_scenario_a, asymptote_scenario_b, msqe
from magprec.physics.probes import Geometry, ProbeSpec

SWEEP = np.geomspace(1e8, 1e14, 13)


def _scheduled_ratio(n: float, gamma: float, omega: float) -> float:
    t, mu = schedule_b(n, gamma, omega)
    probe = ProbeSpec(n_particles=int(round(n)), geometry=Geometry.SCENARIO_B, mu=mu)
    return msqe(probe, NoiseModel.transversal(gamma), omega, t) / asymptote_scenario_b(n, omega)


def test_perpendicular_probe_approaches_five_quarters_scaling() -> None:
    """Test that Δ²ω·T·N^{5/4}·3/(2ω) falls monotonically from above along the schedule.

    The along-mean variance N³μ⁴/32 decays only as N^{−1/5} relative to the
    asymptote, so at 1e14 the ratio is still about 1.65.
    """
    ratios = np.array([_scheduled_ratio(float(n), 1.0, 1.0) for n in SWEEP])

    assert (ratios > 1.0).all()
    assert (np.diff(ratios) < 0.0).all()
    assert 1.5 < ratios[-1] < 1.8


@pytest.mark.parametrize("beta", [0.1, 4.0])
def test_schedule_b_follows_frequency_scaling(beta: float) -> None:
    """Test t ∝ ω^{−1/2} and μ ∝ ω^{−1/4} under ω → βω."""
    n, gamma, omega = 1e10, 2.0, 0.5
    t, mu = schedule_b(n, gamma, omega)
    t_scaled, mu_scaled = schedule_b(n, gamma, beta * omega)

    assert t_scaled == pytest.approx(t * beta**-0.5, rel=1e-12)
    assert mu_scaled == pytest.approx(mu * beta**-0.25, rel=1e-12)


@pytest.mark.parametrize("beta", [0.01, 30.0])
def test_scheduled_ratio_is_unit_free(beta: float) -> None:
    """Test that scaling γ and ω together leaves the ratio to the asymptote unchanged."""
    n = 1e10

    assert _scheduled_ratio(n, beta * 1.0, beta * 2.0) == pytest.approx(
        _scheduled_ratio(n, 1.0, 2.0), rel=1e-9
    )


def test_perpendicular_probe_scaling_beats_shot_noise() -> None:
    """Test that the scheduled precision improves faster than 1/N."""
    gamma, omega = 1.0, 1.0
    small, large = 1e8, 1e12
    noise = NoiseModel.transversal(gamma)
    values = []
    for n in (small, large):
        t, mu = schedule_b(n, gamma, omega)
        values.append(
            msqe(ProbeSpec(n_particles=int(n), geometry=Geometry.SCENARIO_B, mu=mu), noise, omega, t)
        )

    assert values[0] / values[1] > large / small


def test_aligned_probe_reaches_standard_quantum_limit() -> None:
    """Test that Δ²ω·T·N/(2γ) closes in on one from above along the s = 2 schedule.

    The approach is slow: the ratio is about 1.026 at 1e12.
    """
    gamma, omega = 1.0, 1.0
    noise = NoiseModel.transversal(gamma)
    ratios = []
    for n in np.geomspace(1e4, 1e12, 9):
        t, mu = schedule_a(float(n), 2.0, 10.0 / gamma, 2.0)
        probe = ProbeSpec(n_particles=int(round(n)), geometry=Geometry.SCENARIO_A, mu=mu)
        ratios.append(msqe(probe, noise, omega, t) / asymptote_scenario_a(float(n), gamma))

    assert all(ratio > 1.0 for ratio in ratios)
    assert ratios[-1] < ratios[0]
    assert ratios[-1] == pytest.approx(1.0, abs=0.04)
