"""Test the figure tables and their rendering."""

import json
import math

import numpy as np
import pandas as pd
import pytest

from magprec.analysis.figures import (
    FIGURES,
    fig2_squeezing,
    fig2_time,
    fig3,
    fig4,
    ninety_percent_crossover,
    render_table,
)
from magprec.physics.bounds import asymptote_intersection


def test_figure_registry() -> None:
    """Test that every figure name maps to a table builder."""
    assert sorted(FIGURES) == ["fig2-squeezing", "fig2-time", "fig3", "fig4"]


def test_ninety_percent_crossover() -> None:
    """Test the first N after which the curve stays within reach of its asymptote."""
    ns = [1.0, 2.0, 3.0, 4.0]

    assert ninety_percent_crossover(ns, [5.0, 3.0, 1.05, 1.0], 1.0) == 3.0
    assert ninety_percent_crossover(ns, [1.0, 3.0, 1.0, 1.0], 1.0) == 3.0
    assert ninety_percent_crossover(ns, [1.0, 1.0, 1.0, 1.0], 1.0) == 1.0
    assert math.isnan(ninety_percent_crossover(ns, [1.0, 1.0, 1.0, 2.0], 1.0))


def test_render_csv() -> None:
    """Test CSV output with a header and no index."""
    frame = pd.DataFrame({"n": [10, 100], "msqe": [0.5, 0.25]})
    text = render_table(frame, "csv")

    assert text.splitlines() == ["n,msqe", "10,0.5", "100,0.25"]


def test_render_json_maps_nan_to_null() -> None:
    """Test that JSON output is a list of records with NaN written as null."""
    frame = pd.DataFrame({"n": [10], "msqe": [math.nan], "ok": [True]})
    records = json.loads(render_table(frame, "json"))

    assert records == [{"n": 10, "msqe": None, "ok": True}]


# ===== Squeezing and time sweeps =====


def test_fig2_squeezing_table() -> None:
    """Test the squeezing sweep at the magnetometer point."""
    frame = fig2_squeezing()

    assert list(frame.columns) == [
        "squeezing_db",
        "mu",
        "msqe_a",
        "msqe_b",
        "msqe_css",
        "gain_a",
        "gain_b",
    ]
    assert frame["squeezing_db"].iloc[0] == 0.0
    assert frame["gain_a"].iloc[0] == pytest.approx(1.0)

    # aligned probe saturates near 8, perpendicular probe peaks near 2e7 at deep squeezing
    assert frame["gain_a"].max() == pytest.approx(8.0, rel=0.15)
    best_b = frame.loc[frame["gain_b"].idxmax()]
    assert 1e7 <= best_b["gain_b"] <= 4e7
    assert best_b["squeezing_db"] == pytest.approx(-73.0, abs=3.0)

    saturated = frame[frame["gain_a"] >= 0.9 * frame["gain_a"].max()]
    assert saturated["squeezing_db"].iloc[0] == pytest.approx(-18.0, abs=3.0)


def test_fig2_time_table() -> None:
    """Test the interrogation-time sweep columns and positivity."""
    frame = fig2_time(points=9)

    assert list(frame.columns) == ["t", "msqe_a", "msqe_b", "msqe_css", "gain_a", "gain_b"]
    assert len(frame) == 9
    assert (frame[["msqe_a", "msqe_b", "msqe_css"]] > 0.0).all().all()
    assert frame["t"].is_monotonic_increasing


def test_perpendicular_gain_dominates_beyond_a_millisecond() -> None:
    """Test that scenario (b) gains at least as much as scenario (a) for t ≥ 1 ms."""
    frame = fig2_time(points=41)
    late = frame[(frame["t"] >= 1e-3) & frame["gain_a"].notna() & frame["gain_b"].notna()]

    assert len(late) > 10
    assert (late["gain_b"] >= late["gain_a"] * (1.0 - 1e-9)).all()


# ===== Mixed noise and M minima =====


@pytest.mark.slow
def test_fig3_structure() -> None:
    """Test the large-N limits and crossover ordering of the mixed-noise sweep."""
    gamma, omega, epsilon = 1.0, 1.0, 0.05
    frame = fig3(gamma, omega, epsilon, workers=2)
    last = frame.iloc[-1]

    assert last["n"] == pytest.approx(1e12)
    assert last["rescaled_b"] == pytest.approx(2.0 * gamma * epsilon, rel=0.05)
    assert last["rescaled_a"] == pytest.approx(2.0 * gamma, rel=0.05)
    assert last["rescaled_b"] / last["rescaled_a"] == pytest.approx(epsilon, rel=0.02)
    assert last["asymptote_a_caption"] == pytest.approx(2.0 * gamma * (1.0 - epsilon))

    n90_a = float(frame.loc[frame["crossover_a"], "n"].iloc[0])
    n90_b = float(frame.loc[frame["crossover_b"], "n"].iloc[0])
    assert n90_b > n90_a
    assert last["crossover_estimate"] == pytest.approx(
        asymptote_intersection(gamma, omega, epsilon), rel=0.05
    )


@pytest.mark.slow
def test_fig4_minima_reach_ceiling() -> None:
    """Test that min M is within 1% of 2γ/N for every (γ, ω) pair."""
    frame = fig4(n_values=np.array([10.0, 100.0, 1000.0, 10000.0]), workers=2)

    assert len(frame) == 12
    assert frame["ratio"].between(0.99, 1.01).all()
