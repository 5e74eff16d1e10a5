import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resonant_search.analytic import (
    RwaModel,
    detuned_peak_probability,
    detuning_result,
    optimal_time,
    resonance_width,
    rwa_probabilities,
)


def test_rwa_model_invariants():
    m = RwaModel(20)
    assert m.omega * m.tau == pytest.approx(math.pi / 2, rel=1e-15)
    assert m.tau == pytest.approx(math.pi / 2 * math.sqrt(20))


def test_rwa_probabilities_examples():
    m = RwaModel(100)
    assert rwa_probabilities(m, 0.0) == (1.0, 0.0)
    pi, ps = rwa_probabilities(m, m.tau)
    assert ps == pytest.approx(1.0, abs=1e-15)
    assert pi == pytest.approx(0.0, abs=1e-15)
    assert rwa_probabilities(m, m.tau / 2) == (pytest.approx(0.5), pytest.approx(0.5))


@given(st.integers(1, 10_000), st.floats(0.01, 10), st.floats(0, 1e4))
def test_rwa_pair_sums_to_one(n, v0, t):
    pi, ps = rwa_probabilities(RwaModel(n, v0), t)
    assert pi + ps == 1.0


def test_optimal_time_examples():
    assert optimal_time(4) == pytest.approx(math.pi)
    assert optimal_time(20) == pytest.approx(7.0248, abs=1e-4)
    assert optimal_time(20, 2.0) == pytest.approx(3.5124, abs=1e-4)


def test_detuned_peak_on_resonance():
    assert detuned_peak_probability(37, 0.0) == 1.0


@given(st.integers(1, 5000), st.floats(1e-6, 50))
def test_detuned_peak_even_bounded_and_below_one(n, delta):
    p = detuned_peak_probability(n, delta)
    assert p == detuned_peak_probability(n, -delta)
    assert 0.0 <= p < 1.0


def test_detuned_peak_near_reported_half_height():
    n = 100
    assert detuned_peak_probability(n, 1.599 / math.sqrt(n)) == pytest.approx(0.5, abs=2e-3)


@pytest.mark.parametrize("n", [1, 10, 25, 100, 1000, 10**6])
def test_width_solves_defining_equation(n):
    width = resonance_width(n)
    assert abs(detuned_peak_probability(n, width) - 0.5) <= 1e-9


def test_width_times_sqrt_n_constant():
    products = [resonance_width(n) * math.sqrt(n) for n in (1, 3, 10, 77, 100, 5000, 10**6)]
    assert np.ptp(products) / products[0] < 1e-9
    # approximate value reported for the numerical fit
    assert products[0] == pytest.approx(1.599, abs=5e-3)


def test_width_n100_against_grid_scan():
    n = 100
    grid = np.linspace(0.0, 0.4, 4_000_001)
    p = detuned_peak_probability(n, grid)
    crossing = grid[np.argmax(p < 0.5)]
    width = resonance_width(n)
    assert abs(width - crossing) <= grid[1] - grid[0]
    assert width == pytest.approx(0.1597, abs=1e-4)


def test_detuning_result():
    r = detuning_result(100, 0.0)
    assert r.p_peak == 1.0
    assert r.width == resonance_width(100)


def test_two_level_closed_form_matches_matrix_exponential():
    """The detuned two-level problem exponentiated directly gives the same probability."""
    from scipy.linalg import expm

    n = 64
    for delta in (0.0, 0.05, 0.2, -0.31):
        omega = 1 / math.sqrt(n)
        h = np.array([[0.0, omega], [omega, delta]])
        amp = (expm(-1j * h * optimal_time(n)) @ np.array([1.0, 0.0]))[1]
        assert abs(amp) ** 2 == pytest.approx(detuned_peak_probability(n, delta), abs=1e-12)
