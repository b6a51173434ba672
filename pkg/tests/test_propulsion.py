"""Propulsion-curve oracles: hand-evaluated power values and the
energy-per-metre optimum's local optimality."""
from __future__ import annotations

import math

import pytest

from uavsched.propulsion import PropulsionParams, flying_power, optimal_flying_speed


def test_hover_power_is_blade_plus_induced():
    pp = PropulsionParams()
    assert flying_power(0.0, pp) == pytest.approx(79.86 + 88.63, abs=1e-12)


def test_power_formula_hand_evaluated():
    pp = PropulsionParams()
    u = 10.0
    blade = 79.86 * (1.0 + 3.0 * u**2 / 120.0**2)
    induced = 88.63 * math.sqrt(
        math.sqrt(1.0 + u**4 / (4.0 * 4.03**4)) - u**2 / (2.0 * 4.03**2)
    )
    parasite = 0.5 * 0.01509 * 1.225 * u**3
    assert flying_power(u, pp) == pytest.approx(blade + induced + parasite, rel=1e-12)


def test_negative_speed_rejected():
    with pytest.raises(ValueError):
        flying_power(-1.0, PropulsionParams())


@pytest.mark.parametrize(
    "field,value",
    [
        ("blade_power_w", 0.0),
        ("induced_power_w", -1.0),
        ("tip_speed_ms", 0.0),
        ("hover_induced_ms", 0.0),
        ("air_density", 0.0),
        ("drag_factor", -0.1),
        ("hover_power_w", -1.0),
        ("leg_distances_m", (-5.0,)),
    ],
)
def test_param_validation(field, value):
    with pytest.raises(ValueError):
        PropulsionParams(**{field: value}).validate()


def test_optimal_speed_is_a_local_minimum_of_energy_per_metre():
    pp = PropulsionParams()
    u_star, _ = optimal_flying_speed(pp)
    per_metre = lambda u: flying_power(u, pp) / u
    assert 1.0 < u_star < 79.0
    assert per_metre(u_star) <= per_metre(u_star - 0.5) + 1e-9
    assert per_metre(u_star) <= per_metre(u_star + 0.5) + 1e-9


def test_optimal_speed_matches_dense_grid():
    pp = PropulsionParams()
    u_star, _ = optimal_flying_speed(pp)
    grid = [0.1 + i * (80.0 - 0.1) / 20_000 for i in range(20_001)]
    u_grid = min(grid, key=lambda u: flying_power(u, pp) / u)
    assert u_star == pytest.approx(u_grid, abs=0.05)


def test_trip_energy_scales_with_leg_lengths():
    pp = PropulsionParams(leg_distances_m=(100.0, 50.0))
    u_star, energy = optimal_flying_speed(pp)
    assert energy == pytest.approx(150.0 * flying_power(u_star, pp) / u_star, rel=1e-12)
    assert optimal_flying_speed(PropulsionParams())[1] == 0.0


def test_bad_bracket_rejected():
    with pytest.raises(ValueError):
        optimal_flying_speed(PropulsionParams(), bracket=(5.0, 1.0))
