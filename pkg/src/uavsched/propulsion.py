"""Rotary-wing propulsion power model and the energy-per-metre speed optimum."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PropulsionParams:
    """Constants of the rotary-wing power curve plus mission geometry.

    blade_power_w / induced_power_w are the hover blade-profile and induced
    power terms; drag_factor bundles fuselage drag ratio, rotor solidity and
    disc area; air_density is in kg/m^3.  leg_distances_m are the inter-stop
    flight legs used when a whole-mission energy is requested; hover_power_w
    is the constant power billed per hovering frame.
    """

    blade_power_w: float = 79.86
    induced_power_w: float = 88.63
    tip_speed_ms: float = 120.0
    hover_induced_ms: float = 4.03
    drag_factor: float = 0.01509
    air_density: float = 1.225
    hover_power_w: float = 10.0
    leg_distances_m: tuple[float, ...] = ()

    def validate(self) -> None:
        for name in (
            "blade_power_w",
            "induced_power_w",
            "tip_speed_ms",
            "hover_induced_ms",
            "air_density",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.drag_factor < 0 or self.hover_power_w < 0:
            raise ValueError("drag_factor and hover_power_w must be >= 0")
        if any(d < 0 for d in self.leg_distances_m):
            raise ValueError("leg distances must be >= 0")


def flying_power(speed_ms: float, pp: PropulsionParams) -> float:
    """Propulsion power draw at forward speed U (watts).

    P0 (1 + 3U^2/U_tip^2)
    + P1 (sqrt(1 + U^4/(4 v0^4)) - U^2/(2 v0^2))^(1/2)
    + 0.5 * drag_factor * air_density * U^3
    """
    if speed_ms < 0:
        raise ValueError("speed must be >= 0")
    u2 = speed_ms * speed_ms
    blade = pp.blade_power_w * (1.0 + 3.0 * u2 / pp.tip_speed_ms**2)
    v4 = pp.hover_induced_ms**4
    induced_inner = math.sqrt(1.0 + u2 * u2 / (4.0 * v4)) - u2 / (2.0 * pp.hover_induced_ms**2)
    # induced_inner is mathematically positive; clamp defends against rounding
    induced = pp.induced_power_w * math.sqrt(max(induced_inner, 0.0))
    parasite = 0.5 * pp.drag_factor * pp.air_density * speed_ms**3
    return blade + induced + parasite


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimal_flying_speed(
    pp: PropulsionParams,
    bracket: tuple[float, float] = (0.1, 80.0),
    tol: float = 1e-6,
) -> tuple[float, float]:
    """Speed minimising energy per metre f(U)/U and the resulting whole-trip
    flying energy sum(legs) * f(U*)/U*.

    Golden-section assumes the per-metre curve is unimodal on the bracket; if
    both endpoints undercut the midpoint the assumption failed and a dense
    grid search is used instead.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def per_metre(u: float) -> float:
        return flying_power(u, pp) / u

    mid = 0.5 * (lo + hi)
    if per_metre(lo) < per_metre(mid) and per_metre(hi) < per_metre(mid):
        grid = [lo + i * (hi - lo) / 100000 for i in range(100001)]
        u_star = min(grid, key=per_metre)
    else:
        u_star = _golden_min(per_metre, lo, hi, tol)
    trip_energy = sum(pp.leg_distances_m) * per_metre(u_star)
    return u_star, trip_energy
