"""Scenario files: INI text with one section per constant family.

Sections and keys (all optional except [clusters]):

  [clusters]   cluster1 = 2, 4, 1     per-user demands in Mbit, one key per cluster
  [radio]      bandwidth_hz, noise_power_w, tx_power_w, antennas
  [propulsion] hover_power_w, blade_power_w, induced_power_w, tip_speed_ms,
               hover_induced_ms, drag_factor, air_density, leg_distances_m
  [fsmc]       levels = 0, 0.3, ...   and either preset = birth-death
               (with optional stay/move) or explicit row0..rowN-1
  [limits]     t_max, slots_per_frame, slot_duration_s, name

Anything unspecified falls back to the library defaults (10 antennas, 10 MHz,
0.1 mW noise, 3 W transmit, 10 W hover, the 9-level ladder 0..2.4 with the
birth-death chain, 1 ms slots, 10 slots per frame, t_max 160).
"""
from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from .channel import FsmcModel, RadioConfig, birth_death_transition
from .propulsion import PropulsionParams
from .scenario import MBIT, Scenario


class ScenarioFileError(ValueError):
    """Parse or validation failure; the message names the offending key."""


def _floats(raw: str, where: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ScenarioFileError(f"{where}: expected numbers, got {raw!r}") from exc


def _get(cfg: configparser.ConfigParser, section: str, key: str, cast, default):
    if not cfg.has_option(section, key):
        return default
    raw = cfg.get(section, key)
    try:
        if cast is int:
            return int(raw)
        return cast(raw)
    except ValueError as exc:
        raise ScenarioFileError(f"[{section}] {key}: bad value {raw!r}") from exc


def _load_fsmc(cfg: configparser.ConfigParser) -> FsmcModel:
    section = "fsmc"
    if not cfg.has_section(section):
        return FsmcModel()
    defaults = FsmcModel()
    levels = defaults.levels
    if cfg.has_option(section, "levels"):
        levels = _floats(cfg.get(section, "levels"), "[fsmc] levels")
    n = len(levels)
    explicit_rows = [k for k in cfg.options(section) if k.startswith("row")]
    if explicit_rows:
        rows = []
        for i in range(n):
            key = f"row{i}"
            if not cfg.has_option(section, key):
                raise ScenarioFileError(f"[fsmc] missing transition row {key}")
            rows.append(_floats(cfg.get(section, key), f"[fsmc] {key}"))
        transition = np.asarray(rows)
    else:
        preset = _get(cfg, section, "preset", str, "birth-death")
        if preset != "birth-death":
            raise ScenarioFileError(f"[fsmc] preset: unknown preset {preset!r}")
        stay = _get(cfg, section, "stay", float, 0.4)
        move = _get(cfg, section, "move", float, 0.3)
        try:
            transition = birth_death_transition(n, stay, move)
        except ValueError as exc:
            raise ScenarioFileError(f"[fsmc] stay/move: {exc}") from exc
    try:
        return FsmcModel(levels=levels, transition=transition)
    except ValueError as exc:
        raise ScenarioFileError(f"[fsmc]: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioFileError(f"cannot read scenario file {path}") from exc
    return parse_scenario(text, default_name=path.stem)


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Build a scenario from INI text (same format as the scenario files)."""
    cfg = configparser.ConfigParser()
    try:
        cfg.read_string(text)
    except configparser.Error as exc:
        raise ScenarioFileError(f"malformed scenario text: {exc}") from exc
    if not cfg.has_section("clusters") or not cfg.options("clusters"):
        raise ScenarioFileError("[clusters]: at least one cluster key is required")

    demands: list[tuple[float, ...]] = []
    for idx, key in enumerate(sorted(cfg.options("clusters")), start=1):
        expected = f"cluster{idx}"
        if key != expected:
            raise ScenarioFileError(
                f"[clusters]: keys must be cluster1..clusterN in order, found {key!r}"
            )
        mbits = _floats(cfg.get("clusters", key), f"[clusters] {key}")
        if not mbits or any(q <= 0 for q in mbits):
            raise ScenarioFileError(f"[clusters] {key}: demands must be positive Mbit values")
        demands.append(tuple(q * MBIT for q in mbits))

    radio_defaults = RadioConfig()
    radio = RadioConfig(
        bandwidth_hz=_get(cfg, "radio", "bandwidth_hz", float, radio_defaults.bandwidth_hz),
        slot_duration_s=_get(
            cfg, "limits", "slot_duration_s", float, radio_defaults.slot_duration_s
        ),
        slots_per_frame=_get(
            cfg, "limits", "slots_per_frame", int, radio_defaults.slots_per_frame
        ),
        noise_power_w=_get(cfg, "radio", "noise_power_w", float, radio_defaults.noise_power_w),
        tx_power_w=_get(cfg, "radio", "tx_power_w", float, radio_defaults.tx_power_w),
        antennas=_get(cfg, "radio", "antennas", int, radio_defaults.antennas),
    )
    prop_defaults = PropulsionParams()
    legs = prop_defaults.leg_distances_m
    if cfg.has_option("propulsion", "leg_distances_m"):
        legs = _floats(cfg.get("propulsion", "leg_distances_m"), "[propulsion] leg_distances_m")
    propulsion = PropulsionParams(
        blade_power_w=_get(
            cfg, "propulsion", "blade_power_w", float, prop_defaults.blade_power_w
        ),
        induced_power_w=_get(
            cfg, "propulsion", "induced_power_w", float, prop_defaults.induced_power_w
        ),
        tip_speed_ms=_get(cfg, "propulsion", "tip_speed_ms", float, prop_defaults.tip_speed_ms),
        hover_induced_ms=_get(
            cfg, "propulsion", "hover_induced_ms", float, prop_defaults.hover_induced_ms
        ),
        drag_factor=_get(cfg, "propulsion", "drag_factor", float, prop_defaults.drag_factor),
        air_density=_get(cfg, "propulsion", "air_density", float, prop_defaults.air_density),
        hover_power_w=_get(
            cfg, "propulsion", "hover_power_w", float, prop_defaults.hover_power_w
        ),
        leg_distances_m=legs,
    )
    fsmc = _load_fsmc(cfg)
    name = _get(cfg, "limits", "name", str, default_name)
    t_max = _get(cfg, "limits", "t_max", int, 160)
    try:
        return Scenario(
            demands_bits=tuple(demands),
            radio=radio,
            propulsion=propulsion,
            fsmc=fsmc,
            t_max=t_max,
            name=name,
        )
    except ValueError as exc:
        raise ScenarioFileError(str(exc)) from exc
