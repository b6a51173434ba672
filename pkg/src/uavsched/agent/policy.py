"""Stochastic policy head, action quantization, and reward shaping.

The actor network emits 2I raw values per state; logistic squashing maps the
first I onto means in [-kappa, kappa] and the last I onto variances in
[chi_min, chi_max].  Sampled actions are clipped Gaussians quantized uniformly
onto the currently active group catalog, which shrinks as users finish.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scenario import Scenario, group_members
from .nets import Mlp


@dataclass(frozen=True)
class PolicyOutput:
    mean: np.ndarray
    variance: np.ndarray


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def actor_forward(
    actor: Mlp,
    feats: np.ndarray,
    kappa: float = 2.0,
    chi_min: float = 0.01,
    chi_max: float = 1.0,
) -> PolicyOutput:
    """Policy head for one state: means in [-kappa, kappa], variances in
    [chi_min, chi_max], both via logistic squashing of the raw outputs."""
    raw = actor.forward(feats)[0]
    half = raw.size // 2
    mean = -kappa + 2.0 * kappa * _sigmoid(raw[:half])
    var = chi_min + (chi_max - chi_min) * _sigmoid(raw[half:])
    return PolicyOutput(mean=mean, variance=var)


def critic_forward(critic: Mlp, feats: np.ndarray) -> float:
    return float(critic.forward(feats)[0, 0])


def sample_action(pi: PolicyOutput, rng: np.random.Generator, kappa: float = 2.0) -> np.ndarray:
    """Independent Gaussian draw per slot, clipped to the allowed range."""
    draw = rng.normal(pi.mean, np.sqrt(pi.variance))
    return np.clip(draw, -kappa, kappa)


def map_action(a_hat, kappa: float, g_active: int):
    """Uniform quantization of [-kappa, kappa] onto {1..g_active}.

    a = ceil((kappa + a_hat) / (2 kappa / g_active)), clamped so the left
    boundary (which the ceiling sends to 0) lands on the first group."""
    if g_active < 1:
        raise ValueError("no active groups to map onto")
    a = np.ceil((kappa + np.asarray(a_hat, dtype=float)) / (2.0 * kappa / g_active))
    a = np.clip(a, 1, g_active).astype(int)
    return a if a.ndim else int(a)


def restrict_groups(scenario: Scenario, n: int, residual_bits: np.ndarray) -> list[int]:
    """Active group ids of cluster n: every group whose members all still have
    data pending.  Position in the returned list is the contiguous re-index
    (1-based) the quantizer maps onto; the entry is the real group id."""
    pending = np.asarray(residual_bits) > 0.0
    return [
        g
        for g in scenario.groups(n)
        if all(pending[k] for k in group_members(g))
    ]


def reward(delivered_bits: float, energy_j: float, variant: str, epsilon: float = 1.2) -> float:
    """Per-frame reward.  Variant A trades delivered data against energy with
    exponent epsilon; B and C are the plain energy-only shapes.  An idle frame
    (no energy spent) is worth 0 by convention."""
    if variant == "A":
        if energy_j <= 0.0:
            return 0.0
        return delivered_bits / energy_j**epsilon
    if variant == "B":
        return 0.0 if energy_j <= 0.0 else 1.0 / energy_j
    if variant == "C":
        return -energy_j
    raise ValueError(f"unknown reward variant {variant!r}")


def td_error(
    critic: Mlp,
    s: np.ndarray,
    s_next: np.ndarray,
    r: float,
    gamma: float,
    terminal: bool,
) -> float:
    """One-step value-target residual: r + gamma V(s') (1 - terminal) - V(s)."""
    v_s = critic_forward(critic, s)
    v_next = 0.0 if terminal else critic_forward(critic, s_next)
    return r + gamma * v_next - v_s
