"""Physical-layer primitives: Rician fading, MMSE precoding gains, SINR,
per-slot data and transmit energy, and the quantised finite-state channel.

All powers are in watts, bandwidth in Hz, durations in seconds, data in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RadioConfig:
    """Downlink air-interface constants shared by every cluster."""

    bandwidth_hz: float = 10e6
    slot_duration_s: float = 1e-3
    slots_per_frame: int = 10
    noise_power_w: float = 1e-4
    tx_power_w: float = 3.0
    antennas: int = 10

    def validate(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.slot_duration_s <= 0:
            raise ValueError("slot_duration_s must be positive")
        if self.slots_per_frame < 1:
            raise ValueError("slots_per_frame must be >= 1")
        if self.noise_power_w <= 0:
            raise ValueError("noise_power_w must be positive")
        if self.tx_power_w <= 0:
            raise ValueError("tx_power_w must be positive")
        if self.antennas < 1:
            raise ValueError("antennas must be >= 1")


def gen_rician_channel(
    rng: np.random.Generator,
    n_users: int,
    n_antennas: int,
    rice_factor: float = 3.0,
    path_loss_db: float = 0.0,
) -> np.ndarray:
    """Draw a (n_users, n_antennas) Rician channel matrix.

    Row k is user k's channel: a deterministic unit-modulus LoS component mixed
    with CN(0, 1) scatter at ratio rice_factor, scaled by the amplitude path
    loss 10**(-path_loss_db / 10).  rice_factor = inf gives the pure LoS row,
    rice_factor = 0 gives Rayleigh fading.
    """
    if rice_factor < 0:
        raise ValueError("rice_factor must be >= 0")
    los = np.ones((n_users, n_antennas), dtype=complex)
    if np.isinf(rice_factor):
        h = los
    else:
        scatter = rng.standard_normal((n_users, n_antennas)) + 1j * rng.standard_normal(
            (n_users, n_antennas)
        )
        scatter /= np.sqrt(2.0)
        h = np.sqrt(rice_factor / (rice_factor + 1.0)) * los + np.sqrt(
            1.0 / (rice_factor + 1.0)
        ) * scatter
    return h * 10.0 ** (-path_loss_db / 10.0)


def mmse_effective_gains(h: np.ndarray, noise_power_w: float) -> np.ndarray:
    """Effective gains of the MMSE precoder for one scheduled group.

    h is (K, L): row k is the channel of the k-th group member.  The precoder
    for user j is column j of H^H (sigma^2 I + H H^H)^{-1}, normalised to unit
    power.  Entry (k, j) of the result is |h_k . v_j|^2, i.e. the power of
    user j's stream seen at user k; the diagonal carries the useful signal.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise ValueError("h must be a 2-D (users x antennas) matrix")
    k_users = h.shape[0]
    gram = h @ h.conj().T
    a = noise_power_w * np.eye(k_users) + gram
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "singular MMSE matrix: zero noise power with rank-deficient channels"
        ) from exc
    precoder = h.conj().T @ inv  # (L, K), column j serves user j
    norms = np.linalg.norm(precoder, axis=0)
    if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("degenerate precoder column; cannot normalise")
    projected = h @ (precoder / norms)
    return np.abs(projected) ** 2


def sinr(beta: np.ndarray, k: int, tx_power_w: float, noise_power_w: float) -> float:
    """SINR of group member k under uniform per-user transmit power.

    beta is the effective-gain table of the scheduled group; row k holds the
    powers of every member's stream at user k.
    """
    beta = np.asarray(beta, dtype=float)
    signal = beta[k, k] * tx_power_w
    interference = (beta[k, :].sum() - beta[k, k]) * tx_power_w
    return signal / (interference + noise_power_w)


def data_per_slot(gamma: float, cfg: RadioConfig) -> float:
    """Bits delivered to one user in one timeslot at SINR gamma."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return cfg.slot_duration_s * cfg.bandwidth_hz * np.log2(1.0 + gamma)


def comm_energy_per_slot(beta: np.ndarray, cfg: RadioConfig) -> float:
    """Transmit energy of one slot serving the group with gain table beta.

    The model charges Phi * sum_k beta_kk * p: the per-user transmit power is
    scaled by that user's own effective channel gain.  This is the system
    model's accounting and is kept verbatim even though a gain-independent
    Phi * K * p would be the more conventional radio bill.
    """
    beta = np.asarray(beta, dtype=float)
    return cfg.slot_duration_s * float(np.trace(beta)) * cfg.tx_power_w


# ---------------------------------------------------------------------------
# Finite-state Markov channel


def birth_death_transition(n_levels: int, stay: float = 0.4, move: float = 0.3) -> np.ndarray:
    """Row-stochastic birth-death matrix; boundary rows fold the missing
    neighbour mass into the stay probability (keeps the stationary law uniform)."""
    if n_levels < 1:
        raise ValueError("need at least one level")
    if stay < 0 or move < 0 or stay + 2 * move <= 0:
        raise ValueError("probabilities must be nonnegative and not all zero")
    if abs(stay + 2 * move - 1.0) > 1e-12:
        raise ValueError("stay + 2*move must equal 1")
    t = np.zeros((n_levels, n_levels))
    for i in range(n_levels):
        t[i, i] = stay
        if i > 0:
            t[i, i - 1] = move
        else:
            t[i, i] += move
        if i < n_levels - 1:
            t[i, i + 1] = move
        else:
            t[i, i] += move
    if n_levels == 1:
        t[0, 0] = 1.0
    return t


DEFAULT_FSMC_LEVELS: tuple[float, ...] = tuple(round(0.3 * i, 10) for i in range(9))


@dataclass(frozen=True)
class FsmcModel:
    """Quantised channel-gain process: one independent chain per coefficient."""

    levels: tuple[float, ...] = DEFAULT_FSMC_LEVELS
    transition: np.ndarray = field(
        default_factory=lambda: birth_death_transition(len(DEFAULT_FSMC_LEVELS))
    )

    def __post_init__(self) -> None:
        t = np.asarray(self.transition, dtype=float)
        n = len(self.levels)
        if t.shape != (n, n):
            raise ValueError("transition shape must match the level count")
        if np.any(t < 0) or not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("transition rows must be probability vectors")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be strictly increasing")
        object.__setattr__(self, "transition", t)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)


def fsmc_quantize(raw: float, levels: np.ndarray) -> int:
    """Index of the level nearest to raw; ties resolve to the lower index."""
    levels = np.asarray(levels, dtype=float)
    return int(np.argmin(np.abs(levels - raw)))


def fsmc_step(
    states: np.ndarray, transition: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Advance every chain one step.  states is an int array of level indices."""
    states = np.asarray(states)
    cum = np.cumsum(transition, axis=1)
    draws = rng.random(states.shape)
    rows = cum[states.reshape(-1)]
    nxt = (draws.reshape(-1, 1) >= rows).sum(axis=1)
    return nxt.reshape(states.shape).astype(states.dtype)
