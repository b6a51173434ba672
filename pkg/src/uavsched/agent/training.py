"""Actor-critic training loop, greedy evaluation, and parameter files.

One training step: shrink the group catalog to users still waiting, encode the
state, draw a clipped-Gaussian raw action per slot, quantize it onto the
active catalog, play the frame, shape the reward, store the transition, and
(once the memory can fill a batch) take one adaptive-gradient step on each
network.  Everything is driven by a single seeded generator, so a (scenario,
hyperparameters, seed) triple reproduces the run bit for bit.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from ..environment import EnergyBreakdown, EnvState, Schedule, frame_step, new_episode, objective
from ..scenario import Scenario
from ..trace import ChannelTrace
from .features import encode_state, feature_length
from .nets import Adam, Mlp, read_mlp, write_mlp
from .policy import (
    PolicyOutput,
    _sigmoid,
    actor_forward,
    map_action,
    restrict_groups,
    reward,
    sample_action,
)
from .replay import Experience, ReplayMemory


@dataclass(frozen=True)
class Hyperparams:
    gamma: float = 0.9
    alpha_a: float = 0.003
    alpha_c: float = 0.002
    batch: int = 64
    memory: int = 10_000
    episodes: int = 400
    kappa: float = 2.0
    epsilon: float = 1.2
    chi_min: float = 0.01
    chi_max: float = 1.0
    hidden: tuple[int, ...] = (300, 300, 300)
    reward_variant: str = "A"
    restrict: bool = True
    deterministic_policy: bool = False
    stale_delta: bool = False
    reward_scale: float | str = "auto"

    def resolved_scale(self, scenario: Scenario) -> float:
        """Training-internal reward divisor.  Raw rewards span orders of
        magnitude across variants (bits/J^eps vs joules); dividing by the
        reward of a nominal frame (proportional demand share at hover-only
        energy) keeps targets O(1) without touching the reward contract."""
        if isinstance(self.reward_scale, (int, float)):
            return float(self.reward_scale)
        from ..environment import hover_energy_per_frame

        e_ref = hover_energy_per_frame(scenario)
        if self.reward_variant == "A":
            return (scenario.total_demand_bits / scenario.t_max) / e_ref**self.epsilon
        if self.reward_variant == "B":
            return 1.0 / e_ref
        return e_ref


@dataclass
class AgentParams:
    """Trained policy/value networks plus the head constants needed to act."""

    actor: Mlp
    critic: Mlp
    kappa: float = 2.0
    chi_min: float = 0.01
    chi_max: float = 1.0
    restrict: bool = True

    def save(self, path: str) -> None:
        """Flat binary layout: magic, head floats, restrict flag, then the two
        networks (layer-size header + row-major weights/biases, little-endian
        64-bit floats)."""
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(b"ACPM")
        buf.write(struct.pack("<3d", self.kappa, self.chi_min, self.chi_max))
        buf.write(struct.pack("<q", int(self.restrict)))
        write_mlp(buf, self.actor)
        write_mlp(buf, self.critic)
        return buf.getvalue()

    @classmethod
    def load(cls, path: str) -> "AgentParams":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "AgentParams":
        with io.BytesIO(blob) as fh:
            if fh.read(4) != b"ACPM":
                raise ValueError("not an agent parameter blob")
            kappa, chi_min, chi_max = struct.unpack("<3d", fh.read(24))
            (restrict,) = struct.unpack("<q", fh.read(8))
            actor = read_mlp(fh)
            critic = read_mlp(fh)
        return cls(
            actor=actor,
            critic=critic,
            kappa=kappa,
            chi_min=chi_min,
            chi_max=chi_max,
            restrict=bool(restrict),
        )


@dataclass(frozen=True)
class EpisodeStats:
    episode: int
    reward: float  # raw-unit per-frame rewards summed over the episode
    energy_j: float
    delivered_ratio: float


# ---------------------------------------------------------------------------
# Gradient steps


def critic_loss_grads(
    critic: Mlp, batch: list[Experience], target: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Mean squared value-target residual and its parameter gradients, with
    the (bootstrapped) target held constant."""
    s = np.stack([e.state for e in batch])
    v, acts = critic.forward(s, want_cache=True)
    err = v[:, 0] - target
    dout = (2.0 * err / len(batch))[:, None]
    return float(np.mean(err**2)), critic.backward(acts, dout)


def critic_update(
    critic: Mlp,
    opt: Adam,
    batch: list[Experience],
    gamma: float,
) -> float:
    """One semi-gradient step on the mean squared value-target residual; the
    bootstrapped target is treated as a constant.  Returns the batch loss."""
    s_next = np.stack([e.next_state for e in batch])
    r = np.array([e.reward for e in batch])
    live = np.array([0.0 if e.terminal else 1.0 for e in batch])
    target = r + gamma * critic.forward(s_next)[:, 0] * live
    loss, grads = critic_loss_grads(critic, batch, target)
    opt.step(critic.params(), grads)
    return loss


def actor_loss_grads(
    actor: Mlp,
    batch: list[Experience],
    deltas: np.ndarray,
    kappa: float,
    chi_min: float,
    chi_max: float,
    freeze_variance: bool = False,
) -> tuple[float, list[np.ndarray]]:
    """Descent objective -mean(delta x log-density of the taken raw action)
    and its parameter gradients.

    The log-density is the diagonal Gaussian evaluated at the stored (clipped)
    raw action; gradients flow through the logistic mean/variance heads.  With
    freeze_variance the variance head is treated as constant (the
    fixed-variance ablation)."""
    s = np.stack([e.state for e in batch])
    a_hat = np.stack([e.raw_action for e in batch])
    raw, acts = actor.forward(s, want_cache=True)
    half = raw.shape[1] // 2
    sig_mu = _sigmoid(raw[:, :half])
    sig_chi = _sigmoid(raw[:, half:])
    mean = -kappa + 2.0 * kappa * sig_mu
    var = chi_min + (chi_max - chi_min) * sig_chi if not freeze_variance else np.full_like(
        sig_chi, chi_min
    )
    diff = a_hat - mean
    w = deltas[:, None] / len(batch)
    log_density = -0.5 * np.log(2.0 * np.pi * var) - diff**2 / (2.0 * var)
    loss = -float((w * log_density).sum())
    # d(-J)/d{mean,var}, then through the logistic heads to the raw outputs
    dmean = -w * diff / var
    dvar = -w * (-0.5 / var + diff**2 / (2.0 * var**2))
    dout = np.empty_like(raw)
    dout[:, :half] = dmean * 2.0 * kappa * sig_mu * (1.0 - sig_mu)
    if freeze_variance:
        dout[:, half:] = 0.0
    else:
        dout[:, half:] = dvar * (chi_max - chi_min) * sig_chi * (1.0 - sig_chi)
    return loss, actor.backward(acts, dout)


def actor_update(
    actor: Mlp,
    opt: Adam,
    batch: list[Experience],
    deltas: np.ndarray,
    kappa: float,
    chi_min: float,
    chi_max: float,
    freeze_variance: bool = False,
) -> None:
    """One ascent step on mean(log-density of the taken raw action x delta)."""
    _, grads = actor_loss_grads(
        actor, batch, deltas, kappa, chi_min, chi_max, freeze_variance
    )
    opt.step(actor.params(), grads)


# ---------------------------------------------------------------------------
# Training


def _slot_groups(
    a_hat: np.ndarray,
    active: list[int],
    kappa: float,
) -> tuple[np.ndarray, list[int]]:
    idx = map_action(a_hat, kappa, len(active))
    return np.asarray(idx), [active[i - 1] for i in np.atleast_1d(idx)]


def train(
    scenario: Scenario,
    hyper: Hyperparams = Hyperparams(),
    seed: int = 0,
) -> tuple[AgentParams, list[EpisodeStats]]:
    """Run the full learning schedule and return the trained networks plus the
    per-episode learning curve (raw reward, energy, delivered ratio).

    Episodes play fresh channel realisations derived from the master seed; a
    non-finite loss stops training early with the curve collected so far."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    feats_len = feature_length(scenario)
    i_slots = scenario.radio.slots_per_frame
    actor = Mlp((feats_len, *hyper.hidden, 2 * i_slots), rng)
    critic = Mlp((feats_len, *hyper.hidden, 1), rng)
    params = AgentParams(
        actor=actor,
        critic=critic,
        kappa=hyper.kappa,
        chi_min=hyper.chi_min,
        chi_max=hyper.chi_max,
        restrict=hyper.restrict,
    )
    opt_a = Adam(lr=hyper.alpha_a)
    opt_c = Adam(lr=hyper.alpha_c)
    memory = ReplayMemory(hyper.memory)
    scale = hyper.resolved_scale(scenario)
    curve: list[EpisodeStats] = []
    total_bits = scenario.total_demand_bits

    try:
        for ep in range(hyper.episodes):
            trace = ChannelTrace.generate(scenario, int(rng.integers(2**63)))
            state = new_episode(scenario)
            ep_reward = 0.0
            ep_energy = 0.0
            while state.t <= scenario.t_max and state.position != scenario.dock:
                n = state.position
                active = (
                    restrict_groups(scenario, n, state.residual_bits[n - 1])
                    if hyper.restrict
                    else scenario.groups(n)
                )
                s = encode_state(scenario, trace, state)
                pi = actor_forward(actor, s, hyper.kappa, hyper.chi_min, hyper.chi_max)
                if hyper.deterministic_policy:
                    pi = PolicyOutput(pi.mean, np.full_like(pi.variance, hyper.chi_min))
                a_hat = sample_action(pi, rng, hyper.kappa)
                mapped, slot_groups = _slot_groups(a_hat, active, hyper.kappa)
                state_next, delivered, energy = frame_step(scenario, trace, state, slot_groups)
                r_raw = reward(
                    float(delivered.sum()), energy, hyper.reward_variant, hyper.epsilon
                )
                r = r_raw / scale
                terminal = (
                    state_next.position == scenario.dock or state_next.t > scenario.t_max
                )
                s_next = encode_state(scenario, trace, state_next)
                v_s = critic.forward(s)[0, 0]
                v_next = 0.0 if terminal else critic.forward(s_next)[0, 0]
                delta_now = r + hyper.gamma * v_next - v_s
                memory.push(
                    Experience(
                        state=s,
                        raw_action=a_hat,
                        mapped_action=mapped,
                        reward=r,
                        next_state=s_next,
                        terminal=terminal,
                        delta=float(delta_now),
                    )
                )
                if len(memory) >= hyper.batch:
                    batch = memory.sample(rng, hyper.batch)
                    critic_update(critic, opt_c, batch, hyper.gamma)
                    if hyper.stale_delta:
                        deltas = np.array([e.delta for e in batch])
                    else:
                        s_b = np.stack([e.state for e in batch])
                        sn_b = np.stack([e.next_state for e in batch])
                        r_b = np.array([e.reward for e in batch])
                        live = np.array([0.0 if e.terminal else 1.0 for e in batch])
                        deltas = (
                            r_b
                            + hyper.gamma * critic.forward(sn_b)[:, 0] * live
                            - critic.forward(s_b)[:, 0]
                        )
                    actor_update(
                        actor,
                        opt_a,
                        batch,
                        deltas,
                        hyper.kappa,
                        hyper.chi_min,
                        hyper.chi_max,
                        freeze_variance=hyper.deterministic_policy,
                    )
                ep_reward += r_raw
                ep_energy += energy
                state = state_next
            delivered_ratio = 1.0 - state.total_residual / total_bits
            curve.append(
                EpisodeStats(
                    episode=ep + 1,
                    reward=ep_reward,
                    energy_j=ep_energy,
                    delivered_ratio=delivered_ratio,
                )
            )
    except FloatingPointError:
        # divergence: keep whatever has been learned and the partial curve
        pass
    return params, curve


# ---------------------------------------------------------------------------
# Evaluation


def act_greedy(
    params: AgentParams, scenario: Scenario, trace: ChannelTrace, state: EnvState
) -> list[int] | None:
    """Deterministic frame action: quantized policy mean on the active catalog;
    None once the mission is over (docked)."""
    if state.position == scenario.dock:
        return None
    n = state.position
    active = (
        restrict_groups(scenario, n, state.residual_bits[n - 1])
        if params.restrict
        else scenario.groups(n)
    )
    s = encode_state(scenario, trace, state)
    pi = actor_forward(params.actor, s, params.kappa, params.chi_min, params.chi_max)
    _, slot_groups = _slot_groups(pi.mean, active, params.kappa)
    return slot_groups


def rollout_greedy(
    params: AgentParams, scenario: Scenario, trace: ChannelTrace
) -> tuple[Schedule, EnergyBreakdown]:
    """Play the whole mission with the deterministic policy on a frozen trace
    and re-account its energy through the schedule objective."""
    state = new_episode(scenario)
    i_slots = scenario.radio.slots_per_frame
    blocks: list[list[list[int]]] = [[] for _ in range(scenario.n_clusters)]
    while state.t <= scenario.t_max and state.position != scenario.dock:
        slot_groups = act_greedy(params, scenario, trace, state)
        blocks[state.position - 1].append(list(slot_groups))
        state, _, _ = frame_step(scenario, trace, state, slot_groups)
    assignments = [
        np.asarray(b, dtype=np.int32).reshape(len(b), i_slots) for b in blocks
    ]
    schedule = Schedule.from_blocks(scenario, assignments)
    return schedule, objective(scenario, trace, schedule)


def rollout_stochastic(
    params: AgentParams,
    scenario: Scenario,
    trace: ChannelTrace,
    rng: np.random.Generator,
) -> tuple[Schedule, EnergyBreakdown]:
    """Like rollout_greedy but sampling the policy, for spread diagnostics."""
    state = new_episode(scenario)
    i_slots = scenario.radio.slots_per_frame
    blocks: list[list[list[int]]] = [[] for _ in range(scenario.n_clusters)]
    while state.t <= scenario.t_max and state.position != scenario.dock:
        n = state.position
        active = (
            restrict_groups(scenario, n, state.residual_bits[n - 1])
            if params.restrict
            else scenario.groups(n)
        )
        s = encode_state(scenario, trace, state)
        pi = actor_forward(params.actor, s, params.kappa, params.chi_min, params.chi_max)
        a_hat = sample_action(pi, rng, params.kappa)
        _, slot_groups = _slot_groups(a_hat, active, params.kappa)
        blocks[n - 1].append(list(slot_groups))
        state, _, _ = frame_step(scenario, trace, state, slot_groups)
    assignments = [
        np.asarray(b, dtype=np.int32).reshape(len(b), i_slots) for b in blocks
    ]
    schedule = Schedule.from_blocks(scenario, assignments)
    return schedule, objective(scenario, trace, schedule)
