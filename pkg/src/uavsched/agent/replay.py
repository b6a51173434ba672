"""Bounded experience memory with uniform batch sampling."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    raw_action: np.ndarray
    mapped_action: np.ndarray
    reward: float
    next_state: np.ndarray
    terminal: bool
    delta: float  # value-target residual at acting time (for the replay-as-stored mode)


class ReplayMemory:
    """FIFO ring of the most recent `capacity` transitions."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._buf: deque[Experience] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buf)

    def push(self, exp: Experience) -> None:
        self._buf.append(exp)

    def sample(self, rng: np.random.Generator, batch: int) -> list[Experience]:
        """Uniform draw without replacement; requires batch <= len(self)."""
        if batch > len(self._buf):
            raise ValueError("not enough stored transitions to fill a batch")
        idx = rng.choice(len(self._buf), size=batch, replace=False)
        return [self._buf[i] for i in idx]
