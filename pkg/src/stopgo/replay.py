"""Prioritized experience replay: sum-tree index plus ring storage.

Transitions are sampled i.i.d. with probability proportional to
priority^alpha_per, and importance-sampling weights (N * P(i))^(-beta) are
returned normalized by the batch maximum. Priorities are |loss| + floor,
with the exponent applied at store time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminal: bool


class SumTree:
    """Complete binary tree over leaf weights supporting O(log n) updates
    and prefix-sum lookup. Parents are recomputed as left + right on every
    update, so the root equals the leaf sum up to summation-order roundoff.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.nodes = np.zeros(2 * capacity, dtype=np.float64)

    def update(self, index: int, weight: float) -> None:
        if weight < 0:
            raise ValueError("weights must be non-negative")
        i = index + self.capacity
        self.nodes[i] = weight
        i >>= 1
        while i >= 1:
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1]
            i >>= 1

    def total(self) -> float:
        return self.nodes[1]

    def get(self, index: int) -> float:
        return self.nodes[index + self.capacity]

    def find_prefix(self, prefix: float) -> int:
        """Smallest leaf index such that the cumulative weight up to and
        including it exceeds prefix. prefix must lie in [0, total)."""
        i = 1
        while i < self.capacity:
            left = self.nodes[2 * i]
            if prefix < left:
                i = 2 * i
            else:
                prefix -= left
                i = 2 * i + 1
        return i - self.capacity


class ReplayBuffer:
    def __init__(self, capacity: int = 50_000, alpha_per: float = 0.5,
                 priority_floor: float = 1e-3):
        self.capacity = capacity
        self.alpha_per = alpha_per
        self.priority_floor = priority_floor
        self.storage: list[Transition] = []
        self.tree = SumTree(capacity)
        self.write_index = 0
        self.max_raw_priority = 1.0  # raw scale: |loss| + floor

    def __len__(self) -> int:
        return len(self.storage)

    def _store_priority(self, index: int, raw: float) -> None:
        self.tree.update(index, raw ** self.alpha_per)

    def insert(self, transition: Transition) -> int:
        """Add at maximum current priority; overwrite the oldest when full."""
        index = self.write_index
        if len(self.storage) < self.capacity:
            self.storage.append(transition)
        else:
            self.storage[index] = transition
        self.write_index = (self.write_index + 1) % self.capacity
        self._store_priority(index, self.max_raw_priority)
        return index

    def update_priorities(self, indices, losses) -> None:
        """Set priorities to |per-sample loss| + floor."""
        for index, loss in zip(indices, losses):
            raw = abs(float(loss)) + self.priority_floor
            if raw > self.max_raw_priority:
                self.max_raw_priority = raw
            self._store_priority(index, raw)

    def sample(self, batch_size: int, beta: float, rng: np.random.Generator):
        """Draw batch_size transitions i.i.d. proportional to stored priority.

        Returns (indices, transitions, weights) with weights = (N*P)^-beta
        normalized by the batch maximum.
        """
        n = len(self.storage)
        if n < batch_size:
            raise ValueError(f"buffer holds {n} < batch size {batch_size}")
        total = self.tree.total()
        indices = np.empty(batch_size, dtype=np.int64)
        probs = np.empty(batch_size, dtype=np.float64)
        for b, u in enumerate(rng.random(batch_size)):
            index = self.tree.find_prefix(u * total)
            # Guard against landing on a zero-weight or never-written leaf
            # at the float boundary.
            if index >= n:
                index = n - 1
            indices[b] = index
            probs[b] = self.tree.get(index) / total
        weights = (n * probs) ** (-beta)
        weights /= weights.max()
        transitions = [self.storage[i] for i in indices]
        return indices, transitions, weights
