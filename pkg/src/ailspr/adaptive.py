"""Diversity control: perturbation-degree updates and the flow-regulated acceptance rule."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


@dataclass
class OmegaState:
    """Perturbation degree of one removal heuristic with its running distance mean."""

    omega: float
    it: int = 0
    mean_dist: float = 0.0

    def update(self, dist: float, d_beta: float, gamma: int, size: int) -> None:
        self.it += 1
        self.mean_dist = (self.mean_dist * (self.it - 1) + dist) / self.it
        if self.it == gamma:
            # A zero mean means every perturbation was undone by the search.
            observed = self.mean_dist if self.mean_dist > 0 else 1.0
            self.omega = min(size, max(1.0, self.omega * d_beta / observed))
            self.it = 0
            self.mean_dist = 0.0


def update_omega(state: OmegaState, dist: float, d_beta: float, gamma: int, n: int) -> OmegaState:
    state.update(dist, d_beta, gamma, n)
    return state


@dataclass
class AcceptState:
    """Threshold acceptance steered toward a target acceptance flow ``kappa``.

    The threshold sits between the best recent objective and the running
    mean; ``eta`` picks the point and is retuned after every ``gamma``
    acceptances so that the realized flow tracks ``kappa``.
    """

    gamma: int
    kappa: float
    eta: float = 1.0
    epsilon: float = 0.001
    fbar: float = 0.0
    it: int = 0
    accepted: int = 0
    since_update: int = 0
    window: deque = field(default_factory=deque)
    total_seen: int = 0
    total_accepted: int = 0

    @property
    def fmin(self) -> float:
        return min(self.window)

    def threshold(self) -> float:
        if not self.window:
            return float("inf")
        low = self.fmin
        return low + self.eta * (self.fbar - low)

    def accept(self, f: float) -> bool:
        ok = f <= self.threshold()
        self.total_seen += 1
        self.since_update += 1
        if ok:
            self.total_accepted += 1
            self.accepted += 1
            if self.accepted == self.gamma:
                ratio = self.accepted / self.since_update
                self.eta = min(1.0, max(self.epsilon, self.kappa * self.eta / ratio))
                self.accepted = 0
                self.since_update = 0
        return ok

    def observe(self, f: float) -> None:
        """Fold a post-search objective into the running mean and recent window."""
        self.it += 1
        if self.it <= self.gamma:
            self.fbar = (self.fbar * (self.it - 1) + f) / self.it
        else:
            self.fbar = self.fbar * (1.0 - 1.0 / self.gamma) + f / self.gamma
        self.window.append(f)
        if len(self.window) > self.gamma:
            self.window.popleft()

    @property
    def acceptance_rate(self) -> float:
        return self.total_accepted / self.total_seen if self.total_seen else 0.0


def update_fbar(state: AcceptState, f: float) -> AcceptState:
    state.observe(f)
    return state


def accept(state: AcceptState, f: float) -> bool:
    return state.accept(f)
