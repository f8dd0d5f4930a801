"""Replayable disturbance generators.

Randomness comes from a Philox counter-based stream keyed on ``(seed, t)``, so
every controller in a comparison sees the same realisation at each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dmac.dynamics import UncertainNetwork

KINDS = ("zero", "gaussian", "confusion")

_GAUSSIAN_STREAM = 0
_CONFUSION_STREAM = 1


@dataclass(frozen=True)
class DisturbanceSpec:
    kind: str = "gaussian"
    variance: float = 0.1
    seed: int = 0
    # confusion only: per-node model the adversary imitates
    target_index: tuple[int, ...] | None = None
    noise_scale: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}; expected one of {KINDS}")
        if self.variance < 0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")
        if self.noise_scale < 0:
            raise ValueError(f"noise_scale must be non-negative, got {self.noise_scale}")
        if self.target_index is not None:
            object.__setattr__(self, "target_index", tuple(int(k) for k in self.target_index))


def _normals(seed: int, stream: int, t: int, n: int) -> np.ndarray:
    bitgen = np.random.Philox(key=[int(seed) & (2**64 - 1), stream], counter=[0, 0, 0, int(t)])
    return np.random.Generator(bitgen).standard_normal(n)


def gaussian_disturbance(spec: DisturbanceSpec, t: int, n: int) -> np.ndarray:
    """i.i.d. ``N(0, variance)`` vector for step ``t``."""
    if spec.variance == 0:
        return np.zeros(n)
    return np.sqrt(spec.variance) * _normals(spec.seed, _GAUSSIAN_STREAM, t, n)


def flipped_targets(net: UncertainNetwork) -> tuple[int, ...]:
    """For each node, the candidate next to the true one (cyclically)."""
    sizes = np.array([len(c) for c in net.candidates])
    return tuple(int(k) for k in (net.true_index + 1) % sizes)


def confusion_disturbance(spec: DisturbanceSpec, x_t: np.ndarray, net: UncertainNetwork, t: int) -> np.ndarray:
    """State feedback disturbance making the data look generated by the target models.

    ``w_i = (a_target - a_true) x_i + noise_scale * eta``; with zero noise the
    disturbance inferred under the target model is exactly zero.
    """
    target = np.asarray(spec.target_index if spec.target_index is not None else flipped_targets(net))
    sizes = np.array([len(c) for c in net.candidates])
    if target.shape != (net.n,) or np.any(target < 0) or np.any(target >= sizes):
        raise ValueError("confusion target_index must hold one valid candidate index per node")
    a_target = net.candidate_table[np.arange(net.n), target]
    w = (a_target - net.true_a) * np.asarray(x_t, dtype=float)
    if spec.noise_scale > 0:
        w = w + spec.noise_scale * _normals(spec.seed, _CONFUSION_STREAM, t, net.n)
    return w


def draw(spec: DisturbanceSpec, t: int, x_t: np.ndarray, net: UncertainNetwork) -> np.ndarray:
    if spec.kind == "zero":
        return np.zeros(net.n)
    if spec.kind == "gaussian":
        return gaussian_disturbance(spec, t, net.n)
    return confusion_disturbance(spec, x_t, net, t)
