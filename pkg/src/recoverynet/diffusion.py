"""Fractional-threshold cascade over the dependency network.

Influence flows along incoming edges: a node's activation depends on the
fraction of its in-neighbors (its predecessors in visitation chains) that are
already active. Updates are synchronous, one step per week; active nodes stay
active. Nodes with no incoming edges never activate endogenously and recover
only if seeded. The activation test uses >= , so a zero threshold on a node
with incoming edges activates it at the first step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from recoverynet import kernels
from recoverynet.network import DependencyNetwork


@dataclass
class DiffusionTrace:
    """Weekly cascade states: states[t] is the active mask after week t.

    Row 0 is the seed state. activation_week is 0 for seeds, the first active
    week otherwise, and -1 for nodes that never activate. fixed_point_week is
    the first week whose state no further step can change, or None when the
    cascade was still changing at the horizon.
    """

    horizon: int
    states: np.ndarray  # (horizon+1, n) uint8
    activation_week: np.ndarray  # (n,) int64, -1 = never
    fixed_point_week: int | None


def validate_theta(net: DependencyNetwork, theta) -> np.ndarray:
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if theta.shape != (net.order,):
        raise ValueError(
            f"diffusion: theta has shape {theta.shape}, expected ({net.order},)"
        )
    if theta.size and (theta.min() < 0 or theta.max() > 1):
        raise ValueError("diffusion: theta entries must lie in [0, 1]")
    return theta


def seed_mask(net: DependencyNetwork, seeds) -> np.ndarray:
    """Normalize a seed collection to a uint8 mask; rejects out-of-range indices."""
    mask = np.zeros(net.order, dtype=np.uint8)
    idx = np.asarray(list(seeds), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= net.order:
            raise ValueError("diffusion: seed index out of range")
        mask[idx] = 1
    return mask


def step(net: DependencyNetwork, current_state, theta) -> np.ndarray:
    """One synchronous update; reads only `current_state`."""
    theta = validate_theta(net, theta)
    cur = np.ascontiguousarray(current_state, dtype=np.uint8)
    if cur.shape != (net.order,):
        raise ValueError(
            f"diffusion: state has shape {cur.shape}, expected ({net.order},)"
        )
    states, _, _ = kernels.run_cascade(net.in_indptr, net.in_src, theta, cur, 1)
    return states[1]


def simulate(net: DependencyNetwork, seeds, theta, horizon: int) -> DiffusionTrace:
    """Run the cascade for `horizon` weeks from the seed set.

    Terminates early once a fixed point is reached and pads the remaining
    weeks with the fixed-point state.
    """
    if horizon < 1:
        raise ValueError("diffusion: horizon must be >= 1")
    theta = validate_theta(net, theta)
    mask = seed_mask(net, seeds)
    states, weeks, fixed = kernels.run_cascade(
        net.in_indptr, net.in_src, theta, mask, int(horizon)
    )
    return DiffusionTrace(
        horizon=int(horizon),
        states=states,
        activation_week=weeks,
        fixed_point_week=None if fixed < 0 else int(fixed),
    )


def final_active_count(trace: DiffusionTrace) -> int:
    return int(trace.states[-1].sum())
