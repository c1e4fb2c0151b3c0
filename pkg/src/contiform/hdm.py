"""Homogeneous deformation mode.

The team's desired configuration at time t is an affine image of the
reference formation, r_c(t) = Q(t) r_0 + d(t), commanded entirely
through the n+1 leaders. Followers never see Q or d: tracking the
weighted combination of in-neighbor positions reproduces the global
map because the weight rows are barycentric.

The singular values of Q certify inter-agent separation: as long as
min sigma stays above (Delta + eps) / (d_min/2 + eps) no two agents can
collide despite bounded tracking error Delta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CommunicationError, DegeneracyError
from .geometry import as_position, plane_normal, rank_simplex


@dataclass(frozen=True)
class HomogeneousTransform:
    """Affine map r -> Q r + d with singular values of Q sorted descending."""

    Q: np.ndarray
    d: np.ndarray
    singular_values: np.ndarray

    def apply(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = pts @ self.Q.T + self.d
        return out[0] if np.asarray(points).ndim == 1 else out


@dataclass(frozen=True)
class HdmErrors:
    """Per-axis error stacks of one tick.

    E_d_F: follower local-desired minus actual, (F, 3).
    E_c_F: follower global-desired minus actual, (F, 3).
    E_c_L: leader global-desired minus actual, (L, 3).
    They satisfy E_d_F = D P_F + B P_L (with P the actual position
    stacks) and E_c_F = -D^-1 (E_d_F + B E_c_L).
    """

    E_d_F: np.ndarray
    E_c_F: np.ndarray
    E_c_L: np.ndarray


def fit_homogeneous_transform(leader_ref, leader_current, n: int = 2):
    """Recover (Q, d) mapping leader reference positions onto current ones.

    n = 3 uses the four leaders directly. n = 2 has only three leaders,
    which pin the in-plane part; the out-of-plane direction is completed
    by mapping the reference unit normal onto the current unit normal,
    so one singular value is exactly 1 for planar fits.
    """
    ref = [as_position(p) for p in leader_ref]
    cur = [as_position(p) for p in leader_current]
    if len(ref) != n + 1 or len(cur) != n + 1:
        raise ValueError(f"need {n + 1} leader positions for n={n}")
    if rank_simplex(ref, n) != n:
        raise DegeneracyError("degenerate leader reference simplex")
    if n == 2:
        ref = ref + [ref[0] + plane_normal(*ref)]
        cur = cur + [cur[0] + plane_normal(*cur)]
    m = np.ones((4, 4))
    m[:, :3] = np.stack(ref)
    try:
        sol = np.linalg.solve(m, np.stack(cur))  # rows [Q^T; d]
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("singular leader system") from exc
    Q = sol[:3].T
    d = sol[3]
    sv = np.linalg.svd(Q, compute_uv=False)
    return HomogeneousTransform(Q=Q, d=d, singular_values=sv)


def global_desired_positions(W_L, leader_desired):
    """Follower desired stack W_L @ leader_desired, one row per follower."""
    W_L = np.asarray(W_L, dtype=float)
    leaders = np.atleast_2d(np.asarray(leader_desired, dtype=float))
    if W_L.shape[1] != leaders.shape[0]:
        raise ValueError(
            f"W_L has {W_L.shape[1]} leader columns but got {leaders.shape[0]} leader rows"
        )
    return W_L @ leaders


def local_desired_position(weights, neighbor_actual, leader_desired=None):
    """One follower's desired position: its weighted in-neighbor combination.

    Leaders pass leader_desired and get it back unchanged; their desired
    position is commanded, not negotiated.
    """
    if leader_desired is not None:
        return as_position(leader_desired)
    w = np.asarray(weights, dtype=float)
    pts = np.asarray(neighbor_actual, dtype=float)
    if pts.ndim != 2 or pts.shape[0] != w.shape[0] or pts.shape[1] != 3:
        raise CommunicationError(
            f"need one (3,) position per weight: weights {w.shape}, positions {pts.shape}"
        )
    if not np.all(np.isfinite(pts)):
        raise CommunicationError("neighbor positions contain non-finite values")
    return w @ pts


def error_vectors(actual, local_desired, global_desired, leader_idx, follower_idx):
    """Build the HdmErrors stacks from per-agent position arrays.

    All three inputs are (N, 3) in one shared agent order; leader_idx
    and follower_idx select rows.
    """
    actual = np.asarray(actual, dtype=float)
    local_desired = np.asarray(local_desired, dtype=float)
    global_desired = np.asarray(global_desired, dtype=float)
    li = np.asarray(leader_idx, dtype=int)
    fi = np.asarray(follower_idx, dtype=int)
    return HdmErrors(
        E_d_F=local_desired[fi] - actual[fi],
        E_c_F=global_desired[fi] - actual[fi],
        E_c_L=global_desired[li] - actual[li],
    )


def collision_safety_margin(transform, delta, epsilon, d_min):
    """(threshold, satisfied): the deformation-based separation certificate.

    threshold = (delta + epsilon) / (d_min / 2 + epsilon); the team is
    certified collision free while min sigma(Q) >= threshold, where
    delta bounds each agent's deviation from its global desired spot,
    epsilon is the vehicle radius and d_min the smallest reference
    separation.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if d_min <= 0:
        raise ValueError(f"d_min must be > 0, got {d_min}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    threshold = (delta + epsilon) / (d_min / 2.0 + epsilon)
    sv = transform.singular_values if isinstance(transform, HomogeneousTransform) \
        else np.asarray(transform, dtype=float)
    return threshold, bool(np.min(sv) >= threshold)
