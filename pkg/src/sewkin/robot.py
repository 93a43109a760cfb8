"""Kinematic chain model and product-of-exponentials forward kinematics.

A chain is described in its zero configuration by seven unit joint axes
h_i (each in the predecessor frame), seven inter-frame offsets
p_(i-1,i), a fixed tool transform (R_7T, p_7T), and the shoulder /
elbow / wrist attachment points used by the SEW machinery.  Internally
meters and radians throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geom import rot, normalize, cross as _cross

FAMILIES = (
    "2R-2R-3R",
    "3R-R-3R",
    "R-R-3RE-2R",
    "2R-3R-2R",
    "2R-3Rp-2R",
    "R-R-3RpE-2R",
    "R-2R-2RE-2R",
    "3R-RE-2R-R",
    "R-2RS-R-3R",
    "general",
    "R-3Rp-3R",
)


class ChainValidationError(ValueError):
    """Chain geometry is inconsistent with its declared family."""


@dataclass(frozen=True)
class Pose:
    """Rigid pose of the task frame in the base frame."""

    R: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class KinematicChain:
    """7R serial chain with shoulder/elbow/wrist bookkeeping.

    offsets holds [p_01, p_12, ..., p_67] row-wise.  The elbow is fixed
    in frame elbow_frame with offset p_jE; p_jE = None declares a unit
    elbow, p_SE := e_SE = R_{0,j-1} h_j (parallel-axis elbows).
    """

    h: np.ndarray
    offsets: np.ndarray
    R_7T: np.ndarray
    p_7T: np.ndarray
    p_0S: np.ndarray
    elbow_frame: int
    p_jE: np.ndarray | None
    p_7W: np.ndarray
    family: str
    name: str = ""

    def __post_init__(self):
        h = np.asarray(self.h, float)
        norms = np.linalg.norm(h, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            h = h / norms[:, None]
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "offsets", np.asarray(self.offsets, float))
        object.__setattr__(self, "R_7T", np.asarray(self.R_7T, float))
        object.__setattr__(self, "p_7T", np.asarray(self.p_7T, float))
        object.__setattr__(self, "p_0S", np.asarray(self.p_0S, float))
        object.__setattr__(self, "p_7W", np.asarray(self.p_7W, float))
        if self.p_jE is not None:
            object.__setattr__(self, "p_jE", np.asarray(self.p_jE, float))
        if self.family not in FAMILIES:
            raise ChainValidationError(f"unknown family tag {self.family!r}")
        _validate_family(self)

    @property
    def unit_elbow(self) -> bool:
        return self.p_jE is None

    @property
    def p_01(self) -> np.ndarray:
        return self.offsets[0]


def _req_zero(chain, idx, what):
    if np.linalg.norm(chain.offsets[idx]) > 1e-12:
        raise ChainValidationError(
            f"{chain.family}: {what} requires p_{idx}{idx + 1} = 0"
        )


def _req_parallel(chain, i, j):
    if np.linalg.norm(np.cross(chain.h[i], chain.h[j])) > 1e-10:
        raise ChainValidationError(
            f"{chain.family}: axes {i + 1} and {j + 1} must be parallel"
        )


def _validate_family(chain):
    f = chain.family
    if f == "2R-2R-3R":
        for i, w in ((1, "shoulder 2R"), (3, "elbow 2R"), (5, "wrist 3R"), (6, "wrist 3R")):
            _req_zero(chain, i, w)
    elif f == "3R-R-3R":
        for i, w in ((1, "shoulder 3R"), (2, "shoulder 3R"), (5, "wrist 3R"), (6, "wrist 3R")):
            _req_zero(chain, i, w)
    elif f == "R-R-3RE-2R":
        for i, w in ((3, "elbow 3R"), (4, "elbow 3R"), (6, "wrist 2R")):
            _req_zero(chain, i, w)
    elif f == "2R-3R-2R":
        for i, w in ((1, "shoulder 2R"), (3, "elbow 3R"), (4, "elbow 3R"), (6, "wrist 2R")):
            _req_zero(chain, i, w)
    elif f == "2R-3Rp-2R":
        _req_zero(chain, 1, "shoulder 2R")
        _req_zero(chain, 6, "wrist 2R")
        _req_parallel(chain, 2, 3)
        _req_parallel(chain, 3, 4)
    elif f == "R-R-3RpE-2R":
        _req_zero(chain, 6, "wrist 2R")
        _req_parallel(chain, 2, 3)
        _req_parallel(chain, 3, 4)
    elif f == "R-2R-2RE-2R":
        for i, w in ((2, "2R joint"), (4, "elbow 2R"), (6, "wrist 2R")):
            _req_zero(chain, i, w)
    elif f == "3R-RE-2R-R":
        for i, w in ((1, "shoulder 3R"), (2, "shoulder 3R"), (5, "5-6 2R")):
            _req_zero(chain, i, w)
    elif f == "R-2RS-R-3R":
        for i, w in ((2, "shoulder 2R"), (5, "wrist 3R"), (6, "wrist 3R")):
            _req_zero(chain, i, w)
        if np.linalg.norm(np.cross(chain.h[0], chain.offsets[1])) > 1e-10:
            raise ChainValidationError(
                "R-2RS-R-3R: p_12 must lie along h_1 so the shoulder is fixed"
            )
    elif f == "R-3Rp-3R":
        _req_parallel(chain, 1, 2)
        _req_parallel(chain, 2, 3)


def frames(chain: KinematicChain, q):
    """Cumulative rotations and origins of frames 0..7.

    Returns (R, p) with R[i] = R_0i (8,3,3) and p[i] the origin of frame i
    in the base frame (8,3); R[0] = I, p[0] = 0.
    """
    q = np.asarray(q, float)
    R = np.empty((8, 3, 3))
    p = np.empty((8, 3))
    R[0] = np.eye(3)
    p[0] = 0.0
    for i in range(7):
        p[i + 1] = p[i] + R[i] @ chain.offsets[i]
        R[i + 1] = R[i] @ rot(chain.h[i], q[i])
    return R, p


def forward_kinematics(chain: KinematicChain, q) -> Pose:
    """Task-frame pose from joint angles (product of exponentials)."""
    R, p = frames(chain, q)
    return Pose(R[7] @ chain.R_7T, p[7] + R[7] @ chain.p_7T)


def wrist_position(chain: KinematicChain, q):
    R, p = frames(chain, q)
    return p[7] + R[7] @ chain.p_7W


def elbow_position(chain: KinematicChain, q):
    """Elbow point in the base frame (point-elbow chains only)."""
    if chain.unit_elbow:
        raise ValueError("unit-elbow chain has no finite elbow point")
    R, p = frames(chain, q)
    j = chain.elbow_frame
    return p[j] + R[j] @ chain.p_jE


def shoulder_wrist(chain: KinematicChain, pose: Pose):
    """Shoulder-to-wrist vector from a task pose alone."""
    R_07 = pose.R @ chain.R_7T.T
    return pose.p - R_07 @ chain.p_7T + R_07 @ chain.p_7W - chain.p_0S


def shoulder_elbow(chain: KinematicChain, q):
    """Shoulder-to-elbow vector p_SE; for unit elbows the unit e_SE."""
    R, p = frames(chain, q)
    j = chain.elbow_frame
    if chain.unit_elbow:
        return R[j - 1] @ chain.h[j - 1]
    return p[j] + R[j] @ chain.p_jE - chain.p_0S


def partial_jacobians(chain: KinematicChain, q, cache=None):
    """Geometric Jacobians (J, J_E, J_W).

    J is the 6x7 [angular; linear] task-frame Jacobian.  J_E and J_W are
    3x7 Jacobians of p_SE and p_SW; columns distal to the elbow
    attachment are zero in J_E.  cache may hold a precomputed frames()
    result.
    """
    R, p = frames(chain, q) if cache is None else cache
    axes = np.einsum("ijk,ik->ij", R[:7], chain.h)  # joint i+1 axis in base frame
    origins = p[1:8]  # joint i+1 axis passes through the frame i+1 origin

    p_T = p[7] + R[7] @ chain.p_7T
    p_W = p[7] + R[7] @ chain.p_7W

    J = np.empty((6, 7))
    J[:3] = axes.T
    J[3:] = _cross(axes, p_T - origins).T
    J_W = _cross(axes, p_W - origins).T

    J_E = np.zeros((3, 7))
    j = chain.elbow_frame
    if chain.unit_elbow:
        e_SE = R[j - 1] @ chain.h[j - 1]
        J_E[:, : j - 1] = _cross(axes[: j - 1], e_SE).T
    else:
        p_E = p[j] + R[j] @ chain.p_jE
        J_E[:, :j] = _cross(axes[:j], p_E - origins[:j]).T
    return J, J_E, J_W


def sew_vectors(chain: KinematicChain, q):
    """(pose, p_SW, p_SE, frames cache) from a single kinematics pass."""
    R, p = frames(chain, q)
    pose = Pose(R[7] @ chain.R_7T, p[7] + R[7] @ chain.p_7T)
    p_SW = p[7] + R[7] @ chain.p_7W - chain.p_0S
    j = chain.elbow_frame
    if chain.unit_elbow:
        p_SE = R[j - 1] @ chain.h[j - 1]
    else:
        p_SE = p[j] + R[j] @ chain.p_jE - chain.p_0S
    return pose, p_SW, p_SE, (R, p)


def with_sew_attachments(chain: KinematicChain, **kw) -> KinematicChain:
    """Copy of the chain with replaced attachment fields."""
    return replace(chain, **kw)
