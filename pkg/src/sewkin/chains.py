"""Bundled kinematic chains: one representative per IK family.

The KUKA iiwa geometry follows the vendor datasheet (axis heights 0.36,
0.42, 0.40, flange 0.126 m).  The Sawyer geometry is the published
kinematic table.  The remaining chains are synthetic exemplars with
made-up link lengths chosen to be generic within their family.
"""
from __future__ import annotations

import numpy as np

from .robot import KinematicChain

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
O = np.zeros(3)
I3 = np.eye(3)


def _chain(h, offsets, family, name, R_7T=None, p_7T=O, p_0S=O,
           elbow_frame=3, p_jE=O, p_7W=O, unit_elbow=False):
    return KinematicChain(
        h=np.array(h, float),
        offsets=np.array(offsets, float),
        R_7T=I3 if R_7T is None else np.array(R_7T, float),
        p_7T=np.array(p_7T, float),
        p_0S=np.array(p_0S, float),
        elbow_frame=elbow_frame,
        p_jE=None if unit_elbow else np.array(p_jE, float),
        p_7W=np.array(p_7W, float),
        family=family,
        name=name,
    )


def kuka_iiwa14():
    """KUKA LBR iiwa 14 R820 (2R-2R-3R): shoulder/elbow/wrist at the
    three axis intersections."""
    return _chain(
        h=[Z, Y, Z, -Y, Z, Y, Z],
        offsets=[[0, 0, 0.36], O, [0, 0, 0.42], O, [0, 0, 0.40], O, O],
        p_7T=[0, 0, 0.126],
        p_0S=[0, 0, 0.36],
        family="2R-2R-3R",
        name="kuka_iiwa14",
    )


def sawyer():
    """Rethink Sawyer (R-2R-2RE-2R), published link table in meters."""
    return _chain(
        h=[Z, Y, X, Y, X, Y, X],
        offsets=[O, [0.081, 0.1925, 0], O, [0.4, -0.1685, 0], O,
                 [0.4, 0.1363, 0], O],
        p_jE=[0.4, -0.1685, 0],
        family="R-2R-2RE-2R",
        name="sawyer",
    )


def spherical_shoulder_wrist():
    """Synthetic 3R-R-3R arm (Motoman SIA5D layout)."""
    return _chain(
        h=[Z, Y, Z, Y, Z, Y, Z],
        offsets=[O, O, O, [0.05, 0.02, 0.30], [-0.03, 0.04, 0.31], O, O],
        p_7T=[0.01, 0, 0.05],
        p_jE=[0.05, 0.02, 0.30],
        family="3R-R-3R",
        name="spherical_shoulder_wrist",
    )


def spherical_elbow():
    """Synthetic R-R-3RE-2R arm (Motoman SIA50D layout)."""
    return _chain(
        h=[Z, Y, Z, Y, X, Y, X],
        offsets=[O, [0.04, 0, 0.25], [0.03, -0.02, 0.30], O, O,
                 [0.30, 0.05, -0.02], O],
        p_7T=[0.05, 0, 0],
        family="R-R-3RE-2R",
        name="spherical_elbow",
    )


def two_sphere_elbow():
    """Synthetic 2R-3R-2R arm."""
    return _chain(
        h=[Z, Y, Z, Y, Z, Y, Z],
        offsets=[O, O, [0.04, 0.03, 0.35], O, O, [0.02, -0.05, 0.32], O],
        p_7T=[0, 0, 0.08],
        family="2R-3R-2R",
        name="two_sphere_elbow",
    )


def ssrms_like():
    """Synthetic 2R-3R||-2R arm (SSRMS layout, unit elbow e_SE = R_02 h_3)."""
    return _chain(
        h=[Z, X, Y, Y, Y, X, Z],
        offsets=[O, O, [0.10, 0, 0.30], [0.40, 0, 0.05], [0.35, 0, -0.04],
                 [0.08, 0, 0.07], O],
        p_7T=[0, 0, 0.06],
        unit_elbow=True,
        family="2R-3Rp-2R",
        name="ssrms_like",
    )


def offset_parallel_elbow(p_12=(0.06, 0.0, 0.25)):
    """Synthetic R-R-3R||E-2R arm; p_12 = 0 degenerates to the 2R-3R||-2R case."""
    return _chain(
        h=[Z, X, Y, Y, Y, X, Z],
        offsets=[O, list(p_12), [0.10, 0, 0.30], [0.40, 0, 0.05],
                 [0.35, 0, -0.04], [0.08, 0, 0.07], O],
        p_7T=[0, 0, 0.06],
        unit_elbow=True,
        family="R-R-3RpE-2R",
        name="offset_parallel_elbow",
    )


def franka_like():
    """Synthetic 3R-RE-2R-R arm (Franka layout, 1D search over theta_S)."""
    return _chain(
        h=[Z, Y, Z, Y, Z, Y, Z],
        offsets=[O, O, O, [0.0825, 0, 0.316], [-0.0825, 0.03, 0.384], O,
                 [0.088, 0, 0.107]],
        p_7T=[0, 0, 0.05],
        p_jE=[0.0825, 0, 0.316],
        family="3R-RE-2R-R",
        name="franka_like",
    )


def offset_shoulder():
    """Synthetic R-2RS-R-3R arm (shoulder at the 2-3 intersection,
    1D search over q_1); p_12 along h_1 keeps the shoulder fixed."""
    return _chain(
        h=[Z, Y, X, Y, Z, Y, X],
        offsets=[O, [0, 0, 0.30], O, [0.05, 0.02, 0.33],
                 [-0.02, 0.03, 0.31], O, O],
        p_7T=[0.02, 0, 0.04],
        p_0S=[0, 0, 0.30],
        p_jE=[0.05, 0.02, 0.33],
        family="R-2RS-R-3R",
        name="offset_shoulder",
    )


def general_7r():
    """Synthetic general 7R arm with no intersecting or parallel axes
    (Yumi/RRC class, 2D search)."""
    n = lambda v: np.asarray(v, float) / np.linalg.norm(v)
    return _chain(
        h=[Z, n([0.1, 1, 0.1]), n([0.2, 0.05, 1]), n([-0.05, 1, 0.12]),
           n([0.1, 0.2, 1]), n([0.05, 1, -0.08]), n([0.15, -0.1, 1])],
        offsets=[O, [0.03, 0.02, 0.10], [0.05, -0.03, 0.22],
                 [0.14, 0.08, 0.12], [-0.03, 0.10, 0.16],
                 [0.02, 0.12, 0.10], [0.02, -0.08, 0.08]],
        p_7T=[0, 0, 0.04],
        p_jE=[0.14, 0.08, 0.12],
        family="general",
        name="general_7r",
    )


def unparameterizable():
    """R-3R||-3R arm: self-motion keeps the elbow in the SEW half plane,
    so the SEW angle cannot parameterize it (solve_ik refuses it)."""
    return _chain(
        h=[Z, Y, Y, Y, Z, Y, Z],
        offsets=[O, [0, 0, 0.2], [0.3, 0, 0], [0.3, 0, 0], [0.2, 0, 0], O, O],
        p_jE=[0.3, 0, 0],
        family="R-3Rp-3R",
        name="unparameterizable",
    )


BY_FAMILY = {
    "2R-2R-3R": kuka_iiwa14,
    "3R-R-3R": spherical_shoulder_wrist,
    "R-R-3RE-2R": spherical_elbow,
    "2R-3R-2R": two_sphere_elbow,
    "2R-3Rp-2R": ssrms_like,
    "R-R-3RpE-2R": offset_parallel_elbow,
    "R-2R-2RE-2R": sawyer,
    "3R-RE-2R-R": franka_like,
    "R-2RS-R-3R": offset_shoulder,
    "general": general_7r,
}
