"""Generalized shoulder-elbow-wrist angle: frames, forward/differential
kinematics, singularity classification, and winding diagnostics.

Two reference-direction functions are provided.  The conventional one
measures the elbow from a fixed reference vector e_r and is singular
along the whole line p_SW parallel to +/- e_r.  The stereographic one
builds the reference from a projection pole e_t and, for unit e_t
orthogonal to e_r, is singular only along the half line e_SW = e_t.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import rot, normalize, wrap_angle, cross
from . import robot as _robot

COLLINEAR_TOL = 1e-10
FRAME_TOL = 1e-10


class SEWError(ValueError):
    pass


class CoordinateSingularity(SEWError):
    """Reference direction function undefined for this p_SW."""


class CollinearSingularity(SEWError):
    """Shoulder, elbow, wrist collinear: SEW angle undefined."""


@dataclass(frozen=True)
class ConventionalSEW:
    """Conventional SEW parameterization with reference vector e_r."""

    e_r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e_r", normalize(np.asarray(self.e_r, float)))

    @property
    def kind(self):
        return "conventional"


@dataclass(frozen=True)
class StereographicSEW:
    """Stereographic SEW parameterization with pole e_t and reference e_r.

    Construction normalizes e_r and removes its component from e_t, which
    leaves the reference direction unchanged.  The norm of e_t is kept:
    ||e_t|| = 1 gives the half-line singularity, other norms give two
    singular directions, and e_t = 0 reproduces the conventional angle.
    """

    e_r: np.ndarray
    e_t: np.ndarray

    def __post_init__(self):
        e_r = normalize(np.asarray(self.e_r, float))
        e_t = np.asarray(self.e_t, float)
        e_t = e_t - np.dot(e_r, e_t) * e_r
        object.__setattr__(self, "e_r", e_r)
        object.__setattr__(self, "e_t", e_t)

    @property
    def kind(self):
        return "stereographic"


@dataclass(frozen=True)
class SEWFrame:
    """Orthonormal measurement triple plus the intermediates behind it.

    k is k_y (conventional) or k_x (stereographic); k_rt is only set for
    the stereographic frame.  p_CE/e_CE/n_SEW/k_SEW are filled in once an
    elbow vector is supplied to sew_forward.
    """

    e_x: np.ndarray
    e_y: np.ndarray
    e_SW: np.ndarray
    k: np.ndarray
    k_rt: np.ndarray | None = None
    p_CE: np.ndarray | None = None
    e_CE: np.ndarray | None = None
    n_SEW: np.ndarray | None = None
    k_SEW: np.ndarray | None = None


def reference_frame(param, p_SW) -> SEWFrame:
    """Build (e_x, e_y, e_SW) from the shoulder-wrist vector.

    Raises CollinearSingularity for vanishing p_SW and
    CoordinateSingularity when the reference direction is undefined.
    """
    p_SW = np.asarray(p_SW, float)
    n_sw = np.linalg.norm(p_SW)
    if n_sw < 1e-12:
        raise CollinearSingularity("p_SW vanishes")
    e_SW = p_SW / n_sw

    if param.kind == "conventional":
        k_y = cross(p_SW, param.e_r)
        nk = np.linalg.norm(k_y)
        if nk < COLLINEAR_TOL * n_sw:
            raise CoordinateSingularity("p_SW collinear with e_r")
        e_y = k_y / nk
        e_x = cross(e_y, e_SW)
        return SEWFrame(e_x=e_x, e_y=e_y, e_SW=e_SW, k=k_y)

    k_rt = cross(e_SW - param.e_t, param.e_r)
    k_x = cross(k_rt, p_SW)
    nk = np.linalg.norm(k_x)
    if nk < COLLINEAR_TOL * n_sw:
        raise CoordinateSingularity("stereographic reference undefined")
    e_x = k_x / nk
    e_y = cross(e_SW, e_x)
    return SEWFrame(e_x=e_x, e_y=e_y, e_SW=e_SW, k=k_x, k_rt=k_rt)


def sew_forward(param, p_SW, p_SE):
    """SEW angle of an elbow vector; returns (psi, completed SEWFrame)."""
    p_SE = np.asarray(p_SE, float)
    fr = reference_frame(param, p_SW)
    p_CE = p_SE - fr.e_SW * np.dot(fr.e_SW, p_SE)
    n_ce = np.linalg.norm(p_CE)
    if n_ce < COLLINEAR_TOL * np.linalg.norm(p_SE):
        raise CollinearSingularity("elbow on the shoulder-wrist line")
    e_CE = p_CE / n_ce
    k_SEW = cross(np.asarray(p_SW, float), p_SE)
    n_SEW = k_SEW / np.linalg.norm(k_SEW)
    psi = float(np.arctan2(np.dot(fr.e_y, p_SE), np.dot(fr.e_x, p_SE)))
    fr = SEWFrame(
        e_x=fr.e_x, e_y=fr.e_y, e_SW=fr.e_SW, k=fr.k, k_rt=fr.k_rt,
        p_CE=p_CE, e_CE=e_CE, n_SEW=n_SEW, k_SEW=k_SEW,
    )
    return psi, fr


def sew_angle_forms(param, p_SW, p_SE):
    """The four equivalent atan2 expressions for the SEW angle."""
    psi, fr = sew_forward(param, p_SW, p_SE)
    forms = (
        np.arctan2(np.dot(fr.e_y, p_SE), np.dot(fr.e_x, p_SE)),
        np.arctan2(np.dot(fr.e_y, fr.p_CE), np.dot(fr.e_x, fr.p_CE)),
        np.arctan2(-np.dot(fr.e_x, fr.n_SEW), np.dot(fr.e_y, fr.n_SEW)),
        np.arctan2(-np.dot(fr.e_x, fr.k_SEW), np.dot(fr.e_y, fr.k_SEW)),
    )
    return np.array(forms, float)


@dataclass(frozen=True)
class JacobianBundle:
    """Task Jacobian, SEW-angle Jacobian, and the 7x7 augmented stack."""

    J: np.ndarray
    J_psi: np.ndarray
    J_psi_E: np.ndarray
    J_psi_W: np.ndarray
    J_A: np.ndarray


def sew_state(param, chain, q):
    """(psi, frame, p_SW, p_SE) of a chain configuration."""
    pose, p_SW, p_SE, _ = _robot.sew_vectors(chain, q)
    psi, fr = sew_forward(param, p_SW, p_SE)
    return psi, fr, p_SW, p_SE


def sew_jacobian(param, chain, q) -> JacobianBundle:
    """SEW-angle Jacobian row and the augmented Jacobian at q."""
    pose, p_SW, p_SE, cache = _robot.sew_vectors(chain, q)
    psi, fr = sew_forward(param, p_SW, p_SE)
    J, J_E, J_W = _robot.partial_jacobians(chain, q, cache=cache)

    n_ce = np.linalg.norm(fr.p_CE)
    n_sw = np.linalg.norm(p_SW)
    sw_x_ce = cross(fr.e_SW, fr.e_CE)

    J_psi_E = sw_x_ce / n_ce
    elbow_term = (np.dot(fr.e_SW, p_SE) / (n_sw * n_ce)) * sw_x_ce
    nk = np.linalg.norm(fr.k)
    if param.kind == "conventional":
        J_psi_W = (np.dot(fr.e_SW, param.e_r) / nk) * fr.e_y - elbow_term
    else:
        J_psi_W = (
            (np.dot(fr.e_SW, param.e_r) / nk) * fr.e_y
            + (np.dot(fr.e_SW, cross(param.e_t, param.e_r)) / nk) * fr.e_x
            - elbow_term
        )

    J_psi = J_psi_E @ J_E + J_psi_W @ J_W
    J_A = np.vstack([J, J_psi])
    return JacobianBundle(J=J, J_psi=J_psi, J_psi_E=J_psi_E, J_psi_W=J_psi_W, J_A=J_A)


@dataclass(frozen=True)
class SingularityTolerances:
    tol_J: float = 1e-8
    tol_A: float = 1e-8
    collinear: float = 1e-10
    rank: float = 1e-7


@dataclass(frozen=True)
class SingularityReport:
    """Classification per the augmented-Jacobian singularity taxonomy."""

    kind: str  # kinematic-internal | kinematic-boundary | augmentation |
    #            collinear | coordinate | none
    sigma_min_J: float
    sigma_min_JA: float
    p_CE_norm: float
    k_norm: float


def classify_singularity(param, chain, q, tol: SingularityTolerances | None = None):
    """Classify the configuration against all singularity conditions.

    SEW-angle singularities (collinear, coordinate) take precedence since
    the remaining checks need a defined J_psi.
    """
    tol = tol or SingularityTolerances()
    pose, p_SW, p_SE, cache = _robot.sew_vectors(chain, q)
    J, _, _ = _robot.partial_jacobians(chain, q, cache=cache)
    sigma_J = float(np.linalg.svd(J, compute_uv=False)[-1])

    n_sw = np.linalg.norm(p_SW)
    p_CE = p_SE - (p_SW / max(n_sw, 1e-300)) * np.dot(p_SW / max(n_sw, 1e-300), p_SE)
    n_ce = float(np.linalg.norm(p_CE))

    def report(kind, sigma_A=np.nan, k_norm=np.nan):
        return SingularityReport(kind, sigma_J, sigma_A, n_ce, k_norm)

    if n_sw < 1e-12 or n_ce < tol.collinear * np.linalg.norm(p_SE):
        return report("collinear")
    try:
        fr = reference_frame(param, p_SW)
    except CoordinateSingularity:
        return report("coordinate", k_norm=_k_norm(param, p_SW))

    bundle = sew_jacobian(param, chain, q)
    sigma_A = float(np.linalg.svd(bundle.J_A, compute_uv=False)[-1])
    k_norm = float(np.linalg.norm(fr.k))

    if sigma_J < tol.tol_J:
        s = np.linalg.svd(J, compute_uv=False)
        rank_J = int(np.sum(s > tol.rank * s[0]))
        sA = np.linalg.svd(bundle.J_A, compute_uv=False)
        rank_A = int(np.sum(sA > tol.rank * sA[0]))
        kind = "kinematic-internal" if rank_A > rank_J else "kinematic-boundary"
        return SingularityReport(kind, sigma_J, sigma_A, n_ce, k_norm)
    if sigma_A < tol.tol_A:
        return SingularityReport("augmentation", sigma_J, sigma_A, n_ce, k_norm)
    return SingularityReport("none", sigma_J, sigma_A, n_ce, k_norm)


def _k_norm(param, p_SW):
    p_SW = np.asarray(p_SW, float)
    e_SW = normalize(p_SW)
    if param.kind == "conventional":
        return float(np.linalg.norm(cross(p_SW, param.e_r)))
    return float(np.linalg.norm(cross(cross(e_SW - param.e_t, param.e_r), p_SW)))


def winding_order(param, axis, radius=1e-3, samples=720):
    """Index of the reference-direction field around a workspace direction.

    Traverses e_SW once around a circle of angular radius `radius` about
    `axis` and accumulates the rotation of e_x about e_SW relative to the
    polar tangent basis of the circle (which itself has index one).
    Returns the net integer number of turns of the elbow reference.
    """
    axis = normalize(np.asarray(axis, float))
    seed = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(seed, axis)) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    u = normalize(cross(axis, seed))
    v = cross(axis, u)

    t = np.linspace(0.0, 2.0 * np.pi, samples + 1)
    cr, sr = np.cos(radius), np.sin(radius)
    angles = np.empty_like(t)
    for i, ti in enumerate(t):
        e_sw = cr * axis + sr * (np.cos(ti) * u + np.sin(ti) * v)
        fr = reference_frame(param, e_sw)
        b1 = axis - e_sw * np.dot(axis, e_sw)
        b1 = b1 / np.linalg.norm(b1)
        b2 = cross(e_sw, b1)
        angles[i] = np.arctan2(np.dot(fr.e_x, b2), np.dot(fr.e_x, b1))
    unwrapped = np.unwrap(angles)
    turns = (unwrapped[-1] - unwrapped[0]) / (2.0 * np.pi)
    return int(np.rint(1.0 + turns))


def stereographic_singular_directions(param: StereographicSEW):
    """Analytic coordinate-singular e_SW directions for non-unit e_t.

    ||e_t|| <= 1: the two sphere points on the e_r line through e_t;
    ||e_t|| >= 1: the two tangency points of planes through that line.
    """
    e_t = param.e_t
    e_r = param.e_r
    nt = np.linalg.norm(e_t)
    out = []
    if nt <= 1.0:
        s = np.sqrt(max(0.0, 1.0 - nt * nt))
        out.extend([e_t + s * e_r, e_t - s * e_r])
    if nt >= 1.0:
        s = np.sqrt(max(0.0, nt * nt - 1.0))
        te = cross(e_t, e_r)
        out.extend([e_t / nt ** 2 + s * te / nt ** 2, e_t / nt ** 2 - s * te / nt ** 2])
    return [normalize(v) for v in out]
