"""Vectorized subproblem kernels for the 1D/2D search solvers.

All functions broadcast over a leading batch axis and return fixed-width
solution slots (least-squares solutions are duplicated across slots) so
that branch indices stay continuous along a search sweep.
"""
from __future__ import annotations

import numpy as np

from .geom import EXACT_TOL


def _dot(a, b):
    return np.sum(a * b, axis=-1)


from .geom import cross as _cross  # noqa: E402


def rot_apply(k, theta, v):
    """rot(k, theta) @ v with broadcasting; k, v (...,3), theta (...)."""
    k = np.asarray(k, float)
    v = np.asarray(v, float)
    theta = np.asarray(theta, float)
    c = np.cos(theta)[..., None]
    s = np.sin(theta)[..., None]
    kxv = _cross(k, v)
    kdv = _dot(k, v)[..., None]
    return v * c + kxv * s + k * kdv * (1.0 - c)


def rot_mat(k, theta):
    """Batched rotation matrices (..., 3, 3) via the outer-product form."""
    theta = np.asarray(theta, float)
    k = np.broadcast_to(np.asarray(k, float), theta.shape + (3,))
    c = np.cos(theta)
    s = np.sin(theta)
    v = 1.0 - c
    x, y, z = k[..., 0], k[..., 1], k[..., 2]
    R = np.empty(theta.shape + (3, 3))
    R[..., 0, 0] = c + v * x * x
    R[..., 0, 1] = v * x * y - s * z
    R[..., 0, 2] = v * x * z + s * y
    R[..., 1, 0] = v * x * y + s * z
    R[..., 1, 1] = c + v * y * y
    R[..., 1, 2] = v * y * z - s * x
    R[..., 2, 0] = v * x * z - s * y
    R[..., 2, 1] = v * y * z + s * x
    R[..., 2, 2] = c + v * z * z
    return R


def sp4_batch(h, p, k, d):
    """Batched subproblem 4: h . rot(k,theta) p = d.

    Returns (thetas (...,2), exact (...)); the LS root fills both slots.
    """
    h = np.asarray(h, float)
    p = np.asarray(p, float)
    k = np.asarray(k, float)
    d = np.asarray(d, float)

    kxp = _cross(k, p)
    perp = -_cross(k, kxp)
    A0 = _dot(h, kxp)
    A1 = _dot(h, perp)
    b = d - _dot(h, k) * _dot(k, p)

    na2 = A0 * A0 + A1 * A1
    disc = na2 - b * b
    exact = disc > 0.0
    xi = np.sqrt(np.maximum(disc, 0.0))

    sc0_s = A0 * b + xi * A1
    sc0_c = A1 * b - xi * A0
    sc1_s = A0 * b - xi * A1
    sc1_c = A1 * b + xi * A0
    t0 = np.arctan2(sc0_s, sc0_c)
    t1 = np.arctan2(sc1_s, sc1_c)
    t_ls = np.arctan2(A0 * b, A1 * b)

    thetas = np.stack(
        [np.where(exact, t0, t_ls), np.where(exact, t1, t_ls)], axis=-1
    )
    return thetas, exact


def sp3_batch(p1, p2, k, d):
    """Batched subproblem 3 via the subproblem-4 reduction."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    dd = 0.5 * (_dot(p1, p1) + _dot(p2, p2) - np.asarray(d, float) ** 2)
    return sp4_batch(p2, p1, k, dd)


def sp1_batch(p1, p2, k):
    """Batched subproblem 1; returns (theta (...), exact (...))."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    k = np.asarray(k, float)
    kxp = _cross(k, p1)
    perp = -_cross(k, kxp)
    theta = np.arctan2(_dot(kxp, p2), _dot(perp, p2))
    n1 = np.linalg.norm(p1, axis=-1) if p1.ndim > 1 else np.linalg.norm(p1)
    n2 = np.linalg.norm(p2, axis=-1) if p2.ndim > 1 else np.linalg.norm(p2)
    exact = (np.abs(n1 - n2) <= EXACT_TOL) & (
        np.abs(_dot(k, p1) - _dot(k, p2)) <= EXACT_TOL
    )
    return theta, exact


def sp2_batch(p1, p2, k1, k2):
    """Batched subproblem 2: rot(k1,t1) p1 = rot(k2,t2) p2.

    Returns (t1 (...,2), t2 (...,2), exact (...)) with the IK-Geo slot
    pairing [t1_0, t1_1] vs [t2_1, t2_0].
    """
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    n1 = np.linalg.norm(p1, axis=-1, keepdims=True)
    n2 = np.linalg.norm(p2, axis=-1, keepdims=True)
    p1n = p1 / n1
    p2n = p2 / n2
    t1, ex1 = sp4_batch(k2, p1n, k1, _dot(k2, p2n))
    t2, ex2 = sp4_batch(k1, p2n, k2, _dot(k1, p1n))
    t2 = t2[..., ::-1]
    exact = ex1 & ex2 & (np.abs(n1[..., 0] - n2[..., 0]) <= EXACT_TOL)
    return t1, t2, exact


def _quartic_roots_batch(c):
    """Real roots of batched quartics; c (...,5) descending coefficients.

    Returns (roots (...,4), valid (...,4)); solved through batched
    companion eigenvalues after normalization.
    """
    c = np.asarray(c, float)
    batch = c.shape[:-1]
    bad = ~np.all(np.isfinite(c), axis=-1)
    if bad.any():
        c = np.where(bad[..., None], np.array([1.0, 0, 0, 0, 1.0]), c)
    scale = np.max(np.abs(c), axis=-1, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    cn = c / scale

    lead = cn[..., 0]
    # Degenerate leading coefficients get a tiny regularization; their
    # spurious huge roots are filtered by the validity checks downstream.
    lead_ok = np.abs(lead) > 1e-13
    lead = np.where(lead_ok, lead, 1e-13)

    comp = np.zeros(batch + (4, 4))
    comp[..., 1, 0] = 1.0
    comp[..., 2, 1] = 1.0
    comp[..., 3, 2] = 1.0
    for i in range(4):
        comp[..., 0, i] = -cn[..., i + 1] / lead
    roots = np.linalg.eigvals(comp)
    # sort by real part for slot stability across neighboring instances
    order = np.argsort(roots.real, axis=-1)
    roots = np.take_along_axis(roots, order, axis=-1)
    real = np.abs(roots.imag) < 1e-6 * (1.0 + np.abs(roots.real))
    ok = real & np.isfinite(roots.real)
    if bad.any():
        ok = ok & ~bad[..., None]
    return roots.real, ok


def sp5_batch(p0, p1, p2, p3, k1, k2, k3):
    """Batched subproblem 5; p1 may vary per instance, the rest may be fixed.

    Returns (thetas (...,4,3), valid (...,4)).  Solutions are unpolished;
    callers refine downstream.
    """
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    p3 = np.asarray(p3, float)
    k1 = np.asarray(k1, float)
    k2 = np.asarray(k2, float)
    k3 = np.asarray(k3, float)

    def invariants(p_off, p_rot, k_rot):
        axial = _dot(k_rot, p_rot)[..., None] * k_rot
        perp = p_rot - axial
        kxp = _cross(k_rot, p_rot)
        A = _dot(k2, perp)
        B = _dot(k2, kxp)
        delta = _dot(k2, p_off + axial)
        a = _dot(p_off, perp)
        b = _dot(p_off, kxp)
        n = _dot(p_off, p_off) + _dot(p_rot, p_rot) + 2.0 * _dot(p_off, axial)
        return A, B, delta, a, b, n, perp, kxp, axial

    A1, B1, d1, a1, b1, n1, perp1, kxp1, ax1 = invariants(p0, p1, k1)
    A3, B3, d3, a3, b3, n3, perp3, kxp3, ax3 = invariants(p2, p3, k3)

    rho1 = np.maximum(A1 * A1 + B1 * B1, 1e-300)
    rho3 = np.maximum(A3 * A3 + B3 * B3, 1e-300)

    # Side i: N = P(H) +/- sqrt(R(H)), P = u1 H + u0, R = quadratic.
    def pr(A, B, delta, a, b, n, rho):
        g = 2.0 * (a * A + b * B) / rho
        u1, u0 = g, n - g * delta
        w = 4.0 * (a * B - b * A) ** 2 / rho ** 2
        r2, r1, r0 = -w, 2.0 * w * delta, w * (rho - delta * delta)
        return u1, u0, r2, r1, r0

    P1a, P0a, R2a, R1a, R0a = pr(A1, B1, d1, a1, b1, n1, rho1)
    P1b, P0b, R2b, R1b, R0b = pr(A3, B3, d3, a3, b3, n3, rho3)

    # Quartic ((L^2 - R1 - R3)^2 - 4 R1 R3) in H with L linear.
    L1, L0 = P1a - P1b, P0a - P0b
    i2 = L1 * L1 - R2a - R2b
    i1 = 2.0 * L1 * L0 - R1a - R1b
    i0 = L0 * L0 - R0a - R0b
    q4 = i2 * i2 - 4.0 * R2a * R2b
    q3 = 2.0 * i2 * i1 - 4.0 * (R2a * R1b + R1a * R2b)
    q2 = 2.0 * i2 * i0 + i1 * i1 - 4.0 * (R2a * R0b + R1a * R1b + R0a * R2b)
    q1 = 2.0 * i1 * i0 - 4.0 * (R1a * R0b + R0a * R1b)
    q0 = i0 * i0 - 4.0 * R0a * R0b

    H, valid = _quartic_roots_batch(np.stack([q4, q3, q2, q1, q0], axis=-1))

    def circle(Hv, A, B, delta, rho, sign):
        # clamped: returns the closest circle point when Hv is unattainable
        r = Hv - delta
        disc = rho - r * r
        ok = disc > -1e-9 * np.maximum(rho, 1.0)
        root = np.sqrt(np.maximum(disc, 0.0))
        c = (r * A + sign * (-B) * root) / rho
        s = (r * B + sign * A * root) / rho
        nrm = np.sqrt(np.maximum(c * c + s * s, 1e-300))
        return c / nrm, s / nrm, ok

    # Expand to the 4 H-slots.
    def bc(x):
        return np.broadcast_to(np.asarray(x)[..., None], H.shape)

    best = None
    for s1 in (1.0, -1.0):
        c1, ss1, ok1 = circle(H, bc(A1), bc(B1), bc(d1), bc(rho1), s1)
        N1 = bc(n1) + 2.0 * (bc(a1) * c1 + bc(b1) * ss1)
        for s3 in (1.0, -1.0):
            c3, ss3, ok3 = circle(H, bc(A3), bc(B3), bc(d3), bc(rho3), s3)
            N3 = bc(n3) + 2.0 * (bc(a3) * c3 + bc(b3) * ss3)
            mism = np.abs(N1 - N3) / np.maximum(1.0, np.abs(N1))
            hard = ok1 & ok3
            key = np.where(hard, mism, mism + 1e3)
            cand = (key, mism, c1, ss1, c3, ss3)
            if best is None:
                best = cand
            else:
                better = cand[0] < best[0]
                best = tuple(np.where(better, c, b) for c, b in zip(cand, best))

    _, mism, c1, s1v, c3, s3v = best
    valid = valid & (mism < 1e-5)

    t1 = np.arctan2(s1v, c1)
    t3 = np.arctan2(s3v, c3)

    # theta2 aligns w onto u about k2.
    u = p0[..., None, :] + rot_apply(
        np.broadcast_to(k1, t1.shape + (3,)), t1, np.broadcast_to(p1[..., None, :], t1.shape + (3,))
    )
    w = p2[..., None, :] + rot_apply(
        np.broadcast_to(k3, t3.shape + (3,)), t3, np.broadcast_to(p3[..., None, :], t3.shape + (3,))
    )
    t2, _ = sp1_batch(w, u, np.broadcast_to(k2, t1.shape + (3,)))

    res = u - rot_apply(np.broadcast_to(k2, t2.shape + (3,)), t2, w)
    scale = np.maximum(np.linalg.norm(u, axis=-1), 1.0)
    res_n = np.linalg.norm(res, axis=-1)
    valid = valid & (res_n < 1e-4 * scale)

    return np.stack([t1, t2, t3], axis=-1), valid, res
