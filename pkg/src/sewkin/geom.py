"""Rotation utilities and the six canonical geometric subproblems.

The subproblems are the closed-form building blocks used by every IK
routine in this package:

    1.  rot(k, theta) @ p1 = p2
    2.  rot(k1, theta1) @ p1 = rot(k2, theta2) @ p2
    3.  || rot(k, theta) @ p1 - p2 || = d
    4.  h . (rot(k, theta) @ p) = d
    5.  p0 + rot(k1, theta1) @ p1 = rot(k2, theta2) @ (p2 + rot(k3, theta3) @ p3)
    6.  h1.rot(k1,t1)p1 + h2.rot(k2,t2)p2 = d1  and
        h3.rot(k1,t1)p3 + h4.rot(k2,t2)p4 = d2

Subproblems 1-4 return least-squares minimizers when no exact solution
exists; 5 and 6 return the (possibly empty) exact solution set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Exact-solution residual threshold shared by all subproblems.
EXACT_TOL = 1e-9
# Relative rejection norm below which a vector counts as collinear with an axis.
COLLINEAR_TOL = 1e-10


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]; ties at the branch cut resolve to +pi."""
    theta = np.asarray(theta, dtype=float)
    w = np.mod(theta, TWO_PI)
    w = np.where(w > np.pi, w - TWO_PI, w)
    if w.ndim == 0:
        return float(w)
    return w


def hat(v):
    """Skew-symmetric cross-product matrix of v (broadcasts over leading axes)."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        x, y, z = v
        return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    o = np.zeros_like(x)
    return np.stack(
        [
            np.stack([o, -z, y], axis=-1),
            np.stack([z, o, -x], axis=-1),
            np.stack([-y, x, o], axis=-1),
        ],
        axis=-2,
    )


def rot(k, theta):
    """Rotation matrix about unit axis k by theta (Rodrigues form).

    Broadcasts: k may be (..., 3) and theta (...); the result is (..., 3, 3).
    """
    k = np.asarray(k, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if k.ndim == 1 and theta.ndim == 0:
        s = float(np.sin(theta))
        c = float(np.cos(theta))
        v = 1.0 - c
        x, y, z = k
        return np.array(
            [
                [c + v * x * x, v * x * y - s * z, v * x * z + s * y],
                [v * x * y + s * z, c + v * y * y, v * y * z - s * x],
                [v * x * z - s * y, v * y * z + s * x, c + v * z * z],
            ]
        )
    K = hat(k)
    s = np.sin(theta)[..., None, None]
    c = np.cos(theta)[..., None, None]
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def normalize(v):
    """Return v scaled to unit length."""
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def cross(a, b):
    """Cross product without numpy's axis-juggling overhead."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def _rej_norm(v, k):
    """Norm of the component of v orthogonal to unit axis k."""
    return float(np.linalg.norm(v - np.dot(k, v) * np.asarray(k, float)))


def _is_collinear(v, k):
    n = float(np.linalg.norm(v))
    return n == 0.0 or _rej_norm(v, k) < COLLINEAR_TOL * n


@dataclass(frozen=True)
class SubproblemSolution:
    """Solution set of one geometric subproblem.

    angles is a tuple of angle tuples, each wrapped to (-pi, pi].  For the
    single-angle subproblems every inner tuple has length one.  free marks
    angle positions that are unconstrained in a degenerate instance.
    """

    angles: tuple
    is_least_squares: bool
    degenerate: bool = False
    free: tuple = field(default=())

    def __len__(self):
        return len(self.angles)


def _pack(angle_tuples, is_ls, degenerate=False, free=()):
    wrapped = tuple(tuple(float(wrap_angle(a)) for a in tup) for tup in angle_tuples)
    return SubproblemSolution(wrapped, bool(is_ls), bool(degenerate), tuple(free))


# ---------------------------------------------------------------------------
# Scalar kernels (IK-Geo style).  These return plain arrays/flags and are the
# entry points used by the solvers; the subproblemN wrappers add packaging.
# ---------------------------------------------------------------------------


def _sp1(p1, p2, k):
    """theta minimizing ||rot(k,theta) p1 - p2||; returns (theta, is_ls)."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    k = np.asarray(k, float)

    kxp = cross(k, p1)
    A = np.stack([kxp, -cross(k, kxp)], axis=-1)  # 3x2, columns k x p1, p1 perp
    x = A.T @ p2
    theta = float(np.arctan2(x[0], x[1]))

    is_ls = (
        abs(np.linalg.norm(p1) - np.linalg.norm(p2)) > EXACT_TOL
        or abs(np.dot(k, p1) - np.dot(k, p2)) > EXACT_TOL
    )
    return theta, bool(is_ls)


def _sp4(h, p, k, d):
    """All theta with h . rot(k,theta) p = d; LS extremum when unattainable.

    Returns (thetas, is_ls) where thetas has 2 entries (exact roots) or 1
    (tangent or least-squares).
    """
    h = np.asarray(h, float)
    p = np.asarray(p, float)
    k = np.asarray(k, float)

    A11 = cross(k, p)
    A1 = np.stack([A11, -cross(k, A11)], axis=-1)  # 3x2
    A = h @ A1  # (2,)
    b = d - np.dot(h, k) * np.dot(k, p)

    norm_a2 = float(A @ A)
    x_ls = A1.T @ (h * b)  # (2,)

    disc = norm_a2 - b * b
    if disc > 0.0:
        xi = np.sqrt(disc)
        x_n = np.array([A[1], -A[0]])
        sc1 = x_ls + xi * x_n
        sc2 = x_ls - xi * x_n
        thetas = np.array(
            [np.arctan2(sc1[0], sc1[1]), np.arctan2(sc2[0], sc2[1])]
        )
        return thetas, False
    theta = np.arctan2(x_ls[0], x_ls[1])
    # Tangency: attainable boundary counts as a (double) exact root.
    is_ls = disc < -EXACT_TOL * max(1.0, norm_a2)
    return np.array([theta]), bool(is_ls)


def _sp3(p1, p2, k, d):
    """All theta with ||rot(k,theta) p1 - p2|| = d (reduces to subproblem 4)."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    dd = 0.5 * (p1 @ p1 + p2 @ p2 - d * d)
    return _sp4(p2, p1, k, dd)


def _sp2(p1, p2, k1, k2):
    """All (theta1, theta2) with rot(k1,theta1) p1 = rot(k2,theta2) p2.

    Returns (t1, t2, is_ls) with t1/t2 of equal length (1 or 2).  The
    least-squares pair is the true minimizer of the residual norm.
    """
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    k1 = np.asarray(k1, float)
    k2 = np.asarray(k2, float)

    n1 = np.linalg.norm(p1)
    n2 = np.linalg.norm(p2)
    p1n = p1 / n1
    p2n = p2 / n2

    t1, ls1 = _sp4(k2, p1n, k1, float(np.dot(k2, p2n)))
    t2, ls2 = _sp4(k1, p2n, k2, float(np.dot(k1, p1n)))

    if len(t1) > 1 or len(t2) > 1:
        if len(t1) == 1:
            t1 = np.array([t1[0], t1[0]])
        if len(t2) == 1:
            t2 = np.array([t2[0], t2[0]])
        t1 = np.array([t1[0], t1[-1]])
        t2 = np.array([t2[-1], t2[0]])

    is_ls = bool(abs(n1 - n2) > EXACT_TOL or ls1 or ls2)
    return t1, t2, is_ls


def _circle_invariant_coeffs(p_off, p_rot, k_rot, k_ref):
    """Affine coefficients of k_ref.(u) and ||u||^2 on u = p_off + rot(k_rot, t) p_rot.

    Returns (A, B, delta, a, b, n) with
        k_ref . u = delta + A cos t + B sin t
        ||u||^2   = n + 2 (a cos t + b sin t)
    """
    axial = np.dot(k_rot, p_rot) * k_rot
    perp = p_rot - axial
    kxp = cross(k_rot, p_rot)
    A = float(np.dot(k_ref, perp))
    B = float(np.dot(k_ref, kxp))
    delta = float(np.dot(k_ref, p_off + axial))
    a = float(np.dot(p_off, perp))
    b = float(np.dot(p_off, kxp))
    n = float(p_off @ p_off + p_rot @ p_rot + 2.0 * np.dot(p_off, axial))
    return A, B, delta, a, b, n


def _circle_point_from_h(Hval, A, B, delta):
    """(cos t, sin t) candidates with A cos t + B sin t = Hval - delta."""
    rho2 = A * A + B * B
    if rho2 <= 0.0:
        return []
    r = Hval - delta
    disc = rho2 - r * r
    if disc < 0.0:
        if disc < -1e-9 * max(rho2, 1.0):
            return []
        disc = 0.0
    root = np.sqrt(disc)
    base_c = r * A / rho2
    base_s = r * B / rho2
    off_c = -B * root / rho2
    off_s = A * root / rho2
    return [(base_c + off_c, base_s + off_s), (base_c - off_c, base_s - off_s)]


def _quartic_roots(coeffs):
    """Real roots of a polynomial given by descending coefficients."""
    c = np.asarray(coeffs, float)
    nz = np.flatnonzero(np.abs(c) > 1e-14 * np.max(np.abs(c), initial=1.0))
    if len(nz) == 0:
        return np.array([])
    c = c[nz[0]:]
    if len(c) < 2:
        return np.array([])
    roots = np.roots(c)
    keep = np.abs(roots.imag) < 1e-7 * (1.0 + np.abs(roots.real))
    return np.real(roots[keep])


def _sp5(p0, p1, p2, p3, k1, k2, k3):
    """All (theta1, theta2, theta3) solving subproblem 5.

    Matches the two rotation invariants (norm and k2-component) of both
    sides, which reduces to a quartic in the shared k2-component.
    """
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    p3 = np.asarray(p3, float)
    k1 = np.asarray(k1, float)
    k2 = np.asarray(k2, float)
    k3 = np.asarray(k3, float)

    A1, B1, d1, a1, b1, n1 = _circle_invariant_coeffs(p0, p1, k1, k2)
    A3, B3, d3, a3, b3, n3 = _circle_invariant_coeffs(p2, p3, k3, k2)

    rho1 = A1 * A1 + B1 * B1
    rho3 = A3 * A3 + B3 * B3
    scale = max(np.linalg.norm(p0) + np.linalg.norm(p1),
                np.linalg.norm(p2) + np.linalg.norm(p3), 1.0)
    if rho1 < (1e-12 * scale) ** 2 or rho3 < (1e-12 * scale) ** 2:
        return _sp5_degenerate(p0, p1, p2, p3, k1, k2, k3)

    # Side i: N = P_i(H) +/- sqrt(R_i(H)) with P linear and R quadratic in H.
    #   P_i = n_i + 2 (a A + b B)(H - delta) / rho
    #   R_i = 4 (a B - b A)^2 (rho - (H - delta)^2) / rho^2
    def pr(A, B, delta, a, b, n, rho):
        p_lin = np.array([2.0 * (a * A + b * B) / rho,
                          n - 2.0 * (a * A + b * B) * delta / rho])
        w = 4.0 * (a * B - b * A) ** 2 / rho ** 2
        r_quad = np.array([-w, 2.0 * w * delta, w * (rho - delta * delta)])
        return p_lin, r_quad

    P1, R1 = pr(A1, B1, d1, a1, b1, n1, rho1)
    P3, R3 = pr(A3, B3, d3, a3, b3, n3, rho3)

    # (L^2 - R1 - R3)^2 - 4 R1 R3 = 0 with L = P1 - P3.
    L = np.polysub(P1, P3)
    inner = np.polysub(np.polysub(np.polymul(L, L), R1), R3)
    quart = np.polysub(np.polymul(inner, inner),
                       4.0 * np.polymul(R1, R3))

    sols = []
    for H in _quartic_roots(quart):
        for c1, s1 in _circle_point_from_h(H, A1, B1, d1):
            N1 = n1 + 2.0 * (a1 * c1 + b1 * s1)
            for c3, s3 in _circle_point_from_h(H, A3, B3, d3):
                N3 = n3 + 2.0 * (a3 * c3 + b3 * s3)
                if abs(N1 - N3) > 1e-6 * max(1.0, abs(N1), abs(N3)):
                    continue
                t1 = np.arctan2(s1, c1)
                t3 = np.arctan2(s3, c3)
                u = p0 + rot(k1, t1) @ p1
                w = p2 + rot(k3, t3) @ p3
                t2, _ = _sp1(w, u, k2)
                cand = _polish_sp5(np.array([t1, t2, t3]),
                                   p0, p1, p2, p3, k1, k2, k3)
                if cand is not None:
                    sols.append(cand)
    return _dedup_tuples(sols)


def _polish_sp5(t, p0, p1, p2, p3, k1, k2, k3, iters=10):
    """Newton-polish a subproblem-5 candidate; None if it fails to converge."""
    scale = max(np.linalg.norm(p0) + np.linalg.norm(p1),
                np.linalg.norm(p2) + np.linalg.norm(p3), 1e-9)
    t = np.array(t, float)
    for _ in range(iters):
        R1 = rot(k1, t[0])
        R2 = rot(k2, t[1])
        R3 = rot(k3, t[2])
        w = p2 + R3 @ p3
        f = p0 + R1 @ p1 - R2 @ w
        if np.linalg.norm(f) < 1e-12 * scale:
            break
        J = np.stack(
            [cross(k1, R1 @ p1), -cross(k2, R2 @ w), -R2 @ cross(k3, R3 @ p3)],
            axis=-1,
        )
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        t = t + step
    R1 = rot(k1, t[0])
    R2 = rot(k2, t[1])
    R3 = rot(k3, t[2])
    f = p0 + R1 @ p1 - R2 @ (p2 + R3 @ p3)
    if np.linalg.norm(f) > 1e-8 * scale:
        return None
    return tuple(wrap_angle(t))


def _dedup_tuples(tuples, tol=1e-6):
    out = []
    for t in tuples:
        dup = False
        for s in out:
            if all(abs(wrap_angle(a - b)) < tol for a, b in zip(t, s)):
                dup = True
                break
        if not dup:
            out.append(t)
    return out


def _sp5_degenerate(p0, p1, p2, p3, k1, k2, k3):
    """Fallback for subproblem 5 when one circle collapses to a point."""
    sols = []
    r1_fixed = _is_collinear(p1, k1) or np.linalg.norm(p1) == 0.0
    r3_fixed = _is_collinear(p3, k3) or np.linalg.norm(p3) == 0.0
    if r1_fixed and r3_fixed:
        # p0 + p1_ax = rot(k2, t2)(p2 + p3_ax): subproblem 1 in theta2.
        u = p0 + np.dot(k1, p1) * k1 if np.linalg.norm(p1) else p0
        w = p2 + np.dot(k3, p3) * k3 if np.linalg.norm(p3) else p2
        t2, is_ls = _sp1(w, u, k2)
        if not is_ls:
            sols.append((0.0, t2, 0.0))
        return sols
    # Mixed degeneracies: scan the surviving circle and solve subproblem 1.
    ts = np.linspace(-np.pi, np.pi, 721)
    scale = max(np.linalg.norm(p0) + np.linalg.norm(p1),
                np.linalg.norm(p2) + np.linalg.norm(p3), 1e-9)
    prev = None
    for t in ts:
        if r1_fixed:
            u = p0 + rot(k1, 0.0) @ p1
            w = p2 + rot(k3, t) @ p3
        else:
            u = p0 + rot(k1, t) @ p1
            w = p2 + rot(k3, 0.0) @ p3
        t2, _ = _sp1(w, u, k2)
        res = np.linalg.norm(u - rot(k2, t2) @ w)
        if res < 1e-7 * scale:
            cand = (0.0, t2, t) if r1_fixed else (t, t2, 0.0)
            if prev is None or abs(wrap_angle(t - prev)) > 1e-3:
                sols.append(cand)
                prev = t
    return _dedup_tuples(sols, tol=1e-3)


def _sp6(h, k, p, d):
    """All (theta1, theta2) solving subproblem 6.

    h is (4,3), p is (4,3), k is (2,3), d is (2,).  The two linear
    equations in (cos, sin) of both angles leave a 2-dof null space; the
    two unit-circle constraints intersect in up to four points.
    """
    h = np.asarray(h, float)
    k = np.asarray(k, float)
    p = np.asarray(p, float)
    d = np.asarray(d, float)

    def row(hv, kv, pv):
        axial = np.dot(kv, pv) * kv
        return (
            float(np.dot(hv, pv - axial)),
            float(np.dot(hv, cross(kv, pv))),
            float(np.dot(hv, axial)),
        )

    a1, b1, c1 = row(h[0], k[0], p[0])
    a2, b2, c2 = row(h[1], k[1], p[1])
    a3, b3, c3 = row(h[2], k[0], p[2])
    a4, b4, c4 = row(h[3], k[1], p[3])

    # M x = rhs with x = [cos t1, sin t1, cos t2, sin t2].
    M = np.array([[a1, b1, a2, b2], [a3, b3, a4, b4]])
    rhs = np.array([d[0] - c1 - c2, d[1] - c3 - c4])

    U, S, Vt = np.linalg.svd(M)
    if S[1] < 1e-12 * max(S[0], 1.0):
        return []  # rank-deficient: family of solutions, not supported
    x_p = Vt[:2].T @ ((U.T @ rhs) / S)
    n1 = Vt[2]
    n2 = Vt[3]

    # Unit-circle constraints become two conics in the null-space coords.
    def conic(idx):
        # ||x_p[idx] + l n1[idx] + m n2[idx]||^2 = 1 over the 2-slice idx.
        xp = x_p[idx]
        v1 = n1[idx]
        v2 = n2[idx]
        return np.array(
            [
                v1 @ v1,          # l^2
                2.0 * v1 @ v2,    # l m
                v2 @ v2,          # m^2
                2.0 * xp @ v1,    # l
                2.0 * xp @ v2,    # m
                xp @ xp - 1.0,    # 1
            ]
        )

    q1 = conic(slice(0, 2))
    q2 = conic(slice(2, 4))

    lam = _conic_intersection_lambda(q1, q2)
    sols = []
    for l in lam:
        # Solve each conic as a quadratic in m at this l and match roots.
        for m in _conic_m_roots(q1, l):
            if abs(_conic_eval(q2, l, m)) < 1e-6:
                x = x_p + l * n1 + m * n2
                t1 = np.arctan2(x[1], x[0])
                t2 = np.arctan2(x[3], x[2])
                cand = _polish_sp6((t1, t2), h, k, p, d)
                if cand is not None:
                    sols.append(cand)
    return _dedup_tuples(sols)


def _conic_eval(q, l, m):
    return (
        q[0] * l * l + q[1] * l * m + q[2] * m * m + q[3] * l + q[4] * m + q[5]
    )


def _conic_m_roots(q, l):
    a = q[2]
    b = q[1] * l + q[4]
    c = q[0] * l * l + q[3] * l + q[5]
    if abs(a) < 1e-14:
        if abs(b) < 1e-14:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc < -1e-9 * max(abs(b * b), 1.0):
            return []
        disc = 0.0
    r = np.sqrt(disc)
    return [(-b + r) / (2.0 * a), (-b - r) / (2.0 * a)]


def _conic_intersection_lambda(q1, q2):
    """lambda values at intersections of two conics (resultant in m)."""
    # Quadratics in m: A_i m^2 + B_i(l) m + C_i(l) with B, C polynomials in l.
    A1, A2 = q1[2], q2[2]
    B1 = np.array([q1[1], q1[4]])
    B2 = np.array([q2[1], q2[4]])
    C1 = np.array([q1[0], q1[3], q1[5]])
    C2 = np.array([q2[0], q2[3], q2[5]])
    # Res_m = (A1 C2 - A2 C1)^2 - (A1 B2 - A2 B1)(B1 C2 - B2 C1)
    t1 = np.polysub(A1 * C2, A2 * C1)
    t2 = np.polysub(A1 * B2, A2 * B1)
    t3 = np.polysub(np.polymul(B1, C2), np.polymul(B2, C1))
    res = np.polysub(np.polymul(t1, t1), np.polymul(t2, t3))
    return _quartic_roots(res)


def _polish_sp6(t, h, k, p, d, iters=10):
    t = np.array(t, float)
    scale = max(1.0, float(np.max(np.abs(d))))
    for _ in range(iters):
        R1 = rot(k[0], t[0])
        R2 = rot(k[1], t[1])
        f = np.array(
            [
                h[0] @ (R1 @ p[0]) + h[1] @ (R2 @ p[1]) - d[0],
                h[2] @ (R1 @ p[2]) + h[3] @ (R2 @ p[3]) - d[1],
            ]
        )
        if np.linalg.norm(f) < 1e-13 * scale:
            break
        J = np.array(
            [
                [h[0] @ cross(k[0], R1 @ p[0]), h[1] @ cross(k[1], R2 @ p[1])],
                [h[2] @ cross(k[0], R1 @ p[2]), h[3] @ cross(k[1], R2 @ p[3])],
            ]
        )
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        t = t + step
    R1 = rot(k[0], t[0])
    R2 = rot(k[1], t[1])
    f = np.array(
        [
            h[0] @ (R1 @ p[0]) + h[1] @ (R2 @ p[1]) - d[0],
            h[2] @ (R1 @ p[2]) + h[3] @ (R2 @ p[3]) - d[1],
        ]
    )
    if np.linalg.norm(f) > 1e-8 * scale:
        return None
    return tuple(wrap_angle(t))


# ---------------------------------------------------------------------------
# Public wrappers
# ---------------------------------------------------------------------------


def subproblem1(p1, p2, k):
    """Solve rot(k, theta) p1 = p2 for theta (least squares when needed)."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    k = np.asarray(k, float)
    if _is_collinear(p1, k):
        res = float(np.linalg.norm(p1 - p2))
        return _pack([(0.0,)], res > EXACT_TOL, degenerate=True, free=(0,))
    theta, is_ls = _sp1(p1, p2, k)
    return _pack([(theta,)], is_ls)


def subproblem2(p1, p2, k1, k2):
    """Solve rot(k1,t1) p1 = rot(k2,t2) p2 for all (t1, t2)."""
    k1 = np.asarray(k1, float)
    k2 = np.asarray(k2, float)
    if _is_collinear(k1, k2):
        t1, is_ls = _sp1(p1, p2, k1)
        return _pack([(t1, 0.0)], is_ls, degenerate=True, free=(1,))
    t1, t2, is_ls = _sp2(p1, p2, k1, k2)
    return _pack(list(zip(t1, t2)), is_ls)


def subproblem3(p1, p2, k, d):
    """Solve ||rot(k,theta) p1 - p2|| = d for all theta."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    k = np.asarray(k, float)
    if _is_collinear(p1, k):
        res = abs(float(np.linalg.norm(p1 - p2)) - d)
        return _pack([(0.0,)], res > EXACT_TOL, degenerate=True, free=(0,))
    thetas, is_ls = _sp3(p1, p2, k, d)
    return _pack([(t,) for t in thetas], is_ls)


def subproblem4(h, p, k, d):
    """Solve h . rot(k,theta) p = d for all theta."""
    h = np.asarray(h, float)
    p = np.asarray(p, float)
    k = np.asarray(k, float)
    if _is_collinear(p, k) or _is_collinear(h, k):
        res = abs(float(np.dot(h, p)) - d)
        return _pack([(0.0,)], res > EXACT_TOL, degenerate=True, free=(0,))
    thetas, is_ls = _sp4(h, p, k, d)
    return _pack([(t,) for t in thetas], is_ls)


def subproblem5(p0, p1, p2, p3, k1, k2, k3):
    """Solve p0 + rot(k1,t1)p1 = rot(k2,t2)(p2 + rot(k3,t3)p3)."""
    p1a = np.asarray(p1, float)
    p3a = np.asarray(p3, float)
    degen = (
        np.linalg.norm(p1a) == 0.0
        or np.linalg.norm(p3a) == 0.0
        or _is_collinear(p1a, np.asarray(k1, float))
        or _is_collinear(p3a, np.asarray(k3, float))
    )
    sols = _sp5(p0, p1, p2, p3, k1, k2, k3)
    free = ()
    if degen and sols:
        free = tuple(
            i
            for i, (v, kk) in enumerate([(p1a, k1), (None, None), (p3a, k3)])
            if v is not None and (np.linalg.norm(v) == 0.0 or _is_collinear(v, np.asarray(kk, float)))
        )
    return _pack(sols, False, degenerate=degen, free=free)


def subproblem6(h, k, p, d):
    """Solve the paired dot-product equations of subproblem 6.

    h: four unit vectors (4,3); k: two axes (2,3); p: four vectors (4,3);
    d: two scalars.  Equations:
        h[0].rot(k[0],t1)p[0] + h[1].rot(k[1],t2)p[1] = d[0]
        h[2].rot(k[0],t1)p[2] + h[3].rot(k[1],t2)p[3] = d[1]
    """
    sols = _sp6(h, k, p, d)
    return _pack(sols, False)
