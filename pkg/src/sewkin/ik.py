"""Inverse kinematics for the ten 7R families, parameterized by pose + SEW angle.

Each family solver decomposes the problem into geometric subproblems
following the chain's intersecting/parallel axis structure.  Closed-form
families branch over subproblem solution slots; the remaining families
run a 1D or 2D search over a compact set.  Every returned solution is
re-verified through forward kinematics and the SEW angle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _batch, robot, sew
from .geom import _sp1, _sp2, _sp3, _sp4, _sp5, _sp6, rot, wrap_angle

POSE_TOL = 1e-8
PSI_TOL = 1e-8
DEDUP_TOL = 1e-6
HALF_PLANE_TOL = 1e-9


class UnsupportedFamily(ValueError):
    """The chain's redundancy cannot be parameterized by a SEW angle."""


@dataclass(frozen=True)
class IKTask:
    """Target task-frame pose, SEW angle, and parameterization."""

    R_0T: np.ndarray
    p_0T: np.ndarray
    psi: float
    param: object

    def __post_init__(self):
        object.__setattr__(self, "R_0T", np.asarray(self.R_0T, float))
        object.__setattr__(self, "p_0T", np.asarray(self.p_0T, float))


@dataclass(frozen=True)
class IKSolution:
    q: np.ndarray
    is_least_squares: bool
    pose_residual: float
    psi_residual: float


@dataclass(frozen=True)
class IKSolutionSet:
    solutions: tuple

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def qs(self):
        return np.array([s.q for s in self.solutions]).reshape(-1, 7)

    def exact(self):
        return [s for s in self.solutions if not s.is_least_squares]

    def contains(self, q, tol=1e-8):
        q = np.asarray(q, float)
        for s in self.solutions:
            if np.max(np.abs(wrap_angle(s.q - q))) < tol:
                return True
        return False


@dataclass(frozen=True)
class NormalizedTask:
    """Task rewritten in the frame with the joint-1 origin at zero.

    p_07 and p_0S have the chain's p_01 removed, matching the convention
    the family decompositions are derived in; p_SW is offset-free.
    """

    R_07: np.ndarray
    p_07: np.ndarray
    p_0S: np.ndarray
    p_SW: np.ndarray
    e_SW: np.ndarray
    n_SEW: np.ndarray
    e_CE: np.ndarray
    frame: sew.SEWFrame
    psi: float


def normalize_task(chain: robot.KinematicChain, task: IKTask) -> NormalizedTask:
    R_07 = task.R_0T @ chain.R_7T.T
    p_07 = task.p_0T - R_07 @ chain.p_7T - chain.p_01
    p_0S = chain.p_0S - chain.p_01
    p_SW = p_07 + R_07 @ chain.p_7W - p_0S
    fr = sew.reference_frame(task.param, p_SW)
    n_SEW = rot(fr.e_SW, task.psi) @ fr.e_y
    e_CE = rot(fr.e_SW, task.psi) @ fr.e_x
    return NormalizedTask(R_07, p_07, p_0S, p_SW, fr.e_SW, n_SEW, e_CE, fr, task.psi)


def _residuals(chain, task, q):
    pose = robot.forward_kinematics(chain, q)
    pres = max(
        float(np.linalg.norm(pose.p - task.p_0T)),
        float(np.linalg.norm(pose.R - task.R_0T)),
    )
    try:
        psi_q, _, _, _ = sew.sew_state(task.param, chain, q)
        psi_res = float(wrap_angle(psi_q - task.psi))
    except sew.SEWError:
        psi_res = float("nan")  # collinear target: constraint dropped
    return pres, psi_res


def _task_error(chain, task, q):
    """Pose + SEW-angle error 7-vector, or None inside a SEW singularity."""
    pose = robot.forward_kinematics(chain, q)
    e_p = task.p_0T - pose.p
    Rerr = task.R_0T @ pose.R.T
    e_w = 0.5 * np.array(
        [Rerr[2, 1] - Rerr[1, 2], Rerr[0, 2] - Rerr[2, 0], Rerr[1, 0] - Rerr[0, 1]]
    )
    try:
        psi_q, _, _, _ = sew.sew_state(task.param, chain, q)
    except sew.SEWError:
        return None
    return np.concatenate([e_w, e_p, [wrap_angle(task.psi - psi_q)]])


def _polish_full(chain, task, q, iters=25):
    """Damped Newton with backtracking on the full pose + SEW system.

    Uses the augmented Jacobian; returns the converged q or None.  Also
    serves as the basin-hopper for candidates reconstructed on subproblem
    fold plateaus, so the line search matters.
    """
    q = np.asarray(q, float).copy()
    e = _task_error(chain, task, q)
    if e is None:
        return None
    err = np.linalg.norm(e)
    for _ in range(iters):
        if err < 1e-13:
            break
        try:
            bundle = sew.sew_jacobian(task.param, chain, q)
            step = np.linalg.solve(bundle.J_A, e)
        except (sew.SEWError, np.linalg.LinAlgError):
            return None
        if not np.all(np.isfinite(step)):
            return None
        n = np.linalg.norm(step)
        if n > 1.0:
            step *= 1.0 / n
        improved = False
        for _ in range(7):
            qt = q + step
            et = _task_error(chain, task, qt)
            if et is not None and np.linalg.norm(et) < err:
                q, e, err = qt, et, np.linalg.norm(et)
                improved = True
                break
            step *= 0.5
        if not improved:
            return None
    return q


def _batched_frames(chain, Q):
    N = len(Q)
    R = np.empty((N, 8, 3, 3))
    p = np.empty((N, 8, 3))
    R[:, 0] = np.eye(3)
    p[:, 0] = 0.0
    for i in range(7):
        p[:, i + 1] = p[:, i] + np.einsum("nij,j->ni", R[:, i], chain.offsets[i])
        R[:, i + 1] = R[:, i] @ _batch.rot_mat(chain.h[i], Q[:, i])
    return R, p


def _batched_sew_frame(param, p_SW):
    """Batched reference frame; rows with undefined frames become NaN."""
    n_sw = np.linalg.norm(p_SW, axis=-1, keepdims=True)
    e_SW = p_SW / np.maximum(n_sw, 1e-300)
    if param.kind == "conventional":
        k = _batch._cross(p_SW, param.e_r)
        nk = np.linalg.norm(k, axis=-1, keepdims=True)
        ok = nk[:, 0] > 1e-10 * n_sw[:, 0]
        e_y = k / np.maximum(nk, 1e-300)
        e_x = _batch._cross(e_y, e_SW)
    else:
        k_rt = _batch._cross(e_SW - param.e_t, param.e_r)
        k = _batch._cross(k_rt, p_SW)
        nk = np.linalg.norm(k, axis=-1, keepdims=True)
        ok = nk[:, 0] > 1e-10 * n_sw[:, 0]
        e_x = k / np.maximum(nk, 1e-300)
        e_y = _batch._cross(e_SW, e_x)
    return e_x, e_y, e_SW, k, nk[:, 0], ok


def _batch_newton(chain, task, Q, iters=25):
    """Batched damped Newton on the full pose + SEW system.

    Returns (Q_refined, converged mask).  Used to hop from subproblem
    fold plateaus onto the regular 7D roots.
    """
    Q = np.array(Q, float).reshape(-1, 7)
    N = len(Q)
    if N == 0:
        return Q, np.zeros(0, bool)
    param = task.param
    h = chain.h
    j_e = chain.elbow_frame

    def error_of(Qv):
        R, p = _batched_frames(chain, Qv)
        p_T = p[:, 7] + np.einsum("nij,j->ni", R[:, 7], chain.p_7T)
        R_T = R[:, 7] @ chain.R_7T
        p_SW = p[:, 7] + np.einsum("nij,j->ni", R[:, 7], chain.p_7W) - chain.p_0S
        if chain.unit_elbow:
            p_SE = np.einsum("nij,j->ni", R[:, j_e - 1], h[j_e - 1])
        else:
            p_SE = (
                p[:, j_e]
                + np.einsum("nij,j->ni", R[:, j_e], chain.p_jE)
                - chain.p_0S
            )
        e_x, e_y, e_SW, k, nk, ok = _batched_sew_frame(param, p_SW)
        p_CE = p_SE - e_SW * np.sum(e_SW * p_SE, axis=-1, keepdims=True)
        n_ce = np.linalg.norm(p_CE, axis=-1)
        ok = ok & (n_ce > 1e-10 * np.linalg.norm(p_SE, axis=-1))
        psi = np.arctan2(np.sum(e_y * p_SE, -1), np.sum(e_x * p_SE, -1))
        Rerr = np.einsum("ij,nkj->nik", task.R_0T, R_T)
        e = np.empty((len(Qv), 7))
        e[:, 0] = 0.5 * (Rerr[:, 2, 1] - Rerr[:, 1, 2])
        e[:, 1] = 0.5 * (Rerr[:, 0, 2] - Rerr[:, 2, 0])
        e[:, 2] = 0.5 * (Rerr[:, 1, 0] - Rerr[:, 0, 1])
        e[:, 3:6] = task.p_0T - p_T
        e[:, 6] = wrap_angle(task.psi - psi)
        e[~ok] = np.nan
        aux = (R, p, p_T, p_SW, p_SE, e_x, e_y, e_SW, k, nk, p_CE, n_ce)
        return e, aux

    def jacobian_of(aux):
        R, p, p_T, p_SW, p_SE, e_x, e_y, e_SW, k, nk, p_CE, n_ce = aux
        axes = np.einsum("nijk,ik->nij", R[:, :7], h)  # (N,7,3)
        origins = p[:, 1:8]
        J_A = np.empty((N, 7, 7))
        lever_T = p_T[:, None, :] - origins
        J_A[:, 0:3, :] = axes.transpose(0, 2, 1)
        J_A[:, 3:6, :] = _batch._cross(axes, lever_T).transpose(0, 2, 1)
        p_W = p[:, 7] + np.einsum("nij,j->ni", R[:, 7], chain.p_7W)
        J_W = _batch._cross(axes, p_W[:, None, :] - origins)  # (N,7,3)
        J_E = np.zeros((N, 7, 3))
        if chain.unit_elbow:
            J_E[:, : j_e - 1] = _batch._cross(
                axes[:, : j_e - 1], p_SE[:, None, :]
            )
        else:
            p_E = p_SE + chain.p_0S
            J_E[:, :j_e] = _batch._cross(
                axes[:, :j_e], p_E[:, None, :] - origins[:, :j_e]
            )
        e_CE = p_CE / np.maximum(n_ce, 1e-300)[:, None]
        sw_x_ce = _batch._cross(e_SW, e_CE)
        J_psi_E = sw_x_ce / np.maximum(n_ce, 1e-300)[:, None]
        n_sw = np.linalg.norm(p_SW, axis=-1)
        elbow_term = (
            np.sum(e_SW * p_SE, -1) / np.maximum(n_sw * n_ce, 1e-300)
        )[:, None] * sw_x_ce
        if param.kind == "conventional":
            J_psi_W = (
                (e_SW @ param.e_r / np.maximum(nk, 1e-300))[:, None] * e_y
                - elbow_term
            )
        else:
            te = np.cross(param.e_t, param.e_r)
            J_psi_W = (
                (e_SW @ param.e_r / np.maximum(nk, 1e-300))[:, None] * e_y
                + (e_SW @ te / np.maximum(nk, 1e-300))[:, None] * e_x
                - elbow_term
            )
        J_A[:, 6, :] = np.einsum("ni,nji->nj", J_psi_E, J_E) + np.einsum(
            "ni,nji->nj", J_psi_W, J_W
        )
        return J_A

    e, aux = error_of(Q)
    err = np.linalg.norm(e, axis=1)
    err = np.where(np.isfinite(err), err, np.inf)
    active = err > 1e-13
    for _ in range(iters):
        idx = np.flatnonzero(active & np.isfinite(err))
        if len(idx) == 0:
            break
        J_A = jacobian_of(aux)
        step = np.full((N, 7), np.nan)
        try:
            step[idx] = np.linalg.solve(J_A[idx], e[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            for i in idx:
                try:
                    step[i] = np.linalg.solve(J_A[i], e[i])
                except np.linalg.LinAlgError:
                    active[i] = False
        ns = np.linalg.norm(step, axis=1)
        big = active & (ns > 1.0)
        step[big] /= ns[big][:, None]
        improved = np.zeros(N, bool)
        scale = np.ones(N)
        for _ in range(7):
            trial = active & ~improved & np.all(np.isfinite(step), axis=1)
            if not trial.any():
                break
            ti = np.flatnonzero(trial)
            Qt = Q[ti] + scale[ti][:, None] * step[ti]
            et, auxt = error_of(Qt)
            errt = np.linalg.norm(et, axis=1)
            good = np.isfinite(errt) & (errt < err[ti])
            gi = ti[good]
            Q[gi] = Qt[good]
            err[gi] = errt[good]
            improved[gi] = True
            scale[ti[~good]] *= 0.5
        active &= improved & (err > 1e-13)
        if not active.any():
            break
        e, aux = error_of(Q)
    return Q, err <= 1e-10


def _finalize(chain, task, cands, polish=()) -> IKSolutionSet:
    """Verify, flag, dedup, and order candidate joint vectors.

    polish holds extra near-solution candidates (from branch tangencies)
    that are run through the full Newton polish and kept only when they
    verify as exact.
    """
    sols = []
    for q, ls in cands:
        q = np.array([wrap_angle(v) for v in np.asarray(q, float)])
        if not np.all(np.isfinite(q)):
            continue
        pres, psi_res = _residuals(chain, task, q)
        exact = (
            (not ls)
            and pres < POSE_TOL
            and (np.isnan(psi_res) or abs(psi_res) < PSI_TOL)
        )
        if not exact and not ls and pres < 5e-2:
            # constructed as exact but inaccurate: branch tangency
            qp = _polish_full(chain, task, q)
            if qp is not None:
                presp, psi_resp = _residuals(chain, task, qp)
                if presp < POSE_TOL and (
                    np.isnan(psi_resp) or abs(psi_resp) < PSI_TOL
                ):
                    q, pres, psi_res, exact = (
                        np.array([wrap_angle(v) for v in qp]),
                        presp,
                        psi_resp,
                        True,
                    )
        sols.append(IKSolution(q, not exact, pres, psi_res))

    for q, ls in polish:
        q = np.asarray(q, float)
        if not np.all(np.isfinite(q)):
            continue
        pres0, _ = _residuals(chain, task, q)
        if pres0 > 5e-2:
            continue
        qp = _polish_full(chain, task, q)
        if qp is None:
            continue
        pres, psi_res = _residuals(chain, task, qp)
        if pres < POSE_TOL and (np.isnan(psi_res) or abs(psi_res) < PSI_TOL):
            qp = np.array([wrap_angle(v) for v in qp])
            sols.append(IKSolution(qp, False, pres, psi_res))

    sols.sort(key=lambda s: (s.is_least_squares, s.pose_residual))
    kept = []
    for s in sols:
        near = [
            t for t in kept
            if np.max(np.abs(wrap_angle(s.q - t.q))) < DEDUP_TOL
        ]
        if near:
            continue
        # drop inexact shadows of an exact solution from the same tangency
        if s.is_least_squares and any(
            (not t.is_least_squares)
            and np.max(np.abs(wrap_angle(s.q - t.q))) < 5e-2
            and s.pose_residual > POSE_TOL
            and s.pose_residual < 5e-2
            for t in kept
        ):
            continue
        kept.append(s)
    kept.sort(key=lambda s: tuple(np.round(s.q, 9)))
    return IKSolutionSet(tuple(kept))


def _require(cond, family, what):
    if not cond:
        raise robot.ChainValidationError(f"{family}: {what}")


def _near_zero(v, tol=1e-10):
    return float(np.linalg.norm(v)) <= tol


def _solve_spherical(ha, hb, hc, D):
    """All (qa, qb, qc) with rot(ha,qa) rot(hb,qb) rot(hc,qc) = D."""
    t1, t2, ls2 = _sp2(D @ hc, hc, ha, hb)
    out = []
    p = hb if abs(np.dot(hb, hc)) < 0.9 else _any_perp(hc)
    for th1, qb in zip(t1, t2):
        qa = -th1
        Rab = rot(ha, qa) @ rot(hb, qb)
        qc, ls1 = _sp1(p, Rab.T @ (D @ p), hc)
        out.append(((qa, qb, qc), ls2 or ls1))
    return out


def _any_perp(v):
    seed = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(seed, v)) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    w = np.cross(v, seed)
    return w / np.linalg.norm(w)


def _theta_in(theta, lo, hi, tol=1e-9):
    t = wrap_angle(theta)
    return lo - tol <= t <= hi + tol


# ---------------------------------------------------------------------------
# Closed-form families
# ---------------------------------------------------------------------------


def ik_2r2r3r(chain, task):
    """2R-2R-3R: shoulder/elbow/wrist at the three axis intersections."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit at the 1-2 intersection and wrist at 5-7")
    h = chain.h
    p_23, p_45 = chain.offsets[2], chain.offsets[4]
    d_SE, d_EW = np.linalg.norm(p_23), np.linalg.norm(p_45)

    thetas, ls_s = _sp3(nt.e_SW * d_SE, nt.p_SW, nt.n_SEW, d_EW)
    cands = []
    for th in thetas:
        if not _theta_in(th, 0.0, np.pi):
            continue
        w = rot(nt.n_SEW, th) @ (nt.e_SW * d_SE)
        t1s, t2s, ls12 = _sp2(w, p_23, h[0], h[1])
        for th1, q2 in zip(t1s, t2s):
            q1 = -th1
            R_02 = rot(h[0], q1) @ rot(h[1], q2)
            u = R_02.T @ nt.p_SW - p_23
            t3s, t4s, ls34 = _sp2(u, p_45, h[2], h[3])
            for th3, q4 in zip(t3s, t4s):
                q3 = -th3
                R_04 = R_02 @ rot(h[2], q3) @ rot(h[3], q4)
                D = R_04.T @ nt.R_07
                for (q5, q6, q7), ls_w in _solve_spherical(h[4], h[5], h[6], D):
                    cands.append(
                        (
                            [q1, q2, q3, q4, q5, q6, q7],
                            ls_s or ls12 or ls34 or ls_w,
                        )
                    )
    return _finalize(chain, task, cands)


def ik_3r_r_3r(chain, task):
    """3R-R-3R: spherical shoulder and wrist, single-joint elbow."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit at the 1-3 intersection and wrist at 5-7")
    h = chain.h
    p_34, p_45 = chain.offsets[3], chain.offsets[4]
    p_3E = chain.p_jE

    q4s, ls4 = _sp3(p_45, -p_34, h[3], np.linalg.norm(nt.p_SW))
    cands = []
    for q4 in q4s:
        v = p_34 + rot(h[3], q4) @ p_45
        tb, tc, ls_bc = _sp2(nt.p_SW, v, nt.n_SEW, nt.e_SW)
        theta_b, theta_c = -tb[0], tc[0]  # both pairs give the same R_03
        m = rot(nt.n_SEW, theta_b) @ (rot(nt.e_SW, theta_c) @ p_3E)
        tas, ls_a = _sp4(nt.n_SEW, m, nt.e_SW, 0.0)
        for ta in tas:
            R_03 = rot(nt.e_SW, ta) @ rot(nt.n_SEW, theta_b) @ rot(nt.e_SW, theta_c)
            p_SE = R_03 @ p_3E
            if np.dot(nt.e_CE, p_SE) < -HALF_PLANE_TOL:
                continue
            for (q1, q2, q3), ls_sh in _solve_spherical(h[0], h[1], h[2], R_03):
                R_04 = R_03 @ rot(h[3], q4)
                D = R_04.T @ nt.R_07
                for (q5, q6, q7), ls_w in _solve_spherical(h[4], h[5], h[6], D):
                    cands.append(
                        (
                            [q1, q2, q3, q4, q5, q6, q7],
                            ls4 or ls_bc or ls_a or ls_sh or ls_w,
                        )
                    )
    return _finalize(chain, task, cands)


def ik_rr3rE2r(chain, task):
    """R-R-3RE-2R: spherical elbow; subproblem 5 couples (q1, q2, theta_W)."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit on joint 1 and wrist at the 6-7 intersection")
    h = chain.h
    p_12, p_23, p_56 = chain.offsets[1], chain.offsets[2], chain.offsets[5]
    d_EW = np.linalg.norm(p_56)

    triples = _sp5(nt.p_SW, -nt.e_SW * d_EW, p_12, p_23, nt.n_SEW, h[0], h[1])
    cands = []
    for th_w, q1, q2 in triples:
        if not _theta_in(th_w, -np.pi, 0.0):
            continue
        w = rot(nt.n_SEW, th_w) @ (nt.e_SW * d_EW)
        t7s, t6s, ls67 = _sp2(nt.R_07.T @ w, p_56, h[6], h[5])
        for q7, th6 in zip(t7s, t6s):
            q6 = -th6
            R_02 = rot(h[0], q1) @ rot(h[1], q2)
            R_56_67 = rot(h[5], q6) @ rot(h[6], q7)
            D = R_02.T @ nt.R_07 @ R_56_67.T
            for (q3, q4, q5), ls_e in _solve_spherical(h[2], h[3], h[4], D):
                cands.append(([q1, q2, q3, q4, q5, q6, q7], ls67 or ls_e))
    return _finalize(chain, task, cands)


def ik_2r3r2r(chain, task):
    """2R-3R-2R: spherical elbow between two 2R joints."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit at the 1-2 intersection and wrist at 6-7")
    h = chain.h
    p_23, p_56 = chain.offsets[2], chain.offsets[5]
    d_SE, d_EW = np.linalg.norm(p_23), np.linalg.norm(p_56)

    thetas, ls_s = _sp3(nt.e_SW * d_SE, nt.p_SW, nt.n_SEW, d_EW)
    cands = []
    for th in thetas:
        if not _theta_in(th, 0.0, np.pi):
            continue
        w = rot(nt.n_SEW, th) @ (nt.e_SW * d_SE)
        t1s, t2s, ls12 = _sp2(w, p_23, h[0], h[1])
        u = nt.R_07.T @ (nt.p_SW - w)
        t7s, t6s, ls67 = _sp2(u, p_56, h[6], h[5])
        for th1, q2 in zip(t1s, t2s):
            q1 = -th1
            R_02 = rot(h[0], q1) @ rot(h[1], q2)
            for q7, th6 in zip(t7s, t6s):
                q6 = -th6
                R_56_67 = rot(h[5], q6) @ rot(h[6], q7)
                D = R_02.T @ nt.R_07 @ R_56_67.T
                for (q3, q4, q5), ls_e in _solve_spherical(h[2], h[3], h[4], D):
                    cands.append(
                        ([q1, q2, q3, q4, q5, q6, q7], ls_s or ls12 or ls67 or ls_e)
                    )
    return _finalize(chain, task, cands)


def _parallel_elbow_tail(chain, nt, R_02, extra, theta_345, q6, q7, ls_head):
    """Shared q3/q4/q5 recovery for the 3R|| elbow families.

    extra is the frame-2 offset preceding p_23 (R_21 p_12 for the offset
    family, zero otherwise).
    """
    h = chain.h
    p_23, p_34, p_45, p_56 = (chain.offsets[i] for i in (2, 3, 4, 5))
    rhs = R_02.T @ nt.p_SW - extra - p_23 - rot(h[2], theta_345) @ p_56
    q4s, ls4 = _sp3(p_45, -p_34, h[3], np.linalg.norm(rhs))
    out = []
    for q4 in q4s:
        v = p_34 + rot(h[3], q4) @ p_45
        q3, ls3 = _sp1(v, rhs, h[2])
        q5 = wrap_angle(theta_345 - q3 - q4)
        out.append(((q3, q4, q5), ls_head or ls4 or ls3))
    return out


def ik_2r3rpar2r(chain, task):
    """2R-3R||-2R: three parallel elbow axes, unit elbow e_SE = R_02 h_3."""
    nt = normalize_task(chain, task)
    _require(chain.unit_elbow, chain.family, "requires a unit elbow")
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit at the 1-2 intersection and wrist at 6-7")
    h = chain.h
    d = float(h[2] @ (chain.offsets[2] + chain.offsets[3]
                      + chain.offsets[4] + chain.offsets[5]))

    phis, ls_s = _sp4(nt.e_SW, nt.p_SW, nt.n_SEW, d)
    cands = []
    for phi in phis:
        theta_s = -phi
        if not _theta_in(theta_s, 0.0, np.pi):
            continue
        w = rot(nt.n_SEW, theta_s) @ nt.e_SW
        t1s, t2s, ls12 = _sp2(w, h[2], h[0], h[1])
        for th1, q2 in zip(t1s, t2s):
            q1 = -th1
            R_02 = rot(h[0], q1) @ rot(h[1], q2)
            D = R_02.T @ nt.R_07
            for (t345, q6, q7), ls_j in _solve_spherical(h[2], h[5], h[6], D):
                for (q3, q4, q5), ls_t in _parallel_elbow_tail(
                    chain, nt, R_02, np.zeros(3), t345, q6, q7, ls_j
                ):
                    cands.append(
                        ([q1, q2, q3, q4, q5, q6, q7], ls_s or ls12 or ls_t)
                    )
    return _finalize(chain, task, cands)


def ik_rr3rparE2r(chain, task):
    """R-R-3R||E-2R: offset shoulder variant of the parallel-elbow family."""
    nt = normalize_task(chain, task)
    _require(chain.unit_elbow, chain.family, "requires a unit elbow")
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit on joint 1 and wrist at 6-7")
    h = chain.h
    p_12 = chain.offsets[1]
    d1 = float(h[2] @ (chain.offsets[2] + chain.offsets[3]
                       + chain.offsets[4] + chain.offsets[5]))

    pairs = _sp6(
        np.stack([nt.e_SW, h[2], nt.e_SW, h[2]]),
        np.stack([nt.n_SEW, h[1]]),
        np.stack([nt.p_SW, -p_12, h[0], -h[0]]),
        np.array([d1, 0.0]),
    )
    cands = []
    for phi, psi2 in pairs:
        theta_s, q2 = -phi, -psi2
        if not _theta_in(theta_s, 0.0, np.pi):
            continue
        w = rot(nt.n_SEW, theta_s) @ nt.e_SW
        q1, ls1 = _sp1(rot(h[1], q2) @ h[2], w, h[0])
        R_02 = rot(h[0], q1) @ rot(h[1], q2)
        D = R_02.T @ nt.R_07
        extra = rot(h[1], -q2) @ p_12
        for (t345, q6, q7), ls_j in _solve_spherical(h[2], h[5], h[6], D):
            for (q3, q4, q5), ls_t in _parallel_elbow_tail(
                chain, nt, R_02, extra, t345, q6, q7, ls_j
            ):
                cands.append(([q1, q2, q3, q4, q5, q6, q7], ls1 or ls_t))
    return _finalize(chain, task, cands)


# ---------------------------------------------------------------------------
# 1D searches
# ---------------------------------------------------------------------------

SEARCH_1D_N = 2000
LS_MIN_LEVEL = 1e-3


POLISH_LEVEL = 2e-2
POLISH_CAP = 10


def _search_1d(err_fn, lo, hi, n=SEARCH_1D_N, periodic=False, jump=np.inf):
    """Find per-branch zeros of err_fn: thetas (N,) -> errors (N, B).

    Sign changes are refined by bisection on the same branch column to
    |dtheta| < 1e-12.  Returns (roots, ls_roots, polish) where ls_roots
    are local minima of |e| below LS_MIN_LEVEL that never cross zero and
    polish are near-zero tangency candidates (shallow minima and branch
    discontinuities) to be Newton-polished downstream.
    """
    ts = np.linspace(lo, hi, n, endpoint=not periodic)
    E = err_fn(ts)
    if periodic:
        ts = np.append(ts, lo + 2.0 * np.pi)
        E = np.vstack([E, E[:1]])
    B = E.shape[1]
    spacing = ts[1] - ts[0]

    cross = []
    polish = []
    for b in range(B):
        col = E[:, b]
        f0, f1 = col[:-1], col[1:]
        both = np.isfinite(f0) & np.isfinite(f1)
        ok = both & (np.abs(f1 - f0) < jump)
        idx = np.flatnonzero(ok & (np.signbit(f0) != np.signbit(f1)))
        for i in idx:
            cross.append((ts[i], ts[i + 1], float(col[i]), b))
        # branch discontinuities passing close to zero: tangency suspects
        med = np.nanmedian(np.abs(np.diff(col))) if np.isfinite(col).any() else 0.0
        jmp = np.flatnonzero(
            both
            & (np.abs(f1 - f0) > max(20.0 * med, 1e-3))
            & (np.minimum(np.abs(f0), np.abs(f1)) < POLISH_LEVEL)
        )
        for i in jmp:
            polish.append((ts[i], b, min(abs(col[i]), abs(col[i + 1]))))

    roots = []
    if cross:
        lo_a = np.array([c[0] for c in cross])
        hi_a = np.array([c[1] for c in cross])
        flo = np.array([c[2] for c in cross])
        br = np.array([c[3] for c in cross])
        rows = np.arange(len(br))
        fhi = err_fn(hi_a)[rows, br]
        for _ in range(10):  # bisection warm-up
            mid = 0.5 * (lo_a + hi_a)
            fm = err_fn(mid)[rows, br]
            take_lo = np.signbit(fm) == np.signbit(flo)
            lo_a = np.where(take_lo, mid, lo_a)
            flo = np.where(take_lo, fm, flo)
            hi_a = np.where(take_lo, hi_a, mid)
            fhi = np.where(take_lo, fhi, fm)
        for _ in range(8):  # guarded secant to |dtheta| < 1e-12
            if np.all(hi_a - lo_a < 1e-13):
                break
            denom = fhi - flo
            t = np.where(
                np.abs(denom) > 1e-300,
                lo_a - flo * (hi_a - lo_a) / np.where(denom == 0, 1.0, denom),
                0.5 * (lo_a + hi_a),
            )
            inside = (t > lo_a) & (t < hi_a)
            t = np.where(inside, t, 0.5 * (lo_a + hi_a))
            ft = err_fn(t)[rows, br]
            take_lo = np.signbit(ft) == np.signbit(flo)
            lo_a = np.where(take_lo, t, lo_a)
            flo = np.where(take_lo, ft, flo)
            hi_a = np.where(take_lo, hi_a, t)
            fhi = np.where(take_lo, fhi, ft)
        roots = list(zip(np.where(np.abs(flo) < np.abs(fhi), lo_a, hi_a), br))

    ls_roots = []
    absE = np.abs(E)
    root_ts = {}
    for r, bb in roots:
        root_ts.setdefault(bb, []).append(r)
    for b in range(B):
        col = absE[:, b]
        mid = col[1:-1]
        fin = np.isfinite(col[:-2]) & np.isfinite(mid) & np.isfinite(col[2:])
        is_min = fin & (mid <= col[:-2]) & (mid <= col[2:]) & (mid < POLISH_LEVEL)
        for i in np.flatnonzero(is_min) + 1:
            if any(abs(r - ts[i]) < 2 * spacing for r in root_ts.get(b, ())):
                continue
            if col[i] < LS_MIN_LEVEL:
                ls_roots.append((ts[i], b))
            else:
                polish.append((ts[i], b, col[i]))

    polish.sort(key=lambda c: c[2])
    chosen = []
    for t, b, _ in polish:
        if any(abs(t - tc) < 4 * spacing and b == bc for tc, bc in chosen):
            continue
        chosen.append((t, b))
        if len(chosen) >= POLISH_CAP:
            break
    return roots, ls_roots, chosen


def _f7_context(chain, nt):
    h = chain.h
    return dict(
        h=h,
        p_12=chain.offsets[1],
        p_34=chain.offsets[3],
        p_56=chain.offsets[5],
        d34=np.linalg.norm(chain.offsets[3]),
        d56=np.linalg.norm(chain.offsets[5]),
        nt=nt,
    )


def _f7_branches(ctx, theta_w, full=False):
    """R-2R-2RE-2R orientation-closure error over 8 subproblem branches."""
    h = ctx["h"]
    nt = ctx["nt"]
    tw = np.atleast_1d(np.asarray(theta_w, float))
    N = len(tw)
    w = _batch.rot_apply(nt.n_SEW, tw, nt.e_SW * ctx["d56"])
    target = nt.p_SW - w  # toward the elbow from the shoulder

    q1s, _ = _batch.sp3_batch(ctx["p_12"], target, h[0], ctx["d34"])
    E = np.full((N, 8), np.nan)
    state = {}
    col = 0
    for a in range(2):
        q1 = q1s[:, a]
        R01 = _batch.rot_mat(h[0], q1)
        u = np.einsum("nij,nj->ni", R01.transpose(0, 2, 1), target) - ctx["p_12"]
        t2s, q3s, _ = _batch.sp2_batch(u, ctx["p_34"], h[1], h[2])
        for b in range(2):
            q2 = -t2s[:, b]
            q3 = q3s[:, b]
            R03 = R01 @ _batch.rot_mat(h[1], q2) @ _batch.rot_mat(h[2], q3)
            v = np.einsum(
                "nij,nj->ni",
                R03.transpose(0, 2, 1),
                nt.p_SW - np.einsum("nij,j->ni", R01, ctx["p_12"]),
            ) - ctx["p_34"]
            t4s, q5s, _ = _batch.sp2_batch(v, ctx["p_56"], h[3], h[4])
            for c in range(2):
                q4 = -t4s[:, c]
                q5 = q5s[:, c]
                R05 = R03 @ _batch.rot_mat(h[3], q4) @ _batch.rot_mat(h[4], q5)
                lhs = np.einsum(
                    "nij,ni->nj", R05, np.broadcast_to(nt.R_07 @ h[6], (N, 3))
                )
                E[:, col] = lhs @ h[5] - h[5] @ h[6]
                if full:
                    state[col] = np.stack([q1, q2, q3, q4, q5], axis=1)
                col += 1
    if full:
        return E, state
    return E


def _f7_reconstruct(chain, ctx, items):
    """Close (q6, q7) for a batch of (theta_W, branch, ls_flag) roots."""
    if not items:
        return []
    nt = ctx["nt"]
    h = ctx["h"]
    thetas = np.array([it[0] for it in items])
    E, state = _f7_branches(ctx, thetas, full=True)
    out = []
    for i, (th, branch, ls_flag) in enumerate(items):
        q1, q2, q3, q4, q5 = state[branch][i]
        R_05 = (
            rot(h[0], q1) @ rot(h[1], q2) @ rot(h[2], q3)
            @ rot(h[3], q4) @ rot(h[4], q5)
        )
        q6, ls6 = _sp1(h[6], R_05.T @ (nt.R_07 @ h[6]), h[5])
        t7, ls7 = _sp1(h[5], nt.R_07.T @ (R_05 @ h[5]), h[6])
        out.append(([q1, q2, q3, q4, q5, q6, -t7], ls_flag or ls6 or ls7))
    return out


def ik_search1d_r2r2rE2r(chain, task):
    """R-2R-2RE-2R (Sawyer class): 1D search over theta_W in [-pi, 0]."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit on joint 1 and wrist at the 6-7 intersection")
    ctx = _f7_context(chain, nt)
    roots, ls_roots, tang = _search_1d(lambda t: _f7_branches(ctx, t), -np.pi, 0.0)
    cands = _f7_reconstruct(
        chain, ctx,
        [(th, b, False) for th, b in roots] + [(th, b, True) for th, b in ls_roots],
    )
    pol = _f7_reconstruct(chain, ctx, [(th, b, False) for th, b in tang])
    return _finalize(chain, task, cands, polish=pol)


def _f8_context(chain, nt):
    return dict(
        h=chain.h,
        p_34=chain.offsets[3],
        p_45=chain.offsets[4],
        p_67=chain.offsets[6],
        d34=np.linalg.norm(chain.offsets[3]),
        d45=np.linalg.norm(chain.offsets[4]),
        nt=nt,
    )


def _f8_branches(ctx, theta_s, full=False):
    """3R-RE-2R-R elbow-axis alignment error over 4 branches."""
    h = ctx["h"]
    nt = ctx["nt"]
    ts = np.atleast_1d(np.asarray(theta_s, float))
    N = len(ts)
    w = _batch.rot_apply(nt.n_SEW, ts, nt.e_SW * ctx["d34"])  # = R_03 p_34
    rhs = np.einsum("ij,nj->ni", nt.R_07.T, nt.p_SW - w)

    phis, _ = _batch.sp3_batch(ctx["p_67"], rhs, h[6], ctx["d45"])
    E = np.full((N, 4), np.nan)
    state = {}
    col = 0
    for a in range(2):
        q7 = -phis[:, a]
        R67 = _batch.rot_mat(h[6], q7)
        v = np.einsum("nij,nj->ni", R67, rhs) - ctx["p_67"]
        t5s, q6s, _ = _batch.sp2_batch(ctx["p_45"], v, h[4], h[5])
        for b in range(2):
            q5 = -t5s[:, b]
            q6 = q6s[:, b]
            R47 = _batch.rot_mat(h[4], q5) @ _batch.rot_mat(h[5], q6) @ R67
            m = np.einsum("nij,nj->ni", R47, np.einsum("ij,nj->ni", nt.R_07.T, w))
            E[:, col] = (ctx["p_34"] - m) @ h[3]
            if full:
                state[col] = np.stack([q5, q6, q7], axis=1)
            col += 1
    if full:
        return E, state
    return E


def _f8_reconstruct(chain, ctx, items):
    """Close q4 and the spherical shoulder for (theta_S, branch, ls) roots."""
    if not items:
        return []
    nt = ctx["nt"]
    h = ctx["h"]
    thetas = np.array([it[0] for it in items])
    E, state = _f8_branches(ctx, thetas, full=True)
    out = []
    for i, (th, branch, ls_flag) in enumerate(items):
        q5, q6, q7 = state[branch][i]
        w = rot(nt.n_SEW, th) @ (nt.e_SW * ctx["d34"])
        R_47 = rot(h[4], q5) @ rot(h[5], q6) @ rot(h[6], q7)
        t4, ls4 = _sp1(ctx["p_34"], R_47 @ (nt.R_07.T @ w), h[3])
        q4 = -t4
        D = nt.R_07 @ (rot(h[3], q4) @ R_47).T
        for (q1, q2, q3), ls_sh in _solve_spherical(h[0], h[1], h[2], D):
            out.append(([q1, q2, q3, q4, q5, q6, q7], ls_flag or ls4 or ls_sh))
    return out


def ik_search1d_3rRE2rR(chain, task):
    """3R-RE-2R-R (Franka class): 1D search over theta_S in [0, pi]."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "shoulder must sit at the 1-3 intersection and wrist on joint 7")
    ctx = _f8_context(chain, nt)
    roots, ls_roots, tang = _search_1d(lambda t: _f8_branches(ctx, t), 0.0, np.pi)
    cands = _f8_reconstruct(
        chain, ctx,
        [(th, b, False) for th, b in roots] + [(th, b, True) for th, b in ls_roots],
    )
    pol = _f8_reconstruct(chain, ctx, [(th, b, False) for th, b in tang])
    return _finalize(chain, task, cands, polish=pol)


def _f9_context(chain, nt):
    return dict(
        h=chain.h,
        p_12=chain.offsets[1],
        p_34=chain.offsets[3],
        p_45=chain.offsets[4],
        p_3E=chain.p_jE,
        nt=nt,
    )


def _f9_branches(ctx, q1v, full=False):
    """R-2RS-R-3R SEW-angle error over 4 branches (search over q1)."""
    h = ctx["h"]
    nt = ctx["nt"]
    q1v = np.atleast_1d(np.asarray(q1v, float))
    N = len(q1v)
    R01 = _batch.rot_mat(h[0], q1v)
    u = np.einsum("nij,j->ni", R01.transpose(0, 2, 1), nt.p_07) - ctx["p_12"]

    q4s, _ = _batch.sp3_batch(ctx["p_45"], -ctx["p_34"], h[3],
                              np.linalg.norm(u, axis=-1))
    E = np.full((N, 4), np.nan)
    state = {}
    col = 0
    for a in range(2):
        q4 = q4s[:, a]
        v = ctx["p_34"] + _batch.rot_apply(h[3], q4, ctx["p_45"])
        t2s, q3s, _ = _batch.sp2_batch(u, v, h[1], h[2])
        for b in range(2):
            q2 = -t2s[:, b]
            q3 = q3s[:, b]
            R03 = R01 @ _batch.rot_mat(h[1], q2) @ _batch.rot_mat(h[2], q3)
            p_SE = np.einsum("nij,j->ni", R03, ctx["p_3E"])
            psi = np.arctan2(p_SE @ nt.frame.e_y, p_SE @ nt.frame.e_x)
            E[:, col] = wrap_angle(psi - nt.psi)
            if full:
                state[col] = np.stack([q2, q3, q4], axis=1)
            col += 1
    if full:
        return E, state
    return E


def _f9_reconstruct(chain, ctx, items):
    """Close the spherical wrist for a batch of (q1, branch, ls) roots."""
    if not items:
        return []
    nt = ctx["nt"]
    h = ctx["h"]
    q1s = np.array([it[0] for it in items])
    E, state = _f9_branches(ctx, q1s, full=True)
    out = []
    for i, (q1, branch, ls_flag) in enumerate(items):
        q2, q3, q4 = state[branch][i]
        R_04 = rot(h[0], q1) @ rot(h[1], q2) @ rot(h[2], q3) @ rot(h[3], q4)
        D = R_04.T @ nt.R_07
        for (q5, q6, q7), ls_w in _solve_spherical(h[4], h[5], h[6], D):
            out.append(([q1, q2, q3, q4, q5, q6, q7], ls_flag or ls_w))
    return out


def ik_search1d_r2rSr3r(chain, task):
    """R-2RS-R-3R: 1D search over q1 with the SEW angle as the error."""
    nt = normalize_task(chain, task)
    _require(
        np.allclose(nt.p_0S, chain.offsets[1], atol=1e-12)
        and _near_zero(chain.p_7W),
        chain.family,
        "shoulder must sit at the 2-3 intersection (p_0S = p_12)",
    )
    ctx = _f9_context(chain, nt)
    roots, ls_roots, tang = _search_1d(
        lambda t: _f9_branches(ctx, t), -np.pi, np.pi, periodic=True, jump=np.pi
    )
    cands = _f9_reconstruct(
        chain, ctx,
        [(th, b, False) for th, b in roots] + [(th, b, True) for th, b in ls_roots],
    )
    pol = _f9_reconstruct(chain, ctx, [(th, b, False) for th, b in tang])
    return _finalize(chain, task, cands, polish=pol)


# ---------------------------------------------------------------------------
# 2D search (general 7R)
# ---------------------------------------------------------------------------

SEARCH_2D_N = 120
SEARCH_2D_COARSE_LEVEL = 0.5
SEARCH_2D_MAX_SEEDS = 120


def _f10_context(chain, nt):
    point_elbow_at_o3 = (not chain.unit_elbow) and _near_zero(chain.p_jE)
    if point_elbow_at_o3 and not _near_zero(chain.offsets[3]):
        raise robot.ChainValidationError(
            "general solver requires the elbow at frame 4 or at the 3-4 intersection"
        )
    return dict(
        h=chain.h,
        p=chain.offsets,
        p_3E=chain.p_jE,
        at_o3=point_elbow_at_o3,
        len_scale=max(sum(np.linalg.norm(chain.offsets[i]) for i in (4, 5, 6)), 1e-6),
        nt=nt,
    )


def _f10_eval(ctx, q1v, q2v, full=False):
    """General-7R orientation error over branch columns at (q1, q2) pairs.

    Returns (E, V, state) when full, else E.  V holds the per-branch
    residual vectors used by Gauss-Newton refinement.
    """
    h = ctx["h"]
    p = ctx["p"]
    nt = ctx["nt"]
    q1v = np.atleast_1d(np.asarray(q1v, float))
    q2v = np.atleast_1d(np.asarray(q2v, float))
    N = len(q1v)

    R01 = _batch.rot_mat(h[0], q1v)
    R02 = R01 @ _batch.rot_mat(h[1], q2v)
    base = np.einsum("nij,j->ni", R01, p[1]) + np.einsum("nij,j->ni", R02, p[2])

    h4 = h[3]
    n_cols = 4 if ctx["at_o3"] else 8
    m = 7  # [plane violation, position-closure residual (3), h4 misalignment (3)]
    E = np.full((N, n_cols), np.nan)
    V = np.full((N, n_cols, m), np.nan) if full else None
    state = {} if full else None
    lscale = ctx["len_scale"]

    def sp5_block(p14):
        u = np.einsum("ij,nj->ni", nt.R_07.T, nt.p_SW - p14)
        return _batch.sp5_batch(-p[6], u, p[5], p[4], h[6], h[5], h[4])

    def fill(col, q3, R03, e_plane, half_ok, T, res, s):
        q7 = T[:, s, 0]
        q6 = -T[:, s, 1]
        q5 = -T[:, s, 2]
        R47 = (
            _batch.rot_mat(h[4], q5)
            @ _batch.rot_mat(h[5], q6)
            @ _batch.rot_mat(h[6], q7)
        )
        c = np.einsum(
            "nij,nj->ni",
            R03.transpose(0, 2, 1),
            np.einsum("ij,njk,k->ni", nt.R_07, R47.transpose(0, 2, 1), h4),
        )
        vfull = np.concatenate(
            [e_plane[:, None], res[:, s, :] / lscale, c - h4], axis=1
        )
        err = np.linalg.norm(vfull, axis=-1)
        E[:, col] = np.where(half_ok, err, np.nan)
        if full:
            V[:, col, :] = np.where(half_ok[:, None], vfull, np.nan)
            state[col] = np.stack([q3, q5, q6, q7], axis=1)

    if ctx["at_o3"]:
        p_SE = base
        e_plane = (p_SE @ nt.n_SEW) / np.maximum(
            np.linalg.norm(p_SE, axis=-1), 1e-12
        )
        half_ok = (p_SE @ nt.e_CE) > 0.0
        T, ok, res = sp5_block(base)
        for s in range(4):
            q7 = T[:, s, 0]
            q6 = -T[:, s, 1]
            q5 = -T[:, s, 2]
            R47 = (
                _batch.rot_mat(h[4], q5)
                @ _batch.rot_mat(h[5], q6)
                @ _batch.rot_mat(h[6], q7)
            )
            c = np.einsum(
                "nij,nj->ni",
                R02.transpose(0, 2, 1),
                np.einsum("ij,njk,k->ni", nt.R_07, R47.transpose(0, 2, 1), h4),
            )
            q3, _ = _batch.sp1_batch(h4, c, h[2])
            vres = _batch.rot_apply(h[2], q3, np.broadcast_to(h4, (N, 3))) - c
            vfull = np.concatenate(
                [e_plane[:, None], res[:, s, :] / lscale, vres], axis=1
            )
            err = np.linalg.norm(vfull, axis=-1)
            E[:, s] = np.where(half_ok, err, np.nan)
            if full:
                V[:, s, :] = np.where(half_ok[:, None], vfull, np.nan)
                state[s] = np.stack([q3, q5, q6, q7], axis=1)
        if full:
            return E, V, state
        return E

    hn = np.einsum("nij,j->ni", R02.transpose(0, 2, 1), nt.n_SEW)
    d = -(base @ nt.n_SEW)
    q3s, _ = _batch.sp4_batch(hn, ctx["p_3E"], h[2], d)
    col = 0
    for a in range(2):
        q3 = q3s[:, a]
        R03 = R02 @ _batch.rot_mat(h[2], q3)
        p_SE = base + np.einsum("nij,j->ni", R03, ctx["p_3E"])
        # signed plane violation keeps the error surface defined where the
        # elbow-plane equation only has a least-squares q3
        e_plane = (p_SE @ nt.n_SEW) / np.maximum(
            np.linalg.norm(p_SE, axis=-1), 1e-12
        )
        half_ok = (p_SE @ nt.e_CE) > 0.0
        p14 = base + np.einsum("nij,j->ni", R03, p[3])
        T, ok, res = sp5_block(p14)
        for s in range(4):
            fill(col, q3, R03, e_plane, half_ok, T, res, s)
            col += 1
    if full:
        return E, V, state
    return E


def _f10_close_q4(ctx, q1, q2, st):
    nt = ctx["nt"]
    h = ctx["h"]
    q3, q5, q6, q7 = st
    R_03 = rot(h[0], q1) @ rot(h[1], q2) @ rot(h[2], q3)
    R_47 = rot(h[4], q5) @ rot(h[5], q6) @ rot(h[6], q7)
    D = R_03.T @ nt.R_07 @ R_47.T
    pvec = _any_perp(h[3])
    q4, ls4 = _sp1(pvec, D @ pvec, h[3])
    return [q1, q2, q3, q4, q5, q6, q7], ls4


def _f10_reconstruct(chain, ctx, q1, q2, branch):
    E, V, state = _f10_eval(ctx, np.array([q1]), np.array([q2]), full=True)
    q, ls4 = _f10_close_q4(ctx, q1, q2, state[branch][0])
    return [(q, ls4)]


def _f10_refine_batch(ctx, x0, iters=50, tol=1e-11, fixed_branch=None):
    """Batched Levenberg-Marquardt over (q1, q2) candidates.

    By default the residual branch is re-selected at every accepted
    iterate (the per-slot surfaces swap identity across subproblem
    discriminants; the branch-minimum surface is the continuous object).
    fixed_branch pins each candidate to one slot, used to pick up twin
    solutions sharing a basin.  Returns converged (q1, q2, branch).
    """
    C = len(x0)
    if C == 0:
        return []
    x = np.array(x0, float)
    lam = np.full(C, 1e-6)
    active = np.ones(C, bool)
    best_v = np.full(C, np.inf)
    delta = 1e-7
    reselect = fixed_branch is None

    def eval_at(pts):
        E, V, _ = _f10_eval(ctx, pts[:, 0], pts[:, 1], full=True)
        return E, V

    E, V = eval_at(x)
    if reselect:
        br = np.nanargmin(np.where(np.isfinite(E), E, np.inf), axis=1)
    else:
        br = np.asarray(fixed_branch, int)
    best_v = E[np.arange(C), br].copy()
    best_v = np.where(np.isfinite(best_v), best_v, np.inf)

    for _ in range(iters):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        pts = np.concatenate(
            [x[idx], x[idx] + [delta, 0.0], x[idx] + [0.0, delta]], axis=0
        )
        E3, V3 = eval_at(pts)
        n = len(idx)
        b = br[idx]
        v0 = V3[np.arange(n), b]
        v1 = V3[n + np.arange(n), b]
        v2 = V3[2 * n + np.arange(n), b]
        J1 = (v1 - v0) / delta
        J2 = (v2 - v0) / delta
        a11 = np.sum(J1 * J1, axis=1) + lam[idx]
        a12 = np.sum(J1 * J2, axis=1)
        a22 = np.sum(J2 * J2, axis=1) + lam[idx]
        g1 = np.sum(J1 * v0, axis=1)
        g2 = np.sum(J2 * v0, axis=1)
        det = a11 * a22 - a12 * a12
        det = np.where(np.abs(det) < 1e-300, 1e-300, det)
        s1 = (-g1 * a22 + g2 * a12) / det
        s2 = (-g2 * a11 + g1 * a12) / det
        step = np.stack([s1, s2], axis=1)
        nstep = np.linalg.norm(step, axis=1)
        clip = nstep > 0.3
        step[clip] *= (0.3 / nstep[clip])[:, None]
        xt = x[idx] + step
        Et, Vt = eval_at(xt)
        if reselect:
            brt = np.nanargmin(np.where(np.isfinite(Et), Et, np.inf), axis=1)
        else:
            brt = b
        vt = Et[np.arange(n), brt]
        improved = np.isfinite(vt) & (vt < best_v[idx])
        gi = idx[improved]
        x[gi] = xt[improved]
        br[gi] = brt[improved]
        best_v[gi] = vt[improved]
        lam[gi] = np.maximum(lam[gi] * 0.3, 1e-12)
        bad = idx[~improved]
        lam[bad] = lam[bad] * 8.0
        active[idx] = (best_v[idx] > tol) & (lam[idx] < 1e6)

    out = []
    for i in range(C):
        if best_v[i] <= 1e-10:
            out.append((x[i, 0], x[i, 1], int(br[i])))
    return out


def ik_search2d_general(chain, task, n_grid=SEARCH_2D_N):
    """General 7R: 2D search over (q1, q2) with subproblem closure."""
    nt = normalize_task(chain, task)
    _require(_near_zero(nt.p_0S) and _near_zero(chain.p_7W), chain.family,
             "general solver requires O_S = O_1 and O_W = O_7")
    ctx = _f10_context(chain, nt)

    g = np.linspace(-np.pi, np.pi, n_grid, endpoint=False)
    Q1, Q2 = np.meshgrid(g, g, indexing="ij")
    E = _f10_eval(ctx, Q1.ravel(), Q2.ravel()).reshape(n_grid, n_grid, -1)

    # Seed the refinement from low cells of the branch-minimum surface,
    # spatially thinned so deep regions do not starve other basins.
    M = np.where(np.isfinite(E), E, np.inf).min(axis=2)
    ii, jj = np.nonzero(M < SEARCH_2D_COARSE_LEVEL)
    order = np.argsort(M[ii, jj])
    ii, jj = ii[order], jj[order]
    taken = np.zeros((n_grid, n_grid), bool)
    seeds = []
    for i, j in zip(ii, jj):
        if taken[i, j]:
            continue
        seeds.append((g[i], g[j]))
        for di in (-2, -1, 0, 1, 2):
            for dj in (-2, -1, 0, 1, 2):
                taken[(i + di) % n_grid, (j + dj) % n_grid] = True
        if len(seeds) >= SEARCH_2D_MAX_SEEDS:
            break
    x0 = np.array(seeds).reshape(-1, 2)

    primary = _f10_refine_batch(ctx, x0)

    # Twin solutions often share a basin on a neighboring branch slot:
    # sweep the other low-error slots at each converged point.
    twin_x = []
    twin_b = []
    if primary:
        px = np.array([[a, b] for a, b, _ in primary])
        Ec = _f10_eval(ctx, px[:, 0], px[:, 1])
        for i, (q1r, q2r, b) in enumerate(primary):
            for b2 in range(Ec.shape[1]):
                if b2 != b and np.isfinite(Ec[i, b2]) and Ec[i, b2] < 0.3:
                    twin_x.append((q1r, q2r))
                    twin_b.append(b2)
    secondary = _f10_refine_batch(ctx, np.array(twin_x).reshape(-1, 2),
                                  fixed_branch=twin_b) if twin_x else []

    cands = []
    seen = []
    for q1r, q2r, b in primary + list(secondary):
        if any(
            abs(wrap_angle(q1r - s[0])) < 1e-6
            and abs(wrap_angle(q2r - s[1])) < 1e-6
            and b == s[2]
            for s in seen
        ):
            continue
        seen.append((q1r, q2r, b))
        cands.extend(_f10_reconstruct(chain, ctx, q1r, q2r, b))

    # Roots sitting on subproblem folds hide in needle-thin basins of the
    # reduced surface; hop onto them with full-space Newton from plateau
    # reconstructions.  Candidates: the thinned seeds (top two slots) plus
    # every unthinned strict local minimum of the branch-minimum surface.
    neigh = np.full_like(M, np.inf)
    Minf = np.where(np.isfinite(M), M, np.inf)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            neigh = np.minimum(neigh, np.roll(Minf, (di, dj), axis=(0, 1)))
    mi, mj = np.nonzero((Minf < 1.0) & (Minf <= neigh))
    morder = np.argsort(Minf[mi, mj])[:SEARCH_2D_MAX_SEEDS * 2]
    newton_pts = [(g[a], g[b], 1) for a, b in zip(mi[morder], mj[morder])]
    newton_pts.extend((a, b, 2) for a, b in x0)

    plateau = []
    if newton_pts:
        pts = np.array([(a, b) for a, b, _ in newton_pts])
        Es, Vs, states = _f10_eval(ctx, pts[:, 0], pts[:, 1], full=True)
        rows = np.where(np.isfinite(Es), Es, np.inf)
        for i, (a, b, nslots) in enumerate(newton_pts):
            for bb in np.argsort(rows[i])[:nslots]:
                if not np.isfinite(Es[i, bb]):
                    continue
                qq, _ = _f10_close_q4(ctx, a, b, states[bb][i])
                if np.all(np.isfinite(qq)):
                    plateau.append(qq)
    if plateau:
        Qp, okp = _batch_newton(chain, task, np.array(plateau))
        for qv, ok in zip(Qp, okp):
            if ok:
                cands.append((qv, False))
    return _finalize(chain, task, cands)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

FAMILY_SOLVERS = {
    "2R-2R-3R": ik_2r2r3r,
    "3R-R-3R": ik_3r_r_3r,
    "R-R-3RE-2R": ik_rr3rE2r,
    "2R-3R-2R": ik_2r3r2r,
    "2R-3Rp-2R": ik_2r3rpar2r,
    "R-R-3RpE-2R": ik_rr3rparE2r,
    "R-2R-2RE-2R": ik_search1d_r2r2rE2r,
    "3R-RE-2R-R": ik_search1d_3rRE2rR,
    "R-2RS-R-3R": ik_search1d_r2rSr3r,
    "general": ik_search2d_general,
}


def solve_ik(chain, task, method="auto"):
    """Dispatch to the family solver (auto), the 2D search, or the
    polynomial solver."""
    if chain.family == "R-3Rp-3R":
        raise UnsupportedFamily(
            "R-3R||-3R self-motion keeps the elbow in the SEW half plane; "
            "parameterize a joint angle instead"
        )
    if method == "poly":
        from .poly import ik_polynomial_sawyer

        return ik_polynomial_sawyer(chain, task)
    if method == "search2d":
        return ik_search2d_general(chain, task)
    if method in ("auto", "family"):
        return FAMILY_SOLVERS[chain.family](chain, task)
    raise ValueError(f"unknown method {method!r}")
