"""Compiled inner solvers for the local problems.

Every routine works on a canonical sector: ball sectors are reflected onto the
nonnegative orthant and scaled to the unit ball; box sectors keep their bounds.
Objective coefficients are normalised to unit scale before iterating, so
tolerances and step sizes do not depend on ``h``.

Objective: sum_j q_j/2 u_j^2 + b u_0 u_1 + sum_j a_j |u_j| + c . u  (+ r).
"""

import numpy as np
from numba import njit

COMPARISON = 0
CHAMBOLLE_POCK = 1
SSN_SMOOTH = 2
SSN_L1_BALL = 3
SSN_L1_BOX = 4
SPHERE_NEWTON = 5
SPLITTING = 6

CONVERGED = 0
MAX_ITERS = 1
FALLBACK = 2
NO_POINTS = 3

# params layout
P_TAU, P_SIGMA, P_THETA, P_ETA, P_EPS, P_MAXIT, P_THETA_SCALE = range(7)
N_PARAMS = 7


@njit(cache=True)
def objective(q, b, a, c, u):
    m = q.shape[0]
    v = 0.0
    for j in range(m):
        v += 0.5 * q[j] * u[j] * u[j] + a[j] * abs(u[j]) + c[j] * u[j]
    if m == 2:
        v += b * u[0] * u[1]
    return v


@njit(cache=True)
def _dense_solve(A, rhs):
    """Gaussian elimination with partial pivoting in place; False if singular."""
    n = rhs.shape[0]
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale = max(scale, abs(A[i, j]))
    if scale == 0.0:
        return False
    for col in range(n):
        piv = col
        best = abs(A[col, col])
        for i in range(col + 1, n):
            if abs(A[i, col]) > best:
                best = abs(A[i, col])
                piv = i
        if best <= 1e-13 * scale:
            return False
        if piv != col:
            for j in range(n):
                tmp = A[col, j]
                A[col, j] = A[piv, j]
                A[piv, j] = tmp
            tmp = rhs[col]
            rhs[col] = rhs[piv]
            rhs[piv] = tmp
        for i in range(col + 1, n):
            f = A[i, col] / A[col, col]
            if f != 0.0:
                for j in range(col, n):
                    A[i, j] -= f * A[col, j]
                rhs[i] -= f * rhs[col]
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for j in range(i + 1, n):
            s -= A[i, j] * rhs[j]
        rhs[i] = s / A[i, i]
    return True


@njit(cache=True)
def project(u, ball, lo, hi, out):
    """Projection onto the canonical sector (unit ball orthant or box)."""
    m = u.shape[0]
    if ball:
        nrm = 0.0
        for j in range(m):
            out[j] = max(0.0, u[j])
            nrm += out[j] * out[j]
        nrm = np.sqrt(nrm)
        if nrm > 1.0:
            for j in range(m):
                out[j] /= nrm
    else:
        for j in range(m):
            out[j] = min(max(u[j], lo[j]), hi[j])


@njit(cache=True)
def _grad(q, b, c, u, out):
    m = q.shape[0]
    for j in range(m):
        out[j] = q[j] * u[j] + c[j]
    if m == 2:
        out[0] += b * u[1]
        out[1] += b * u[0]


# ---------------------------------------------------------------- comparison


@njit(cache=True)
def comparison(q, b, a, c, points, lo, hi, out):
    """Best of the points lying in ``[lo, hi]`` (original coordinates)."""
    m = q.shape[0]
    best = np.inf
    found = False
    for i in range(points.shape[0]):
        inside = True
        for j in range(m):
            if points[i, j] < lo[j] - 1e-12 or points[i, j] > hi[j] + 1e-12:
                inside = False
                break
        if not inside:
            continue
        v = objective(q, b, a, c, points[i])
        if v < best:
            best = v
            found = True
            for j in range(m):
                out[j] = points[i, j]
    return best, found


# ------------------------------------------------------------ Chambolle-Pock


@njit(cache=True)
def _resolvent(q, b, c, sigma, z, out):
    """(I + grad F / sigma)^{-1}(z): solve (sigma I + Q) w = sigma z - c."""
    m = q.shape[0]
    if m == 2 and b != 0.0:
        a11 = sigma + q[0]
        a22 = sigma + q[1]
        r0 = sigma * z[0] - c[0]
        r1 = sigma * z[1] - c[1]
        det = a11 * a22 - b * b
        out[0] = (a22 * r0 - b * r1) / det
        out[1] = (a11 * r1 - b * r0) / det
    else:
        for j in range(m):
            out[j] = (sigma * z[j] - c[j]) / (sigma + q[j])


@njit(cache=True)
def chambolle_pock(q, b, c, ball, lo, hi, u0, params, out):
    tau = params[P_TAU]
    sigma = params[P_SIGMA]
    theta = params[P_THETA]
    eta = params[P_ETA]
    maxit = int(params[P_MAXIT])
    m = q.shape[0]
    u = np.empty(m)
    project(u0, ball, lo, hi, u)
    y = np.empty(m)
    _grad(q, b, c, u, y)
    ubar = u.copy()
    z = np.empty(m)
    w = np.empty(m)
    y_new = np.empty(m)
    u_new = np.empty(m)
    it = 0
    status = MAX_ITERS
    while it < maxit:
        it += 1
        for j in range(m):
            z[j] = y[j] / sigma + ubar[j]
        _resolvent(q, b, c, sigma, z, w)
        for j in range(m):
            y_new[j] = y[j] + sigma * ubar[j] - sigma * w[j]
            z[j] = u[j] - tau * y_new[j]
        project(z, ball, lo, hi, u_new)
        step = 0.0
        for j in range(m):
            ub = u_new[j] + theta * (u_new[j] - u[j])
            step += (y_new[j] - y[j]) ** 2 + (u_new[j] - u[j]) ** 2 + (ub - ubar[j]) ** 2
            y[j] = y_new[j]
            u[j] = u_new[j]
            ubar[j] = ub
        if np.sqrt(step) < eta:
            status = CONVERGED
            break
    for j in range(m):
        out[j] = u[j]
    return it, status


# ------------------------------------------------------ smooth semismooth Newton


@njit(cache=True)
def ssn_residual(q, b, c, vt, u, p, beta, E):
    m = q.shape[0]
    g = np.empty(m)
    _grad(q, b, c, u, g)
    nrm = 0.0
    for j in range(m):
        pp = max(0.0, p[j])
        nrm += pp * pp
        E[j] = beta * u[j] - pp
        E[m + j] = u[j] - vt * g[j] - p[j]
    E[2 * m] = beta - max(1.0, np.sqrt(nrm))


@njit(cache=True)
def ssn_smooth(q, b, c, u0, params, out, hist):
    """Semismooth Newton on E(u, p, beta) = 0 over the unit ball orthant.

    Returns (iterations, status); ``hist[n]`` holds |E(z_n)|.
    """
    eta = params[P_ETA]
    maxit = int(params[P_MAXIT])
    m = q.shape[0]
    n = 2 * m + 1
    hnorm = 0.0  # infinity norm of the Hessian
    for j in range(m):
        row = q[j] + (abs(b) if m == 2 else 0.0)
        hnorm = max(hnorm, row)
    vt = params[P_THETA_SCALE] / max(1.0, hnorm)
    u = np.empty(m)
    lo = np.zeros(m)
    project(u0, True, lo, lo, u)
    g = np.empty(m)
    _grad(q, b, c, u, g)
    p = np.empty(m)
    nrm = 0.0
    for j in range(m):
        p[j] = u[j] - vt * g[j]
        nrm += max(0.0, p[j]) ** 2
    beta = max(1.0, np.sqrt(nrm))
    E = np.empty(n)
    J = np.empty((n, n))
    ssn_residual(q, b, c, vt, u, p, beta, E)
    hist[0] = np.sqrt(np.sum(E * E))
    it = 0
    status = MAX_ITERS
    while it < maxit:
        it += 1
        J[:, :] = 0.0
        pn = 0.0
        for j in range(m):
            pn += max(0.0, p[j]) ** 2
        pn = np.sqrt(pn)
        for j in range(m):
            J[j, j] = beta
            if p[j] > 0.0:
                J[j, m + j] = -1.0
            J[j, n - 1] = u[j]
            for i in range(m):
                J[m + j, i] = -vt * (q[j] if i == j else b)
            J[m + j, j] += 1.0
            J[m + j, m + j] = -1.0
            if pn >= 1.0 and p[j] > 0.0:
                J[n - 1, m + j] = -p[j] / pn
        J[n - 1, n - 1] = 1.0
        rhs = -E
        if not _dense_solve(J, rhs):
            return it, FALLBACK
        step = 0.0
        for j in range(m):
            u[j] += rhs[j]
            p[j] += rhs[m + j]
            step += rhs[j] ** 2 + rhs[m + j] ** 2
        beta += rhs[n - 1]
        step += rhs[n - 1] ** 2
        ssn_residual(q, b, c, vt, u, p, beta, E)
        if it < hist.shape[0]:
            hist[it] = np.sqrt(np.sum(E * E))
        if np.sqrt(step) < eta:
            status = CONVERGED
            break
    project(p, True, lo, lo, out)
    return it, status


# -------------------------------------------------------------- sphere Newton


@njit(cache=True)
def _arc(d, b, e, phi):
    return d * np.cos(phi) + 0.5 * b * np.sin(2.0 * phi) + e * np.sin(phi)


@njit(cache=True)
def sphere_newton(b, c, params, out):
    """Minimise ``b u0 u1 + c . u`` over the unit ball orthant.

    Minimisers sit at the origin or on the arc; the arc restriction
    ``d cos(phi) + b/2 sin(2 phi) + e sin(phi)`` on [0, pi/2] is minimised by
    safeguarded Newton steps on its derivative from several starting angles.
    """
    m = c.shape[0]
    eta = params[P_ETA]
    maxit = int(params[P_MAXIT])
    for j in range(m):
        out[j] = 0.0
    if m != 2:
        # linear objective: minimiser is the normalised negative part of c
        nrm = 0.0
        for j in range(m):
            nrm += max(0.0, -c[j]) ** 2
        nrm = np.sqrt(nrm)
        if nrm > 0.0:
            for j in range(m):
                out[j] = max(0.0, -c[j]) / nrm
        return 1, CONVERGED
    d = c[0]
    e = c[1]
    half = 0.5 * np.pi
    best_phi = 0.0
    best = _arc(d, b, e, 0.0)
    v = _arc(d, b, e, half)
    if v < best:
        best = v
        best_phi = half
    total = 0
    status = CONVERGED
    for s in range(5):
        phi = half * (s + 0.5) / 5.0
        for it in range(maxit):
            total += 1
            d1 = -d * np.sin(phi) + b * np.cos(2.0 * phi) + e * np.cos(phi)
            d2 = -d * np.cos(phi) - 2.0 * b * np.sin(2.0 * phi) - e * np.sin(phi)
            if d2 > 1e-12:
                step = -d1 / d2
            else:
                # not locally convex: move downhill by a bounded gradient step
                step = -np.sign(d1) * min(abs(d1), 0.25)
            step = max(-0.25, min(0.25, step))
            new = min(max(phi + step, 0.0), half)
            moved = abs(new - phi)
            phi = new
            if moved < eta * 1e-2:
                break
        v = _arc(d, b, e, phi)
        if v < best:
            best = v
            best_phi = phi
    if best < 0.0:
        out[0] = np.cos(best_phi)
        out[1] = np.sin(best_phi)
    return total, status


# ------------------------------------------------- nonsmooth semismooth Newton


@njit(cache=True)
def conj_grad_ball(qv, alpha, eps, out, D):
    """eps-regularised gradient of the conjugate of alpha|.|_1 + indicator(ball orthant).

    Cases: dead zone (all q_j < alpha) -> 0; one-sided ramps of width eps and the
    corner disk |q - alpha| <= eps -> (q - alpha)^+ / eps; otherwise the unit
    vector (q - alpha)^+ / |(q - alpha)^+|.  ``D`` receives a Newton derivative.
    """
    m = qv.shape[0]
    nrm = 0.0
    for j in range(m):
        t = qv[j] - alpha[j]
        out[j] = t if t > 0.0 else 0.0
        nrm += out[j] * out[j]
    nrm = np.sqrt(nrm)
    D[:, :] = 0.0
    if nrm == 0.0:
        return
    if nrm <= eps:
        for j in range(m):
            if out[j] > 0.0:
                D[j, j] = 1.0 / eps
            out[j] /= eps
        return
    for j in range(m):
        out[j] /= nrm
    for i in range(m):
        if qv[i] - alpha[i] <= 0.0:
            continue
        for j in range(m):
            if qv[j] - alpha[j] <= 0.0:
                continue
            D[j, i] = ((1.0 if i == j else 0.0) - out[j] * out[i]) / nrm


@njit(cache=True)
def _ramp(t):
    return min(max(t, 0.0), 1.0)


@njit(cache=True)
def conj_grad_box(qv, alpha, eps, lo, hi, out, D):
    """Ramp-regularised gradient of the conjugate of alpha|.|_1 + indicator([lo, hi])."""
    m = qv.shape[0]
    D[:, :] = 0.0
    for j in range(m):
        if lo[j] >= 0.0:
            t = (qv[j] - alpha[j]) / eps
            out[j] = lo[j] + (hi[j] - lo[j]) * _ramp(t)
            if 0.0 < t < 1.0:
                D[j, j] = (hi[j] - lo[j]) / eps
        elif hi[j] <= 0.0:
            t = (qv[j] + alpha[j]) / eps
            out[j] = lo[j] + (hi[j] - lo[j]) * _ramp(t)
            if 0.0 < t < 1.0:
                D[j, j] = (hi[j] - lo[j]) / eps
        else:
            tp = (qv[j] - alpha[j]) / eps
            tm = (-qv[j] - alpha[j]) / eps
            out[j] = hi[j] * _ramp(tp) + lo[j] * _ramp(tm)
            if 0.0 < tp < 1.0:
                D[j, j] = hi[j] / eps
            elif 0.0 < tm < 1.0:
                D[j, j] = -lo[j] / eps


@njit(cache=True)
def _l1_system(q, b, a, c, ball, lo, hi, eps, qv, u, g, R, D, G):
    m = q.shape[0]
    _grad(q, b, c, u, g)
    if ball:
        conj_grad_ball(qv, a, eps, R, D)
    else:
        conj_grad_box(qv, a, eps, lo, hi, R, D)
    for j in range(m):
        G[j] = qv[j] + g[j]
        G[m + j] = u[j] - R[j]


@njit(cache=True)
def _l1_dual_start(alpha, eps, ball, lo, hi, u, qv):
    """Move the dual guess ``qv = -grad E(u)`` so that its regularised conjugate gradient is ``u``.

    A warm-started ``u`` is then a consistent starting pair; without this the
    eps-wide ramps send the first iterate far away from a good primal guess.
    """
    m = u.shape[0]
    for j in range(m):
        if ball:
            # canonical orthant: R(q) = (q - alpha)^+ / max(eps, |(q - alpha)^+|)
            qv[j] = alpha[j] + eps * u[j] if u[j] > 0.0 else min(qv[j], alpha[j])
            continue
        if lo[j] < 0.0 < hi[j]:
            if u[j] > 0.0:
                t = u[j] / hi[j]
                qv[j] = alpha[j] + eps * t if t < 1.0 else max(qv[j], alpha[j] + eps)
            elif u[j] < 0.0:
                t = u[j] / lo[j]
                qv[j] = -alpha[j] - eps * t if t < 1.0 else min(qv[j], -alpha[j] - eps)
            else:
                qv[j] = min(max(qv[j], -alpha[j]), alpha[j])
            continue
        if hi[j] <= lo[j]:
            continue
        shift = alpha[j] if lo[j] >= 0.0 else -alpha[j]
        t = (u[j] - lo[j]) / (hi[j] - lo[j])
        if t <= 0.0:
            qv[j] = min(qv[j], shift)
        elif t >= 1.0:
            qv[j] = max(qv[j], shift + eps)
        else:
            qv[j] = shift + eps * t


L1_DIRECT_ITERS = 6  # direct steps at the target eps before falling back to continuation


@njit(cache=True)
def ssn_l1(q, b, a, c, ball, lo, hi, u0, params, out, hist):
    """Semismooth Newton on q + grad E(u) = 0, u = (dh*)_eps(q).

    The ramps of the regularised conjugate gradient are only eps wide, so plain
    Newton steps tend to cycle between flat zones.  From a good (warm) start a
    few direct steps at the target eps usually suffice; otherwise we restart and
    follow a continuation path eps_0 = 1 > eps_1 > ... > eps, damping each step
    by backtracking on the residual norm.
    """
    eps_target = params[P_EPS]
    maxit = int(params[P_MAXIT])
    direct = min(maxit, L1_DIRECT_ITERS)
    it, status = _l1_newton(q, b, a, c, ball, lo, hi, u0, params, eps_target, direct, out, hist)
    if status == CONVERGED or status == FALLBACK or direct == maxit:
        return it, status
    it2, status = _l1_newton(q, b, a, c, ball, lo, hi, u0, params, max(1.0, eps_target), maxit - direct, out, hist)
    return it + it2, status


@njit(cache=True)
def _l1_newton(q, b, a, c, ball, lo, hi, u0, params, eps0, maxit, out, hist):
    eta = params[P_ETA]
    eps_target = params[P_EPS]
    m = q.shape[0]
    n = 2 * m
    u = np.empty(m)
    project(u0, ball, lo, hi, u)
    qv = np.empty(m)
    _grad(q, b, c, u, qv)
    for j in range(m):
        qv[j] = -qv[j]
    _l1_dual_start(a, eps0, ball, lo, hi, u, qv)
    g = np.empty(m)
    R = np.empty(m)
    D = np.empty((m, m))
    G = np.empty(n)
    J = np.empty((n, n))
    rhs = np.empty(n)
    qt = np.empty(m)
    ut = np.empty(m)
    eps = eps0
    _l1_system(q, b, a, c, ball, lo, hi, eps, qv, u, g, R, D, G)
    res = np.sqrt(np.sum(G * G))
    hist[0] = res
    it = 0
    status = MAX_ITERS
    while it < maxit:
        it += 1
        J[:, :] = 0.0
        for j in range(m):
            J[j, j] = 1.0
            J[m + j, m + j] = 1.0
            for i in range(m):
                J[j, m + i] = q[j] if i == j else b
                J[m + j, i] = -D[j, i]
            rhs[j] = -G[j]
            rhs[m + j] = -G[m + j]
        if not _dense_solve(J, rhs):
            return it, FALLBACK
        t = 1.0
        accepted = False
        for _ in range(30):
            for j in range(m):
                qt[j] = qv[j] + t * rhs[j]
                ut[j] = u[j] + t * rhs[m + j]
            _l1_system(q, b, a, c, ball, lo, hi, eps, qt, ut, g, R, D, G)
            trial = np.sqrt(np.sum(G * G))
            if trial <= (1.0 - 1e-4 * t) * res or res == 0.0:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no decrease along the Newton direction: take the full step anyway
            for j in range(m):
                qt[j] = qv[j] + rhs[j]
                ut[j] = u[j] + rhs[m + j]
            _l1_system(q, b, a, c, ball, lo, hi, eps, qt, ut, g, R, D, G)
            trial = np.sqrt(np.sum(G * G))
        # stop on the undamped Newton step; a heavily damped step says nothing about optimality
        step = 0.0
        for j in range(n):
            step += rhs[j] * rhs[j]
        for j in range(m):
            qv[j] = qt[j]
            u[j] = ut[j]
        res = trial
        if it < hist.shape[0]:
            hist[it] = res
        if np.sqrt(step) < eta:
            if eps <= eps_target:
                status = CONVERGED
                break
            eps = max(eps_target, 0.1 * eps)
            _l1_system(q, b, a, c, ball, lo, hi, eps, qv, u, g, R, D, G)
            res = np.sqrt(np.sum(G * G))
    for j in range(m):
        out[j] = R[j]
    return it, status


# ----------------------------------------------------------------- dispatcher


@njit(cache=True)
def default_start(ball, lo, hi, out):
    """Canonical starting point: half-radius centroid direction, or the box midpoint."""
    m = lo.shape[0]
    for j in range(m):
        if ball:
            out[j] = 0.5 / np.sqrt(m)
        else:
            out[j] = 0.5 * (lo[j] + hi[j])


@njit(cache=True)
def grid_search(q, b, a, c, ball, lo, hi, n, out):
    """Best point of an ``n``-per-axis grid on the canonical sector (polar for the ball)."""
    m = q.shape[0]
    u = np.zeros(m)
    best = objective(q, b, a, c, u)
    for j in range(m):
        out[j] = 0.0
    if not ball:
        project(u, False, lo, hi, out)
        best = objective(q, b, a, c, out)
    total = n ** m
    for flat in range(total):
        rest = flat
        if ball:
            # radius from the first digit, angles from the others
            rad = (rest % n + 1.0) / n
            rest //= n
            if m == 2:
                phi = 0.5 * np.pi * (rest % n) / (n - 1.0)
                u[0] = rad * np.cos(phi)
                u[1] = rad * np.sin(phi)
            else:
                th = 0.5 * np.pi * (rest % n) / (n - 1.0)
                rest //= n
                phi = 0.5 * np.pi * (rest % n) / (n - 1.0)
                u[0] = rad * np.sin(th) * np.cos(phi)
                u[1] = rad * np.sin(th) * np.sin(phi)
                u[2] = rad * np.cos(th)
        else:
            for j in range(m):
                u[j] = lo[j] + (hi[j] - lo[j]) * (rest % n) / (n - 1.0)
                rest //= n
        v = objective(q, b, a, c, u)
        if v < best:
            best = v
            for j in range(m):
                out[j] = u[j]
    return total


@njit(cache=True)
def box_vertices(q, b, a, c, lo, hi, out):
    """Minimum over the points with every component in {lo, 0, hi}.

    Exact when q = 0: the objective is then bilinear on every sign sub-box.
    """
    m = q.shape[0]
    u = np.empty(m)
    best = np.inf
    total = 3 ** m
    for flat in range(total):
        rest = flat
        for j in range(m):
            t = rest % 3
            rest //= 3
            u[j] = lo[j] if t == 0 else (hi[j] if t == 2 else min(max(0.0, lo[j]), hi[j]))
        v = objective(q, b, a, c, u)
        if v < best:
            best = v
            for j in range(m):
                out[j] = u[j]
    return total


@njit(cache=True)
def solve_sector(method, q0, b0, a0, c0, r, lo0, hi0, ball, radius, params, u_init, points, out, hist):
    """Minimise the local cost on one sector; returns (value, iterations, status).

    ``lo0``/``hi0`` are the sector bounds in original coordinates; ball sectors
    must be sign orthants.  ``out`` receives the minimiser in original coordinates.
    """
    m = q0.shape[0]
    if method == COMPARISON:
        best, found = comparison(q0, b0, a0, c0, points, lo0, hi0, out)
        if not found:
            return np.inf, points.shape[0], NO_POINTS
        return best + r, points.shape[0], CONVERGED

    # canonical coordinates u = sgn * rho * w
    sgn = np.ones(m)
    rho = radius if ball else 1.0
    for j in range(m):
        if ball and lo0[j] < 0.0:
            sgn[j] = -1.0
    q = np.empty(m)
    a = np.empty(m)
    c = np.empty(m)
    lo = np.empty(m)
    hi = np.empty(m)
    w0 = np.empty(m)
    for j in range(m):
        q[j] = q0[j] * rho * rho
        a[j] = a0[j] * rho
        c[j] = c0[j] * sgn[j] * rho
        lo[j] = lo0[j]
        hi[j] = hi0[j]
        w0[j] = u_init[j] * sgn[j] / rho
    b = b0 * rho * rho
    if m == 2:
        b *= sgn[0] * sgn[1]
    scale = abs(b)
    for j in range(m):
        scale = max(scale, q[j], a[j], abs(c[j]))
    w = np.zeros(m)
    if scale <= 1e-300:
        project(w0, ball, lo, hi, w)
        for j in range(m):
            out[j] = sgn[j] * rho * w[j]
        return objective(q0, b0, a0, c0, out) + r, 0, CONVERGED
    for j in range(m):
        q[j] /= scale
        a[j] /= scale
        c[j] /= scale
    b /= scale

    smooth = True
    for j in range(m):
        if a[j] > 0.0:
            smooth = False
    if ball and method != SSN_L1_BALL and not smooth:
        # on the canonical orthant |w| = w
        for j in range(m):
            c[j] += a[j]
            a[j] = 0.0
        smooth = True

    quad_free = True
    for j in range(m):
        if q[j] > 0.0:
            quad_free = False
    it = 0
    status = CONVERGED
    if method == SPHERE_NEWTON or (method == SPLITTING and quad_free):
        if ball:
            it, status = sphere_newton(b, c, params, w)
        else:
            it = box_vertices(q, b, a, c, lo, hi, w)
    elif method == CHAMBOLLE_POCK:
        it, status = chambolle_pock(q, b, c, ball, lo, hi, w0, params, w)
    elif method == SSN_SMOOTH or (method == SPLITTING and ball):
        it, status = ssn_smooth(q, b, c, w0, params, w, hist)
        if status == FALLBACK:
            it2, st2 = chambolle_pock(q, b, c, ball, lo, hi, w0, params, w)
            it += it2
    elif method == SSN_L1_BALL or method == SSN_L1_BOX:
        it, status = ssn_l1(q, b, a, c, ball, lo, hi, w0, params, w, hist)
        if status == FALLBACK:
            it += grid_search(q, b, a, c, ball, lo, hi, 100 if m == 2 else 22, w)
    elif method == SPLITTING:
        # box: split sign-straddling components into nonnegative/nonpositive parts
        nsplit = 0
        for j in range(m):
            if lo[j] < 0.0 < hi[j] and a[j] > 0.0:
                nsplit += 1
        best = np.inf
        wt = np.empty(m)
        lo2 = np.empty(m)
        hi2 = np.empty(m)
        c2 = np.empty(m)
        w2 = np.empty(m)
        for mask in range(1 << nsplit):
            bit = 0
            for j in range(m):
                lo2[j] = lo[j]
                hi2[j] = hi[j]
                if lo[j] < 0.0 < hi[j] and a[j] > 0.0:
                    if (mask >> bit) & 1:
                        lo2[j] = 0.0
                    else:
                        hi2[j] = 0.0
                    bit += 1
                sj = 1.0 if lo2[j] >= 0.0 else -1.0
                c2[j] = c[j] + a[j] * sj
                w2[j] = min(max(w0[j], lo2[j]), hi2[j])
            itk, stk = chambolle_pock(q, b, c2, False, lo2, hi2, w2, params, wt)
            it += itk
            if stk != CONVERGED:
                status = stk
            v = objective(q, b, a, c, wt)
            if v < best:
                best = v
                for j in range(m):
                    w[j] = wt[j]
    for j in range(m):
        out[j] = sgn[j] * rho * w[j]
    return objective(q0, b0, a0, c0, out) + r, it, status
