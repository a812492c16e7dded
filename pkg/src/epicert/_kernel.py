"""Jitted trust-region kernel behind :func:`epicert.manifold.solve_rtr`.

Same mathematics as the readable numpy operators in ``manifold`` (a test
pins the two against each other to machine precision); written with explicit
3x3 loops so numba can compile the whole descent loop.  Falls back to plain
interpretation when numba is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is normally installed

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


_EPS = 2.220446049250313e-16

STATUS_OK = 0
STATUS_NONFINITE_INIT = 1
STATUS_NONFINITE_GRAD = 2
STATUS_NONFINITE_TRIAL = 3


@njit(cache=True)
def _vec_colmajor(e):
    out = np.empty(9)
    for j in range(3):
        for i in range(3):
            out[3 * j + i] = e[i, j]
    return out


@njit(cache=True)
def _cost_raw(c, rows, has_rows, e):
    ve = _vec_colmajor(e)
    if has_rows:
        acc = 0.0
        for i in range(rows.shape[0]):
            s = 0.0
            for k in range(9):
                s += rows[i, k] * ve[k]
            acc += s * s
        return acc
    cv = np.dot(c, ve)
    acc = 0.0
    for k in range(9):
        acc += ve[k] * cv[k]
    if acc < 0.0:
        acc = 0.0
    return acc


@njit(cache=True)
def _model(c, e, r, t):
    """Cost gradient (6,) and dense Hessian (6, 6) at the point (r, t, e)."""
    ve = _vec_colmajor(e)
    gv = 2.0 * np.dot(c, ve)
    g_mat = np.empty((3, 3))
    for j in range(3):
        for i in range(3):
            g_mat[i, j] = gv[3 * j + i]
    # z = e.T @ g_mat
    z = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += e[k, i] * g_mat[k, j]
            z[i, j] = s
    # m = g_mat @ r.T
    m = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += g_mat[i, k] * r[j, k]
            m[i, j] = s
    g = np.empty(6)
    g[0] = z[2, 1] - z[1, 2]
    g[1] = z[0, 2] - z[2, 0]
    g[2] = z[1, 0] - z[0, 1]
    g[3] = m[2, 1] - m[1, 2]
    g[4] = m[0, 2] - m[2, 0]
    g[5] = m[1, 0] - m[0, 1]
    dot = t[0] * g[3] + t[1] * g[4] + t[2] * g[5]
    g[3] -= dot * t[0]
    g[4] -= dot * t[1]
    g[5] -= dot * t[2]

    # columns of the embedding differential: vec(e @ skew(e_l)), vec(skew(e_k) @ r)
    l_mat = np.zeros((9, 6))
    for i in range(3):
        l_mat[3 + i, 0] = e[i, 2]
        l_mat[6 + i, 0] = -e[i, 1]
        l_mat[i, 1] = -e[i, 2]
        l_mat[6 + i, 1] = e[i, 0]
        l_mat[i, 2] = e[i, 1]
        l_mat[3 + i, 2] = -e[i, 0]
    for j in range(3):
        l_mat[3 * j + 1, 3] = -r[2, j]
        l_mat[3 * j + 2, 3] = r[1, j]
        l_mat[3 * j + 0, 4] = r[2, j]
        l_mat[3 * j + 2, 4] = -r[0, j]
        l_mat[3 * j + 0, 5] = -r[1, j]
        l_mat[3 * j + 1, 5] = r[0, j]
    cl = np.dot(c, l_mat)
    h = np.empty((6, 6))
    for a in range(6):
        for b in range(6):
            s = 0.0
            for k in range(9):
                s += l_mat[k, a] * cl[k, b]
            h[a, b] = 2.0 * s

    # mixed rotation/translation curvature of the embedding
    for k in range(3):
        # sbr = skew(e_k) @ r
        sbr = np.zeros((3, 3))
        if k == 0:
            for j in range(3):
                sbr[1, j] = -r[2, j]
                sbr[2, j] = r[1, j]
        elif k == 1:
            for j in range(3):
                sbr[0, j] = r[2, j]
                sbr[2, j] = -r[0, j]
        else:
            for j in range(3):
                sbr[0, j] = -r[1, j]
                sbr[1, j] = r[0, j]
        # mk = g_mat.T @ sbr
        mk = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                s = 0.0
                for kk in range(3):
                    s += g_mat[kk, i] * sbr[kk, j]
                mk[i, j] = s
        b0 = mk[1, 2] - mk[2, 1]
        b1 = mk[2, 0] - mk[0, 2]
        b2 = mk[0, 1] - mk[1, 0]
        h[3 + k, 0] += b0
        h[3 + k, 1] += b1
        h[3 + k, 2] += b2
        h[0, 3 + k] += b0
        h[1, 3 + k] += b1
        h[2, 3 + k] += b2

    # second-order rotation term: skew(w)S + S skew(w) = skew((tr S I - S) w)
    tr_s = 2.0 * (z[0, 0] + z[1, 1] + z[2, 2])
    for i in range(3):
        for j in range(3):
            s_ij = z[i, j] + z[j, i]
            if i == j:
                h[i, j] -= 0.5 * (tr_s - s_ij)
            else:
                h[i, j] += 0.5 * s_ij

    # sphere normal-component pullback
    ge = 0.0
    for i in range(3):
        for j in range(3):
            ge += g_mat[i, j] * e[i, j]
    for i in range(3):
        h[3 + i, 3 + i] -= ge

    # restrict translation rows/columns to the sphere tangent plane
    tmp = np.empty((3, 6))
    for j in range(6):
        d = t[0] * h[3, j] + t[1] * h[4, j] + t[2] * h[5, j]
        tmp[0, j] = h[3, j] - d * t[0]
        tmp[1, j] = h[4, j] - d * t[1]
        tmp[2, j] = h[5, j] - d * t[2]
    for j in range(6):
        h[3, j] = tmp[0, j]
        h[4, j] = tmp[1, j]
        h[5, j] = tmp[2, j]
    for i in range(6):
        d = h[i, 3] * t[0] + h[i, 4] * t[1] + h[i, 5] * t[2]
        h[i, 3] -= d * t[0]
        h[i, 4] -= d * t[1]
        h[i, 5] -= d * t[2]
    return g, h


@njit(cache=True)
def _tcg(h, g, radius, max_inner, theta, kappa):
    """Steihaug-Toint truncated CG; returns (step, h @ step, hit_boundary)."""
    s = np.zeros(6)
    hs = np.zeros(6)
    r = g.copy()
    d = -g
    rr = 0.0
    for i in range(6):
        rr += r[i] * r[i]
    r0 = math.sqrt(rr)
    stop = r0 * min(kappa, r0**theta)
    hit = False
    for _ in range(max_inner):
        hd = np.dot(h, d)
        d_hd = 0.0
        s_d = 0.0
        d_d = 0.0
        s_s = 0.0
        for i in range(6):
            d_hd += d[i] * hd[i]
            s_d += s[i] * d[i]
            d_d += d[i] * d[i]
            s_s += s[i] * s[i]
        if d_d <= 1e-300:
            break  # search direction vanished; nothing left to move along
        if d_hd <= 0.0:
            tau = (-s_d + math.sqrt(s_d * s_d + d_d * (radius * radius - s_s))) / d_d
            for i in range(6):
                s[i] += tau * d[i]
                hs[i] += tau * hd[i]
            hit = True
            break
        alpha = rr / d_hd
        norm_next = 0.0
        for i in range(6):
            v = s[i] + alpha * d[i]
            norm_next += v * v
        if norm_next >= radius * radius:
            tau = (-s_d + math.sqrt(s_d * s_d + d_d * (radius * radius - s_s))) / d_d
            for i in range(6):
                s[i] += tau * d[i]
                hs[i] += tau * hd[i]
            hit = True
            break
        rr_next = 0.0
        for i in range(6):
            s[i] += alpha * d[i]
            hs[i] += alpha * hd[i]
            r[i] += alpha * hd[i]
            rr_next += r[i] * r[i]
        if math.sqrt(rr_next) <= stop:
            break
        beta = rr_next / rr
        for i in range(6):
            d[i] = -r[i] + beta * d[i]
        rr = rr_next
    return s, hs, hit


@njit(cache=True)
def _retract_arrays(r, t, omega, dt):
    angle2 = omega[0] ** 2 + omega[1] ** 2 + omega[2] ** 2
    angle = math.sqrt(angle2)
    k = np.zeros((3, 3))
    k[0, 1] = -omega[2]
    k[0, 2] = omega[1]
    k[1, 0] = omega[2]
    k[1, 2] = -omega[0]
    k[2, 0] = -omega[1]
    k[2, 1] = omega[0]
    kk = np.dot(k, k)
    exp_m = np.eye(3)
    if angle < 1e-12:
        for i in range(3):
            for j in range(3):
                exp_m[i, j] += k[i, j] + 0.5 * kk[i, j]
    else:
        a = math.sin(angle) / angle
        b = (1.0 - math.cos(angle)) / angle2
        for i in range(3):
            for j in range(3):
                exp_m[i, j] += a * k[i, j] + b * kk[i, j]
    r_new = np.dot(r, exp_m)
    t_new = np.empty(3)
    nrm = 0.0
    for i in range(3):
        t_new[i] = t[i] + dt[i]
        nrm += t_new[i] * t_new[i]
    nrm = math.sqrt(nrm)
    for i in range(3):
        t_new[i] /= nrm
    # e = skew(t_new) @ r_new
    e_new = np.empty((3, 3))
    for j in range(3):
        e_new[0, j] = -t_new[2] * r_new[1, j] + t_new[1] * r_new[2, j]
        e_new[1, j] = t_new[2] * r_new[0, j] - t_new[0] * r_new[2, j]
        e_new[2, j] = -t_new[1] * r_new[0, j] + t_new[0] * r_new[1, j]
    return r_new, t_new, e_new


@njit(cache=True)
def rtr_descend(
    c,
    rows,
    has_rows,
    n_points,
    r0,
    t0,
    e0,
    max_outer,
    gtol,
    radius0,
    radius_max,
    rho_prime,
    max_inner,
    theta,
    kappa,
):
    """Full trust-region descent; returns the final point, diagnostics, trace."""
    r = r0.copy()
    t = t0.copy()
    e = e0.copy()
    f = _cost_raw(c, rows, has_rows, e)
    trace = np.empty(max_outer + 1)
    trace[0] = f
    n_trace = 1
    if not math.isfinite(f):
        return r, t, e, f, 0.0, 0, trace, n_trace, STATUS_NONFINITE_INIT
    radius = radius0
    grad_norm = math.inf
    iterations = 0
    noise_floor = 30.0 * _EPS * (f + math.sqrt(f * n_points))
    have_model = False
    g = np.zeros(6)
    h = np.zeros((6, 6))
    for _ in range(max_outer):
        if not have_model:
            g, h = _model(c, e, r, t)
            gg = 0.0
            for i in range(6):
                if not math.isfinite(g[i]):
                    return r, t, e, f, grad_norm, iterations, trace, n_trace, STATUS_NONFINITE_GRAD
                gg += g[i] * g[i]
            grad_norm = math.sqrt(gg)
            have_model = True
        if grad_norm <= gtol:
            break
        iterations += 1
        step, h_step, hit = _tcg(h, g, radius, max_inner, theta, kappa)
        predicted = 0.0
        for i in range(6):
            predicted -= g[i] * step[i] + 0.5 * step[i] * h_step[i]
        if 0.0 < predicted <= noise_floor:
            break
        r_new, t_new, e_new = _retract_arrays(r, t, step[:3], step[3:])
        f_trial = _cost_raw(c, rows, has_rows, e_new)
        if not math.isfinite(f_trial):
            return r, t, e, f, grad_norm, iterations, trace, n_trace, STATUS_NONFINITE_TRIAL
        if predicted > 0.0:
            rho = (f - f_trial) / predicted
        else:
            rho = -math.inf
        if rho >= rho_prime:
            r = r_new
            t = t_new
            e = e_new
            f = f_trial
            noise_floor = 30.0 * _EPS * (f + math.sqrt(f * n_points))
            trace[n_trace] = f
            n_trace += 1
            have_model = False
        if rho < 0.25:
            radius *= 0.25
            if radius < 1e-14:
                break
        elif rho > 0.75 and hit:
            radius = min(2.0 * radius, radius_max)
    if not have_model:
        g, h = _model(c, e, r, t)
        gg = 0.0
        for i in range(6):
            gg += g[i] * g[i]
        grad_norm = math.sqrt(gg)
    return r, t, e, f, grad_norm, iterations, trace, n_trace, STATUS_OK
