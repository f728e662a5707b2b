"""Optional fused kernels for the Euler hot loops.

The numpy implementations in equations.py stay the reference; these kernels
compute the same formulas in one pass over memory and are used when numba
is importable. Parity is asserted by the test suite.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True, fastmath=False)
def euler1d_flux_flat(u, gamma, out):
    n = u.shape[1]
    for i in range(n):
        rho = u[0, i]
        mom = u[1, i]
        ene = u[2, i]
        v = mom / rho
        p = (gamma - 1.0) * (ene - 0.5 * mom * v)
        out[0, i] = mom
        out[1, i] = p + mom * v
        out[2, i] = (ene + p) * v


@njit(cache=True, fastmath=False)
def euler1d_rusanov_flat(ul, ur, gamma, out):
    """Fused two-point flux; returns 0 on success, >0 on inadmissible input.

    The validity flag is accumulated instead of returned early so the loop
    body stays branch-free and vectorizable.
    """
    n = ul.shape[1]
    nbad = 0
    for i in range(n):
        rl, ml, el = ul[0, i], ul[1, i], ul[2, i]
        rr, mr, er = ur[0, i], ur[1, i], ur[2, i]
        vl = ml / rl
        vr = mr / rr
        pl = (gamma - 1.0) * (el - 0.5 * ml * vl)
        pr = (gamma - 1.0) * (er - 0.5 * mr * vr)
        cl2 = gamma * pl / rl
        cr2 = gamma * pr / rr
        ok = (cl2 > 0.0) and (cr2 > 0.0) and (rl > 0.0) and (rr > 0.0)
        nbad += 0 if ok else 1
        acl2 = cl2 if ok else 1.0
        acr2 = cr2 if ok else 1.0
        sl = abs(vl) + np.sqrt(acl2)
        sr = abs(vr) + np.sqrt(acr2)
        lam = sl if sl > sr else sr
        out[0, i] = 0.5 * (ml + mr) - 0.5 * lam * (rr - rl)
        out[1, i] = 0.5 * (pl + ml * vl + pr + mr * vr) - 0.5 * lam * (mr - ml)
        out[2, i] = 0.5 * ((el + pl) * vl + (er + pr) * vr) - 0.5 * lam * (er - el)
    return nbad


@njit(cache=True, fastmath=False)
def euler2d_flux_both_flat(u, gamma, f, g):
    n = u.shape[1]
    for i in range(n):
        rho = u[0, i]
        mx = u[1, i]
        my = u[2, i]
        ene = u[3, i]
        vx = mx / rho
        vy = my / rho
        p = (gamma - 1.0) * (ene - 0.5 * (mx * vx + my * vy))
        f[0, i] = mx
        f[1, i] = p + mx * vx
        f[2, i] = my * vx
        f[3, i] = (ene + p) * vx
        g[0, i] = my
        g[1, i] = mx * vy
        g[2, i] = p + my * vy
        g[3, i] = (ene + p) * vy


@njit(cache=True, fastmath=False)
def euler2d_flux_flat(u, gamma, axis, out):
    n = u.shape[1]
    for i in range(n):
        rho = u[0, i]
        mx = u[1, i]
        my = u[2, i]
        ene = u[3, i]
        p = (gamma - 1.0) * (ene - 0.5 * (mx * mx + my * my) / rho)
        if axis == 0:
            v = mx / rho
            out[0, i] = mx
            out[1, i] = p + mx * v
            out[2, i] = my * v
        else:
            v = my / rho
            out[0, i] = my
            out[1, i] = mx * v
            out[2, i] = p + my * v
        out[3, i] = (ene + p) * v


@njit(cache=True, fastmath=False)
def euler2d_rusanov_flat(ul, ur, gamma, axis, out):
    n = ul.shape[1]
    m = 1 if axis == 0 else 2
    q = 3 - m
    nbad = 0
    for i in range(n):
        rl, xl, yl, el = ul[0, i], ul[1, i], ul[2, i], ul[3, i]
        rr, xr, yr, er = ur[0, i], ur[1, i], ur[2, i], ur[3, i]
        pl = (gamma - 1.0) * (el - 0.5 * (xl * xl + yl * yl) / rl)
        pr = (gamma - 1.0) * (er - 0.5 * (xr * xr + yr * yr) / rr)
        cl2 = gamma * pl / rl
        cr2 = gamma * pr / rr
        ok = (cl2 > 0.0) and (cr2 > 0.0) and (rl > 0.0) and (rr > 0.0)
        nbad += 0 if ok else 1
        acl2 = cl2 if ok else 1.0
        acr2 = cr2 if ok else 1.0
        mvl = ul[m, i]
        mvr = ur[m, i]
        qvl = ul[q, i]
        qvr = ur[q, i]
        vl = mvl / rl
        vr = mvr / rr
        sl = abs(vl) + np.sqrt(acl2)
        sr = abs(vr) + np.sqrt(acr2)
        lam = sl if sl > sr else sr
        out[0, i] = 0.5 * (mvl + mvr) - 0.5 * lam * (rr - rl)
        out[m, i] = 0.5 * (pl + mvl * vl + pr + mvr * vr) - 0.5 * lam * (mvr - mvl)
        out[q, i] = 0.5 * (qvl * vl + qvr * vr) - 0.5 * lam * (qvr - qvl)
        out[3, i] = 0.5 * ((el + pl) * vl + (er + pr) * vr) - 0.5 * lam * (er - el)
    return nbad


def flat_view(u):
    """C-contiguous (nvar, M) view (copying only if the input is strided)."""
    uc = np.ascontiguousarray(u)
    return uc, uc.reshape(u.shape[0], -1)


@njit(cache=True, fastmath=False)
def shifted_states4_flat(w0, w1, w2, w3, w4, coef, o1, o2, o3, o4):
    n = w0.size
    for i in range(n):
        a, b, c, d, e = w0[i], w1[i], w2[i], w3[i], w4[i]
        o1[i] = a + coef[0, 1] * b + coef[0, 2] * c + coef[0, 3] * d + coef[0, 4] * e
        o2[i] = a + coef[1, 1] * b + coef[1, 2] * c + coef[1, 3] * d + coef[1, 4] * e
        o3[i] = a + coef[2, 1] * b + coef[2, 2] * c + coef[2, 3] * d + coef[2, 4] * e
        o4[i] = a + coef[3, 1] * b + coef[3, 2] * c + coef[3, 3] * d + coef[3, 4] * e


@njit(cache=True, fastmath=False)
def shifted_states3_flat(w0, w1, w2, w3, coef, o1, o2, o3, o4):
    n = w0.size
    for i in range(n):
        a, b, c, d = w0[i], w1[i], w2[i], w3[i]
        o1[i] = a + coef[0, 1] * b + coef[0, 2] * c + coef[0, 3] * d
        o2[i] = a + coef[1, 1] * b + coef[1, 2] * c + coef[1, 3] * d
        o3[i] = a + coef[2, 1] * b + coef[2, 2] * c + coef[2, 3] * d
        o4[i] = a + coef[3, 1] * b + coef[3, 2] * c + coef[3, 3] * d


@njit(cache=True, fastmath=False)
def weighted_sum5_flat(g0, g1, g2, g3, g4, c1, c2, c3, c4, out):
    for i in range(g0.size):
        out[i] = g0[i] + c1 * g1[i] + c2 * g2[i] + c3 * g3[i] + c4 * g4[i]


@njit(cache=True, fastmath=False)
def weighted_sum4_flat(g0, g1, g2, g3, c1, c2, c3, out):
    for i in range(g0.size):
        out[i] = g0[i] + c1 * g1[i] + c2 * g2[i] + c3 * g3[i]


@njit(cache=True, fastmath=False)
def fd_combos_deg4_flat(a0, a1, am1, a2, am2, g1, g2, g3, g4):
    n = a0.size
    for i in range(n):
        v0, v1, vm1, v2, vm2 = a0[i], a1[i], am1[i], a2[i], am2[i]
        g1[i] = (-v2 + 8.0 * v1 - 8.0 * vm1 + vm2) / 12.0
        g2[i] = (-v2 + 16.0 * v1 - 30.0 * v0 + 16.0 * vm1 - vm2) / 12.0
        g3[i] = 0.5 * (v2 - 2.0 * v1 + 2.0 * vm1 - vm2)
        g4[i] = v2 - 4.0 * v1 + 6.0 * v0 - 4.0 * vm1 + vm2


@njit(cache=True, fastmath=False)
def fd_combos_deg3_flat(a0, a1, am1, a2, am2, g1, g2, g3):
    n = a0.size
    for i in range(n):
        v0, v1, vm1, v2, vm2 = a0[i], a1[i], am1[i], a2[i], am2[i]
        g1[i] = (-v2 + 8.0 * v1 - 8.0 * vm1 + vm2) / 12.0
        g2[i] = v1 - 2.0 * v0 + vm1
        g3[i] = 0.5 * (v2 - 2.0 * v1 + 2.0 * vm1 - vm2)


@njit(cache=True, fastmath=False)
def euler2d_mh_evolve(u, delta_x, delta_y, dm_x, dp_x, dm_y, dp_y,
                      wx, wy, dt, gamma,
                      umx, upx, umy, upy, uhmx, uhpx, uhmy, uhpy):
    """Fused reconstruction and half-step evolution on 2-D subcells.

    Geometry profiles are keyed per axis: dm_x/dp_x/wx have shape (nex, ns),
    dm_y/dp_y/wy shape (ney, ns). Writes the four reconstructed traces and
    their half-step evolutions.
    """
    nex, ney, nsa, nsb = u.shape[1], u.shape[2], u.shape[3], u.shape[4]
    gm1 = gamma - 1.0
    half = 0.5 * dt
    for ix in range(nex):
        for iy in range(ney):
            for ia in range(nsa):
                for ib in range(nsb):
                    dxm = dm_x[ix, ia]
                    dxp = dp_x[ix, ia]
                    dym = dm_y[iy, ib]
                    dyp = dp_y[iy, ib]
                    iwx = 1.0 / wx[ix, ia]
                    iwy = 1.0 / wy[iy, ib]
                    # reconstruct all four traces and accumulate d_t u
                    dtu0 = 0.0
                    dtu1 = 0.0
                    dtu2 = 0.0
                    dtu3 = 0.0
                    for direction in range(2):
                        if direction == 0:
                            d0 = delta_x[0, ix, iy, ia, ib]
                            d1 = delta_x[1, ix, iy, ia, ib]
                            d2 = delta_x[2, ix, iy, ia, ib]
                            d3 = delta_x[3, ix, iy, ia, ib]
                            om, op, inv_w = dxm, dxp, iwx
                        else:
                            d0 = delta_y[0, ix, iy, ia, ib]
                            d1 = delta_y[1, ix, iy, ia, ib]
                            d2 = delta_y[2, ix, iy, ia, ib]
                            d3 = delta_y[3, ix, iy, ia, ib]
                            om, op, inv_w = dym, dyp, iwy
                        r_m = u[0, ix, iy, ia, ib] + om * d0
                        mx_m = u[1, ix, iy, ia, ib] + om * d1
                        my_m = u[2, ix, iy, ia, ib] + om * d2
                        e_m = u[3, ix, iy, ia, ib] + om * d3
                        r_p = u[0, ix, iy, ia, ib] + op * d0
                        mx_p = u[1, ix, iy, ia, ib] + op * d1
                        my_p = u[2, ix, iy, ia, ib] + op * d2
                        e_p = u[3, ix, iy, ia, ib] + op * d3
                        p_m = gm1 * (e_m - 0.5 * (mx_m * mx_m + my_m * my_m) / r_m)
                        p_p = gm1 * (e_p - 0.5 * (mx_p * mx_p + my_p * my_p) / r_p)
                        if direction == 0:
                            vm = mx_m / r_m
                            vp = mx_p / r_p
                            dtu0 -= (mx_p - mx_m) * inv_w
                            dtu1 -= (p_p + mx_p * vp - (p_m + mx_m * vm)) * inv_w
                            dtu2 -= (my_p * vp - my_m * vm) * inv_w
                            dtu3 -= ((e_p + p_p) * vp - (e_m + p_m) * vm) * inv_w
                            umx[0, ix, iy, ia, ib] = r_m
                            umx[1, ix, iy, ia, ib] = mx_m
                            umx[2, ix, iy, ia, ib] = my_m
                            umx[3, ix, iy, ia, ib] = e_m
                            upx[0, ix, iy, ia, ib] = r_p
                            upx[1, ix, iy, ia, ib] = mx_p
                            upx[2, ix, iy, ia, ib] = my_p
                            upx[3, ix, iy, ia, ib] = e_p
                        else:
                            vm = my_m / r_m
                            vp = my_p / r_p
                            dtu0 -= (my_p - my_m) * inv_w
                            dtu1 -= (mx_p * vp - mx_m * vm) * inv_w
                            dtu2 -= (p_p + my_p * vp - (p_m + my_m * vm)) * inv_w
                            dtu3 -= ((e_p + p_p) * vp - (e_m + p_m) * vm) * inv_w
                            umy[0, ix, iy, ia, ib] = r_m
                            umy[1, ix, iy, ia, ib] = mx_m
                            umy[2, ix, iy, ia, ib] = my_m
                            umy[3, ix, iy, ia, ib] = e_m
                            upy[0, ix, iy, ia, ib] = r_p
                            upy[1, ix, iy, ia, ib] = mx_p
                            upy[2, ix, iy, ia, ib] = my_p
                            upy[3, ix, iy, ia, ib] = e_p
                    for v in range(4):
                        if v == 0:
                            inc = half * dtu0
                        elif v == 1:
                            inc = half * dtu1
                        elif v == 2:
                            inc = half * dtu2
                        else:
                            inc = half * dtu3
                        uhmx[v, ix, iy, ia, ib] = umx[v, ix, iy, ia, ib] + inc
                        uhpx[v, ix, iy, ia, ib] = upx[v, ix, iy, ia, ib] + inc
                        uhmy[v, ix, iy, ia, ib] = umy[v, ix, iy, ia, ib] + inc
                        uhpy[v, ix, iy, ia, ib] = upy[v, ix, iy, ia, ib] + inc


@njit(cache=True, fastmath=False)
def mh_slopes_1d(u_pad, inv_h1, inv_h2, c_m, c_0, c_p, beta, out):
    """Fused non-uniform slope estimates and three-argument minmod.

    u_pad: (nvar, ne, ns+2); geometry coefficient arrays (ne, ns); beta (ne,).
    """
    nvar, ne, ns2 = u_pad.shape
    ns = ns2 - 2
    for v in range(nvar):
        for e in range(ne):
            b = beta[e]
            for j in range(ns):
                um = u_pad[v, e, j]
                uc = u_pad[v, e, j + 1]
                up = u_pad[v, e, j + 2]
                a = b * (up - uc) * inv_h2[e, j]
                dcen = c_m[e, j] * um + c_0[e, j] * uc + c_p[e, j] * up
                c = b * (uc - um) * inv_h1[e, j]
                if a > 0.0 and dcen > 0.0 and c > 0.0:
                    m = min(a, min(dcen, c))
                elif a < 0.0 and dcen < 0.0 and c < 0.0:
                    m = max(a, max(dcen, c))
                else:
                    m = 0.0
                out[v, e, j] = m


@njit(cache=True, fastmath=False)
def euler1d_correct_flux(flux, flux_low, ul, ur, il, ir, cl, cr, gamma):
    """Fused admissibility correction of the shared face flux (in place).

    flux: (3, nf) candidate, scaled toward flux_low until both adjacent
    subcell updates keep density and pressure above a tenth of their
    pure-low-order values. Returns the count of faces whose pure low-order
    updates were inadmissible (a contract violation upstream).
    """
    nf = flux.shape[1]
    gm1 = gamma - 1.0
    bad = 0
    for i in range(nf):
        a_l, a_r = cl[i], cr[i]
        lowf0, lowf1, lowf2 = flux_low[0, i], flux_low[1, i], flux_low[2, i]
        # pure low-order updates on both sides
        ll0 = ul[0, i] - a_l * (lowf0 - il[0, i])
        ll1 = ul[1, i] - a_l * (lowf1 - il[1, i])
        ll2 = ul[2, i] - a_l * (lowf2 - il[2, i])
        lr0 = ur[0, i] - a_r * (ir[0, i] - lowf0)
        lr1 = ur[1, i] - a_r * (ir[1, i] - lowf1)
        lr2 = ur[2, i] - a_r * (ir[2, i] - lowf2)
        pl_low = gm1 * (ll2 - 0.5 * ll1 * ll1 / ll0)
        pr_low = gm1 * (lr2 - 0.5 * lr1 * lr1 / lr0)
        if not (ll0 > 0.0 and lr0 > 0.0 and pl_low > 0.0 and pr_low > 0.0
                and np.isfinite(pl_low) and np.isfinite(pr_low)):
            bad += 1
            continue
        f0, f1, f2 = flux[0, i], flux[1, i], flux[2, i]
        for k in range(2):
            # current updates with the candidate flux
            tl0 = ul[0, i] - a_l * (f0 - il[0, i])
            tl1 = ul[1, i] - a_l * (f1 - il[1, i])
            tl2 = ul[2, i] - a_l * (f2 - il[2, i])
            tr0 = ur[0, i] - a_r * (ir[0, i] - f0)
            tr1 = ur[1, i] - a_r * (ir[1, i] - f1)
            tr2 = ur[2, i] - a_r * (ir[2, i] - f2)
            if k == 0:
                p_cur_l, p_low_l = tl0, ll0
                p_cur_r, p_low_r = tr0, lr0
            else:
                p_cur_l = gm1 * (tl2 - 0.5 * tl1 * tl1 / tl0)
                p_low_l = pl_low
                p_cur_r = gm1 * (tr2 - 0.5 * tr1 * tr1 / tr0)
                p_low_r = pr_low
            theta = 1.0
            for p_cur, p_low in ((p_cur_l, p_low_l), (p_cur_r, p_low_r)):
                eps = 0.1 * p_low
                if p_cur < eps or not np.isfinite(p_cur):
                    den = p_low - p_cur
                    if den != 0.0 and np.isfinite(den):
                        rat = min(abs((eps - p_cur) / den),
                                  abs((p_low - eps) / den))
                        theta = min(theta, min(rat, 1.0))
                    else:
                        theta = 0.0
            if theta < 1.0:
                f0 = theta * f0 + (1.0 - theta) * lowf0
                f1 = theta * f1 + (1.0 - theta) * lowf1
                f2 = theta * f2 + (1.0 - theta) * lowf2
        flux[0, i], flux[1, i], flux[2, i] = f0, f1, f2
    return bad


@njit(cache=True, fastmath=False)
def euler1d_limit_slopes(u, delta, dm, dp, gamma):
    """1-D analogue of euler2d_limit_slopes; delta scaled in place.

    u, delta: (3, ne, ns); dm/dp: (ne, ns) signed face offsets.
    """
    ne, ns = u.shape[1], u.shape[2]
    gm1 = gamma - 1.0
    for e in range(ne):
        for j in range(ns):
            two_m = 2.0 * dm[e, j]
            two_p = 2.0 * dp[e, j]
            r = u[0, e, j]
            m = u[1, e, j]
            en = u[2, e, j]
            d0 = delta[0, e, j]
            d1 = delta[1, e, j]
            d2 = delta[2, e, j]
            eps = 0.1 * r
            sm = r + two_m * d0
            sp = r + two_p * d0
            th = 1.0
            if sm < eps:
                den = sm - r
                rat = abs((eps - r) / den) if den != 0.0 else 1.0
                th = min(th, min(rat, 1.0))
            if sp < eps:
                den = sp - r
                rat = abs((eps - r) / den) if den != 0.0 else 1.0
                th = min(th, min(rat, 1.0))
            if th < 1.0:
                d0 *= th
                d1 *= th
                d2 *= th
            p0 = gm1 * (en - 0.5 * m * m / r)
            eps = 0.1 * p0
            th = 1.0
            for sgn in (two_m, two_p):
                rr = r + sgn * d0
                mm = m + sgn * d1
                ee = en + sgn * d2
                ps = gm1 * (ee - 0.5 * mm * mm / rr)
                if ps < eps:
                    den = ps - p0
                    rat = abs((eps - p0) / den) if den != 0.0 else 1.0
                    th = min(th, min(rat, 1.0))
            if th < 1.0:
                d0 *= th
                d1 *= th
                d2 *= th
            delta[0, e, j] = d0
            delta[1, e, j] = d1
            delta[2, e, j] = d2


@njit(cache=True, fastmath=False)
def euler1d_mh_evolve(u, delta, dm, dp, widths, dt, gamma,
                      um, up, uhm, uhp):
    """Fused 1-D reconstruction and half-step evolution on subcells."""
    ne, ns = u.shape[1], u.shape[2]
    gm1 = gamma - 1.0
    half = 0.5 * dt
    for e in range(ne):
        for j in range(ns):
            r = u[0, e, j]
            m = u[1, e, j]
            en = u[2, e, j]
            d0 = delta[0, e, j]
            d1 = delta[1, e, j]
            d2 = delta[2, e, j]
            om = dm[e, j]
            op = dp[e, j]
            r_m, m_m, e_m = r + om * d0, m + om * d1, en + om * d2
            r_p, m_p, e_p = r + op * d0, m + op * d1, en + op * d2
            vm = m_m / r_m
            vp = m_p / r_p
            p_m = gm1 * (e_m - 0.5 * m_m * vm)
            p_p = gm1 * (e_p - 0.5 * m_p * vp)
            iw = 1.0 / widths[e, j]
            inc0 = -half * (m_p - m_m) * iw
            inc1 = -half * (p_p + m_p * vp - (p_m + m_m * vm)) * iw
            inc2 = -half * ((e_p + p_p) * vp - (e_m + p_m) * vm) * iw
            um[0, e, j] = r_m
            um[1, e, j] = m_m
            um[2, e, j] = e_m
            up[0, e, j] = r_p
            up[1, e, j] = m_p
            up[2, e, j] = e_p
            uhm[0, e, j] = r_m + inc0
            uhm[1, e, j] = m_m + inc1
            uhm[2, e, j] = e_m + inc2
            uhp[0, e, j] = r_p + inc0
            uhp[1, e, j] = m_p + inc1
            uhp[2, e, j] = e_p + inc2


@njit(cache=True, fastmath=False)
def euler_scaling_limit(u, weights, eps_floor, gamma):
    """Zhang-Shu style contraction toward admissible element means, fused.

    u: (nvar, ne, M) with M quadrature points per element and matching
    weights (M,); handles both 1-D (M = ns) and flattened 2-D (M = ns*ns)
    layouts. Returns 1 if any element mean is inadmissible, else 0.
    """
    nvar, ne, m = u.shape
    gm1 = gamma - 1.0
    bad = 0
    means = np.empty(nvar)
    for e in range(ne):
        for v in range(nvar):
            acc = 0.0
            for q in range(m):
                acc += weights[q] * u[v, e, q]
            means[v] = acc
        if nvar == 4:
            ke = 0.5 * (means[1] ** 2 + means[2] ** 2) / means[0]
            p_mean = gm1 * (means[3] - ke)
        else:
            ke = 0.5 * means[1] ** 2 / means[0]
            p_mean = gm1 * (means[2] - ke)
        if not (means[0] > 0.0 and p_mean > 0.0 and np.isfinite(p_mean)):
            bad = 1
            continue
        # density pass
        mean_r = means[0]
        eps = eps_floor if eps_floor < mean_r else mean_r
        theta = 1.0
        for q in range(m):
            rq = u[0, e, q]
            if rq < eps:
                den = mean_r - rq
                rat = abs((eps - mean_r) / den) if den != 0.0 else 1.0
                theta = min(theta, min(rat, 1.0))
        if theta < 1.0:
            for v in range(nvar):
                mv = means[v]
                for q in range(m):
                    u[v, e, q] = mv + theta * (u[v, e, q] - mv)
        # pressure pass
        eps = eps_floor if eps_floor < p_mean else p_mean
        theta = 1.0
        for q in range(m):
            if nvar == 4:
                pq = gm1 * (u[3, e, q] - 0.5 * (u[1, e, q] ** 2
                                                + u[2, e, q] ** 2) / u[0, e, q])
            else:
                pq = gm1 * (u[2, e, q] - 0.5 * u[1, e, q] ** 2 / u[0, e, q])
            if pq < eps:
                den = p_mean - pq
                rat = abs((eps - p_mean) / den) if den != 0.0 else 1.0
                theta = min(theta, min(rat, 1.0))
        if theta < 1.0:
            for v in range(nvar):
                mv = means[v]
                for q in range(m):
                    u[v, e, q] = mv + theta * (u[v, e, q] - mv)
    return bad


@njit(cache=True, fastmath=False)
def minmod3_flat(a, b, c, out):
    for i in range(a.size):
        x, y, z = a[i], b[i], c[i]
        if x > 0.0 and y > 0.0 and z > 0.0:
            m = min(x, min(y, z))
        elif x < 0.0 and y < 0.0 and z < 0.0:
            m = max(x, max(y, z))
        else:
            m = 0.0
        out[i] = m


@njit(cache=True, fastmath=False)
def euler2d_limit_slopes(u, delta, dm_x, dp_x, axis_x, gamma):
    """Admissibility slope limiting fused over both Euler constraints.

    u, delta: (4, nex, ney, ns, ns); dm_x/dp_x: per-axis signed face offsets,
    shape (nex, ns) for the x direction or (ney, ns) for y (axis_x selects
    which node index they key on). delta is scaled in place.
    """
    nex, ney, nsa, nsb = u.shape[1], u.shape[2], u.shape[3], u.shape[4]
    gm1 = gamma - 1.0
    for ix in range(nex):
        for iy in range(ney):
            for ia in range(nsa):
                for ib in range(nsb):
                    if axis_x:
                        two_m = 2.0 * dm_x[ix, ia]
                        two_p = 2.0 * dp_x[ix, ia]
                    else:
                        two_m = 2.0 * dm_x[iy, ib]
                        two_p = 2.0 * dp_x[iy, ib]
                    r = u[0, ix, iy, ia, ib]
                    mx = u[1, ix, iy, ia, ib]
                    my = u[2, ix, iy, ia, ib]
                    en = u[3, ix, iy, ia, ib]
                    d0 = delta[0, ix, iy, ia, ib]
                    d1 = delta[1, ix, iy, ia, ib]
                    d2 = delta[2, ix, iy, ia, ib]
                    d3 = delta[3, ix, iy, ia, ib]
                    # density pass
                    eps = 0.1 * r
                    sm = r + two_m * d0
                    sp = r + two_p * d0
                    th = 1.0
                    if sm < eps:
                        den = sm - r
                        rat = abs((eps - r) / den) if den != 0.0 else 1.0
                        th = min(th, min(rat, 1.0))
                    if sp < eps:
                        den = sp - r
                        rat = abs((eps - r) / den) if den != 0.0 else 1.0
                        th = min(th, min(rat, 1.0))
                    if th < 1.0:
                        d0 *= th
                        d1 *= th
                        d2 *= th
                        d3 *= th
                    # pressure pass
                    p0 = gm1 * (en - 0.5 * (mx * mx + my * my) / r)
                    eps = 0.1 * p0
                    th = 1.0
                    for sgn in (two_m, two_p):
                        rr = r + sgn * d0
                        mmx = mx + sgn * d1
                        mmy = my + sgn * d2
                        ee = en + sgn * d3
                        ps = gm1 * (ee - 0.5 * (mmx * mmx + mmy * mmy) / rr)
                        if ps < eps:
                            den = ps - p0
                            rat = abs((eps - p0) / den) if den != 0.0 else 1.0
                            th = min(th, min(rat, 1.0))
                    if th < 1.0:
                        d0 *= th
                        d1 *= th
                        d2 *= th
                        d3 *= th
                    delta[0, ix, iy, ia, ib] = d0
                    delta[1, ix, iy, ia, ib] = d1
                    delta[2, ix, iy, ia, ib] = d2
                    delta[3, ix, iy, ia, ib] = d3
