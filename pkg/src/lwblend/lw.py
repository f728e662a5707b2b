"""Single-stage high-order residual: time-averaged fluxes and correction.

The core of the scheme is the per-element time-averaged flux, built by a
Jacobian-free procedure: temporal derivatives of the solution come from the
collocation spatial derivative of flux time-derivatives, and flux
time-derivatives come from central finite differences of the flux evaluated
at Taylor-shifted states. Interface values combine a face-evaluated
time-averaged flux (central part) with dissipation on the time-averaged
solution trace.

Degree N in {1,..,4} is supported; the truncation of each nested stage is
chosen so the one-step error is O(dt^(N+2)), which the convergence tests in
the suite verify directly.

Shapes: nodal states are ``(nvar, *elem, ns)`` in 1-D and
``(nvar, *elem, ns, ns)`` in 2-D, with ``elem`` any element-block shape.
"""

import math as _math

import numpy as np

from . import _kernels

# inverse factorials 1/(m+1)! weighting each temporal derivative in the
# time average
_AVG_W = [1.0, 1.0 / 2.0, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0]

SUPPORTED_DEGREES = (1, 2, 3, 4)


def _check_degree(degree):
    if degree not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported degree {degree}; supported: {SUPPORTED_DEGREES}")


# Taylor coefficients of the shifted states u(t + r dt) for the pseudo-time
# stencil r = (1, -1, 2, -2): _SHIFT_COEF[N][i, m] = r_i^m / m!
_SHIFT_R = (1.0, -1.0, 2.0, -2.0)
_SHIFT_COEF = {
    n: np.array([[r**m / _math.factorial(m) for m in range(n + 1)]
                 for r in _SHIFT_R])
    for n in (1, 2, 3, 4)
}


def _shifted_states(ws, nstates=4):
    """Taylor states u(t + r dt) for r = 1, -1, 2, -2 (list of arrays)."""
    degree = len(ws) - 1
    coef = _SHIFT_COEF[degree]
    if (_kernels.HAVE_NUMBA and nstates == 4 and degree >= 3
            and all(w.flags.c_contiguous for w in ws)):
        outs = [np.empty_like(ws[0]) for _ in range(4)]
        flats = [w.reshape(-1) for w in ws]
        oflats = [o.reshape(-1) for o in outs]
        if degree == 4:
            _kernels.shifted_states4_flat(*flats, coef, *oflats)
        else:
            _kernels.shifted_states3_flat(*flats, coef, *oflats)
        return outs
    out = []
    for i in range(nstates):
        s = ws[0] + coef[i, 1] * ws[1]
        for m in range(2, degree + 1):
            s += coef[i, m] * ws[m]
        out.append(s)
    return out


def taylor_flux_series(ws, flux):
    """Scaled flux time-derivative series g_m ~ dt^m d_t^m f from states ws.

    ws is the list [w_0, .., w_N] of scaled solution derivatives
    w_m ~ dt^m d_t^m u at a common set of points; flux evaluates the physical
    flux at a state. Central pseudo-time finite differences at the shifted
    states u(t + r dt) ~ sum_m r^m w_m / m! give each derivative with the
    accuracy the overall order needs. Returns the list [g_0, .., g_N].
    """
    degree = len(ws) - 1
    g0 = flux(ws[0])
    if degree == 0:
        return [g0]
    if degree <= 2:
        s1, sm1 = _shifted_states(ws, nstates=2)
        fp, fm = flux(s1), flux(sm1)
        if degree == 1:
            return [g0, 0.5 * (fp - fm)]
        return [g0, 0.5 * (fp - fm), fp - 2.0 * g0 + fm]
    # degrees 3 and 4 use a five-point stencil in pseudo-time
    s1, sm1, s2, sm2 = _shifted_states(ws)
    f1, fm1, f2, fm2 = flux(s1), flux(sm1), flux(s2), flux(sm2)
    return [g0] + _fd_combos(degree, g0, f1, fm1, f2, fm2)


def _fd_combos(degree, a0, a1, am1, a2, am2):
    """Finite-difference combinations of the five-point pseudo-time stencil."""
    if (_kernels.HAVE_NUMBA and a0.flags.c_contiguous
            and a1.flags.c_contiguous and am1.flags.c_contiguous
            and a2.flags.c_contiguous and am2.flags.c_contiguous):
        nout = 4 if degree == 4 else 3
        outs = [np.empty_like(a0) for _ in range(nout)]
        flats = [x.reshape(-1) for x in (a0, a1, am1, a2, am2)]
        oflats = [o.reshape(-1) for o in outs]
        if degree == 4:
            _kernels.fd_combos_deg4_flat(*flats, *oflats)
        else:
            _kernels.fd_combos_deg3_flat(*flats, *oflats)
        return outs
    c1 = (-a2 + 8.0 * a1 - 8.0 * am1 + am2) / 12.0
    c3 = 0.5 * (a2 - 2.0 * a1 + 2.0 * am1 - am2)
    if degree == 3:
        return [c1, a1 - 2.0 * a0 + am1, c3]
    c2 = (-a2 + 16.0 * a1 - 30.0 * a0 + 16.0 * am1 - am2) / 12.0
    c4 = a2 - 4.0 * a1 + 6.0 * a0 - 4.0 * am1 + am2
    return [c1, c2, c3, c4]


def taylor_flux_series_both(ws, flux_both):
    """Both directional flux series from one shared set of Taylor states."""
    degree = len(ws) - 1
    f0, g0 = flux_both(ws[0])
    if degree == 0:
        return [f0], [g0]
    if degree <= 2:
        s1, sm1 = _shifted_states(ws, nstates=2)
        fp, gp = flux_both(s1)
        fm, gm = flux_both(sm1)
        if degree == 1:
            return [f0, 0.5 * (fp - fm)], [g0, 0.5 * (gp - gm)]
        return ([f0, 0.5 * (fp - fm), fp - 2.0 * f0 + fm],
                [g0, 0.5 * (gp - gm), gp - 2.0 * g0 + gm])
    s1, sm1, s2, sm2 = _shifted_states(ws)
    f1, g1 = flux_both(s1)
    fm1, gm1 = flux_both(sm1)
    f2, g2 = flux_both(s2)
    fm2, gm2 = flux_both(sm2)
    return ([f0] + _fd_combos(degree, f0, f1, fm1, f2, fm2),
            [g0] + _fd_combos(degree, g0, g1, gm1, g2, gm2))


def time_average(series):
    """Collapse a derivative series into its time average sum_m g_m/(m+1)!."""
    n = len(series)
    if (_kernels.HAVE_NUMBA and n >= 4
            and all(g.flags.c_contiguous for g in series)):
        out = np.empty_like(series[0])
        flats = [g.reshape(-1) for g in series]
        if n == 5:
            _kernels.weighted_sum5_flat(*flats, _AVG_W[1], _AVG_W[2],
                                        _AVG_W[3], _AVG_W[4], out.reshape(-1))
        else:
            _kernels.weighted_sum4_flat(*flats, _AVG_W[1], _AVG_W[2],
                                        _AVG_W[3], out.reshape(-1))
        return out
    out = series[0].copy()
    for m in range(1, n):
        out += _AVG_W[m] * series[m]
    return out


def solution_derivatives_1d(u, lam, basis, eq, coords=None):
    """Scaled temporal solution derivatives [w_0..w_N] for 1-D elements.

    lam = dt / dx broadcastable over the element axes; the spatial
    derivative is the collocation derivative on each element. The nesting
    refines intermediate flux derivatives enough for the one-step error to
    stay at O(dt^(N+2)); degree 4 recomputes the first derivative on a
    wide stencil before forming the curvature terms.
    """
    degree = basis.degree
    _check_degree(degree)
    DT = basis.diff_matrix_t

    def ddx(arr):
        return lam * (arr @ DT)

    def flux(state):
        return eq.flux(state, 0, coords)

    ws = [u]
    f0 = flux(u)
    ws.append(-ddx(f0))
    if degree == 1:
        return ws

    g1a = 0.5 * (flux(u + ws[1]) - flux(u - ws[1]))
    ws.append(-ddx(g1a))
    if degree == 2:
        return ws

    half_w2 = 0.5 * ws[2]
    g2a = flux(u + ws[1] + half_w2) - 2.0 * f0 + flux(u - ws[1] + half_w2)
    ws.append(-ddx(g2a))
    if degree == 3:
        return ws

    # degree 4: rebuild w2 from a fourth-order stencil, then w4
    s1, sm1, s2, sm2 = _shifted_states(ws)
    f1, fm1, f2, fm2 = flux(s1), flux(sm1), flux(s2), flux(sm2)
    g1b = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / 12.0
    ws[2] = -ddx(g1b)
    g3a = 0.5 * (f2 - 2.0 * f1 + 2.0 * fm1 - fm2)
    ws.append(-ddx(g3a))
    return ws


def solution_derivatives_2d(u, lamx, lamy, basis, eq, coords=None):
    """Scaled temporal solution derivatives for 2-D tensor-product elements.

    Same nesting as 1-D, with d_t u = -(f_x + g_y) assembled from the two
    collocation derivatives; flux time-derivative series are formed for both
    flux components at the shared Taylor states.
    """
    degree = basis.degree
    _check_degree(degree)
    D = basis.diff_matrix
    DT = basis.diff_matrix_t

    def div(f, g):
        # f differentiates along the x-node axis (-2), g along y (-1)
        return lamx * np.matmul(D, f) + lamy * (g @ DT)

    def both(state):
        return eq.flux_both(state, coords)

    ws = [u]
    f0, g0 = both(u)
    ws.append(-div(f0, g0))
    if degree == 1:
        return ws

    fp, gp = both(u + ws[1])
    fm, gm = both(u - ws[1])
    ws.append(-div(0.5 * (fp - fm), 0.5 * (gp - gm)))
    if degree == 2:
        return ws

    half_w2 = 0.5 * ws[2]
    fp2, gp2 = both(u + ws[1] + half_w2)
    fm2, gm2 = both(u - ws[1] + half_w2)
    ws.append(-div(fp2 - 2.0 * f0 + fm2, gp2 - 2.0 * g0 + gm2))
    if degree == 3:
        return ws

    s1, sm1, s2, sm2 = _shifted_states(ws)
    f1, g1 = both(s1)
    fm1, gm1 = both(sm1)
    f2, g2 = both(s2)
    fm2, gm2 = both(sm2)
    ws[2] = -div((-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / 12.0,
                 (-g2 + 8.0 * g1 - 8.0 * gm1 + gm2) / 12.0)
    ws.append(-div(0.5 * (f2 - 2.0 * f1 + 2.0 * fm1 - fm2),
                   0.5 * (g2 - 2.0 * g1 + 2.0 * gm1 - gm2)))
    return ws


def extrapolate(ws, vec):
    """Apply a boundary interpolation vector to each derivative array (1-D)."""
    return [w @ vec for w in ws]


def extrapolate_x(ws, vec):
    """Trace of each derivative on a constant-x face of a 2-D element."""
    return [np.matmul(vec, w) for w in ws]


def face_flux_and_trace(ws_face, eq, axis=0, coords=None):
    """Time-averaged flux and solution evaluated from face derivative traces.

    Performing the pseudo-time differencing at the face itself keeps the
    central flux, the dissipation trace and the nodal flux mutually
    consistent: for a linear flux both reduce exactly to flux(U), U the
    time-averaged solution trace.
    """
    series = taylor_flux_series(ws_face, lambda s: eq.flux(s, axis, coords))
    return time_average(series), time_average(ws_face)


def interface_flux(fl, ul_now, fr, ur_now, ul_avg, ur_avg, eq, axis=0, coords=None):
    """Interface time-averaged flux: central face average plus dissipation.

    fl/fr are the face-evaluated time-averaged fluxes from the two sides,
    ul_avg/ur_avg the time-averaged solution traces, and the dissipation
    speed comes from the current solution traces ul_now/ur_now.
    """
    lam = eq.sigma(ul_now, ur_now, axis, coords)
    return 0.5 * (fl + fr) - 0.5 * lam * (ur_avg - ul_avg)


def element_residual_1d(flux_nodal, face_left, face_right, basis, inv_dx):
    """Nodal residual with flux-reconstruction correction terms.

    flux_nodal is the discontinuous time-averaged flux at solution points,
    face_left/face_right the (already corrected) interface fluxes. The
    update is u - dt * residual.
    """
    fd0 = flux_nodal @ basis.interp_left
    fd1 = flux_nodal @ basis.interp_right
    out = flux_nodal @ basis.diff_matrix_t
    out += (face_left - fd0)[..., None] * basis.correction_grad_left
    out += (face_right - fd1)[..., None] * basis.correction_grad_right
    return inv_dx * out


def element_residual_2d(flux_x, flux_y, fx_left, fx_right, gy_left, gy_right,
                        basis, inv_dx, inv_dy):
    """Tensor-product residual: the 1-D correction applied per direction."""
    D = basis.diff_matrix
    bl, br = basis.interp_left, basis.interp_right
    gl, gr = basis.correction_grad_left, basis.correction_grad_right

    fd0 = np.matmul(bl, flux_x)
    fd1 = np.matmul(br, flux_x)
    rx = np.matmul(D, flux_x)
    rx += (fx_left - fd0)[..., None, :] * gl[:, None]
    rx += (fx_right - fd1)[..., None, :] * gr[:, None]

    gd0 = flux_y @ bl
    gd1 = flux_y @ br
    ry = flux_y @ basis.diff_matrix_t
    ry += (gy_left - gd0)[..., None] * gl
    ry += (gy_right - gd1)[..., None] * gr

    return inv_dx * rx + inv_dy * ry
