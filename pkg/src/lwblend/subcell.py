"""Low-order solvers on the quadrature-weight subcell grid.

Each element is split into N+1 subcells whose widths are the quadrature
weights scaled by the element width, so that subcell updates and the
high-order update share their element mean. The first-order scheme uses
two-point fluxes between neighbouring solution points; the MUSCL-Hancock
scheme reconstructs limited linear profiles on the (non-cell-centered)
subcells, evolves face traces half a step and applies the numerical flux to
the evolved traces.
"""

from dataclasses import dataclass

import numpy as np

from .basis import Basis
from .equations import AdmissibilityError
from .limiting import minmod


@dataclass(frozen=True)
class SubcellGrid:
    """Subcell geometry induced by a basis on an element of width dx."""

    faces: np.ndarray        # ns+1 physical face offsets from the left edge
    centers: np.ndarray      # solution point offsets
    widths: np.ndarray       # w_j * dx
    mu_minus: np.ndarray     # (x_{j+1/2} - x_j) / width_j
    mu_plus: np.ndarray      # (x_j - x_{j-1/2}) / width_j


def build_subcell_grid(basis: Basis, dx: float = 1.0) -> SubcellGrid:
    faces = np.concatenate([[0.0], np.cumsum(basis.weights)]) * dx
    centers = basis.nodes * dx
    widths = basis.weights * dx
    mu_minus = (faces[1:] - centers) / widths
    mu_plus = (centers - faces[:-1]) / widths
    return SubcellGrid(faces, centers, widths, mu_minus, mu_plus)


def admissibility_cfl_coefficient(basis: Basis) -> float:
    """A-priori CFL coefficient (relative to the element width) below which
    the half-step restrictions are met: half of the smallest of
    (x_j - x_{j-1/2}) w_j, attained at the first node."""
    return 0.5 * basis.nodes[0] * basis.weights[0]


def fo_inner_fluxes(u, eq, axis=0, node_axis=-1, coords=None):
    """Two-point fluxes between adjacent solution points inside an element."""
    lo = _take_slice(u, node_axis, slice(None, -1))
    hi = _take_slice(u, node_axis, slice(1, None))
    return eq.rusanov(lo, hi, axis, coords)


def _take_slice(arr, axis, sl):
    idx = [slice(None)] * arr.ndim
    idx[axis % arr.ndim] = sl
    return arr[tuple(idx)]


def subcell_residual_1d(inner, face_left, face_right, widths):
    """Residual of the subcell update from inner and interface fluxes.

    inner has the ns-1 fluxes between solution points; the element faces
    carry the shared interface fluxes. The update is u - dt * residual and
    its mean depends only on the interface fluxes.
    """
    stack = np.concatenate(
        [face_left[..., None], inner, face_right[..., None]], axis=-1)
    return np.diff(stack, axis=-1) / widths


def limit_slopes(u, delta, dminus, dplus, eq):
    """Scale slopes so twice-extrapolated face values stay admissible.

    For each ordered constraint, the factor keeps
    p_k(u + 2 (x_{j +- 1/2} - x_j) delta) at or above p_k(u)/10. The scaled
    state is a convex combination with u, so concavity makes every earlier
    constraint persist.
    """
    if eq.nconstraints == 0:
        return delta
    two_m = 2.0 * dminus
    two_p = 2.0 * dplus
    for k in range(eq.nconstraints):
        pk = eq.constraint(u, k)
        eps = 0.1 * pk
        star_m = eq.constraint(u + two_m * delta, k)
        star_p = eq.constraint(u + two_p * delta, k)
        if np.min(star_m - eps) >= 0.0 and np.min(star_p - eps) >= 0.0:
            continue
        theta = np.minimum(_safe_theta(pk, eps, star_m),
                           _safe_theta(pk, eps, star_p))
        delta = theta * delta
    return delta


def _safe_theta(p_safe, eps, p_bad):
    """Scaling factor keeping the convex combination above eps.

    1 where the tested value already satisfies the bound; otherwise the
    ratio |(eps - p_safe) / (p_bad - p_safe)|, which by concavity restores
    p >= eps exactly.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = p_bad - p_safe
        ratio = np.abs((eps - p_safe) / np.where(denom == 0.0, 1.0, denom))
    return np.where(p_bad < eps, np.minimum(ratio, 1.0), 1.0)


def slope_coefficients(x_pad):
    """Stencil coefficients of the three slope estimates on fixed positions.

    Returns (inv_h1, inv_h2, c_minus, c_center, c_plus); the geometry is
    static per mesh, so solvers precompute this once.
    """
    h1 = x_pad[..., 1:-1] - x_pad[..., :-2]
    h2 = x_pad[..., 2:] - x_pad[..., 1:-1]
    return (1.0 / h1, 1.0 / h2, -h2 / (h1 * (h1 + h2)),
            (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)))


def mh_slopes(u_pad, x_pad, beta, coeffs=None):
    """Limited slopes of the non-uniform central/one-sided differences.

    u_pad carries one ghost node on each side along the last axis; x_pad the
    matching positions (broadcastable). beta in [1, 2] biases towards the
    second-order central slope.
    """
    from . import _kernels

    if coeffs is None:
        coeffs = slope_coefficients(x_pad)
    inv_h1, inv_h2, c_m, c_0, c_p = coeffs
    beta_arr = np.asarray(beta)
    if (_kernels.HAVE_NUMBA and u_pad.ndim == 3 and u_pad.flags.c_contiguous
            and inv_h1.ndim == 2 and beta_arr.ndim == 2
            and beta_arr.shape[1] == 1):
        out = np.empty(u_pad.shape[:-1] + (u_pad.shape[-1] - 2,))
        _kernels.mh_slopes_1d(u_pad, *(np.ascontiguousarray(c) for c in coeffs),
                              np.ascontiguousarray(beta_arr[:, 0]), out)
        return out
    um = u_pad[..., :-2]
    uc = u_pad[..., 1:-1]
    up = u_pad[..., 2:]
    d_plus = (up - uc) * inv_h2
    d_minus = (uc - um) * inv_h1
    d_c = c_m * um + c_0 * uc + c_p * up
    return minmod(beta * d_plus, d_c, beta * d_minus)


def mh_pass_1d(u_pad, x_pad, dminus, dplus, widths, beta, dt, eq,
               coords_m=None, coords_p=None, limit=True, keep_states=False,
               slope_coeffs=None):
    """Reconstruct, limit, evolve and flux one line of elements.

    u_pad: (nvar, ne, ns+2) nodal values with one neighbour node per side;
    x_pad: matching positions; dminus/dplus: signed face offsets from the
    node; widths: subcell widths. Returns a dict with the ns-1 inner fluxes
    and the two evolved boundary traces each element contributes to its
    interface fluxes.
    """
    from . import _kernels

    delta = mh_slopes(u_pad, x_pad, beta, slope_coeffs)
    u = np.ascontiguousarray(u_pad[..., 1:-1])
    fused = (_kernels.HAVE_NUMBA and eq.nvar == 3 and eq.nconstraints == 2
             and hasattr(eq, "gamma") and not keep_states
             and coords_m is None and delta.flags.c_contiguous
             and u.ndim == 3)
    if fused:
        dm = np.ascontiguousarray(np.broadcast_to(dminus, u.shape[1:]))
        dp = np.ascontiguousarray(np.broadcast_to(dplus, u.shape[1:]))
        wd = np.ascontiguousarray(np.broadcast_to(widths, u.shape[1:]))
        if limit:
            _kernels.euler1d_limit_slopes(u, delta, dm, dp, eq.gamma)
        um, up, uhm, uhp = (np.empty_like(u) for _ in range(4))
        _kernels.euler1d_mh_evolve(u, delta, dm, dp, wd, dt, eq.gamma,
                                   um, up, uhm, uhp)
    else:
        if limit:
            delta = limit_slopes(u, delta, dminus, dplus, eq)
        um = u + dminus * delta
        up = u + dplus * delta
        dtu = -(eq.flux(up, 0, coords_p) - eq.flux(um, 0, coords_m)) / widths
        uhm = um + 0.5 * dt * dtu
        uhp = up + 0.5 * dt * dtu
    inner = eq.rusanov(uhp[..., :-1], uhm[..., 1:], 0,
                       None if coords_p is None else coords_p[..., :-1])
    out = {
        "inner": inner,
        "trace_left": uhm[..., 0],    # element's contribution to its left face
        "trace_right": uhp[..., -1],  # and to its right face
    }
    if keep_states:
        out.update(delta=delta, um=um, up=up, uhm=uhm, uhp=uhp)
    return out


def _limit_slopes_2d(u, delta, dminus, dplus, along_x, eq):
    """Directional slope limiting; fused kernel for the Euler system."""
    from . import _kernels

    profile_ok = (dminus.ndim == 4 and dminus.shape[1 if along_x else 0] == 1
                  and dminus.shape[3 if along_x else 2] == 1)
    if (_kernels.HAVE_NUMBA and eq.nconstraints == 2 and eq.nvar == 4
            and hasattr(eq, "gamma") and profile_ok
            and delta.flags.c_contiguous):
        if along_x:
            dm = np.ascontiguousarray(dminus[:, 0, :, 0])
            dp = np.ascontiguousarray(dplus[:, 0, :, 0])
        else:
            dm = np.ascontiguousarray(dminus[0, :, 0, :])
            dp = np.ascontiguousarray(dplus[0, :, 0, :])
        _kernels.euler2d_limit_slopes(u, delta, dm, dp, along_x, eq.gamma)
        return delta
    return limit_slopes(u, delta, dminus, dplus, eq)


def mh_pass_2d(u_padx, u_pady, x_padx, y_pady, dminus_x, dplus_x, dminus_y,
               dplus_y, widths_x, widths_y, beta, dt, eq, limit=True,
               keep_states=False, slope_coeffs_x=None, slope_coeffs_y=None):
    """2-D MUSCL-Hancock pass on tensor-product subcells.

    Directional slopes are limited independently; the half-step evolution
    combines both flux divergences. Inputs are padded along the respective
    node axes (x pads axis -2, y pads axis -1).
    """
    if slope_coeffs_x is None:
        xp = np.swapaxes(x_padx, -2, -1)
        slope_coeffs_x = tuple(np.swapaxes(c, -2, -1)
                               for c in slope_coefficients(xp))
    inv_h1, inv_h2, c_m, c_0, c_p = slope_coeffs_x
    um_ = u_padx[..., :-2, :]
    uc_ = u_padx[..., 1:-1, :]
    up_ = u_padx[..., 2:, :]
    dx_plus = (up_ - uc_) * inv_h2
    dx_minus = (uc_ - um_) * inv_h1
    dx_c = c_m * um_ + c_0 * uc_ + c_p * up_
    delta_x = minmod(beta * dx_plus, dx_c, beta * dx_minus)

    delta_y = mh_slopes(u_pady, y_pady, beta, slope_coeffs_y)

    u = np.ascontiguousarray(u_padx[..., 1:-1, :])
    if limit:
        delta_x = _limit_slopes_2d(u, delta_x, dminus_x, dplus_x, True, eq)
        delta_y = _limit_slopes_2d(u, delta_y, dminus_y, dplus_y, False, eq)

    from . import _kernels

    fused = (_kernels.HAVE_NUMBA and eq.nvar == 4 and eq.nconstraints == 2
             and hasattr(eq, "gamma") and not keep_states
             and dminus_x.ndim == 4 and dminus_x.shape[1] == 1
             and dminus_y.shape[0] == 1
             and delta_x.flags.c_contiguous and delta_y.flags.c_contiguous)
    if fused:
        traces = [np.empty_like(u) for _ in range(8)]
        _kernels.euler2d_mh_evolve(
            u, delta_x, delta_y,
            np.ascontiguousarray(dminus_x[:, 0, :, 0]),
            np.ascontiguousarray(dplus_x[:, 0, :, 0]),
            np.ascontiguousarray(dminus_y[0, :, 0, :]),
            np.ascontiguousarray(dplus_y[0, :, 0, :]),
            np.ascontiguousarray(widths_x[:, 0, :, 0]),
            np.ascontiguousarray(widths_y[0, :, 0, :]),
            dt, eq.gamma, *traces)
        umx, upx, umy, upy, uhmx, uhpx, uhmy, uhpy = traces
    else:
        umx = u + dminus_x * delta_x
        upx = u + dplus_x * delta_x
        umy = u + dminus_y * delta_y
        upy = u + dplus_y * delta_y

        dtu = -(eq.flux(upx, 0) - eq.flux(umx, 0)) / widths_x \
            - (eq.flux(upy, 1) - eq.flux(umy, 1)) / widths_y
        half = 0.5 * dt
        uhmx = umx + half * dtu
        uhpx = upx + half * dtu
        uhmy = umy + half * dtu
        uhpy = upy + half * dtu

    out = {
        "inner_x": eq.rusanov(uhpx[..., :-1, :], uhmx[..., 1:, :], 0),
        "inner_y": eq.rusanov(uhpy[..., :-1], uhmy[..., 1:], 1),
        "trace_left": uhmx[..., 0, :],
        "trace_right": uhpx[..., -1, :],
        "trace_bottom": uhmy[..., 0],
        "trace_top": uhpy[..., -1],
    }
    if keep_states:
        out.update(delta_x=delta_x, delta_y=delta_y, umx=umx, upx=upx,
                   umy=umy, upy=upy, uhmx=uhmx, uhpx=uhpx, uhmy=uhmy,
                   uhpy=uhpy, dtu=dtu)
    return out


def mh_cfl_diagnostic(u, um, up, uhm, uhp, widths, mu_minus, mu_plus, dt, eq,
                      periodic=True, sampled_speeds=False):
    """Largest left-hand side over every admissibility time-step inequality.

    Operates on one flat line of subcells (last axis). Returns
    (satisfied, max_ratio); inadmissible intermediate states make the
    diagnostic fail with an infinite ratio rather than raising. With
    sampled_speeds the two-point wave speed estimate is tightened by
    sampling the connecting segment.
    """
    from .equations import sigma_segment

    delta2 = 2.0 * (up - u)  # 2 (x_{j+1/2} - x_j) delta
    star_p = u + delta2
    star_m = u + 2.0 * (um - u)
    uh_star = 2.0 * u - mu_minus * uhm - mu_plus * uhp

    def sig(a, b):
        try:
            if sampled_speeds:
                return sigma_segment(eq, a, b)
            return eq.sigma(a, b)
        except AdmissibilityError:
            return np.full(a.shape[1:], np.inf)

    lam_m = dt / (mu_minus * widths)
    lam_p = dt / (mu_plus * widths)
    lam = dt / widths
    ratios = [
        # half-step evolution bounds, both trace variants
        lam_m * sig(um, star_m), lam_m * sig(um, star_p),
        lam_p * sig(star_m, up), lam_p * sig(star_p, up),
        # centre-state bound specialized to conservative reconstruction
        lam_m * sig(u, um), lam_p * sig(up, u),
        # full-step bounds on evolved states
        2.0 * lam_m * sig(uhm, uh_star),
        2.0 * lam * sig(uh_star, uhp),
        2.0 * lam * sig(uhm, uh_star),
        2.0 * lam_p * sig(uh_star, uhp),
    ]
    # neighbour coupling terms
    if periodic:
        prev_uhp = np.roll(uhp, 1, axis=-1)
        next_uhm = np.roll(uhm, -1, axis=-1)
        ratios.append(2.0 * lam_m * sig(prev_uhp, uhm))
        ratios.append(2.0 * lam_p * sig(uhp, next_uhm))
    else:
        ratios.append(2.0 * lam_m[..., 1:] * sig(uhp[..., :-1], uhm[..., 1:]))
        ratios.append(2.0 * lam_p[..., :-1] * sig(uhp[..., :-1], uhm[..., 1:]))
    max_ratio = max(float(np.max(r)) for r in ratios)
    return max_ratio <= 1.0, max_ratio
