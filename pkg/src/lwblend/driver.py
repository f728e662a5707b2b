"""Time loop, solvers and run orchestration.

One step follows the same sequence in 1-D and 2-D: compute the blending
coefficients, assemble the high-order and subcell residuals element by
element while storing the inner low-order fluxes next to the element faces,
build and correct the shared interface fluxes in a face pass, add the face
contributions, update, and restore nodal admissibility with the scaling
limiter. Admissibility failures retry the whole step with half the time
step a bounded number of times.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import lw
from .basis import Basis, build_basis
from .equations import AdmissibilityError
from .fluxcorr import (audit_mean_agreement, blend_candidate,
                       correct_interface_flux)
from .limiting import (IndicatorConfig, clip_alpha, indicator_quantity,
                       scaling_limit, smooth_alpha_1d, smooth_alpha_2d,
                       smoothness_alpha, tvb_limit)
from .mesh import BoundarySet1D, BoundarySet2D, Mesh1D, Mesh2D
from .subcell import (fo_inner_fluxes, mh_pass_1d, mh_pass_2d,
                      slope_coefficients)

DEFAULT_CFL = {1: 0.259, 2: 0.170, 3: 0.103, 4: 0.069}

LIMITERS = ("blend-fo", "blend-mh", "tvb", "none")


@dataclass
class TimeConfig:
    safety: float = 0.98
    tend: float = 1.0
    cfl_table: dict = field(default_factory=lambda: dict(DEFAULT_CFL))
    fixed_dt: float | None = None

    def __post_init__(self):
        if not (0.0 < self.safety <= 1.0):
            raise ValueError("safety factor must lie in (0, 1]")

    def cfl(self, degree: int) -> float:
        try:
            return self.cfl_table[degree]
        except KeyError:
            raise ValueError(f"no CFL number configured for degree {degree}")


@dataclass
class SolverOptions:
    limiter: str = "blend-mh"
    indicator: IndicatorConfig = field(default_factory=IndicatorConfig)
    tvb_m: float = 0.0
    tvb_characteristic: bool = True
    flux_correction: bool = True
    scaling_limiter: bool = True
    audit: bool = False
    audit_tol: float = 1e-13
    max_retries: int = 3
    kx: float = 0.5        # 2-D directional split weight
    ksplit: str = "half"   # or "wavespeed"
    include_ghost_dt: bool = False
    interface_flux: str = "rusanov"  # or "hllc" for the low-order face flux

    def __post_init__(self):
        if self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}; choose from {LIMITERS}")

    @property
    def blending(self) -> bool:
        return self.limiter in ("blend-fo", "blend-mh")


@dataclass
class StepDiagnostics:
    dt: float
    retries: int
    alpha_max: float
    alpha_active_fraction: float


def _admissible_or(eq, trace, fallback):
    """Trace values with inadmissible entries replaced by nodal neighbours.

    Polynomial traces can overshoot out of the admissible set next to strong
    discontinuities; the dissipation speed then falls back to the adjacent
    solution point value, which the scaling limiter keeps admissible.
    """
    if eq.nconstraints == 0:
        return trace
    ok = np.isfinite(trace).all(axis=0)
    for pk in eq.constraints(trace):
        ok &= pk > 0.0
    if ok.all():
        return trace
    return np.where(ok[None], trace, fallback)


class _SolverBase:
    def __init__(self, eq, basis, options, time_config):
        self.eq = eq
        self.basis = basis
        self.options = options
        self.time_config = time_config
        if options.limiter == "tvb" and eq.nconstraints > 0 and options.flux_correction:
            # the admissibility correction needs the subcell machinery;
            # with the TVB limiter the scheme runs uncorrected
            self.options = replace(options, flux_correction=False,
                                   scaling_limiter=False)

    def _numflux(self, ul, ur, axis=0, coords=None):
        if self.options.interface_flux == "hllc":
            return self.eq.hllc(ul, ur, axis, coords)
        return self.eq.rusanov(ul, ur, axis, coords)

    def step(self, u, t, dt):
        """Advance one step, retrying with halved dt on admissibility loss."""
        retries_allowed = self.options.max_retries if (
            self.options.flux_correction or self.eq.nconstraints == 0) else 0
        attempt = 0
        while True:
            try:
                u_new, diag = self._attempt(u, t, dt)
                diag.retries = attempt
                return u_new, diag
            except AdmissibilityError:
                if attempt >= retries_allowed:
                    raise
                attempt += 1
                dt = 0.5 * dt


class Solver1D(_SolverBase):
    def __init__(self, mesh: Mesh1D, eq, basis: Basis, bcs: BoundarySet1D,
                 options: SolverOptions, time_config: TimeConfig):
        super().__init__(eq, basis, options, time_config)
        if mesh.n < 2:
            raise ValueError("need at least two elements")
        self.mesh = mesh
        self.bcs = bcs
        mesh.periodic = bcs.periodic
        ns = basis.nnodes

        # extended geometry: two ghost elements per side
        dx = mesh.dx
        if bcs.periodic:
            dx_ext = np.concatenate([dx[-2:], dx, dx[:2]])
        else:
            dx_ext = np.concatenate([dx[1::-1], dx, dx[:-3:-1]])
        self.dx_ext = dx_ext
        left0 = mesh.edges[0] - dx_ext[1]
        edges_ext = np.concatenate([
            [left0 - dx_ext[0], left0], mesh.edges,
            [mesh.edges[-1] + dx_ext[-2],
             mesh.edges[-1] + dx_ext[-2] + dx_ext[-1]]])
        self.xn_ext = edges_ext[:-1, None] + basis.nodes * dx_ext[:, None]

        w = basis.weights
        cfaces = np.concatenate([[0.0], np.cumsum(w)])
        self.widths = dx[:, None] * w
        self.dminus_ext = dx_ext[:, None] * (cfaces[:-1] - basis.nodes)
        self.dplus_ext = dx_ext[:, None] * (cfaces[1:] - basis.nodes)
        self.widths_ext = dx_ext[:, None] * w
        self.inv_dx = (1.0 / dx)[:, None]
        self.x_pad = np.concatenate([self.xn_ext[:-2, -1:],
                                     self.xn_ext[1:-1],
                                     self.xn_ext[2:, :1]], axis=1)
        self.slope_coeffs = slope_coefficients(self.x_pad)
        self.face_w_right = w[-1]
        self.face_w_left = w[0]

    # -- ghost handling ---------------------------------------------------
    def _extended(self, u, t):
        nvar, ne, ns = u.shape
        ue = np.empty((nvar, ne + 4, ns))
        ue[:, 2:-2] = u
        if self.bcs.periodic:
            ue[:, :2] = u[:, -2:]
            ue[:, -2:] = u[:, :2]
            return ue
        # left: interior ordered boundary-inward, ghosts boundary-outward
        coords_l = (self.xn_ext[1::-1],)
        ghost_l = self.bcs.left.ghost_values(u[:, :2], coords_l, t, self.eq, 0)
        ue[:, 1] = ghost_l[:, 0]
        ue[:, 0] = ghost_l[:, 1]
        coords_r = (self.xn_ext[-2:],)
        ghost_r = self.bcs.right.ghost_values(u[:, -1:-3:-1], coords_r, t, self.eq, 0)
        ue[:, -2] = ghost_r[:, 0]
        ue[:, -1] = ghost_r[:, 1]
        return ue

    def _alpha(self, u):
        opts = self.options
        if not opts.blending:
            return np.zeros(u.shape[1])
        q = indicator_quantity(u, self.eq, opts.indicator)
        alpha = clip_alpha(smoothness_alpha(q, self.basis, opts.indicator, 1),
                          opts.indicator)
        return smooth_alpha_1d(alpha, self.bcs.periodic)

    def _alpha_extended(self, alpha):
        if self.bcs.periodic:
            return np.concatenate([alpha[-1:], alpha, alpha[:1]])
        return np.concatenate([alpha[:1], alpha, alpha[-1:]])

    # -- one attempted step ------------------------------------------------
    def _attempt(self, u, t, dt):
        eq, basis, opts = self.eq, self.basis, self.options
        alpha = self._alpha(u)
        alpha_e1 = self._alpha_extended(alpha)
        alpha_face = 0.5 * (alpha_e1[:-1] + alpha_e1[1:])

        ue = self._extended(u, t)
        ue1 = np.ascontiguousarray(ue[:, 1:-1])

        # high-order pass over interior plus one ghost layer
        lam = dt / self.dx_ext[1:-1, None]
        ws = lw.solution_derivatives_1d(ue1, lam, basis, eq)
        flux_nodal = lw.time_average(lw.taylor_flux_series(ws, lambda s: eq.flux(s)))
        wr = lw.extrapolate(ws, basis.interp_right)
        wl = lw.extrapolate(ws, basis.interp_left)
        fR, uR = lw.face_flux_and_trace(wr, eq)
        fL, uL = lw.face_flux_and_trace(wl, eq)
        sig_l = _admissible_or(eq, wr[0][:, :-1], ue1[:, :-1, -1])
        sig_r = _admissible_or(eq, wl[0][:, 1:], ue1[:, 1:, 0])
        flux_lw = lw.interface_flux(fR[:, :-1], sig_l, fL[:, 1:],
                                    sig_r, uR[:, :-1], uL[:, 1:], eq)

        if not opts.blending:
            return self._finish_pure(u, t, dt, flux_nodal, flux_lw)

        # low-order pass
        if opts.limiter == "blend-mh":
            u_pad = np.concatenate([ue[:, :-2, -1:], ue1, ue[:, 2:, :1]], axis=-1)
            beta = (2.0 - alpha_e1)[:, None]
            out = mh_pass_1d(u_pad, self.x_pad, self.dminus_ext[1:-1],
                             self.dplus_ext[1:-1], self.widths_ext[1:-1],
                             beta, dt, eq, slope_coeffs=self.slope_coeffs)
            inner = out["inner"]
            flux_low = self._numflux(out["trace_right"][:, :-1],
                                     out["trace_left"][:, 1:])
        else:
            inner = fo_inner_fluxes(ue1, eq)
            flux_low = self._numflux(ue1[:, :-1, -1], ue1[:, 1:, 0])

        # face pass: blend and correct
        F = blend_candidate(flux_lw, flux_low, alpha_face)
        if opts.flux_correction and eq.nconstraints > 0:
            coef_l = dt / (self.face_w_right * self.dx_ext[1:-2])
            coef_r = dt / (self.face_w_left * self.dx_ext[2:-1])
            F = correct_interface_flux(
                F, flux_low, ue1[:, :-1, -1], ue1[:, 1:, 0],
                inner[:, :-1, -1], inner[:, 1:, 0], coef_l, coef_r, eq)

        # residual assembly on interior elements
        res_high = lw.element_residual_1d(flux_nodal[:, 1:-1], F[:, :-1],
                                          F[:, 1:], basis, self.inv_dx)
        stack = np.concatenate([F[:, :-1, None], inner[:, 1:-1], F[:, 1:, None]],
                               axis=-1)
        res_low = np.diff(stack, axis=-1) / self.widths

        if opts.audit:
            scale = max(1.0, float(np.max(np.abs(u))) / max(dt, 1e-300))
            audit_mean_agreement(res_high, res_low, basis.weights,
                                 tol=opts.audit_tol, scale=scale)

        res = (1.0 - alpha)[None, :, None] * res_high \
            + alpha[None, :, None] * res_low
        u_new = u - dt * res

        if eq.nconstraints > 0 and opts.scaling_limiter:
            u_new = scaling_limit(u_new, basis.weights, eq)
        self._validate(u_new)

        diag = StepDiagnostics(dt=dt, retries=0,
                               alpha_max=float(alpha.max(initial=0.0)),
                               alpha_active_fraction=float(np.mean(alpha > 0.0)))
        return u_new, diag

    def _finish_pure(self, u, t, dt, flux_nodal, flux_face):
        """Update without the subcell machinery (tvb and none modes)."""
        opts, basis, eq = self.options, self.basis, self.eq
        res = lw.element_residual_1d(flux_nodal[:, 1:-1], flux_face[:, :-1],
                                     flux_face[:, 1:], basis, self.inv_dx)
        u_new = u - dt * res
        if opts.limiter == "tvb":
            u_new = tvb_limit(u_new, basis, self.mesh, eq, opts.tvb_m,
                              opts.tvb_characteristic)
        self._validate(u_new)
        return u_new, StepDiagnostics(dt=dt, retries=0, alpha_max=0.0,
                                      alpha_active_fraction=0.0)

    def _validate(self, u):
        if not np.all(np.isfinite(u)):
            raise AdmissibilityError("non-finite state after update")
        if self.options.blending and self.eq.nconstraints > 0:
            for pk in self.eq.constraints(u):
                if not np.all(pk > 0.0):
                    raise AdmissibilityError(
                        "inadmissible nodal state after scaling limiter")

    def compute_dt(self, u, t=0.0):
        tc = self.time_config
        if tc.fixed_dt is not None:
            return tc.fixed_dt
        mean = np.sum(u * self.basis.weights, axis=-1)
        if self.eq.nconstraints > 0:
            speed = self.eq.max_speed(mean)
        else:
            speed = np.max(self.eq.max_speed(u), axis=-1)
        dt = tc.safety * float(np.min(self.mesh.dx / speed)) * tc.cfl(self.basis.degree)
        if dt <= 0.0 or not np.isfinite(dt):
            raise ValueError(f"degenerate time step {dt}")
        return dt

    def node_coords(self):
        return self.mesh.node_coords(self.basis.nodes)


class Solver2D(_SolverBase):
    def __init__(self, mesh: Mesh2D, eq, basis: Basis, bcs: BoundarySet2D,
                 options: SolverOptions, time_config: TimeConfig):
        super().__init__(eq, basis, options, time_config)
        if options.limiter == "tvb":
            raise ValueError("the TVB limiter is available for 1-D runs only")
        if mesh.x.n < 2 or mesh.y.n < 2:
            raise ValueError("need at least two elements per direction")
        self.mesh = mesh
        self.bcs = bcs
        mesh.x.periodic = bcs.periodic_x
        mesh.y.periodic = bcs.periodic_y
        ns = basis.nnodes
        w = basis.weights
        cfaces = np.concatenate([[0.0], np.cumsum(w)])

        def axis_geometry(m, periodic):
            dx = m.dx
            if periodic:
                dx_ext = np.concatenate([dx[-2:], dx, dx[:2]])
            else:
                dx_ext = np.concatenate([dx[1::-1], dx, dx[:-3:-1]])
            left0 = m.edges[0] - dx_ext[1]
            edges_ext = np.concatenate([
                [left0 - dx_ext[0], left0], m.edges,
                [m.edges[-1] + dx_ext[-2],
                 m.edges[-1] + dx_ext[-2] + dx_ext[-1]]])
            xn_ext = edges_ext[:-1, None] + basis.nodes * dx_ext[:, None]
            x_pad = np.concatenate([xn_ext[:-2, -1:], xn_ext[1:-1],
                                    xn_ext[2:, :1]], axis=1)
            return dx_ext, xn_ext, x_pad, edges_ext

        self.dx_ext, self.xn_ext, x_pad, self.xedges_ext = axis_geometry(
            mesh.x, bcs.periodic_x)
        self.dy_ext, self.yn_ext, y_pad, self.yedges_ext = axis_geometry(
            mesh.y, bcs.periodic_y)

        nex, ney = mesh.shape
        self.widths_x = (mesh.x.dx[:, None] * w)[:, None, :, None]
        self.widths_y = (mesh.y.dx[:, None] * w)[None, :, None, :]
        self.widths_x_ext = (self.dx_ext[1:-1, None] * w)[:, None, :, None]
        self.widths_y_ext = (self.dy_ext[1:-1, None] * w)[None, :, None, :]
        self.dminus_x = (self.dx_ext[1:-1, None] * (cfaces[:-1] - basis.nodes))[:, None, :, None]
        self.dplus_x = (self.dx_ext[1:-1, None] * (cfaces[1:] - basis.nodes))[:, None, :, None]
        self.dminus_y = (self.dy_ext[1:-1, None] * (cfaces[:-1] - basis.nodes))[None, :, None, :]
        self.dplus_y = (self.dy_ext[1:-1, None] * (cfaces[1:] - basis.nodes))[None, :, None, :]
        self.x_pad = x_pad[:, None, :, None]
        self.y_pad = y_pad[None, :, None, :]
        self.slope_coeffs_x = tuple(
            c[:, None, :, None] for c in slope_coefficients(x_pad))
        self.slope_coeffs_y = tuple(
            c[None, :, None, :] for c in slope_coefficients(y_pad))
        self.inv_dx = (1.0 / mesh.x.dx)[:, None, None, None]
        self.inv_dy = (1.0 / mesh.y.dx)[:, None, None]
        self.weights2d = np.multiply.outer(w, w)
        self.face_w = (w[0], w[-1])

        if eq.space_dependent:
            if options.limiter == "blend-mh":
                raise ValueError(
                    "space-dependent fluxes are supported with the first-order "
                    "blending path; use limiter='blend-fo' or 'none'")
            xe1 = self.xn_ext[1:-1]
            ye1 = self.yn_ext[1:-1]
            self.coords_node = (xe1[:, None, :, None], ye1[None, :, None, :])
            self.coords_xface_r = (self.xedges_ext[2:-1][:, None, None],
                                   ye1[None, :, :])
            self.coords_xface_l = (self.xedges_ext[1:-2][:, None, None],
                                   ye1[None, :, :])
            self.coords_yface_t = (xe1[:, None, :], self.yedges_ext[2:-1][None, :, None])
            self.coords_yface_b = (xe1[:, None, :], self.yedges_ext[1:-2][None, :, None])
            xs_in = self.xedges_ext[1:-2, None] + cfaces[1:-1] * self.dx_ext[1:-1, None]
            ys_in = self.yedges_ext[1:-2, None] + cfaces[1:-1] * self.dy_ext[1:-1, None]
            self.coords_xinner = (xs_in[:, None, :, None], ye1[None, :, None, :])
            self.coords_yinner = (xe1[:, None, :, None], ys_in[None, :, None, :])
            yn, xn = self.yn_ext[2:-2], self.xn_ext[2:-2]
            self.coords_xface_int = (mesh.x.edges[:, None, None], yn[None, :, :])
            self.coords_yface_int = (xn[:, None, :], mesh.y.edges[None, :, None])
        else:
            self.coords_node = None
            self.coords_xface_r = self.coords_xface_l = None
            self.coords_yface_t = self.coords_yface_b = None
            self.coords_xinner = self.coords_yinner = None
            self.coords_xface_int = self.coords_yface_int = None

    # -- ghosts ------------------------------------------------------------
    def _extended(self, u, t):
        nvar, nex, ney, ns, _ = u.shape
        ue = np.empty((nvar, nex + 4, ney + 4, ns, ns))
        ue[:, 2:-2, 2:-2] = u
        # x direction first (interior rows only), then y on the extended array
        if self.bcs.periodic_x:
            ue[:, :2, 2:-2] = u[:, -2:]
            ue[:, -2:, 2:-2] = u[:, :2]
        else:
            yc = self.yn_ext[2:-2]  # interior y node coords (ney, ns)
            for side in ("left", "right"):
                if side == "left":
                    bc, g0, g1 = self.bcs.left, 1, 0
                    interior = u[:, :2]
                    xg = self.xn_ext[1::-1]
                else:
                    bc, g0, g1 = self.bcs.right, -2, -1
                    interior = u[:, -1:-3:-1]
                    xg = self.xn_ext[-2:]
                # move the x-node axis last for the mirror convention
                block = np.swapaxes(interior, -2, -1)
                coords = (
                    np.broadcast_to(xg[:, None, None, :], block.shape[1:]),
                    np.broadcast_to(yc[None, :, :, None], block.shape[1:]),
                )
                ghost = bc.ghost_values(block, coords, t, self.eq, 0)
                ghost = np.swapaxes(ghost, -2, -1)
                ue[:, g0, 2:-2] = ghost[:, 0]
                ue[:, g1, 2:-2] = ghost[:, 1]
        if self.bcs.periodic_y:
            ue[:, :, :2] = ue[:, :, -4:-2]
            ue[:, :, -2:] = ue[:, :, 2:4]
        else:
            xc_full = self.xn_ext  # (nex+4, ns)
            for side in ("bottom", "top"):
                if side == "bottom":
                    bc = self.bcs.bottom
                    interior = ue[:, :, 2:4]  # already boundary-inward
                    yg = self.yn_ext[1::-1]
                    g0, g1 = 1, 0
                else:
                    bc = self.bcs.top
                    interior = ue[:, :, -3:-5:-1]
                    yg = self.yn_ext[-2:]
                    g0, g1 = -2, -1
                # layer axis to slot 1; the y (normal) node axis is last
                block = np.moveaxis(interior, 2, 1)
                coords = (
                    np.broadcast_to(xc_full[None, :, :, None], block.shape[1:]),
                    np.broadcast_to(yg[:, None, None, :], block.shape[1:]),
                )
                ghost = bc.ghost_values(block, coords, t, self.eq, 1)
                ue[:, :, g0] = ghost[:, 0]
                ue[:, :, g1] = ghost[:, 1]
        return ue

    def _alpha(self, u):
        opts = self.options
        nex, ney = u.shape[1], u.shape[2]
        if not opts.blending:
            return np.zeros((nex, ney))
        q = indicator_quantity(u, self.eq, opts.indicator)
        alpha = clip_alpha(smoothness_alpha(q, self.basis, opts.indicator, 2),
                          opts.indicator)
        return smooth_alpha_2d(alpha, self.bcs.periodic_x, self.bcs.periodic_y)

    def _alpha_extended(self, alpha):
        px, py = self.bcs.periodic_x, self.bcs.periodic_y
        mode_x = "wrap" if px else "edge"
        a = np.pad(alpha, ((1, 1), (0, 0)), mode=mode_x)
        mode_y = "wrap" if py else "edge"
        return np.pad(a, ((0, 0), (1, 1)), mode=mode_y)

    # -- one attempted step --------------------------------------------------
    def _attempt(self, u, t, dt):
        eq, basis, opts = self.eq, self.basis, self.options
        alpha = self._alpha(u)
        alpha_e1 = self._alpha_extended(alpha)
        alpha_fx = 0.5 * (alpha_e1[:-1, 1:-1] + alpha_e1[1:, 1:-1])
        alpha_fy = 0.5 * (alpha_e1[1:-1, :-1] + alpha_e1[1:-1, 1:])

        ue = self._extended(u, t)
        ue1 = np.ascontiguousarray(ue[:, 1:-1, 1:-1])

        lamx = (dt / self.dx_ext[1:-1])[:, None, None, None]
        lamy = (dt / self.dy_ext[1:-1])[:, None, None]
        ws = lw.solution_derivatives_2d(ue1, lamx, lamy, basis, eq,
                                        self.coords_node)

        cn = self.coords_node
        series_x, series_y = lw.taylor_flux_series_both(
            ws, lambda s: eq.flux_both(s, cn))
        flux_x = lw.time_average(series_x)
        flux_y = lw.time_average(series_y)

        # faces in x
        wr = lw.extrapolate_x(ws, basis.interp_right)
        wl = lw.extrapolate_x(ws, basis.interp_left)
        fR, uR = lw.face_flux_and_trace(wr, eq, 0, self.coords_xface_r)
        fL, uL = lw.face_flux_and_trace(wl, eq, 0, self.coords_xface_l)
        sig_l = _admissible_or(eq, wr[0][:, :-1, 1:-1], ue1[:, :-1, 1:-1, -1, :])
        sig_r = _admissible_or(eq, wl[0][:, 1:, 1:-1], ue1[:, 1:, 1:-1, 0, :])
        flw_x = lw.interface_flux(
            fR[:, :-1, 1:-1], sig_l, fL[:, 1:, 1:-1], sig_r,
            uR[:, :-1, 1:-1], uL[:, 1:, 1:-1], eq, 0, self.coords_xface_int)
        # faces in y
        wt = lw.extrapolate(ws, basis.interp_right)
        wb = lw.extrapolate(ws, basis.interp_left)
        fT, uT = lw.face_flux_and_trace(wt, eq, 1, self.coords_yface_t)
        fB, uB = lw.face_flux_and_trace(wb, eq, 1, self.coords_yface_b)
        sig_b = _admissible_or(eq, wt[0][:, 1:-1, :-1], ue1[:, 1:-1, :-1, :, -1])
        sig_t = _admissible_or(eq, wb[0][:, 1:-1, 1:], ue1[:, 1:-1, 1:, :, 0])
        flw_y = lw.interface_flux(
            fT[:, 1:-1, :-1], sig_b, fB[:, 1:-1, 1:], sig_t,
            uT[:, 1:-1, :-1], uB[:, 1:-1, 1:], eq, 1, self.coords_yface_int)

        if not opts.blending:
            res = lw.element_residual_2d(
                flux_x[:, 1:-1, 1:-1], flux_y[:, 1:-1, 1:-1],
                flw_x[:, :-1], flw_x[:, 1:], flw_y[:, :, :-1], flw_y[:, :, 1:],
                basis, self.inv_dx, self.inv_dy)
            u_new = u - dt * res
            self._validate(u_new)
            return u_new, StepDiagnostics(dt=dt, retries=0, alpha_max=0.0,
                                          alpha_active_fraction=0.0)

        # low-order pass
        if opts.limiter == "blend-mh":
            u_padx = np.concatenate([ue[:, :-2, 1:-1, -1:, :], ue1,
                                     ue[:, 2:, 1:-1, :1, :]], axis=-2)
            u_pady = np.concatenate([ue[:, 1:-1, :-2, :, -1:], ue1,
                                     ue[:, 1:-1, 2:, :, :1]], axis=-1)
            beta = (2.0 - alpha_e1)[:, :, None, None]
            out = mh_pass_2d(u_padx, u_pady, self.x_pad, self.y_pad,
                             self.dminus_x, self.dplus_x, self.dminus_y,
                             self.dplus_y, self.widths_x_ext,
                             self.widths_y_ext, beta, dt, eq,
                             slope_coeffs_x=self.slope_coeffs_x,
                             slope_coeffs_y=self.slope_coeffs_y)
            inner_x, inner_y = out["inner_x"], out["inner_y"]
            low_x = self._numflux(out["trace_right"][:, :-1, 1:-1],
                                  out["trace_left"][:, 1:, 1:-1], 0)
            low_y = self._numflux(out["trace_top"][:, 1:-1, :-1],
                                  out["trace_bottom"][:, 1:-1, 1:], 1)
        else:
            inner_x = fo_inner_fluxes(ue1, eq, axis=0, node_axis=-2,
                                      coords=self.coords_xinner)
            inner_y = fo_inner_fluxes(ue1, eq, axis=1, node_axis=-1,
                                      coords=self.coords_yinner)
            low_x = self._numflux(ue1[:, :-1, 1:-1, -1, :],
                                  ue1[:, 1:, 1:-1, 0, :], 0,
                                  self.coords_xface_int)
            low_y = self._numflux(ue1[:, 1:-1, :-1, :, -1],
                                  ue1[:, 1:-1, 1:, :, 0], 1,
                                  self.coords_yface_int)

        Fx = blend_candidate(flw_x, low_x, alpha_fx[None, :, :, None])
        Fy = blend_candidate(flw_y, low_y, alpha_fy[None, :, :, None])
        if opts.flux_correction and eq.nconstraints > 0:
            kx_l, kx_r, ky_b, ky_t = self._ksplit(u)
            w0, wN = self.face_w
            coef_l = (dt / (wN * self.dx_ext[1:-2]))[:, None, None] / kx_l
            coef_r = (dt / (w0 * self.dx_ext[2:-1]))[:, None, None] / kx_r
            Fx = correct_interface_flux(
                Fx, low_x, ue1[:, :-1, 1:-1, -1, :], ue1[:, 1:, 1:-1, 0, :],
                inner_x[:, :-1, 1:-1, -1, :], inner_x[:, 1:, 1:-1, 0, :],
                coef_l, coef_r, eq)
            coef_b = (dt / (wN * self.dy_ext[1:-2]))[:, None] / ky_b
            coef_t = (dt / (w0 * self.dy_ext[2:-1]))[:, None] / ky_t
            Fy = correct_interface_flux(
                Fy, low_y, ue1[:, 1:-1, :-1, :, -1], ue1[:, 1:-1, 1:, :, 0],
                inner_y[:, 1:-1, :-1, :, -1], inner_y[:, 1:-1, 1:, :, 0],
                coef_b, coef_t, eq)

        res_high = lw.element_residual_2d(
            flux_x[:, 1:-1, 1:-1], flux_y[:, 1:-1, 1:-1],
            Fx[:, :-1], Fx[:, 1:], Fy[:, :, :-1], Fy[:, :, 1:],
            basis, self.inv_dx, self.inv_dy)

        stack_x = np.concatenate([Fx[:, :-1, :, None, :],
                                  inner_x[:, 1:-1, 1:-1],
                                  Fx[:, 1:, :, None, :]], axis=-2)
        stack_y = np.concatenate([Fy[:, :, :-1, :, None],
                                  inner_y[:, 1:-1, 1:-1],
                                  Fy[:, :, 1:, :, None]], axis=-1)
        res_low = np.diff(stack_x, axis=-2) / self.widths_x \
            + np.diff(stack_y, axis=-1) / self.widths_y

        if opts.audit:
            scale = max(1.0, float(np.max(np.abs(u))) / max(dt, 1e-300))
            audit_mean_agreement(res_high, res_low, self.weights2d,
                                 tol=opts.audit_tol, scale=scale)

        a = alpha[None, :, :, None, None]
        res = (1.0 - a) * res_high + a * res_low
        u_new = u - dt * res

        if eq.nconstraints > 0 and opts.scaling_limiter:
            u_new = scaling_limit(u_new, self.weights2d, eq)
        self._validate(u_new)

        diag = StepDiagnostics(dt=dt, retries=0,
                               alpha_max=float(alpha.max(initial=0.0)),
                               alpha_active_fraction=float(np.mean(alpha > 0.0)))
        return u_new, diag

    def _ksplit(self, u):
        """Directional split weights per face side: the update scaling of a
        subcell adjacent to a face uses its own element's weight."""
        if self.options.ksplit == "half":
            kx = self.options.kx
            return kx, kx, 1.0 - kx, 1.0 - kx
        # wave-speed weighted split from the element means
        mean = np.sum(u * self.weights2d, axis=(-2, -1))
        ax = self.eq.max_speed(mean, 0) / self.mesh.x.dx[:, None]
        ay = self.eq.max_speed(mean, 1) / self.mesh.y.dx[None, :]
        kx = np.clip(ax / (ax + ay), 0.05, 0.95)
        ky = 1.0 - kx
        mx = "wrap" if self.bcs.periodic_x else "edge"
        my = "wrap" if self.bcs.periodic_y else "edge"
        kx_ext = np.pad(kx, ((1, 1), (0, 0)), mode=mx)
        ky_ext = np.pad(ky, ((0, 0), (1, 1)), mode=my)
        return (kx_ext[:-1][:, :, None], kx_ext[1:][:, :, None],
                ky_ext[:, :-1][:, :, None], ky_ext[:, 1:][:, :, None])

    def _validate(self, u):
        if not np.all(np.isfinite(u)):
            raise AdmissibilityError("non-finite state after update")
        if self.options.blending and self.eq.nconstraints > 0:
            for pk in self.eq.constraints(u):
                if not np.all(pk > 0.0):
                    raise AdmissibilityError(
                        "inadmissible nodal state after scaling limiter")

    def compute_dt(self, u, t=0.0):
        tc = self.time_config
        if tc.fixed_dt is not None:
            return tc.fixed_dt
        if self.options.include_ghost_dt:
            ue = self._extended(u, t)
            states = ue[:, 1:-1, 1:-1]
            dxs = self.dx_ext[1:-1]
            dys = self.dy_ext[1:-1]
        else:
            states = u
            dxs = self.mesh.x.dx
            dys = self.mesh.y.dx
        if self.eq.nconstraints > 0:
            mean = np.sum(states * self.weights2d, axis=(-2, -1))
            sx = self.eq.max_speed(mean, 0)
            sy = self.eq.max_speed(mean, 1)
        else:
            coords = None
            if self.eq.space_dependent:
                coords = self._node_coord_blocks(states.shape[1], states.shape[2])
            sx = np.max(self.eq.max_speed(states, 0, coords), axis=(-2, -1))
            sy = np.max(self.eq.max_speed(states, 1, coords), axis=(-2, -1))
        rate = sx / dxs[:, None] + sy / dys[None, :]
        dt = tc.safety * float(1.0 / np.max(rate)) * tc.cfl(self.basis.degree)
        if dt <= 0.0 or not np.isfinite(dt):
            raise ValueError(f"degenerate time step {dt}")
        return dt

    def _node_coord_blocks(self, nex, ney):
        xs = self.xn_ext[2:-2] if nex == self.mesh.x.n else self.xn_ext[1:-1]
        ys = self.yn_ext[2:-2] if ney == self.mesh.y.n else self.yn_ext[1:-1]
        X = xs[:, None, :, None]
        Y = ys[None, :, None, :]
        return (np.broadcast_to(X, (nex, ney, xs.shape[1], ys.shape[1])),
                np.broadcast_to(Y, (nex, ney, xs.shape[1], ys.shape[1])))

    def node_coords(self):
        xs = self.mesh.x.node_coords(self.basis.nodes)
        ys = self.mesh.y.node_coords(self.basis.nodes)
        return xs, ys
