"""Conservation-law definitions and interface fluxes.

Each equation system exposes fluxes, wave-speed estimates, primitive
conversions and an ordered list of admissibility constraints. States are
stored variables-first, i.e. ``u[k]`` is the k-th conserved field over any
number of trailing element/node axes, so every operation broadcasts.
"""

import numpy as np

from . import _kernels


class AdmissibilityError(RuntimeError):
    """A state left the admissible set (or became non-finite)."""


def _require_finite(u, what="state"):
    # single-reduction check: the sum is non-finite iff any entry is (inf
    # cancellation yields nan), so no boolean temporary is materialized
    if not np.isfinite(np.sum(u)):
        raise AdmissibilityError(f"non-finite {what} encountered")


class LinearAdvection1D:
    """u_t + a u_x = 0."""

    nvar = 1
    nconstraints = 0
    space_dependent = False
    name = "advection1d"

    def __init__(self, speed=1.0):
        self.speed = float(speed)

    def flux(self, u, axis=0, coords=None):
        _require_finite(u, "advection state")
        return self.speed * u

    def max_speed(self, u, axis=0, coords=None):
        return np.full(u.shape[1:], abs(self.speed))

    def sigma(self, ul, ur, axis=0, coords=None):
        return np.full(np.broadcast_shapes(ul.shape[1:], ur.shape[1:]), abs(self.speed))

    def rusanov(self, ul, ur, axis=0, coords=None):
        lam = self.sigma(ul, ur, axis, coords)
        return 0.5 * (self.flux(ul) + self.flux(ur)) - 0.5 * lam * (ur - ul)

    def constraints(self, u):
        return []

    def is_admissible(self, u):
        return np.all(np.isfinite(u))

    def cons_to_prim(self, u):
        return u

    def prim_to_cons(self, w):
        return w


class LinearAdvection2D(LinearAdvection1D):
    """u_t + a_x u_x + a_y u_y = 0 with constant velocity."""

    name = "advection2d"

    def __init__(self, speed=(1.0, 1.0)):
        self.velocity = (float(speed[0]), float(speed[1]))

    def flux(self, u, axis=0, coords=None):
        _require_finite(u, "advection state")
        return self.velocity[axis] * u

    def flux_both(self, u, coords=None):
        return self.velocity[0] * u, self.velocity[1] * u

    def max_speed(self, u, axis=0, coords=None):
        return np.full(u.shape[1:], abs(self.velocity[axis]))

    def sigma(self, ul, ur, axis=0, coords=None):
        shape = np.broadcast_shapes(ul.shape[1:], ur.shape[1:])
        return np.full(shape, abs(self.velocity[axis]))

    def rusanov(self, ul, ur, axis=0, coords=None):
        lam = self.sigma(ul, ur, axis, coords)
        return 0.5 * (self.flux(ul, axis) + self.flux(ur, axis)) - 0.5 * lam * (ur - ul)


class VariableAdvection2D:
    """u_t + div(a(x, y) u) = 0 for a prescribed velocity field.

    Flux evaluations need the coordinates of the evaluation points, passed as
    a (x, y) tuple of arrays broadcastable against u[0].
    """

    nvar = 1
    nconstraints = 0
    space_dependent = True
    name = "varadvection2d"

    def __init__(self, velocity):
        self.velocity = velocity

    def _a(self, axis, coords):
        ax, ay = self.velocity(coords[0], coords[1])
        return ax if axis == 0 else ay

    def flux(self, u, axis=0, coords=None):
        return self._a(axis, coords) * u

    def flux_both(self, u, coords=None):
        ax, ay = self.velocity(coords[0], coords[1])
        return ax * u, ay * u

    def max_speed(self, u, axis=0, coords=None):
        return np.broadcast_to(np.abs(self._a(axis, coords)), u.shape[1:]).copy()

    def sigma(self, ul, ur, axis=0, coords=None):
        shape = np.broadcast_shapes(ul.shape[1:], ur.shape[1:])
        return np.broadcast_to(np.abs(self._a(axis, coords)), shape).copy()

    def rusanov(self, ul, ur, axis=0, coords=None):
        a = self._a(axis, coords)
        return 0.5 * a * (ul + ur) - 0.5 * np.abs(a) * (ur - ul)

    def constraints(self, u):
        return []

    def is_admissible(self, u):
        return np.all(np.isfinite(u))

    def cons_to_prim(self, u):
        return u

    def prim_to_cons(self, w):
        return w


class Euler1D:
    """Compressible Euler equations in one dimension, conserved (rho, rho v, E)."""

    nvar = 3
    nconstraints = 2
    space_dependent = False
    name = "euler1d"

    def __init__(self, gamma=1.4):
        if gamma <= 1.0:
            raise ValueError("adiabatic constant must exceed 1")
        self.gamma = float(gamma)

    def pressure(self, u):
        rho, mom, ene = u
        return (self.gamma - 1.0) * (ene - 0.5 * mom * mom / rho)

    def cons_to_prim(self, u):
        rho, mom, ene = u
        if np.any(rho == 0.0):
            raise AdmissibilityError("zero density in primitive conversion")
        v = mom / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * mom * v)
        out = np.stack([rho, v, p])
        _require_finite(out, "primitive state")
        return out

    def prim_to_cons(self, w):
        rho, v, p = w
        ene = p / (self.gamma - 1.0) + 0.5 * rho * v * v
        return np.stack([rho, rho * v, ene])

    def flux(self, u, axis=0, coords=None):
        _require_finite(u, "Euler state")
        if _kernels.HAVE_NUMBA:
            uc, flat = _kernels.flat_view(u)
            out = np.empty_like(uc)
            _kernels.euler1d_flux_flat(flat, self.gamma, out.reshape(3, -1))
            return out
        rho, mom, ene = u
        v = mom / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * mom * v)
        out = np.empty_like(u)
        out[0] = mom
        out[1] = p + mom * v
        out[2] = (ene + p) * v
        return out

    def _prim_speed(self, u):
        """(velocity, pressure, |v| + c) with admissibility validation."""
        rho, mom, ene = u
        v = mom / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * mom * v)
        c2 = self.gamma * p / rho
        # min() propagates nan, so one reduction per factor validates both
        # positivity and finiteness (a lone +inf is caught downstream)
        if not (np.min(c2) > 0.0 and np.min(rho) > 0.0):
            raise AdmissibilityError("non-positive density or pressure in wave speed")
        return v, p, np.abs(v) + np.sqrt(c2)

    def sound_speed(self, u):
        rho = u[0]
        p = self.pressure(u)
        if np.any(p <= 0.0) or np.any(rho <= 0.0):
            raise AdmissibilityError("non-positive density or pressure in wave speed")
        return np.sqrt(self.gamma * p / rho)

    def max_speed(self, u, axis=0, coords=None):
        return self._prim_speed(u)[2]

    def sigma(self, ul, ur, axis=0, coords=None):
        return np.maximum(self._prim_speed(ul)[2], self._prim_speed(ur)[2])

    def rusanov(self, ul, ur, axis=0, coords=None):
        if _kernels.HAVE_NUMBA and ul.shape == ur.shape:
            uc_l, flat_l = _kernels.flat_view(ul)
            uc_r, flat_r = _kernels.flat_view(ur)
            out = np.empty_like(uc_l)
            bad = _kernels.euler1d_rusanov_flat(flat_l, flat_r, self.gamma,
                                                out.reshape(3, -1))
            if bad:
                raise AdmissibilityError(
                    "non-positive density or pressure in wave speed")
            return out
        vl, pl, sl = self._prim_speed(ul)
        vr, pr, sr = self._prim_speed(ur)
        lam = np.maximum(sl, sr)
        out = np.empty(np.broadcast_shapes(ul.shape, ur.shape))
        out[0] = 0.5 * (ul[1] + ur[1]) - 0.5 * lam * (ur[0] - ul[0])
        out[1] = 0.5 * (pl + ul[1] * vl + pr + ur[1] * vr) - 0.5 * lam * (ur[1] - ul[1])
        out[2] = 0.5 * ((ul[2] + pl) * vl + (ur[2] + pr) * vr) - 0.5 * lam * (ur[2] - ul[2])
        return out

    def hllc(self, ul, ur, axis=0, coords=None):
        return _hllc_flux(self, ul, ur, axis)

    def constraint(self, u, k):
        """k-th ordered admissibility quantity; may be <= 0."""
        return u[0] if k == 0 else self.pressure(u)

    def constraints(self, u):
        """Ordered admissibility quantities [density, pressure]; may be <= 0."""
        return [u[0], self.pressure(u)]

    def is_admissible(self, u):
        if not np.all(np.isfinite(u)):
            return False
        return bool(np.all(u[0] > 0.0) and np.all(self.pressure(u) > 0.0))



class Euler2D:
    """Compressible Euler equations in two dimensions, (rho, rho u, rho v, E)."""

    nvar = 4
    nconstraints = 2
    space_dependent = False
    name = "euler2d"

    def __init__(self, gamma=1.4):
        if gamma <= 1.0:
            raise ValueError("adiabatic constant must exceed 1")
        self.gamma = float(gamma)

    def pressure(self, u):
        rho, mx, my, ene = u
        return (self.gamma - 1.0) * (ene - 0.5 * (mx * mx + my * my) / rho)

    def cons_to_prim(self, u):
        rho, mx, my, ene = u
        if np.any(rho == 0.0):
            raise AdmissibilityError("zero density in primitive conversion")
        vx, vy = mx / rho, my / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * (mx * vx + my * vy))
        out = np.stack([rho, vx, vy, p])
        _require_finite(out, "primitive state")
        return out

    def prim_to_cons(self, w):
        rho, vx, vy, p = w
        ene = p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)
        return np.stack([rho, rho * vx, rho * vy, ene])

    def flux(self, u, axis=0, coords=None):
        _require_finite(u, "Euler state")
        if _kernels.HAVE_NUMBA:
            uc, flat = _kernels.flat_view(u)
            out = np.empty_like(uc)
            _kernels.euler2d_flux_flat(flat, self.gamma, axis,
                                       out.reshape(4, -1))
            return out
        rho, mx, my, ene = u
        p = (self.gamma - 1.0) * (ene - 0.5 * (mx * mx + my * my) / rho)
        out = np.empty_like(u)
        if axis == 0:
            v = mx / rho
            out[0] = mx
            out[1] = p + mx * v
            out[2] = my * v
        else:
            v = my / rho
            out[0] = my
            out[1] = mx * v
            out[2] = p + my * v
        out[3] = (ene + p) * v
        return out

    def flux_both(self, u, coords=None):
        _require_finite(u, "Euler state")
        if _kernels.HAVE_NUMBA:
            uc, flat = _kernels.flat_view(u)
            f = np.empty_like(uc)
            g = np.empty_like(uc)
            _kernels.euler2d_flux_both_flat(flat, self.gamma,
                                            f.reshape(4, -1), g.reshape(4, -1))
            return f, g
        rho, mx, my, ene = u
        vx, vy = mx / rho, my / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * (mx * vx + my * vy))
        f = np.empty_like(u)
        g = np.empty_like(u)
        f[0], f[1], f[2], f[3] = mx, p + mx * vx, my * vx, (ene + p) * vx
        g[0], g[1], g[2], g[3] = my, mx * vy, p + my * vy, (ene + p) * vy
        return f, g

    def _prim_speed(self, u, axis):
        rho, mx, my, ene = u
        v = (mx if axis == 0 else my) / rho
        p = (self.gamma - 1.0) * (ene - 0.5 * (mx * mx + my * my) / rho)
        c2 = self.gamma * p / rho
        if not (np.min(c2) > 0.0 and np.min(rho) > 0.0):
            raise AdmissibilityError("non-positive density or pressure in wave speed")
        return v, p, np.abs(v) + np.sqrt(c2)

    def sound_speed(self, u):
        rho = u[0]
        p = self.pressure(u)
        if np.any(p <= 0.0) or np.any(rho <= 0.0):
            raise AdmissibilityError("non-positive density or pressure in wave speed")
        return np.sqrt(self.gamma * p / rho)

    def max_speed(self, u, axis=0, coords=None):
        return self._prim_speed(u, axis)[2]

    def sigma(self, ul, ur, axis=0, coords=None):
        return np.maximum(self._prim_speed(ul, axis)[2],
                          self._prim_speed(ur, axis)[2])

    def rusanov(self, ul, ur, axis=0, coords=None):
        if _kernels.HAVE_NUMBA and ul.shape == ur.shape:
            uc_l, flat_l = _kernels.flat_view(ul)
            uc_r, flat_r = _kernels.flat_view(ur)
            out = np.empty_like(uc_l)
            bad = _kernels.euler2d_rusanov_flat(flat_l, flat_r, self.gamma,
                                                axis, out.reshape(4, -1))
            if bad:
                raise AdmissibilityError(
                    "non-positive density or pressure in wave speed")
            return out
        vl, pl, sl = self._prim_speed(ul, axis)
        vr, pr, sr = self._prim_speed(ur, axis)
        lam = np.maximum(sl, sr)
        out = np.empty(np.broadcast_shapes(ul.shape, ur.shape))
        m, q = (1, 2) if axis == 0 else (2, 1)
        out[0] = 0.5 * (ul[m] + ur[m]) - 0.5 * lam * (ur[0] - ul[0])
        out[m] = 0.5 * (pl + ul[m] * vl + pr + ur[m] * vr) - 0.5 * lam * (ur[m] - ul[m])
        out[q] = 0.5 * (ul[q] * vl + ur[q] * vr) - 0.5 * lam * (ur[q] - ul[q])
        out[3] = 0.5 * ((ul[3] + pl) * vl + (ur[3] + pr) * vr) - 0.5 * lam * (ur[3] - ul[3])
        return out

    def hllc(self, ul, ur, axis=0, coords=None):
        if axis == 1:
            swap = [0, 2, 1, 3]
            return _hllc_flux(self, ul[swap], ur[swap], 0)[swap]
        return _hllc_flux(self, ul, ur, 0)

    def constraint(self, u, k):
        return u[0] if k == 0 else self.pressure(u)

    def constraints(self, u):
        return [u[0], self.pressure(u)]

    def is_admissible(self, u):
        if not np.all(np.isfinite(u)):
            return False
        return bool(np.all(u[0] > 0.0) and np.all(self.pressure(u) > 0.0))


def sigma_segment(eq, ul, ur, axis=0, samples=(0.0, 0.25, 0.5, 0.75, 1.0)):
    """Tightened wave-speed bound sampling the segment between two states.

    The plain two-point estimate can undershoot the true maximum over the
    connecting segment for nonconvex variations; diagnostics may use this
    sampled version instead.
    """
    out = None
    for lam in samples:
        s = eq.max_speed(lam * ul + (1.0 - lam) * ur, axis)
        out = s if out is None else np.maximum(out, s)
    return out


def _hllc_flux(eq, ul, ur, axis):
    """Three-wave HLLC flux with Einfeldt-style wave speed bounds.

    Written for the normal direction being the first momentum component;
    any extra momentum components ride along as passive tracers of the
    normal mass flux. Star-state densities are checked for positivity.
    """
    gamma = eq.gamma
    rho_l, rho_r = ul[0], ur[0]
    v_l, v_r = ul[1] / rho_l, ur[1] / rho_r
    p_l, p_r = eq.pressure(ul), eq.pressure(ur)
    if np.any(p_l <= 0) or np.any(p_r <= 0) or np.any(rho_l <= 0) or np.any(rho_r <= 0):
        raise AdmissibilityError("inadmissible input state in HLLC")
    c_l = np.sqrt(gamma * p_l / rho_l)
    c_r = np.sqrt(gamma * p_r / rho_r)

    # Roe averages for the Einfeldt bounds
    sl, sr = np.sqrt(rho_l), np.sqrt(rho_r)
    v_roe = (sl * v_l + sr * v_r) / (sl + sr)
    h_l = (ul[-1] + p_l) / rho_l
    h_r = (ur[-1] + p_r) / rho_r
    h_roe = (sl * h_l + sr * h_r) / (sl + sr)
    ke_l = 0.5 * np.sum(ul[1:-1] ** 2, axis=0) / rho_l**2
    ke_r = 0.5 * np.sum(ur[1:-1] ** 2, axis=0) / rho_r**2
    ke_roe = (sl * ke_l + sr * ke_r) / (sl + sr)
    c_roe = np.sqrt(np.maximum((gamma - 1.0) * (h_roe - ke_roe), 1e-300))

    s_l = np.minimum(v_l - c_l, v_roe - c_roe)
    s_r = np.maximum(v_r + c_r, v_roe + c_roe)
    s_star = (p_r - p_l + rho_l * v_l * (s_l - v_l) - rho_r * v_r * (s_r - v_r)) / (
        rho_l * (s_l - v_l) - rho_r * (s_r - v_r)
    )

    def star_state(u, rho, v, p, s):
        fac = rho * (s - v) / (s - s_star)
        if np.any(fac <= 0):
            raise AdmissibilityError("negative star density in HLLC")
        out = np.empty_like(u)
        out[0] = fac
        out[1] = fac * s_star
        for k in range(2, u.shape[0] - 1):
            out[k] = fac * u[k] / rho
        out[-1] = fac * (u[-1] / rho + (s_star - v) * (s_star + p / (rho * (s - v))))
        return out

    f_l = eq.flux(ul, 0)
    f_r = eq.flux(ur, 0)
    f_sl = f_l + s_l * (star_state(ul, rho_l, v_l, p_l, s_l) - ul)
    f_sr = f_r + s_r * (star_state(ur, rho_r, v_r, p_r, s_r) - ur)

    flux = np.where(s_star >= 0, f_sl, f_sr)
    flux = np.where(s_l >= 0, f_l, flux)
    flux = np.where(s_r <= 0, f_r, flux)
    return flux
