"""Oscillation control: modal smoothness indicator, TVB limiter, scaling limiter.

The indicator measures the energy of the highest Legendre modes of a chosen
quantity and maps it through a logistic with a resolution-dependent
threshold to a per-element coefficient in [0, 1]. The TVB limiter and the
admissible-set scaling limiter are post-processing steps on the updated
solution.
"""

from dataclasses import dataclass

import numpy as np

from .basis import Basis
from .equations import AdmissibilityError


@dataclass
class IndicatorConfig:
    """Knobs of the smoothness indicator (all CLI-exposed)."""

    threshold_amplitude: float = 0.5      # a
    threshold_decay: float = 1.8          # c
    sharpness: float = 9.21024            # s
    alpha_min: float = 0.001
    alpha_max: float = 1.0
    variable: str = "auto"                # auto: rho*p for Euler, u for scalar

    def __post_init__(self):
        if not (0.0 < self.alpha_min < self.alpha_max <= 1.0):
            raise ValueError("need 0 < alpha_min < alpha_max <= 1")
        if self.sharpness <= 0.0:
            raise ValueError("sharpness must be positive")

    def threshold(self, degree: int) -> float:
        return self.threshold_amplitude * 10.0 ** (
            -self.threshold_decay * (degree + 1) ** 0.25)


def indicator_quantity(u, eq, config: IndicatorConfig):
    """Scalar field whose modal decay measures smoothness."""
    var = config.variable
    if var == "auto":
        var = "rho_p" if eq.nconstraints > 0 else "u"
    if var == "u":
        return u[0]
    if var == "rho":
        return u[0]
    if var == "p":
        return eq.pressure(u)
    if var == "rho_p":
        return u[0] * eq.pressure(u)
    raise ValueError(f"unknown indicator variable {var!r}")


def highest_mode_energy(q, basis: Basis, dim: int = 1):
    """Relative energy in the two highest mode shells of nodal data q.

    1-D input has shape (..., ns); 2-D input (..., ns, ns) uses the tensor
    Legendre coefficients, a shell being all modes with max index j (so the
    formula reduces to the 1-D ratios when one axis is constant). Zero
    energy in a shell's denominator contributes zero.
    """
    V = basis.legendre_vandermonde
    n = basis.degree
    if q.shape[-1] != V.shape[1]:
        raise ValueError("node count mismatch")
    if dim == 2:
        coef = np.matmul(np.matmul(V, q), V.T)
        sq = coef * coef
        total = np.sum(sq, axis=(-2, -1))
        clip1 = np.sum(sq[..., :n, :n], axis=(-2, -1))
        clip2 = np.sum(sq[..., : n - 1, : n - 1], axis=(-2, -1)) if n >= 2 else None
    else:
        coef = q @ V.T
        sq = coef * coef
        total = np.sum(sq, axis=-1)
        clip1 = total - sq[..., -1]
        clip2 = clip1 - sq[..., -2] if n >= 2 else None

    e_top = _safe_ratio(total - clip1, total)
    if clip2 is None:
        return e_top
    e_next = _safe_ratio(clip1 - clip2, clip1)
    return np.maximum(e_top, e_next)


def _safe_ratio(num, den):
    out = np.zeros_like(den)
    np.divide(num, den, out=out, where=den > 0)
    return np.maximum(out, 0.0)


def smoothness_alpha(q, basis: Basis, config: IndicatorConfig, dim: int = 1):
    """Raw blending coefficient from the logistic map of the mode energy."""
    energy = highest_mode_energy(q, basis, dim)
    return alpha_of_energy(energy, basis.degree, config)


def alpha_of_energy(energy, degree: int, config: IndicatorConfig):
    thr = config.threshold(degree)
    s = config.sharpness
    return 1.0 / (1.0 + np.exp(-(s / thr) * (energy - thr)))


def clip_alpha(alpha_raw, config: IndicatorConfig):
    """Clip tiny coefficients to 0 and saturated ones to 1, cap at alpha_max."""
    a = np.where(alpha_raw < config.alpha_min, 0.0, alpha_raw)
    a = np.where(alpha_raw > 1.0 - config.alpha_min, 1.0, a)
    return np.minimum(a, config.alpha_max)


def smooth_alpha_1d(alpha, periodic: bool):
    """One two-buffer pass spreading half of each neighbour's coefficient."""
    if periodic:
        left = np.roll(alpha, 1)
        right = np.roll(alpha, -1)
    else:
        left = np.concatenate([alpha[:1], alpha[:-1]])
        right = np.concatenate([alpha[1:], alpha[-1:]])
    return np.maximum(alpha, 0.5 * np.maximum(left, right))


def smooth_alpha_2d(alpha, periodic_x: bool, periodic_y: bool):
    """Face-neighbour smoothing pass on a 2-D element array."""
    out = alpha.copy()
    for axis, periodic in ((0, periodic_x), (1, periodic_y)):
        if periodic:
            lo = np.roll(alpha, 1, axis=axis)
            hi = np.roll(alpha, -1, axis=axis)
        else:
            pad = [(0, 0), (0, 0)]
            pad[axis] = (1, 1)
            ext = np.pad(alpha, pad, mode="edge")
            sl_lo = [slice(None)] * 2
            sl_hi = [slice(None)] * 2
            sl_lo[axis] = slice(0, -2)
            sl_hi[axis] = slice(2, None)
            lo, hi = ext[tuple(sl_lo)], ext[tuple(sl_hi)]
        out = np.maximum(out, 0.5 * np.maximum(lo, hi))
    return out


def minmod(a, b, c):
    from . import _kernels

    if (_kernels.HAVE_NUMBA and isinstance(a, np.ndarray)
            and a.shape == b.shape == c.shape and a.ndim > 0
            and a.flags.c_contiguous and b.flags.c_contiguous
            and c.flags.c_contiguous):
        out = np.empty_like(a)
        _kernels.minmod3_flat(a.reshape(-1), b.reshape(-1), c.reshape(-1),
                              out.reshape(-1))
        return out
    sa, sb, sc = np.sign(a), np.sign(b), np.sign(c)
    agree = (sa == sb) & (sb == sc)
    m = np.minimum(np.abs(a), np.minimum(np.abs(b), np.abs(c)))
    return np.where(agree, sa * m, 0.0)


def minmod_tvb(a, b, c, tol):
    """Relaxed minmod: pass a through when within the smooth-extremum bound."""
    return np.where(np.abs(a) <= tol, a, minmod(a, b, c))


def tvb_limit(u, basis: Basis, mesh, eq, m_param: float, characteristic=True):
    """TVB slope limiter applied after the update (1-D solutions only).

    Elements whose face variations exceed the limited values are replaced
    by a linear polynomial carrying the average limited slope; the element
    mean is preserved exactly. With characteristic=True, differences are
    limited in the local characteristic variables of the element mean.
    """
    dx = mesh.dx
    mean = np.sum(u * basis.weights, axis=-1)
    trace_l = u @ basis.interp_left
    trace_r = u @ basis.interp_right

    if mesh.periodic:
        mean_lo = np.roll(mean, 1, axis=1)
        mean_hi = np.roll(mean, -1, axis=1)
    else:
        mean_lo = np.concatenate([mean[:, :1], mean[:, :-1]], axis=1)
        mean_hi = np.concatenate([mean[:, 1:], mean[:, -1:]], axis=1)

    d_in_minus = mean - trace_l
    d_in_plus = trace_r - mean
    d_lo = mean - mean_lo
    d_hi = mean_hi - mean

    if characteristic and eq.nvar > 1:
        L, R = _mean_eigenbasis(eq, mean)
        proj = lambda d: np.einsum("eij,je->ie", L, d)
        back = lambda d: np.einsum("eij,je->ie", R, d)
    else:
        proj = back = lambda d: d

    cm, cp = proj(d_in_minus), proj(d_in_plus)
    clo, chi = proj(d_lo), proj(d_hi)
    tol = m_param * dx * dx
    lm = minmod_tvb(cm, clo, chi, tol)
    lp = minmod_tvb(cp, clo, chi, tol)

    changed = np.any(np.abs(lm - cm) > 1e-14, axis=0) | np.any(
        np.abs(lp - cp) > 1e-14, axis=0)
    if not np.any(changed):
        return u

    slope = 0.5 * (back(lm) + back(lp))
    linear = mean[..., None] + slope[..., None] * (2.0 * basis.nodes - 1.0)
    return np.where(changed[None, :, None], linear, u)


def _mean_eigenbasis(eq, mean):
    """Left/right eigenvector stacks at element means, with a safe fallback."""
    rho, mom, ene = mean
    ne = rho.shape[0]
    p = eq.pressure(mean)
    bad = ~np.isfinite(p) | (p <= 0) | (rho <= 0)
    safe_rho = np.where(bad, 1.0, rho)
    safe_p = np.where(bad, 1.0, p)
    v = mom / safe_rho
    c = np.sqrt(eq.gamma * safe_p / safe_rho)
    H = (ene + safe_p) / safe_rho
    R = np.empty((ne, 3, 3))
    R[:, 0] = 1.0
    R[:, 1, 0], R[:, 1, 1], R[:, 1, 2] = v - c, v, v + c
    R[:, 2, 0], R[:, 2, 1], R[:, 2, 2] = H - v * c, 0.5 * v * v, H + v * c
    ident = np.eye(3)
    R[bad] = ident
    L = np.linalg.inv(R)
    return L, R


def scaling_limit(u, weights_nd, eq, eps_floor=1e-10):
    """Contract nodal values toward the admissible element mean.

    Applied per ordered constraint: a single factor per element pulls every
    node just far enough that the constraint stays above
    min(eps_floor, value at the mean). Means must be admissible; a violated
    mean is an invariant breach upstream and raises. The returned array may
    be the input updated in place.
    """
    if eq.nconstraints == 0:
        return u
    from . import _kernels

    if (_kernels.HAVE_NUMBA and eq.nconstraints == 2 and hasattr(eq, "gamma")
            and u.flags.c_contiguous and np.isscalar(eps_floor)):
        nvar = u.shape[0]
        flat = u.reshape(nvar, -1, int(np.prod(weights_nd.shape)))
        bad = _kernels.euler_scaling_limit(flat, weights_nd.reshape(-1),
                                           float(eps_floor), eq.gamma)
        if bad:
            raise AdmissibilityError(
                "inadmissible element mean reached the scaling limiter")
        return u
    node_axes = tuple(range(-weights_nd.ndim, 0))
    mean = np.sum(u * weights_nd, axis=node_axes)
    expand = (...,) + (None,) * weights_nd.ndim

    for k in range(eq.nconstraints):
        pk_mean = eq.constraint(mean, k)
        if np.any(pk_mean <= 0.0) or not np.all(np.isfinite(pk_mean)):
            raise AdmissibilityError(
                "inadmissible element mean reached the scaling limiter")
        eps = np.minimum(eps_floor, pk_mean)
        pk = eq.constraint(u, k)
        violation = pk - eps[expand]
        if np.min(violation) >= 0.0:
            continue
        diff = pk_mean[expand] - pk
        # theta < 1 only where the node dips under its floor
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs((eps - pk_mean)[expand] / np.where(diff == 0.0, 1.0, diff))
        ratio = np.where(violation < 0.0, ratio, 1.0)
        theta = np.minimum(1.0, np.min(ratio, axis=node_axes))
        u = mean[expand] + theta[expand] * (u - mean[expand])
    return u
