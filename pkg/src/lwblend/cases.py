"""Initial/boundary condition library and the convergence harness.

Each case is a frozen description: equation factory, domain, primitive
initial condition, boundary conditions and final time, plus defaults for
mesh size and polynomial degree. Initial conditions return primitive
variables and may depend on the mesh (cell-width-scaled energy sources).
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .equations import Euler1D, Euler2D, LinearAdvection1D, VariableAdvection2D
from .mesh import (BoundarySet1D, BoundarySet2D, Dirichlet, Periodic,
                   ReflectingWall, Transmissive)


@dataclass
class CaseSpec:
    name: str
    dim: int
    make_equation: Callable
    domain: tuple                      # (a, b) or ((xa, xb), (ya, yb))
    ic: Callable                       # primitive state of (x[, y]); or factory
    make_bcs: Callable
    tend: float
    default_cells: tuple
    default_degree: int = 4
    ic_needs_mesh: bool = False
    exact: Callable | None = None      # exact primitive solution of (x[, y], t)
    crop: tuple | None = None          # postprocessing window for enlarged runs
    notes: str = ""
    dt_safety: float | None = None
    include_ghost_dt: bool = False


_REGISTRY: dict = {}


def _register(case: CaseSpec):
    _REGISTRY[case.name] = case
    return case


def available_cases():
    return sorted(_REGISTRY)


def build_case(name: str) -> CaseSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown case {name!r}; available: {', '.join(available_cases())}")


# --------------------------------------------------------------------------
# 1-D Euler cases
# --------------------------------------------------------------------------

def _shu_osher_ic(x):
    rho = np.where(x < -4.0, 3.857143, 1.0 + 0.2 * np.sin(5.0 * x))
    v = np.where(x < -4.0, 2.629369, 0.0)
    p = np.where(x < -4.0, 10.333333, 1.0)
    return np.stack([rho, v, p])


_register(CaseSpec(
    name="shu_osher", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(-5.0, 5.0), ic=_shu_osher_ic,
    make_bcs=lambda: BoundarySet1D(Transmissive(), Transmissive()),
    tend=1.8, default_cells=(400,),
    notes="shock / smooth density field interaction"))


def _blast_ic(x):
    rho = np.ones_like(x)
    v = np.zeros_like(x)
    p = np.where(x < 0.1, 1000.0, np.where(x < 0.9, 0.01, 100.0))
    return np.stack([rho, v, p])


_register(CaseSpec(
    name="blast", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(0.0, 1.0), ic=_blast_ic,
    make_bcs=lambda: BoundarySet1D(ReflectingWall(), ReflectingWall()),
    tend=0.038, default_cells=(400,),
    notes="interacting blast waves between solid walls"))


def _sedov1d_ic_factory(mesh):
    dx = float(mesh.dx[0])

    def ic(x):
        rho = np.ones_like(x)
        v = np.zeros_like(x)
        ene = np.where(np.abs(x) <= dx / 2.0, 3.2e6 / dx, 1.0e-12)
        p = 0.4 * ene  # gamma = 1.4, zero velocity
        return np.stack([rho, v, p])

    return ic


_register(CaseSpec(
    name="sedov1d", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(-1.0, 1.0), ic=_sedov1d_ic_factory, ic_needs_mesh=True,
    make_bcs=lambda: BoundarySet1D(ReflectingWall(), ReflectingWall()),
    tend=0.001, default_cells=(201,),
    notes="point explosion; cell-width-scaled energy deposit"))


def _double_rarefaction_ic(x):
    rho = np.full_like(x, 7.0)
    v = np.where(x <= 0.0, -1.0, 1.0)
    p = np.full_like(x, 0.2)
    return np.stack([rho, v, p])


_register(CaseSpec(
    name="double_rarefaction", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(-1.0, 1.0), ic=_double_rarefaction_ic,
    make_bcs=lambda: BoundarySet1D(Transmissive(), Transmissive()),
    tend=0.6, default_cells=(200,), notes="near-vacuum formation"))


def _leblanc_ic(x):
    rho = np.where(x <= 0.0, 2.0, 0.001)
    v = np.zeros_like(x)
    p = np.where(x <= 0.0, 1.0e9, 1.0)
    return np.stack([rho, v, p])


_register(CaseSpec(
    name="leblanc", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(-1.0, 1.0), ic=_leblanc_ic,
    make_bcs=lambda: BoundarySet1D(Transmissive(), Transmissive()),
    tend=0.001, default_cells=(800,), notes="extreme pressure ratio shock tube"))


def _density_wave_ic(x):
    rho = 2.0 + 0.2 * np.sin(2.0 * np.pi * x)
    return np.stack([rho, np.ones_like(x), np.ones_like(x)])


def _density_wave_exact(x, t):
    return _density_wave_ic(x - t)


_register(CaseSpec(
    name="density_wave", dim=1, make_equation=lambda: Euler1D(1.4),
    domain=(0.0, 1.0), ic=_density_wave_ic, exact=_density_wave_exact,
    make_bcs=lambda: BoundarySet1D(Periodic(), Periodic()),
    tend=1.0, default_cells=(50,),
    notes="smooth periodic transport; conservation and convergence checks"))


def _advection_sine_ic(x):
    return np.sin(2.0 * np.pi * x)[None]


_register(CaseSpec(
    name="advection_sine", dim=1, make_equation=lambda: LinearAdvection1D(1.0),
    domain=(0.0, 1.0), ic=_advection_sine_ic,
    exact=lambda x, t: np.sin(2.0 * np.pi * (x - t))[None],
    make_bcs=lambda: BoundarySet1D(Periodic(), Periodic()),
    tend=1.0, default_cells=(40,), default_degree=3,
    notes="scalar accuracy baseline"))


# --------------------------------------------------------------------------
# 2-D cases
# --------------------------------------------------------------------------

def _vortex_prim(x, y, gamma=1.4, beta=5.0, minf=0.5, angle=np.pi / 4.0):
    r2 = x * x + y * y
    rho = (1.0 - beta**2 * (gamma - 1.0) / (8.0 * gamma * np.pi**2)
           * np.exp(1.0 - r2)) ** (1.0 / (gamma - 1.0))
    vx = minf * np.cos(angle) - beta * y / (2.0 * np.pi) * np.exp((1.0 - r2) / 2.0)
    vy = minf * np.sin(angle) + beta * x / (2.0 * np.pi) * np.exp((1.0 - r2) / 2.0)
    p = rho ** gamma
    return np.stack([rho, vx, vy, p])


def _vortex_exact(x, y, t, extent=20.0):
    # advected by the free stream; periodic wrap onto the domain
    xc = np.mod(x - 0.5 * np.cos(np.pi / 4) * t + 10.0, extent) - 10.0
    yc = np.mod(y - 0.5 * np.sin(np.pi / 4) * t + 10.0, extent) - 10.0
    return _vortex_prim(xc, yc)


_register(CaseSpec(
    name="vortex", dim=2, make_equation=lambda: Euler2D(1.4),
    domain=((-10.0, 10.0), (-10.0, 10.0)), ic=_vortex_prim,
    exact=_vortex_exact,
    make_bcs=lambda: BoundarySet2D(Periodic(), Periodic(), Periodic(), Periodic()),
    tend=20.0 * np.sqrt(2.0) / 0.5, default_cells=(40, 40),
    notes="isentropic vortex, one diagonal domain crossing"))


def _riemann2d12_ic(x, y):
    q1 = (x >= 0.5) & (y >= 0.5)
    q2 = (x < 0.5) & (y >= 0.5)
    q3 = (x < 0.5) & (y < 0.5)
    rho = np.where(q1, 0.5313, np.where(q2, 1.0, np.where(q3, 0.8, 1.0)))
    vx = np.where(q2, 0.7276, 0.0)
    vy = np.where(q1 | q2 | q3, 0.0, 0.7276)
    p = np.where(q1, 0.4, 1.0)
    return np.stack([rho, vx, vy, p])


_register(CaseSpec(
    name="riemann2d_12", dim=2, make_equation=lambda: Euler2D(1.4),
    domain=((-0.25, 1.25), (-0.25, 1.25)), ic=_riemann2d12_ic,
    make_bcs=lambda: BoundarySet2D(*(Transmissive() for _ in range(4))),
    tend=0.25, default_cells=(128, 128), crop=((0.0, 1.0), (0.0, 1.0)),
    notes="four-quadrant configuration 12 on a widened domain, cropped on output"))


def _dmr_state(x, y, t):
    front = 1.0 / 6.0 + (y + 20.0 * t) / np.sqrt(3.0)
    post = x < front
    rho = np.where(post, 8.0, 1.4)
    vx = np.where(post, 8.25 * np.cos(np.pi / 6.0), 0.0)
    vy = np.where(post, -8.25 * np.sin(np.pi / 6.0), 0.0)
    p = np.where(post, 116.5, 1.0)
    return np.stack([rho, vx, vy, p])


class _DMRBottom(Transmissive):
    """Outflow ahead of the ramp start, reflecting wall after it."""

    kind = "dmr-bottom"

    def ghost_values(self, interior, coords, t, eq, axis):
        outflow = Transmissive().ghost_values(interior, coords, t, eq, axis)
        wall = ReflectingWall().ghost_values(interior, coords, t, eq, axis)
        on_wall = coords[0] >= 1.0 / 6.0
        return np.where(on_wall[None], wall, outflow)


_register(CaseSpec(
    name="dmr", dim=2, make_equation=lambda: Euler2D(1.4),
    domain=((0.0, 4.0), (0.0, 1.0)),
    ic=lambda x, y: _dmr_state(x, y, 0.0),
    make_bcs=lambda: BoundarySet2D(
        Dirichlet(lambda x, y, t: _dmr_state(x, y, t)),
        Transmissive(),
        _DMRBottom(),
        Dirichlet(lambda x, y, t: _dmr_state(x, y, t))),
    tend=0.2, default_cells=(600, 150),
    notes="oblique shock reflection off a ramp"))


def _kh_ic(x, y):
    w0, sigma = 0.1, 0.05 / np.sqrt(2.0)
    band = (y > 0.25) & (y < 0.75)
    rho = np.where(band, 2.0, 1.0)
    vx = np.where(band, 0.5, -0.5)
    vy = w0 * np.sin(4.0 * np.pi * x) * (
        np.exp(-((y - 0.25) ** 2) / (2.0 * sigma**2))
        + np.exp(-((y - 0.75) ** 2) / (2.0 * sigma**2)))
    p = np.full_like(x, 2.5)
    return np.stack([rho, vx, vy, p])


_register(CaseSpec(
    name="kelvin_helmholtz", dim=2, make_equation=lambda: Euler2D(1.4),
    domain=((0.0, 1.0), (0.0, 1.0)), ic=_kh_ic,
    make_bcs=lambda: BoundarySet2D(Periodic(), Periodic(), Periodic(), Periodic()),
    tend=0.4, default_cells=(512, 512),
    notes="shear instability, diatomic adiabatic constant"))


def _astro_jet_inflow(x, y, t):
    in_jet = np.abs(y) < 0.05
    rho = np.where(in_jet, 5.0, 0.5)
    vx = np.where(in_jet, 800.0, 0.0)
    vy = np.zeros_like(x)
    p = np.full_like(x, 0.4127)
    return np.stack([rho, vx, vy, p])


_register(CaseSpec(
    name="astro_jet", dim=2, make_equation=lambda: Euler2D(5.0 / 3.0),
    domain=((0.0, 1.0), (-0.5, 0.5)),
    ic=lambda x, y: np.stack([np.full_like(x, 0.5), np.zeros_like(x),
                              np.zeros_like(x), np.full_like(x, 0.4127)]),
    make_bcs=lambda: BoundarySet2D(
        Dirichlet(_astro_jet_inflow), Transmissive(), Transmissive(),
        Transmissive()),
    tend=0.001, default_cells=(400, 400), dt_safety=0.5,
    include_ghost_dt=True,
    notes="Mach 2000 inflow; adiabatic constant 5/3 is a configurable default "
          "not pinned by the source description"))


def _sedov2d_periodic_ic(x, y):
    sigma_rho, sigma_p = 0.25, 0.15
    gamma = 1.4
    r2 = x * x + y * y
    rho = 1.0 + np.exp(-r2 / (2 * sigma_rho**2)) / (4 * np.pi * sigma_rho**2)
    p = 1.0e-5 + (gamma - 1.0) * np.exp(-r2 / (2 * sigma_p**2)) / (4 * np.pi * sigma_p**2)
    return np.stack([rho, np.zeros_like(x), np.zeros_like(x), p])


_register(CaseSpec(
    name="sedov2d_periodic", dim=2, make_equation=lambda: Euler2D(1.4),
    domain=((-1.5, 1.5), (-1.5, 1.5)), ic=_sedov2d_periodic_ic,
    make_bcs=lambda: BoundarySet2D(Periodic(), Periodic(), Periodic(), Periodic()),
    tend=20.0, default_cells=(64, 64),
    notes="Gaussian energy deposit with periodic shock collisions"))


def _rotation_ic(x, y):
    def dist(cx, cy):
        return np.sqrt((x - cx) ** 2 + (y - cy) ** 2)

    hump = 0.25 * (1.0 + np.cos(np.pi * np.minimum(dist(0.25, 0.5), 0.15) / 0.15))
    cone = np.maximum(0.0, 1.0 - dist(0.5, 0.25) / 0.15)
    r = dist(0.5, 0.75)
    slot = (r <= 0.15) & ~((np.abs(x - 0.5) < 0.025) & (y < 0.85))
    return (hump + cone + slot.astype(float))[None]


_register(CaseSpec(
    name="rotation_composite", dim=2,
    make_equation=lambda: VariableAdvection2D(lambda x, y: (0.5 - y, x - 0.5)),
    domain=((0.0, 1.0), (0.0, 1.0)), ic=_rotation_ic,
    exact=None,
    make_bcs=lambda: BoundarySet2D(Periodic(), Periodic(), Periodic(), Periodic()),
    tend=2.0 * np.pi, default_cells=(100, 100),
    notes="solid-body rotation of hump, cone and slotted disc"))


# --------------------------------------------------------------------------
# error measurement and the convergence harness
# --------------------------------------------------------------------------

def interpolate_1d(u, edges, nodes, xs):
    """Evaluate piecewise polynomial nodal data at arbitrary points.

    u: (nvar, ne, ns) nodal values on elements bounded by `edges`; xs points
    inside the domain. Returns (nvar, len(xs)).
    """
    from .basis import lagrange_eval_matrix

    edges = np.asarray(edges)
    xs = np.asarray(xs)
    idx = np.clip(np.searchsorted(edges, xs, side="right") - 1, 0,
                  edges.size - 2)
    xi = (xs - edges[idx]) / (edges[idx + 1] - edges[idx])
    out = np.empty((u.shape[0], xs.size))
    for j, (e, s) in enumerate(zip(idx, xi)):
        weights = lagrange_eval_matrix(nodes, np.array([s]))[0]
        out[:, j] = u[:, e] @ weights
    return out


def sample_error(u, solver, case, t, norm="l2", variable=0):
    """Error of a conserved field against the case's exact solution.

    Sampled at N+3 equispaced points per element and direction; the L2
    variant weights samples uniformly by cell volume.
    """
    from .basis import lagrange_eval_matrix

    if case.exact is None:
        raise ValueError(f"case {case.name!r} has no exact solution")
    basis = solver.basis
    pts = np.linspace(0.0, 1.0, basis.degree + 3)
    S = lagrange_eval_matrix(basis.nodes, pts)
    eq = solver.eq
    if case.dim == 1:
        mesh = solver.mesh
        xs = mesh.edges[:-1, None] + pts * mesh.dx[:, None]
        num = u[variable] @ S.T
        exact = eq.prim_to_cons(case.exact(xs, t))[variable]
        diff = num - exact
        vol = (mesh.dx / pts.size)[:, None]
    else:
        mx, my = solver.mesh.x, solver.mesh.y
        xs = mx.edges[:-1, None] + pts * mx.dx[:, None]
        ys = my.edges[:-1, None] + pts * my.dx[:, None]
        num = np.einsum("ip,xypq,jq->xyij", S, u[variable], S)
        X = xs[:, None, :, None]
        Y = ys[None, :, None, :]
        exact = eq.prim_to_cons(case.exact(X, Y, t))[variable]
        diff = num - exact * np.ones_like(num)
        vol = (mx.dx[:, None] * my.dx[None, :] / pts.size**2)[:, :, None, None]
    if norm == "l2":
        return float(np.sqrt(np.sum(diff * diff * vol)))
    if norm == "l1":
        return float(np.sum(np.abs(diff) * vol))
    return float(np.max(np.abs(diff)))


def convergence_harness(case_name, degrees, grids, limiter="blend-mh",
                        norm="l2", tend=None, run_kwargs=None):
    """Errors and observed orders over a grid sequence per degree.

    Returns {degree: [(cells, error, rate-or-None), ...]}; rates are dyadic
    ratios of consecutive errors. A repeated grid size is flagged instead of
    producing a spurious rate.
    """
    from .runner import run_case

    if len(grids) < 2:
        raise ValueError("need at least two grids for a convergence study")
    table = {}
    for degree in degrees:
        rows = []
        prev = None
        for i, cells in enumerate(grids):
            if i > 0 and cells == grids[i - 1]:
                raise ValueError("repeated grid size; rate undefined")
            result = run_case(case_name, degree=degree, cells=cells,
                              limiter=limiter, tend=tend,
                              **(run_kwargs or {}))
            err = sample_error(result.u, result.solver, result.case,
                               result.t, norm=norm)
            rate = None if prev is None else float(np.log2(prev / err) /
                                                   np.log2(cells / grids[i - 1]))
            rows.append((cells, err, rate))
            prev = err
        table[degree] = rows
    return table
