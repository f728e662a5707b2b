"""Run orchestration: case setup, time loop, snapshots, manifests, restart."""

import json
import time as _time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .basis import build_basis, gauss_legendre_01
from .cases import CaseSpec, build_case
from .driver import (Solver1D, Solver2D, SolverOptions, TimeConfig)
from .equations import AdmissibilityError
from .limiting import IndicatorConfig
from .mesh import Mesh1D, Mesh2D

SNAPSHOT_SCHEMA = "lwblend-snapshot v1"
MANIFEST_SCHEMA = "lwblend-manifest v1"


@dataclass
class RunResult:
    case: CaseSpec
    solver: object
    u: np.ndarray
    t: float
    steps: int
    alpha_times: np.ndarray
    alpha_active: np.ndarray
    alpha_max: float
    conservation_initial: np.ndarray
    conservation_final: np.ndarray
    wall_seconds: float
    retries: int
    snapshot_files: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def conservation_drift(self):
        scale = np.maximum(np.abs(self.conservation_initial), 1e-300)
        return np.abs(self.conservation_final - self.conservation_initial) / scale


def _build_mesh(case: CaseSpec, cells):
    if case.dim == 1:
        (a, b) = case.domain
        return Mesh1D.uniform(a, b, cells[0])
    return Mesh2D.uniform(case.domain, cells[0], cells[1])


def _project_ic(case, solver, mode="collocate"):
    eq = solver.eq
    if case.dim == 1:
        xn = solver.node_coords()
        if mode == "collocate":
            return eq.prim_to_cons(case.ic(xn))
        return _cell_mean_ic_1d(case, solver)
    xs, ys = solver.node_coords()
    shape = (solver.mesh.x.n, solver.mesh.y.n,
             solver.basis.nnodes, solver.basis.nnodes)
    X = np.broadcast_to(xs[:, None, :, None], shape)
    Y = np.broadcast_to(ys[None, :, None, :], shape)
    if mode == "collocate":
        return eq.prim_to_cons(case.ic(X, Y))
    return _cell_mean_ic_2d(case, solver)


def _cell_mean_ic_1d(case, solver):
    xq, wq = gauss_legendre_01(8)
    mesh = solver.mesh
    xs = mesh.edges[:-1, None] + xq * mesh.dx[:, None]
    cons = solver.eq.prim_to_cons(case.ic(xs))
    mean = np.sum(cons * wq, axis=-1)
    return np.repeat(mean[:, :, None], solver.basis.nnodes, axis=-1)


def _cell_mean_ic_2d(case, solver):
    xq, wq = gauss_legendre_01(8)
    mx, my = solver.mesh.x, solver.mesh.y
    xs = mx.edges[:-1, None] + xq * mx.dx[:, None]
    ys = my.edges[:-1, None] + xq * my.dx[:, None]
    X = xs[:, None, :, None]
    Y = ys[None, :, None, :]
    cons = solver.eq.prim_to_cons(case.ic(X, Y) * np.ones(
        (mx.n, my.n, xq.size, xq.size)))
    mean = np.einsum("vxypq,p,q->vxy", cons, wq, wq)
    ns = solver.basis.nnodes
    out = np.broadcast_to(mean[:, :, :, None, None],
                          mean.shape + (ns, ns)).copy()
    return out


def check_ic_admissible(case: CaseSpec, oversample: int = 10):
    """Sample the initial condition densely and verify admissibility."""
    eq = case.make_equation()
    if eq.nconstraints == 0:
        return True
    n = oversample * max(case.default_cells)
    if case.dim == 1:
        a, b = case.domain
        xs = np.linspace(a, b, n)
        ic = case.ic if not case.ic_needs_mesh else case.ic(
            _build_mesh(case, case.default_cells))
        u = eq.prim_to_cons(ic(xs))
    else:
        (xa, xb), (ya, yb) = case.domain
        X, Y = np.meshgrid(np.linspace(xa, xb, n), np.linspace(ya, yb, n),
                           indexing="ij")
        u = eq.prim_to_cons(case.ic(X, Y))
    if not eq.is_admissible(u):
        raise AdmissibilityError(f"case {case.name!r} initial data inadmissible")
    return True


def totals(solver, u):
    """Domain integrals of the conserved fields."""
    basis = solver.basis
    if u.ndim == 3:
        mean = np.sum(u * basis.weights, axis=-1)
        return np.sum(mean * solver.mesh.dx, axis=-1)
    w2 = solver.weights2d
    mean = np.sum(u * w2, axis=(-2, -1))
    vol = solver.mesh.x.dx[:, None] * solver.mesh.y.dx[None, :]
    return np.sum(mean * vol, axis=(-2, -1))


def run_case(case, degree=None, cells=None, limiter="blend-mh",
             cfl_safety=0.98, tend=None, fixed_dt=None, out_dir=None,
             fmt="csv", snapshots=1, options: SolverOptions | None = None,
             indicator: IndicatorConfig | None = None, tvb_m=0.0,
             ic_projection="collocate", max_steps=None, stop_after_steps=None,
             progress=False, state=None):
    """Set a case up and run it to its final time.

    `state` may carry a (u, t) pair from load_state to resume a run. With
    out_dir set, snapshots (CSV) and a JSON manifest are written.
    """
    if isinstance(case, str):
        case = build_case(case)
    degree = degree if degree is not None else case.default_degree
    if cells is None:
        cells = case.default_cells
    elif isinstance(cells, int):
        cells = (cells,) * case.dim
    tend = case.tend if tend is None else tend

    eq = case.make_equation()
    basis = build_basis(degree, "GL")
    mesh = _build_mesh(case, cells)
    bcs = case.make_bcs()
    if options is None:
        options = SolverOptions(limiter=limiter, tvb_m=tvb_m)
        if indicator is not None:
            options.indicator = indicator
        options.include_ghost_dt = case.include_ghost_dt
    tc = TimeConfig(safety=case.dt_safety or cfl_safety, tend=tend,
                    fixed_dt=fixed_dt)
    solver_cls = Solver1D if case.dim == 1 else Solver2D
    solver = solver_cls(mesh, eq, basis, bcs, options, tc)

    case_runtime = case
    if case.ic_needs_mesh:
        case_runtime = CaseSpec(**{**asdict_shallow(case), "ic": case.ic(mesh),
                                   "ic_needs_mesh": False})

    if state is None:
        u = _project_ic(case_runtime, solver, ic_projection)
        t = 0.0
        steps0 = 0
    else:
        u, t, steps0 = state["u"].copy(), float(state["t"]), int(state["steps"])

    cons0 = totals(solver, u)
    snap_times = np.linspace(0.0, tend, snapshots + 1)[1:] if snapshots else [tend]
    snap_times = [s for s in snap_times if s > t + 1e-14]

    alpha_times, alpha_active = [], []
    alpha_max = 0.0
    steps = steps0
    retries = 0
    files = []
    outp = Path(out_dir) if out_dir else None
    if outp:
        outp.mkdir(parents=True, exist_ok=True)

    wall0 = _time.perf_counter()
    snap_idx = 0
    while t < tend - 1e-12 * max(1.0, tend):
        dt = solver.compute_dt(u, t)
        next_stop = snap_times[snap_idx] if snap_idx < len(snap_times) else tend
        dt = min(dt, next_stop - t, tend - t)
        try:
            u, diag = solver.step(u, t, dt)
        except AdmissibilityError as err:
            if outp:
                dump = outp / "failed_state.npz"
                np.savez(dump, u=u, t=t)
                raise AdmissibilityError(f"{err} (state dumped to {dump})")
            raise
        t += diag.dt
        steps += 1
        retries += diag.retries
        alpha_times.append(t)
        alpha_active.append(diag.alpha_active_fraction)
        alpha_max = max(alpha_max, diag.alpha_max)
        if stop_after_steps is not None and steps - steps0 >= stop_after_steps:
            break
        if max_steps is not None and steps - steps0 >= max_steps:
            raise RuntimeError(f"step limit {max_steps} reached at t={t:.6g}")
        if progress and steps % 200 == 0:
            print(f"  step {steps}  t={t:.6g}  dt={diag.dt:.3e}", flush=True)
        while snap_idx < len(snap_times) and t >= snap_times[snap_idx] - 1e-12:
            if outp:
                files.append(write_snapshot(outp, solver, case_runtime, u, t,
                                            snap_idx, fmt))
            snap_idx += 1

    wall = _time.perf_counter() - wall0
    consf = totals(solver, u)
    config = {
        "case": case.name, "degree": degree, "cells": list(cells),
        "limiter": options.limiter, "cfl_safety": tc.safety, "tend": tend,
        "flux_correction": options.flux_correction,
        "indicator": asdict_shallow(options.indicator),
        "tvb_m": options.tvb_m, "ic_projection": ic_projection,
    }
    result = RunResult(
        case=case_runtime, solver=solver, u=u, t=t, steps=steps,
        alpha_times=np.asarray(alpha_times),
        alpha_active=np.asarray(alpha_active), alpha_max=alpha_max,
        conservation_initial=cons0, conservation_final=consf,
        wall_seconds=wall, retries=retries, snapshot_files=files,
        config=config)
    if outp:
        write_manifest(outp / "run.json", result)
    return result


def asdict_shallow(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {k: getattr(obj, k) for k in obj.__dataclass_fields__}
    return dict(obj)


# --------------------------------------------------------------------------
# output files
# --------------------------------------------------------------------------

def _column_data(solver, case, u):
    eq = solver.eq
    alpha = solver._alpha(u)
    if case.dim == 1:
        xn = solver.node_coords()
        ns = solver.basis.nnodes
        cols = {"x": xn.ravel()}
        if eq.nconstraints > 0:
            prim = eq.cons_to_prim(u)
            cols.update(rho=u[0].ravel(), mom=u[1].ravel(),
                        energy=u[2].ravel(), velocity=prim[1].ravel(),
                        pressure=prim[2].ravel())
        else:
            cols.update(u=u[0].ravel())
        cols["alpha"] = np.repeat(alpha, ns)
        return cols
    xs, ys = solver.node_coords()
    nex, ney = solver.mesh.shape
    ns = solver.basis.nnodes
    X = np.broadcast_to(xs[:, None, :, None], (nex, ney, ns, ns))
    Y = np.broadcast_to(ys[None, :, None, :], (nex, ney, ns, ns))
    order = lambda a: a.transpose(0, 2, 1, 3).reshape(nex * ns, ney * ns).ravel()
    cols = {"x": order(X), "y": order(Y)}
    if eq.nconstraints > 0:
        prim = eq.cons_to_prim(u)
        cols.update(rho=order(u[0]), mom_x=order(u[1]), mom_y=order(u[2]),
                    energy=order(u[3]), vel_x=order(prim[1]),
                    vel_y=order(prim[2]), pressure=order(prim[3]))
    else:
        cols.update(u=order(u[0]))
    alpha_nodes = np.broadcast_to(alpha[:, :, None, None], (nex, ney, ns, ns))
    cols["alpha"] = order(alpha_nodes)
    return cols


def write_snapshot(out_dir, solver, case, u, t, index, fmt="csv"):
    """One snapshot file: nodal coordinates, conserved + primitive fields,
    per-element blending coefficient. The header line carries the schema
    version and the reshaping metadata postprocessing needs."""
    out_dir = Path(out_dir)
    cols = _column_data(solver, case, u)
    meta = {
        "dim": case.dim, "time": t, "case": case.name,
        "cells": list(solver.mesh.shape) if case.dim == 2 else [solver.mesh.n],
        "nodes_per_element": solver.basis.nnodes,
        "columns": list(cols),
    }
    if fmt == "json":
        path = out_dir / f"snapshot_{index:04d}_t{t:.6f}.json"
        payload = {"schema": SNAPSHOT_SCHEMA, "meta": meta,
                   "data": {k: v.tolist() for k, v in cols.items()}}
        path.write_text(json.dumps(payload))
        return str(path)
    path = out_dir / f"snapshot_{index:04d}_t{t:.6f}.csv"
    header = f"# {SNAPSHOT_SCHEMA} {json.dumps(meta)}\n" + ",".join(cols)
    data = np.column_stack(list(cols.values()))
    np.savetxt(path, data, delimiter=",", header=header, comments="")
    return str(path)


def write_manifest(path, result: RunResult):
    payload = {
        "schema": MANIFEST_SCHEMA,
        "config": result.config,
        "time": result.t,
        "steps": result.steps,
        "retries": result.retries,
        "wall_seconds": result.wall_seconds,
        "conservation": {
            "initial": result.conservation_initial.tolist(),
            "final": result.conservation_final.tolist(),
            "relative_drift": result.conservation_drift.tolist(),
        },
        "alpha": {
            "max": result.alpha_max,
            "times": result.alpha_times.tolist(),
            "active_percent": (100.0 * result.alpha_active).tolist(),
        },
        "snapshots": result.snapshot_files,
    }
    Path(path).write_text(json.dumps(payload, indent=1))
    return str(path)


def save_state(path, u, t, steps=0, config=None):
    np.savez(path, u=u, t=t, steps=steps,
             config=json.dumps(config or {}))


def load_state(path):
    data = np.load(path, allow_pickle=False)
    return {"u": data["u"], "t": float(data["t"]), "steps": int(data["steps"]),
            "config": json.loads(str(data["config"]))}
