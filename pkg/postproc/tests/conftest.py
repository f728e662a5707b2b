"""Hand-built fixture files matching the solver's output schemas."""

import json

import numpy as np
import pytest


def _meta_line(meta):
    return "# lwblend-snapshot v1 " + json.dumps(meta)


def write_snapshot_1d(path, time=0.5, case="fixture1d", ne=3, ns=3):
    xs = np.linspace(0.0, 1.0, ne * ns)
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * xs)
    vel = 0.3 * np.ones_like(xs)
    pres = 1.0 + 0.1 * np.cos(2 * np.pi * xs)
    mom = rho * vel
    ene = pres / 0.4 + 0.5 * rho * vel**2
    alpha_elems = np.zeros(ne)
    alpha_elems[ne // 2] = 0.8
    alpha = np.repeat(alpha_elems, ns)
    cols = {"x": xs, "rho": rho, "mom": mom, "energy": ene,
            "velocity": vel, "pressure": pres, "alpha": alpha}
    meta = {"dim": 1, "time": time, "case": case, "cells": [ne],
            "nodes_per_element": ns, "columns": list(cols)}
    body = "\n".join(",".join(f"{cols[k][i]:.12g}" for k in cols)
                     for i in range(xs.size))
    path.write_text(_meta_line(meta) + "\n" + ",".join(cols) + "\n" + body + "\n")
    return path


def write_snapshot_2d(path, time=0.25, case="fixture2d", ne=2, ns=2,
                      uniform=False, with_zero=False):
    n = ne * ns
    xs = np.linspace(0.0, 1.0, n)
    ys = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    if uniform:
        rho = np.full_like(X, 2.0)
    else:
        rho = 1.0 + 0.2 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    if with_zero:
        rho = rho - rho.min()  # introduces an exact zero
    vx = 0.1 * np.ones_like(X)
    vy = -0.2 * np.ones_like(X)
    pres = np.full_like(X, 1.0)
    safe_rho = np.maximum(rho, 1e-12)
    mom_x, mom_y = safe_rho * vx, safe_rho * vy
    ene = pres / 0.4 + 0.5 * safe_rho * (vx**2 + vy**2)
    alpha = np.zeros_like(X)
    alpha[: ns, : ns] = 0.6
    cols = {"x": X.ravel(), "y": Y.ravel(), "rho": rho.ravel(),
            "mom_x": mom_x.ravel(), "mom_y": mom_y.ravel(),
            "energy": ene.ravel(), "vel_x": vx.ravel(), "vel_y": vy.ravel(),
            "pressure": pres.ravel(), "alpha": alpha.ravel()}
    meta = {"dim": 2, "time": time, "case": case, "cells": [ne, ne],
            "nodes_per_element": ns, "columns": list(cols)}
    rows = X.size
    body = "\n".join(",".join(f"{cols[k][i]:.12g}" for k in cols)
                     for i in range(rows))
    path.write_text(_meta_line(meta) + "\n" + ",".join(cols) + "\n" + body + "\n")
    return path


def write_manifest(path, case="fixture1d"):
    payload = {
        "schema": "lwblend-manifest v1",
        "config": {"case": case, "degree": 4, "cells": [64], "limiter": "blend-mh"},
        "time": 0.5,
        "steps": 40,
        "retries": 0,
        "wall_seconds": 1.0,
        "conservation": {"initial": [1, 0, 2], "final": [1, 0, 2],
                         "relative_drift": [0, 0, 0]},
        "alpha": {"max": 0.8,
                  "times": list(np.linspace(0.0125, 0.5, 40)),
                  "active_percent": list(10 * np.abs(np.sin(np.linspace(0, 3, 40))))},
        "snapshots": [],
    }
    path.write_text(json.dumps(payload))
    return path


def write_convergence_table(path):
    payload = {"case": "advection_sine", "norm": "l2", "grids": [10, 20, 40],
               "degrees": {"3": [
                   {"cells": 10, "error": 1e-2, "rate": None},
                   {"cells": 20, "error": 6.2e-4, "rate": 4.01},
                   {"cells": 40, "error": 3.9e-5, "rate": 3.99}]}}
    path.write_text(json.dumps(payload))
    return path


@pytest.fixture
def fixtures(tmp_path):
    return {
        "snap1d": write_snapshot_1d(tmp_path / "snapshot_0000_t0.500000.csv"),
        "ref1d": write_snapshot_1d(tmp_path / "snapshot_0001_t0.500000.csv",
                                   ne=6),
        "snap2d": write_snapshot_2d(tmp_path / "snapshot_0002_t0.250000.csv"),
        "snap2d_uniform": write_snapshot_2d(
            tmp_path / "snapshot_0003_t0.250000.csv", uniform=True),
        "snap2d_zero": write_snapshot_2d(
            tmp_path / "snapshot_0004_t0.250000.csv", with_zero=True),
        "manifest": write_manifest(tmp_path / "run.json"),
        "table": write_convergence_table(tmp_path / "convergence.json"),
        "dir": tmp_path,
    }
