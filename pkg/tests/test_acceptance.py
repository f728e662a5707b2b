"""Acceptance suite: one test per criterion, each printing a PASS line.

The heavy runs (vortex sequence, positivity suite, 2-D four-quadrant
problem) execute the full solver at the stated resolutions; expect the
module to take tens of minutes.
"""

import numpy as np
import pytest

from lwblend.basis import build_basis
from lwblend.cases import build_case, interpolate_1d, sample_error
from lwblend.driver import SolverOptions
from lwblend.equations import AdmissibilityError, Euler1D
from lwblend.limiting import IndicatorConfig, alpha_of_energy
from lwblend.runner import run_case
from lwblend.subcell import limit_slopes

from oracles import random_admissible_states

REF_STATE = "data/shu_osher_ref_2000.npz"


def report(criterion, detail):
    print(f"\nACCEPTANCE {criterion}: PASS — {detail}")


@pytest.fixture(scope="module")
def vortex_runs():
    runs = {}
    for degree, cells in ((3, 10), (3, 20), (3, 40), (4, 10), (4, 20)):
        runs[degree, cells] = run_case("vortex", degree=degree, cells=cells,
                                       limiter="blend-mh")
    return runs


def _vortex_error(runs, degree, cells):
    r = runs[degree, cells]
    return sample_error(r.u, r.solver, r.case, r.t, norm="l2", variable=0)


def test_criterion_1_vortex_convergence(vortex_runs):
    errs3 = [_vortex_error(vortex_runs, 3, c) for c in (10, 20, 40)]
    rate3 = np.log2(errs3[1] / errs3[2])
    errs4 = [_vortex_error(vortex_runs, 4, c) for c in (10, 20)]
    rate4 = np.log2(errs4[0] / errs4[1])
    wall = sum(r.wall_seconds for r in vortex_runs.values())
    assert rate3 >= 3.5, (errs3, rate3)
    assert rate4 >= 4.3, (errs4, rate4)
    assert wall <= 600.0, f"vortex sequence took {wall:.0f}s"
    report(1, f"degree-3 rate {rate3:.2f} (>=3.5), degree-4 rate {rate4:.2f} "
              f"(>=4.3), wall {wall:.0f}s (<=600s)")


def test_criterion_2_limiter_silent_at_resolution():
    # default-degree run at the resolved 40^2 grid; the blending
    # coefficient must never activate anywhere during the crossing
    r = run_case("vortex", degree=4, cells=40, limiter="blend-mh")
    assert r.alpha_max == 0.0, r.alpha_max
    err = sample_error(r.u, r.solver, r.case, r.t, norm="l2", variable=0)
    report(2, f"max blending coefficient over the degree-4 40^2 run = "
              f"{r.alpha_max}; L2 density error {err:.2e}")


def test_criterion_3_conservation():
    r = run_case("density_wave", degree=4, cells=50, limiter="blend-mh",
                 tend=1e9, stop_after_steps=200)
    drift = r.conservation_drift
    assert np.all(drift <= 1e-12), drift
    report(3, "relative drift over 200 steps = ["
              + ", ".join(f"{d:.2e}" for d in drift) + "] (<=1e-12)")


def test_criterion_4_mean_audit():
    # random smooth admissible fields with O(1) entries; the per-step audit
    # raises if high and low order update means split beyond 1e-13
    rng = np.random.default_rng(2024)
    from lwblend.driver import Solver1D, Solver2D, TimeConfig
    from lwblend.mesh import (BoundarySet1D, BoundarySet2D, Mesh1D, Mesh2D,
                              Periodic)
    from lwblend.equations import Euler2D

    def smooth(lo, hi, xn, nmodes=3):
        out = np.full_like(xn, 0.5 * (lo + hi))
        for k in range(1, nmodes + 1):
            out += 0.15 * (hi - lo) / k * np.sin(
                2 * np.pi * k * xn + rng.uniform(0, 2 * np.pi))
        return out

    basis = build_basis(4)
    opts = SolverOptions(limiter="blend-mh", audit=True, audit_tol=1e-13)
    steps = 0
    for _ in range(70):
        eq = Euler1D(1.4)
        mesh = Mesh1D.uniform(0, 1, 16)
        s = Solver1D(mesh, eq, basis, BoundarySet1D(Periodic(), Periodic()),
                     opts, TimeConfig())
        xn = s.node_coords() / 1.0
        u = eq.prim_to_cons(np.stack([smooth(0.5, 1.0, xn),
                                      smooth(-0.5, 0.5, xn),
                                      smooth(0.1, 0.3, xn)]))
        u, _ = s.step(u, 0.0, 0.5 * s.compute_dt(u))
        steps += 1
    for _ in range(30):
        eq = Euler2D(1.4)
        mesh = Mesh2D.uniform(((0, 1), (0, 1)), 6, 6)
        s = Solver2D(mesh, eq, basis,
                     BoundarySet2D(*(Periodic() for _ in range(4))),
                     opts, TimeConfig())
        xs, ys = s.node_coords()
        X = np.broadcast_to(xs[:, None, :, None], (6, 6, 5, 5))
        Y = np.broadcast_to(ys[None, :, None, :], (6, 6, 5, 5))
        u = eq.prim_to_cons(np.stack([
            smooth(0.5, 1.0, X) * smooth(0.8, 1.0, Y),
            smooth(-0.5, 0.5, X), smooth(-0.5, 0.5, Y),
            smooth(0.1, 0.3, X + Y)]))
        u, _ = s.step(u, 0.0, 0.5 * s.compute_dt(u))
        steps += 1
    report(4, f"{steps} random steps audited: high/low update means agree "
              "to 1e-13")


@pytest.fixture(scope="module")
def positivity_runs():
    runs = {}
    for name in ("sedov1d", "double_rarefaction", "leblanc"):
        runs[name] = run_case(name, limiter="blend-mh")
    return runs


def test_criterion_5_positivity_suite(positivity_runs):
    wall = 0.0
    mins = {}
    for name, r in positivity_runs.items():
        eq = r.solver.eq
        rho_min = float(r.u[0].min())
        p_min = float(eq.pressure(r.u).min())
        assert rho_min > 0.0 and p_min > 0.0, (name, rho_min, p_min)
        assert abs(r.t - r.case.tend) < 1e-10
        wall += r.wall_seconds
        mins[name] = (rho_min, p_min)

    # the admissibility preservation pathway disabled: every case must fail
    disabled = SolverOptions(limiter="blend-mh", flux_correction=False,
                             scaling_limiter=False)
    for name in positivity_runs:
        with pytest.raises(AdmissibilityError):
            run_case(name, options=disabled, max_steps=60000)

    assert wall <= 900.0, f"positivity suite took {wall:.0f}s"
    detail = "; ".join(f"{n}: rho_min={m[0]:.2e}, p_min={m[1]:.2e}"
                       for n, m in mins.items())
    report(5, f"{detail}; all fail without the correction pathway; "
              f"wall {wall:.0f}s (<=900s)")


def test_criterion_6_shu_osher_resolution():
    ref = np.load(REF_STATE)
    u_ref, edges_ref = ref["u"], np.linspace(-5.0, 5.0, 2001)
    basis = build_basis(4)

    def density_l1_error(r):
        mesh = r.solver.mesh
        pts = np.linspace(0, 1, 7)
        xs = (mesh.edges[:-1, None] + pts * mesh.dx[:, None]).ravel()
        num = interpolate_1d(r.u, mesh.edges, basis.nodes, xs)[0]
        exact = interpolate_1d(u_ref, edges_ref, basis.nodes, xs)[0]
        return float(np.mean(np.abs(num - exact)) * 10.0)

    runs = {
        ("blend-mh", 200): run_case("shu_osher", degree=4, cells=200,
                                    limiter="blend-mh"),
        ("blend-mh", 400): run_case("shu_osher", degree=4, cells=400,
                                    limiter="blend-mh"),
        ("blend-fo", 400): run_case("shu_osher", degree=4, cells=400,
                                    limiter="blend-fo"),
    }
    errs = {k: density_l1_error(r) for k, r in runs.items()}
    assert errs["blend-mh", 400] < errs["blend-mh", 200], errs
    assert errs["blend-mh", 400] < errs["blend-fo", 400], errs
    report(6, f"L1 density errors vs 2000-cell reference: "
              f"MH400={errs['blend-mh', 400]:.4f} < MH200="
              f"{errs['blend-mh', 200]:.4f} and < FO400="
              f"{errs['blend-fo', 400]:.4f}")


def test_criterion_7_mh_standalone_order():
    import test_subcell

    eq_basis = build_basis(4)
    from lwblend.equations import LinearAdvection1D

    eq = LinearAdvection1D(1.0)
    errors = [test_subcell._advect_one_period_mh(eq, eq_basis, ne, beta=2.0)
              for ne in (32, 64, 128)]
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(rates >= 1.8), (errors, rates)
    report(7, f"observed orders {[f'{r:.2f}' for r in rates]} (>=1.8) on the "
              "degree-4 subcell tiling")


def test_criterion_8_theta_loop_fuzz():
    rng = np.random.default_rng(99)
    eq = Euler1D(1.4)
    n = 10000

    # slope loop: postconditions for every draw
    u = random_admissible_states(rng, n, 3)
    delta = rng.normal(scale=8.0, size=(3, n)) * (1.0 + np.abs(u))
    dminus = -rng.uniform(0.05, 0.6, size=n)
    dplus = rng.uniform(0.05, 0.6, size=n)
    limited = limit_slopes(u, delta.copy(), dminus, dplus, eq)
    for d in (2.0 * dminus, 2.0 * dplus):
        star = u + d * limited
        for k in range(2):
            eps = 0.1 * eq.constraint(u, k)
            assert np.all(eq.constraint(star, k) >= eps * (1 - 1e-9) - 1e-13)

    # brute-force oracle on a subsample: the applied net scaling is feasible
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(delta != 0, limited / delta, 1.0)
    theta_net = np.nanmin(np.where(np.isfinite(ratio), ratio, 1.0), axis=0)
    for j in rng.choice(n, size=200, replace=False):
        th = theta_net[j]
        ok = True
        for d in (2.0 * dminus[j], 2.0 * dplus[j]):
            star = u[:, j] + d * th * delta[:, j]
            for k in range(2):
                eps = 0.1 * eq.constraint(u[:, j][:, None], k)[0]
                if eq.constraint(star[:, None], k)[0] < eps - 1e-11:
                    ok = False
        assert ok, (j, th)

    # flux loop: postconditions plus brute-force feasibility of the result
    from lwblend.fluxcorr import correct_interface_flux

    ul = random_admissible_states(rng, n, 3)
    ur = random_admissible_states(rng, n, 3)
    flow = eq.rusanov(ul, ur)
    il = eq.flux(ul) + 0.05 * rng.normal(size=(3, n))
    ir = eq.flux(ur) + 0.05 * rng.normal(size=(3, n))
    cl = rng.uniform(0.05, 0.3, size=n)
    cr = rng.uniform(0.05, 0.3, size=n)
    low_l = ul - cl * (flow - il)
    low_r = ur - cr * (ir - flow)
    feasible = np.ones(n, dtype=bool)
    for k in range(2):
        feasible &= (eq.constraint(low_l, k) > 1e-8) \
            & (eq.constraint(low_r, k) > 1e-8)
    keep = np.where(feasible)[0]
    ul, ur, flow, il, ir, cl, cr = (a[..., keep] for a in
                                    (ul, ur, flow, il, ir, cl, cr))
    fhigh = flow + rng.normal(scale=4.0, size=flow.shape) * (1 + np.abs(flow))
    out = correct_interface_flux(fhigh, flow, ul, ur, il, ir, cl, cr, eq)
    new_l = ul - cl * (out - il)
    new_r = ur - cr * (ir - out)
    low_l, low_r = low_l[:, keep], low_r[:, keep]
    for k in range(2):
        assert np.all(eq.constraint(new_l, k)
                      >= 0.1 * eq.constraint(low_l, k) - 1e-11)
        assert np.all(eq.constraint(new_r, k)
                      >= 0.1 * eq.constraint(low_r, k) - 1e-11)
    report(8, f"{n} slope draws and {keep.size} face draws satisfy the "
              "tenth-floor postconditions; brute-force oracle agrees on the "
              "sampled factors")


def test_criterion_9_indicator_anchors():
    cfg = IndicatorConfig()
    a0 = float(alpha_of_energy(np.array(0.0), 4, cfg))
    assert abs(a0 - 1.0e-4) < 1e-6, a0
    amid = float(alpha_of_energy(np.array(cfg.threshold(4)), 4, cfg))
    assert amid == 0.5, amid
    report(9, f"alpha(E=0)={a0:.6e} within 1e-6 of 1e-4; alpha(E=T)=0.5 exactly")


def test_criterion_10_riemann2d():
    r = run_case("riemann2d_12", degree=4, cells=128, limiter="blend-mh")
    assert abs(r.t - 0.25) < 1e-10
    assert r.solver.eq.is_admissible(r.u)
    alpha = r.solver._alpha(r.u)
    frac = float(np.mean(alpha > 0.0))
    assert frac < 0.20, frac
    assert r.wall_seconds <= 1800.0, r.wall_seconds
    report(10, f"stable to t=0.25; {100 * frac:.1f}% of elements have "
               f"alpha>0 at the final time (<20%); wall {r.wall_seconds:.0f}s "
               "(<=1800s)")
