"""Acceptance gate: one test (one pass/fail line) per shipped guarantee.

 1  mass conservation of u and v on the default run
 2  nonnegativity + tissue monotonicity on the same run
 3  heat-kernel decay oracle and discretization orders
 4  two-formulation equivalence under refinement
 5  certified coefficient bounds against calculus oracles
 6a growth variant boundedness   6b steady-state detection
 6c variant comparison norms
 7  bitwise determinism of snapshot outputs

Tolerances are pinned here and nowhere else; loosening any of them is a
contract change, not a test fix.
"""

import re
import time

import numpy as np
import pytest

from taxiscade.cli import EXIT_OK, main
from taxiscade.config import Overrides, apply_overrides, default_config, load_config
from taxiscade.grid import Field, GridSpec, State, build_initial_state
from taxiscade.integrator import SolverConfig, StepBuffers, imex_step, step_a_system
from taxiscade.models import ModelParams, transform_from_a, transform_to_a
from taxiscade.coefficients import TaxisParams
from taxiscade.operators import (
    laplacian,
    neumann_eigenvalue,
    neumann_mode,
    taxis_divergence,
)
from taxiscade.runner import run_compare, run_simulation

MASS_DRIFT_TOL = 1e-8
NEGATIVITY_TOL = -1e-12
EQUIV_LINF_TOL = 5e-2
EQUIV_SHRINK_MIN = 1.5
BOUND_CERT_REL = 1e-2
LAPLACIAN_ORDER_MIN = 1.9
UPWIND_ORDER_MIN = 0.9
RUN_BUDGET_S = 60.0
EQUIV_BUDGET_S = 30.0
STEADY_HORIZON = 80.0

STEADY_INI = """
[grid]
nx = 16
ny = 16
length_x = 5
length_y = 5

[initial]
u = gaussian:amplitude=1,center_x=3.75,center_y=3.75,width=1
v = uniform:level=0.5
w = uniform:level=0
z = gaussian:amplitude=1,center_x=3.75,center_y=3.75,width=1

[model]
mu_z = 1.0

[solver]
dt = 0.01
t_end = 80

[output]
snapshot_every = 0.25
steady_window = 100
steady_tol = 1e-6
"""

GROWTH_INI = """
[model]
variant = cascade-growth
mu_z = 1.0

[solver]
dt = 0.01
t_end = 50
"""

COMPARE_INI = """
[grid]
nx = 50
ny = 50

[solver]
dt = 0.01
t_end = 5

[output]
snapshot_every = 1.0
"""


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default_run")
    cfg = apply_overrides(default_config(), Overrides(out=str(out)))
    return run_simulation(cfg)


def test_criterion_1_mass_conservation(default_run):
    recs = default_run.records
    m_u0, m_v0 = recs[0].mass_u, recs[0].mass_v
    drift_u = max(abs(r.mass_u - m_u0) / m_u0 for r in recs)
    drift_v = max(abs(r.mass_v - m_v0) / m_v0 for r in recs)
    assert recs[-1].t == 50.0
    assert drift_u <= MASS_DRIFT_TOL, f"u mass drift {drift_u:.3e}"
    assert drift_v <= MASS_DRIFT_TOL, f"v mass drift {drift_v:.3e}"
    assert default_run.wall_time <= RUN_BUDGET_S, f"run took {default_run.wall_time:.1f}s"
    print(f"criterion 1: PASS drift u={drift_u:.3e} v={drift_v:.3e} "
          f"(tol {MASS_DRIFT_TOL:g}), wall {default_run.wall_time:.1f}s")


def test_criterion_2_boundedness(default_run):
    recs = default_run.records
    worst_min = min(min(r.min_u, r.min_v, r.min_w, r.min_z) for r in recs)
    assert worst_min >= NEGATIVITY_TOL, f"min field value {worst_min:.3e}"
    max_w0 = recs[0].max_w
    assert all(r.max_w <= max_w0 for r in recs)
    totals = [r.total_w for r in recs]
    assert all(b <= a for a, b in zip(totals, totals[1:])), "total_w increased"
    assert all(r.negativity_excess == 0.0 for r in recs)
    print(f"criterion 2: PASS min field {worst_min:.3e} >= {NEGATIVITY_TOL:g}, "
          f"max w kept <= {max_w0:g}, total_w monotone")


def test_criterion_3_heat_kernel_and_orders():
    # amplitude decay of the k=1 cosine mode under the zeroed-coupling config
    g = GridSpec(nx=100, ny=8, dx=1.0, dy=1.0)
    params = ModelParams(taxis=TaxisParams(kappa1=0.0, kappa2=0.0))  # analytic override
    cfg = SolverConfig(dt=0.01, cg_tol=1e-12)
    mode = np.tile(neumann_mode(1, g.nx), (g.ny, 1))
    norm2 = float(np.sum(mode * mode))
    state = State(Field(1.0 + mode, g), Field.full(g, 0.5),
                  Field.zeros(g), Field.zeros(g), t=0.0)
    expected = 1.0 / (1.0 + cfg.dt * neumann_eigenvalue(1, g.nx, g.dx))
    bufs = StepBuffers(g)
    coef = float(np.sum(state.u.values * mode)) / norm2
    worst = 0.0
    for _ in range(5):
        state, _ = imex_step(state, params, cfg, bufs)
        coef_new = float(np.sum(state.u.values * mode)) / norm2
        worst = max(worst, abs(coef_new / coef - expected))
        coef = coef_new
    assert worst <= 10 * cfg.cg_tol, f"decay mismatch {worst:.3e}"

    # observed orders on smooth manufactured fields
    L = 10.0
    lap_errs, adv_errs = [], []
    for n in (64, 128, 256):
        gg = GridSpec(nx=n, ny=n, dx=L / n, dy=L / n)
        X, Y = gg.meshgrid()
        f = np.cos(np.pi * X / L) * np.cos(2 * np.pi * Y / L)
        lap_exact = -((np.pi / L) ** 2 + (2 * np.pi / L) ** 2) * f
        lap_errs.append(float(np.max(np.abs(laplacian(Field(f, gg)).values - lap_exact))))

        c = 2.0 + np.sin(2 * np.pi * X / L) * np.cos(np.pi * Y / L)
        sig = np.cos(np.pi * X / L) * np.cos(np.pi * Y / L)
        sx = -(np.pi / L) * np.sin(np.pi * X / L) * np.cos(np.pi * Y / L)
        sy = -(np.pi / L) * np.cos(np.pi * X / L) * np.sin(np.pi * Y / L)
        cx = (2 * np.pi / L) * np.cos(2 * np.pi * X / L) * np.cos(np.pi * Y / L)
        cy = -(np.pi / L) * np.sin(2 * np.pi * X / L) * np.sin(np.pi * Y / L)
        adv_exact = cx * sx + cy * sy + c * (-2.0 * (np.pi / L) ** 2 * sig)
        adv = taxis_divergence(Field(c, gg), 1.0, Field(sig, gg)).values
        adv_errs.append(float(np.max(np.abs(adv - adv_exact))))
    lap_order = min(np.log2(lap_errs[i] / lap_errs[i + 1]) for i in range(2))
    adv_order = min(np.log2(adv_errs[i] / adv_errs[i + 1]) for i in range(2))
    assert lap_order >= LAPLACIAN_ORDER_MIN, f"laplacian order {lap_order:.2f}"
    assert adv_order >= UPWIND_ORDER_MIN, f"upwind order {adv_order:.2f}"
    print(f"criterion 3: PASS decay err {worst:.2e} <= {10 * cfg.cg_tol:g}, "
          f"orders laplacian {lap_order:.2f} upwind {adv_order:.2f}")


def _equivalence_error(nx: int, dt: float, t_end: float) -> float:
    cfg = apply_overrides(default_config(), Overrides(nx=nx, ny=nx, dt=dt, tend=t_end))
    p = cfg.params
    su = build_initial_state(cfg.grid, cfg.ics)
    sa = State(transform_to_a(su, p), su.v.copy(), su.w.copy(), su.z.copy(), t=0.0)
    bufs_u, bufs_a = StepBuffers(cfg.grid), StepBuffers(cfg.grid)
    steps = round(t_end / dt)
    for _ in range(steps):
        su, _ = imex_step(su, p, cfg.solver, bufs_u, dt=dt)
        sa, _ = step_a_system(sa, p, cfg.solver, bufs_a, dt=dt)
    u_rec = transform_from_a(sa.u, sa.v, sa.w, p).values
    return float(np.max(np.abs(u_rec - su.u.values))) / float(np.max(su.u.values))


def test_criterion_4_formulation_equivalence():
    t0 = time.perf_counter()
    err_coarse = _equivalence_error(nx=50, dt=0.01, t_end=1.0)
    err_fine = _equivalence_error(nx=100, dt=0.005, t_end=1.0)
    elapsed = time.perf_counter() - t0
    assert err_coarse <= EQUIV_LINF_TOL, f"rel Linf {err_coarse:.3e}"
    ratio = err_coarse / err_fine
    assert ratio >= EQUIV_SHRINK_MIN, f"refinement ratio {ratio:.2f}"
    assert elapsed <= EQUIV_BUDGET_S, f"equivalence study took {elapsed:.1f}s"
    print(f"criterion 4: PASS rel Linf {err_coarse:.2e} -> {err_fine:.2e} "
          f"(ratio {ratio:.2f}), wall {elapsed:.1f}s")


def test_criterion_5_certified_bounds(capsys):
    assert main(["check"]) == EXIT_OK
    out = capsys.readouterr().out
    m = re.search(r"certified: C_chi=(\S+) C_xi=(\S+) C_psi=(\S+) C_phi=(\S+)", out)
    assert m, out
    c_chi, c_xi, c_psi, c_phi = map(float, m.groups())
    beta = 1.0  # default degradation scale
    assert abs(c_psi - beta / 4) <= BOUND_CERT_REL * beta / 4, f"C_psi={c_psi}"
    assert abs(c_phi - 0.25) <= BOUND_CERT_REL * 0.25, f"C_phi={c_phi}"
    # every sampled hypothesis row must certify
    rows = [ln for ln in out.splitlines() if ln.startswith("(")]
    assert rows and all(" NO" not in ln for ln in rows), out
    assert any(ln.startswith("(chi)") for ln in rows)
    assert any(ln.startswith("(xi)") for ln in rows)
    assert c_chi > 0 and c_xi > 0
    print(f"criterion 5: PASS C_psi={c_psi:.4g} C_phi={c_phi:.4g} "
          f"(both within 1%), chi/xi suprema certified")


def test_criterion_6a_growth_stays_bounded():
    cfg = load_config(text=GROWTH_INI)
    res = run_simulation(cfg, write_outputs=False)
    r0 = res.records[0]
    gp = cfg.params.growth
    ceiling = 2.0 * max(gp.K_u, gp.K_v, gp.K_w, gp.K_z,
                        r0.max_u, r0.max_v, r0.max_w, r0.max_z)
    worst = max(max(r.max_u, r.max_v, r.max_w, r.max_z) for r in res.records)
    assert res.records[-1].t == 50.0
    assert worst <= ceiling, f"field max {worst:.3f} exceeds {ceiling:.3f}"
    print(f"criterion 6a: PASS worst field max {worst:.3f} <= {ceiling:.3f}")


def test_criterion_6b_steady_state_detected():
    res = run_simulation(load_config(text=STEADY_INI), write_outputs=False)
    assert res.first_steady_time is not None, "no steady state before the horizon"
    assert res.first_steady_time <= STEADY_HORIZON
    print(f"criterion 6b: PASS steady (tol 1e-6) at t={res.first_steady_time:g} "
          f"<= horizon {STEADY_HORIZON:g}")


def test_criterion_6c_variant_differences():
    out = run_compare(load_config(text=COMPARE_INI), write_outputs=False)
    rows = out["norms"]
    first, last = rows[0], rows[-1]
    for key, val in first.items():
        if key != "t":
            assert val == 0.0, f"{key} nonzero at t=0"
    for f in ("u", "v", "w", "z"):
        assert last[f"linf_{f}"] > 0.0, f"no {f} difference at t_end"
    # reported, not asserted: tumor density under direct taxis at the
    # cascade VEGF peak, relative to the cascade value there
    sc, sd = out["a"].states[-1], out["b"].states[-1]
    j, i = np.unravel_index(int(np.argmax(sc.z.values)), sc.z.values.shape)
    print(f"criterion 6c: PASS diffs 0 at t=0, final Linf u={last['linf_u']:.3e} "
          f"v={last['linf_v']:.3e} w={last['linf_w']:.3e} z={last['linf_z']:.3e}; "
          f"at VEGF peak u_direct={sd.u.values[j, i]:.4f} vs "
          f"u_cascade={sc.u.values[j, i]:.4f}")


def test_criterion_7_bitwise_determinism(default_run, tmp_path):
    cfg = apply_overrides(default_config(), Overrides(out=str(tmp_path / "rerun")))
    rerun = run_simulation(cfg)
    first = sorted(default_run.out_dir.glob("*.txcs"))
    second = sorted(rerun.out_dir.glob("*.txcs"))
    assert [p.name for p in first] == [p.name for p in second]
    assert len(first) == 51
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes(), f"{a.name} differs between runs"
    assert (default_run.out_dir / "diagnostics.csv").read_bytes() == \
        (rerun.out_dir / "diagnostics.csv").read_bytes()
    print(f"criterion 7: PASS {len(first)} snapshots bitwise identical across runs")
