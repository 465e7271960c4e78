"""Time stepping: CG solver, backward-Euler diffusion, IMEX step bounds.

The per-step decay oracle for the k=1 cosine mode was frozen from the
eigenvalue formula evaluated independently: mu = 2*(1-cos(pi/100)) for
dx=1, decay = 1/(1 + dt*mu) at dt=0.01.
"""

import numpy as np
import pytest

from taxiscade.coefficients import ReactionParams, TaxisParams
from taxiscade.errors import CFLViolation, ConvergenceError, ValidationError
from taxiscade.grid import Field, GridSpec, State
from taxiscade.integrator import (
    SolverConfig,
    StepBuffers,
    admissible_dt,
    cfl_bound,
    cg_solve,
    imex_step,
    implicit_diffusion_solve,
    implicit_diffusion_solve_arrays,
)
from taxiscade.models import ModelParams, ModelVariant, max_taxis_speed
from taxiscade.operators import (
    diffusion_matvec_arrays,
    neumann_eigenvalue,
    neumann_mode,
)
from tests.conftest import bumpy_state

# 1/(1 + 0.01 * neumann_eigenvalue(1, 100, 1.0)), frozen
MODE1_DECAY = 0.9999901313047068


def _solve_cfg(**kw) -> SolverConfig:
    return SolverConfig(**kw)


def test_mode1_decay_factor_matches_eigenvalue():
    mu = neumann_eigenvalue(1, 100, 1.0)
    assert 1.0 / (1.0 + 0.01 * mu) == pytest.approx(MODE1_DECAY, abs=1e-15)


def test_heat_decay_against_frozen_factor():
    """Backward Euler damps the k=1 mode by exactly 1/(1+dt*mu) per step."""
    g = GridSpec(nx=100, ny=4, dx=1.0, dy=1.0)
    cfg = _solve_cfg(dt=0.01, cg_tol=1e-12)
    mode = np.tile(neumann_mode(1, g.nx), (g.ny, 1))
    norm2 = float(np.sum(mode * mode))
    u = Field(1.0 + mode, g)
    coef = 1.0
    for _ in range(3):
        u = implicit_diffusion_solve(u, 1.0, cfg.dt, cfg)
        coef_new = float(np.sum((u.values - 1.0) * mode)) / norm2
        assert coef_new / coef == pytest.approx(MODE1_DECAY, abs=10 * cfg.cg_tol)
        coef = coef_new


def test_cg_matches_dense_solve(rng):
    g = GridSpec(nx=6, ny=5, dx=0.8, dy=1.2)
    bufs = StepBuffers(g)
    dt, D = 0.07, 2.5
    n = g.n_cells
    A = np.empty((n, n))
    e = np.zeros(g.shape)
    col = np.empty(g.shape)
    for j in range(n):
        e.flat[j] = 1.0
        diffusion_matvec_arrays(e, D, dt, g.dx, g.dy, bufs.ws, col)
        A[:, j] = col.ravel()
        e.flat[j] = 0.0
    b = rng.random(g.shape)
    x_dense = np.linalg.solve(A, b.ravel()).reshape(g.shape)
    x = np.empty(g.shape)
    iters, res = implicit_diffusion_solve_arrays(b, D, dt, _solve_cfg(cg_tol=1e-13), g, bufs, x)
    assert iters > 0 and res <= 1e-13
    assert np.max(np.abs(x - x_dense)) < 1e-11


def test_cg_zero_rhs_returns_zero():
    g = GridSpec(nx=5, ny=5, dx=1.0, dy=1.0)
    bufs = StepBuffers(g)
    x = np.full(g.shape, 7.0)

    def ident(src, out):
        np.copyto(out, src)

    iters, res = cg_solve(ident, np.zeros(g.shape), x, 1e-12, 50, bufs)
    assert iters == 0 and res == 0.0
    assert np.all(x == 0.0)


def test_cg_raises_on_indefinite_operator():
    g = GridSpec(nx=4, ny=4, dx=1.0, dy=1.0)
    bufs = StepBuffers(g)
    b = np.ones(g.shape)
    x = np.zeros(g.shape)

    def neg(src, out):
        np.multiply(src, -1.0, out=out)

    with pytest.raises(ConvergenceError, match="positive definiteness"):
        cg_solve(neg, b, x, 1e-12, 50, bufs)


def test_cg_raises_when_budget_exhausted(rng):
    g = GridSpec(nx=20, ny=20, dx=1.0, dy=1.0)
    bufs = StepBuffers(g)
    b = rng.random(g.shape)
    out = np.empty(g.shape)
    with pytest.raises(ConvergenceError) as exc:
        implicit_diffusion_solve_arrays(
            b, 50.0, 1.0, _solve_cfg(cg_tol=1e-14, cg_max_iter=2), g, bufs, out)
    assert exc.value.iterations == 2
    assert exc.value.residual > 1e-14


def test_zero_diffusion_solve_is_identity(rng):
    g = GridSpec(nx=7, ny=6, dx=1.0, dy=1.0)
    bufs = StepBuffers(g)
    b = rng.random(g.shape)
    out = np.empty(g.shape)
    iters, _ = implicit_diffusion_solve_arrays(b, 0.0, 0.1, _solve_cfg(), g, bufs, out)
    assert iters == 0
    assert np.array_equal(out, b)


def test_negative_diffusivity_rejected(square_grid):
    f = Field.full(square_grid, 1.0)
    with pytest.raises(ValidationError):
        implicit_diffusion_solve(f, -1.0, 0.01, _solve_cfg())


def test_implicit_diffusion_max_principle(rng):
    """Backward Euler with the mirror stencil cannot create new extrema."""
    g = GridSpec(nx=16, ny=12, dx=0.5, dy=0.5)
    b = 0.3 + rng.random(g.shape)
    out = implicit_diffusion_solve(Field(b, g), 4.0, 0.2, _solve_cfg()).values
    slack = 1e-11 * float(np.max(np.abs(b)))
    assert out.min() >= b.min() - slack
    assert out.max() <= b.max() + slack


def test_jacobi_preconditioner_agrees_with_plain(rng):
    g = GridSpec(nx=14, ny=11, dx=0.4, dy=0.6)
    b = rng.random(g.shape)
    plain = implicit_diffusion_solve(Field(b, g), 3.0, 0.05,
                                     _solve_cfg(cg_tol=1e-13)).values
    pre = implicit_diffusion_solve(Field(b, g), 3.0, 0.05,
                                   _solve_cfg(cg_tol=1e-13, precondition="jacobi")).values
    assert np.max(np.abs(plain - pre)) < 1e-11


def test_cfl_bound_formula():
    g = GridSpec(nx=10, ny=10, dx=0.5, dy=0.8)
    cfg = _solve_cfg(cfl_safety=0.5)
    assert cfl_bound(2.0, g, cfg) == pytest.approx(0.5 * 0.5 / 4.0)
    assert cfl_bound(0.0, g, cfg) == float("inf")


def test_admissible_dt_takes_tightest_bound():
    g = GridSpec(nx=20, ny=20, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    params = ModelParams()
    cfg = _solve_cfg(dt=0.5, t_end=10.0, cfl_safety=0.5)
    speed = max_taxis_speed(state, params)
    expect = min(0.5, cfl_bound(speed, g, cfg), 1.0 / params.reaction.beta)
    assert admissible_dt(state, params, cfg) == pytest.approx(expect)
    # nearly done: the remaining time wins
    state_late = State(state.u, state.v, state.w, state.z, t=9.999)
    assert admissible_dt(state_late, params, cfg) == pytest.approx(0.001)


def test_oversized_dt_raises_and_names_bound():
    g = GridSpec(nx=20, ny=20, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    params = ModelParams()
    cfg = _solve_cfg(dt=0.01)
    bound = cfl_bound(max_taxis_speed(state, params), g, cfg)
    with pytest.raises(CFLViolation) as exc:
        imex_step(state, params, cfg, dt=5.0 * bound)
    assert exc.value.admissible == pytest.approx(bound, rel=1e-12)


def test_clip_lowers_dt_instead_of_raising():
    g = GridSpec(nx=20, ny=20, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    params = ModelParams()
    cfg = _solve_cfg(dt=0.01)
    bound = min(cfl_bound(max_taxis_speed(state, params), g, cfg),
                1.0 / params.reaction.beta)
    new_state, report = imex_step(state, params, cfg, dt=5.0 * bound, clip=True)
    assert report.dt == pytest.approx(bound, rel=1e-12)
    assert new_state.t == pytest.approx(bound, rel=1e-12)


def test_degradation_bound_enforced():
    """dt must stay below 1/beta even with no taxis motion at all."""
    g = GridSpec(nx=8, ny=8, dx=1.0, dy=1.0)
    flat = State(Field.full(g, 1.0), Field.full(g, 0.5),
                 Field.full(g, 1.0), Field.full(g, 0.7), t=0.0)
    params = ModelParams(reaction=ReactionParams(beta=200.0))
    with pytest.raises(CFLViolation) as exc:
        imex_step(flat, params, _solve_cfg(dt=0.01))
    assert exc.value.admissible == pytest.approx(1.0 / 200.0)


def test_per_step_mass_conservation():
    """No-source step conserves the u and v integrals to solver accuracy."""
    g = GridSpec(nx=32, ny=32, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    cfg = _solve_cfg(dt=0.01, cg_tol=1e-12)
    params = ModelParams()
    bufs = StepBuffers(g)
    area = g.dx * g.dy
    for _ in range(5):
        mu0 = float(np.sum(state.u.values)) * area
        mv0 = float(np.sum(state.v.values)) * area
        state, _ = imex_step(state, params, cfg, bufs)
        mu1 = float(np.sum(state.u.values)) * area
        mv1 = float(np.sum(state.v.values)) * area
        assert abs(mu1 - mu0) / mu0 <= 10 * cfg.cg_tol
        assert abs(mv1 - mv0) / mv0 <= 10 * cfg.cg_tol


def test_step_keeps_fields_nonnegative():
    g = GridSpec(nx=24, ny=24, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    cfg = _solve_cfg(dt=0.01)
    params = ModelParams()
    bufs = StepBuffers(g)
    for _ in range(20):
        state, _ = imex_step(state, params, cfg, bufs)
    for name, f in state.fields().items():
        assert f.values.min() >= -1e-12, name


def test_w_monotone_nonincreasing():
    g = GridSpec(nx=16, ny=16, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    cfg = _solve_cfg(dt=0.01)
    params = ModelParams()
    bufs = StepBuffers(g)
    prev = state.w.values.copy()
    for _ in range(10):
        state, _ = imex_step(state, params, cfg, bufs)
        assert np.all(state.w.values <= prev + 1e-15)
        prev = state.w.values.copy()


def test_semi_implicit_uptake_bounds_z():
    """Direct variant with implicit uptake keeps z under max(z0, 1/mu_z)."""
    g = GridSpec(nx=16, ny=16, dx=1.0, dy=1.0)
    base = bumpy_state(g)
    z0 = Field(3.0 * base.z.values / base.z.values.max() + 0.1, g)
    state = State(base.u, base.v, base.w, z0, t=0.0)
    params = ModelParams(variant=ModelVariant.DIRECT_TAXIS,
                         reaction=ReactionParams(mu_z=2.0))
    ceiling = max(float(z0.values.max()), 1.0 / params.reaction.mu_z)
    cfg = _solve_cfg(dt=0.01, semi_implicit_uptake=True)
    bufs = StepBuffers(g)
    for _ in range(100):
        state, _ = imex_step(state, params, cfg, bufs, clip=True)
    assert float(state.z.values.max()) <= ceiling * (1.0 + 1e-12)


def test_direct_variant_freezes_v():
    g = GridSpec(nx=12, ny=12, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    params = ModelParams(variant=ModelVariant.DIRECT_TAXIS)
    new_state, report = imex_step(state, params, _solve_cfg(dt=0.005), clip=True)
    assert np.array_equal(new_state.v.values, state.v.values)
    assert report.cg_iterations["v"] == 0


def test_report_carries_solver_stats():
    g = GridSpec(nx=12, ny=12, dx=1.0, dy=1.0)
    state = bumpy_state(g)
    _, report = imex_step(state, ModelParams(), _solve_cfg(dt=0.005), clip=True)
    assert set(report.cg_iterations) == {"u", "v", "z"}
    assert all(r <= 1e-12 for r in report.cg_residuals.values())
    assert 0.0 < report.cfl <= 0.5 + 1e-12
    assert report.wall_time > 0.0


def test_taxis_strength_zero_forbidden_but_tiny_allowed():
    with pytest.raises(ValidationError):
        ModelParams(taxis=TaxisParams(kappa1=0.0)).validate()
    ModelParams(taxis=TaxisParams(kappa1=1e-12, kappa2=1e-12)).validate()
