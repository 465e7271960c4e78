"""IMEX time stepping: implicit diffusion via conjugate gradients,
explicit upwind taxis and reactions.

The implicit operator (I - dt*D*Lap) is symmetric positive definite on
the Neumann grid, so a matrix-free CG solve applies. Two structural
choices matter for the conservation guarantees:

  * the initial CG iterate is the right-hand side itself, so every
    correction lies in the Krylov space of the residual dt*D*Lap(rhs),
    whose vectors all have zero discrete sum; the solve therefore
    preserves the integral of the rhs to rounding, independent of the
    stopping tolerance;
  * taxis fluxes are conservative by construction (operators module), so
    the explicit part moves mass between cells without creating any.

w is advanced by explicit pointwise Euler. Its update stays monotone
nonincreasing and nonnegative when dt * beta * u / (1 + u w) <= 1
pointwise; the conservatively enforced condition is dt * beta <= 1,
which covers tumor densities up to the unit carrying-capacity scale.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coefficients import phi
from .errors import CFLViolation, ConvergenceError, ValidationError
from .grid import Field, GridSpec, State
from .models import (
    ModelParams,
    ModelVariant,
    eval_a_explicit_arrays,
    eval_explicit_arrays,
    max_taxis_speed,
)
from .operators import (
    StencilWorkspace,
    diffusion_matvec_arrays,
    weighted_diffusion_diagonal,
    weighted_diffusion_matvec_arrays,
)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping and linear-solver controls.

    precondition: "none" (default; the constant-coefficient systems are
    already well conditioned at dt*D/dx^2 = O(1..10)) or "jacobi".
    Jacobi trades the exact-sum warm-start property for iteration count,
    so mass drift degrades to the residual tolerance scale when enabled.
    semi_implicit_uptake: treat the VEGF uptake factor implicitly
    (divide by 1 + dt*mu_z*v after the diffusion solve), allowing large
    dt; default keeps the uptake explicit.
    """

    dt: float = 0.01
    t_end: float = 50.0
    cg_tol: float = 1e-12
    cg_max_iter: int = 500
    cfl_safety: float = 0.5
    precondition: str = "none"
    semi_implicit_uptake: bool = False

    def validate(self) -> None:
        problems = []
        if not self.dt > 0:
            problems.append("dt must be positive")
        if self.t_end < 0:
            problems.append("t_end must be nonnegative")
        if not (0 < self.cg_tol <= 1e-4):
            problems.append("cg_tol must lie in (0, 1e-4]")
        if self.cg_max_iter < 1:
            problems.append("cg_max_iter must be at least 1")
        if not (0 < self.cfl_safety <= 1):
            problems.append("cfl_safety must lie in (0, 1]")
        if self.precondition not in ("none", "jacobi"):
            problems.append("precondition must be 'none' or 'jacobi'")
        if problems:
            raise ValidationError(problems)


@dataclass
class StepReport:
    """Solver statistics for one accepted step."""

    dt: float
    cfl: float
    cg_iterations: dict = field(default_factory=dict)
    cg_residuals: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def max_iterations(self) -> int:
        return max(self.cg_iterations.values(), default=0)

    @property
    def max_residual(self) -> float:
        return max(self.cg_residuals.values(), default=0.0)


class StepBuffers:
    """Preallocated arrays for the step loop (one per run, never shared)."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.ws = StencilWorkspace(grid)
        shape = grid.shape
        self.du = np.zeros(shape)
        self.dv = np.zeros(shape)
        self.dw = np.zeros(shape)
        self.dz = np.zeros(shape)
        self.scr1 = np.zeros(shape)
        self.scr2 = np.zeros(shape)
        # conjugate-gradient workspace
        self.cg_r = np.zeros(shape)
        self.cg_p = np.zeros(shape)
        self.cg_ap = np.zeros(shape)
        self.cg_z = np.zeros(shape)
        self.cg_tmp = np.zeros(shape)
        # face weights for the transformed-variable solve
        ny, nx = shape
        self.wxf = np.zeros((ny, nx + 1))
        self.wyf = np.zeros((ny + 1, nx))


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # einsum keeps the reduction order fixed and single-threaded, which
    # the bitwise determinism guarantee relies on
    return float(np.einsum("ij,ij->", a, b))


def cg_solve(apply_op, b: np.ndarray, x: np.ndarray, tol: float, max_iter: int,
             bufs: StepBuffers, diag: np.ndarray | None = None) -> tuple[int, float]:
    """Conjugate gradients for apply_op(x) = b, starting from the given x.

    apply_op(src, out) must implement a symmetric positive definite
    operator. x is updated in place; returns (iterations, relative
    residual). diag enables Jacobi preconditioning.
    """
    r, p, ap, zv, tmp = bufs.cg_r, bufs.cg_p, bufs.cg_ap, bufs.cg_z, bufs.cg_tmp

    b_norm = np.sqrt(_dot(b, b))
    if b_norm == 0.0:
        x.fill(0.0)
        return 0, 0.0
    apply_op(x, ap)
    np.subtract(b, ap, out=r)
    r_norm = np.sqrt(_dot(r, r))
    if r_norm <= tol * b_norm:
        return 0, r_norm / b_norm

    if diag is not None:
        np.divide(r, diag, out=zv)
    else:
        zv = r
    np.copyto(p, zv)
    rz = _dot(r, zv)

    for it in range(1, max_iter + 1):
        apply_op(p, ap)
        p_ap = _dot(p, ap)
        if p_ap <= 0.0:
            raise ConvergenceError(it, r_norm / b_norm, tol,
                                   detail="operator lost positive definiteness")
        alpha = rz / p_ap
        np.multiply(p, alpha, out=tmp)
        x += tmp
        np.multiply(ap, alpha, out=tmp)
        r -= tmp
        r_norm = np.sqrt(_dot(r, r))
        if r_norm <= tol * b_norm:
            return it, r_norm / b_norm
        if diag is not None:
            np.divide(r, diag, out=zv)
            rz_new = _dot(r, zv)
        else:
            zv = r
            rz_new = r_norm * r_norm
        beta = rz_new / rz
        rz = rz_new
        p *= beta
        p += zv
    raise ConvergenceError(max_iter, r_norm / b_norm, tol)


def _diffusion_diag(grid: GridSpec, diffusivity: float, dt: float) -> np.ndarray:
    ones_c = np.ones(grid.shape)
    wx = np.ones((grid.ny, grid.nx + 1))
    wy = np.ones((grid.ny + 1, grid.nx))
    wx[:, 0] = wx[:, -1] = 0.0
    wy[0, :] = wy[-1, :] = 0.0
    return weighted_diffusion_diagonal(ones_c, wx, wy, dt * diffusivity, grid.dx, grid.dy)


def implicit_diffusion_solve_arrays(rhs: np.ndarray, diffusivity: float, dt: float,
                                    cfg: SolverConfig, grid: GridSpec,
                                    bufs: StepBuffers, out: np.ndarray) -> tuple[int, float]:
    """Solve (I - dt*D*Lap) out = rhs; out is also the warm start (= rhs)."""
    if dt * diffusivity == 0.0:
        np.copyto(out, rhs)
        return 0, 0.0
    np.copyto(out, rhs)

    def apply_op(src, dst):
        diffusion_matvec_arrays(src, diffusivity, dt, grid.dx, grid.dy, bufs.ws, dst)

    diag = _diffusion_diag(grid, diffusivity, dt) if cfg.precondition == "jacobi" else None
    return cg_solve(apply_op, rhs, out, cfg.cg_tol, cfg.cg_max_iter, bufs, diag)


def implicit_diffusion_solve(rhs: Field, diffusivity: float, dt: float,
                             cfg: SolverConfig) -> Field:
    """Field-level backward-Euler diffusion solve."""
    if diffusivity < 0:
        raise ValidationError("diffusivity must be nonnegative")
    bufs = StepBuffers(rhs.grid)
    out = np.empty(rhs.grid.shape)
    implicit_diffusion_solve_arrays(rhs.values, diffusivity, dt, cfg, rhs.grid, bufs, out)
    return Field(out, rhs.grid)


def cfl_bound(speed: float, grid: GridSpec, cfg: SolverConfig) -> float:
    """Admissible step from the advective stability limit."""
    if speed <= 0.0:
        return float("inf")
    return cfg.cfl_safety * min(grid.dx, grid.dy) / (2.0 * speed)


def admissible_dt(state: State, params: ModelParams, cfg: SolverConfig,
                  ws: StencilWorkspace | None = None) -> float:
    """Largest step the integrator will accept right now.

    The smallest of: the configured dt, the advective CFL bound
    cfl_safety*min(dx,dy)/(2*max face speed), the degradation stability
    bound 1/beta, and the remaining time t_end - t.
    """
    speed = max_taxis_speed(state, params, ws)
    dt = min(cfg.dt, cfl_bound(speed, state.grid, cfg), 1.0 / params.reaction.beta)
    remaining = cfg.t_end - state.t
    if 0.0 < remaining < dt:
        dt = remaining
    return dt


_CFL_SLACK = 1.0 + 1e-9


def _resolve_dt(dt: float, speed: float, beta: float, grid: GridSpec,
                cfg: SolverConfig, clip: bool) -> tuple[float, float]:
    """Validate (or clip) dt against the stability bounds; returns (dt, cfl).

    clip=False enforces the caller's dt and raises naming the admissible
    step; clip=True lowers dt to the bound instead (the run loop uses
    this so it never re-evaluates the taxis speeds it just computed).
    """
    bound = cfl_bound(speed, grid, cfg)
    w_bound = 1.0 / beta
    if clip:
        dt = min(dt, bound, w_bound)
    else:
        if dt > bound * _CFL_SLACK:
            raise CFLViolation(dt, bound)
        if dt > w_bound * _CFL_SLACK:
            raise CFLViolation(dt, w_bound)
    cfl = 0.0 if bound == float("inf") else dt / bound * cfg.cfl_safety
    return dt, cfl


def _advance_z(z: np.ndarray, dz_react: np.ndarray, u: np.ndarray, v: np.ndarray,
               dt: float, params: ModelParams, cfg: SolverConfig, grid: GridSpec,
               bufs: StepBuffers, out: np.ndarray, report: StepReport) -> None:
    """z step: explicit reaction (or semi-implicit uptake) + implicit diffusion."""
    rp = params.reaction
    if cfg.semi_implicit_uptake:
        # production only in the rhs; uptake divided out after diffusing.
        # keeps z <= max(z0, 1/mu_z) pointwise in the direct variant.
        np.multiply(phi(u), dt, out=bufs.scr2)
        bufs.scr2 += z
    else:
        np.multiply(dz_react, dt, out=bufs.scr2)
        bufs.scr2 += z
    iters, res = implicit_diffusion_solve_arrays(bufs.scr2, rp.D_z, dt, cfg, grid, bufs, out)
    if cfg.semi_implicit_uptake:
        if params.variant is ModelVariant.DIRECT_TAXIS:
            out /= 1.0 + dt * rp.mu_z
        else:
            out /= 1.0 + dt * rp.mu_z * v
    report.cg_iterations["z"] = iters
    report.cg_residuals["z"] = res


def imex_step(state: State, params: ModelParams, cfg: SolverConfig,
              bufs: StepBuffers | None = None, dt: float | None = None,
              clip: bool = False) -> tuple[State, StepReport]:
    """One IMEX step of the selected variant.

    Explicit tendencies are evaluated at the incoming state, w advances
    pointwise, then u, v, z are diffused implicitly (diffusivities 1, 1,
    D_z). dt defaults to cfg.dt. A dt above the CFL bound raises an
    error naming the admissible step, unless clip=True, which lowers dt
    to the bound instead (report.dt carries the step actually taken).
    """
    g = state.grid
    bufs = bufs or StepBuffers(g)
    if dt is None:
        dt = cfg.dt
    t_start = time.perf_counter()

    u, v, w, z = state.u.values, state.v.values, state.w.values, state.z.values
    speed = eval_explicit_arrays(u, v, w, z, params, g.dx, g.dy, bufs.ws,
                                 bufs.du, bufs.dv, bufs.dw, bufs.dz)
    dt, cfl = _resolve_dt(dt, speed, params.reaction.beta, g, cfg, clip)
    report = StepReport(dt=dt, cfl=cfl)

    w_new = w + dt * bufs.dw

    np.multiply(bufs.du, dt, out=bufs.scr2)
    bufs.scr2 += u
    u_new = np.empty(g.shape)
    iters, res = implicit_diffusion_solve_arrays(bufs.scr2, 1.0, dt, cfg, g, bufs, u_new)
    report.cg_iterations["u"] = iters
    report.cg_residuals["u"] = res

    if params.variant is ModelVariant.DIRECT_TAXIS:
        v_new = v.copy()
        report.cg_iterations["v"] = 0
        report.cg_residuals["v"] = 0.0
    else:
        np.multiply(bufs.dv, dt, out=bufs.scr2)
        bufs.scr2 += v
        v_new = np.empty(g.shape)
        iters, res = implicit_diffusion_solve_arrays(bufs.scr2, 1.0, dt, cfg, g, bufs, v_new)
        report.cg_iterations["v"] = iters
        report.cg_residuals["v"] = res

    z_new = np.empty(g.shape)
    _advance_z(z, bufs.dz, u, v, dt, params, cfg, g, bufs, z_new, report)

    report.wall_time = time.perf_counter() - t_start
    new_state = State(
        Field(u_new, g), Field(v_new, g), Field(w_new, g), Field(z_new, g), t=state.t + dt
    )
    return new_state, report


def step_a_system(a_state: State, params: ModelParams, cfg: SolverConfig,
                  bufs: StepBuffers | None = None, dt: float | None = None,
                  clip: bool = False) -> tuple[State, StepReport]:
    """One IMEX step of the transformed system; the u slot carries a.

    The weighted diffusion exp(-Xi) div(exp(Xi) grad a) is solved in the
    symmetrized form (diag(exp(Xi)) - dt div(exp(Xi) grad)) a = exp(Xi) * rhs,
    which is SPD in the unweighted inner product. v, w, z advance exactly
    as in the cascade step, driven by the reconstructed u = a exp(Xi).
    """
    from .coefficients import big_xi, big_xi_dv

    if params.variant is ModelVariant.DIRECT_TAXIS:
        raise ValidationError("the transformed system mirrors the cascade variants only")
    g = a_state.grid
    bufs = bufs or StepBuffers(g)
    if dt is None:
        dt = cfg.dt
    t_start = time.perf_counter()

    a, v, w, z = a_state.u.values, a_state.v.values, a_state.w.values, a_state.z.values
    Xi = big_xi(v, w, params.binding, params.taxis)
    # the Xi_v term multiplies an upwinded (first-order) v_t, so quadrature
    # error far below the scheme error is wasted work
    Xi_v = big_xi_dv(v, w, params.binding, params.taxis, tol=1e-8)
    exp_xi = np.exp(Xi)
    exp_neg_xi = np.exp(-Xi)
    u_rec = a * exp_xi

    # v, w, z tendencies exactly as the cascade sees them
    speed = eval_explicit_arrays(u_rec, v, w, z, params, g.dx, g.dy, bufs.ws,
                                 bufs.du, bufs.dv, bufs.dw, bufs.dz)
    da = np.empty(g.shape)
    speed_a = eval_a_explicit_arrays(a, v, w, z, params, g.dx, g.dy, bufs.ws,
                                     exp_xi, exp_neg_xi, Xi_v, da, bufs.scr1, bufs.scr2)
    dt, cfl = _resolve_dt(dt, max(speed, speed_a), params.reaction.beta, g, cfg, clip)
    report = StepReport(dt=dt, cfl=cfl)

    w_new = w + dt * bufs.dw

    # implicit weighted diffusion for a
    np.add(exp_xi[:, 1:], exp_xi[:, :-1], out=bufs.wxf[:, 1:-1])
    bufs.wxf[:, 1:-1] *= 0.5
    bufs.wxf[:, 0] = bufs.wxf[:, -1] = 0.0
    np.add(exp_xi[1:, :], exp_xi[:-1, :], out=bufs.wyf[1:-1, :])
    bufs.wyf[1:-1, :] *= 0.5
    bufs.wyf[0, :] = bufs.wyf[-1, :] = 0.0

    np.multiply(da, dt, out=bufs.scr2)
    bufs.scr2 += a
    rhs = exp_xi * bufs.scr2
    a_new = bufs.scr2.copy()  # warm start at the explicit predictor

    def apply_op(src, dst):
        weighted_diffusion_matvec_arrays(src, exp_xi, bufs.wxf, bufs.wyf, dt,
                                         g.dx, g.dy, bufs.ws, dst)

    diag = None
    if cfg.precondition == "jacobi":
        diag = weighted_diffusion_diagonal(exp_xi, bufs.wxf, bufs.wyf, dt, g.dx, g.dy)
    iters, res = cg_solve(apply_op, rhs, a_new, cfg.cg_tol, cfg.cg_max_iter, bufs, diag)
    report.cg_iterations["a"] = iters
    report.cg_residuals["a"] = res

    np.multiply(bufs.dv, dt, out=bufs.scr2)
    bufs.scr2 += v
    v_new = np.empty(g.shape)
    iters, res = implicit_diffusion_solve_arrays(bufs.scr2, 1.0, dt, cfg, g, bufs, v_new)
    report.cg_iterations["v"] = iters
    report.cg_residuals["v"] = res

    z_new = np.empty(g.shape)
    _advance_z(z, bufs.dz, u_rec, v, dt, params, cfg, g, bufs, z_new, report)

    report.wall_time = time.perf_counter() - t_start
    new_state = State(
        Field(a_new, g), Field(v_new, g), Field(w_new, g), Field(z_new, g), t=a_state.t + dt
    )
    return new_state, report
