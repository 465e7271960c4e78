"""Right-hand sides of the model variants and the transformed cross-check.

Three variants share one state layout (u, v, w, z):

  cascade (no source):  u follows gradients of v (EC density) and w
      (tissue), v follows gradients of z (VEGF), w is degraded by u,
      z diffuses, is taken up by v and produced by u.
  cascade with growth:  adds logistic competition terms to u and v.
  direct taxis:         u follows gradients of z and w directly, the v
      equation is dropped (v is carried frozen so snapshots stay
      uniform across variants), z decays at rate mu_z instead of being
      taken up by v.

Only the non-diffusive parts are assembled here; the unit diffusion of u
and v and the D_z diffusion of z are applied implicitly by the time
integrator. The transformed variable a = u*exp(-Xi(v,w)) and its
explicit tendency provide an analytically equivalent second route to the
cascade dynamics, used as a mutual oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (
    AssumptionBounds,
    BindingParams,
    GrowthParams,
    KineticParams,
    ReactionParams,
    TaxisParams,
    big_xi,
    big_xi_dv,
    chi,
    mu_c,
    mu_e,
    phi,
    psi,
    xi,
)
from .errors import ValidationError
from .grid import Field, State
from .operators import (
    StencilWorkspace,
    laplacian_arrays,
    taxis_velocities,
    upwind_divergence_arrays,
)


class ModelVariant(enum.Enum):
    CASCADE_NO_SOURCE = "cascade"
    CASCADE_WITH_GROWTH = "cascade-growth"
    DIRECT_TAXIS = "direct-taxis"


_VARIANT_ALIASES = {
    "cascade": ModelVariant.CASCADE_NO_SOURCE,
    "cascade-no-source": ModelVariant.CASCADE_NO_SOURCE,
    "cascadenosource": ModelVariant.CASCADE_NO_SOURCE,
    "cascade-growth": ModelVariant.CASCADE_WITH_GROWTH,
    "growth": ModelVariant.CASCADE_WITH_GROWTH,
    "cascadewithgrowth": ModelVariant.CASCADE_WITH_GROWTH,
    "direct-taxis": ModelVariant.DIRECT_TAXIS,
    "direct": ModelVariant.DIRECT_TAXIS,
    "directtaxis": ModelVariant.DIRECT_TAXIS,
}


def parse_variant(name: str) -> ModelVariant:
    key = name.strip().lower().replace("_", "-")
    if key not in _VARIANT_ALIASES:
        raise ValidationError(
            f"unknown model variant '{name}' (choose from cascade, cascade-growth, direct-taxis)"
        )
    return _VARIANT_ALIASES[key]


@dataclass(frozen=True)
class ModelParams:
    """Every scalar constant of the system plus the variant selector."""

    binding: BindingParams = field(default_factory=BindingParams)
    taxis: TaxisParams = field(default_factory=TaxisParams)
    reaction: ReactionParams = field(default_factory=ReactionParams)
    growth: GrowthParams = field(default_factory=GrowthParams)
    kinetic: KineticParams = field(default_factory=KineticParams)
    bounds: AssumptionBounds | None = None
    variant: ModelVariant = ModelVariant.CASCADE_NO_SOURCE

    def validate(self) -> None:
        problems = (
            self.binding.validate()
            + self.taxis.validate()
            + self.reaction.validate()
            + self.growth.validate()
            + self.kinetic.validate()
        )
        if self.bounds is not None:
            problems += self.bounds.validate()
        if problems:
            raise ValidationError(problems)


def eval_explicit_arrays(
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    z: np.ndarray,
    p: ModelParams,
    dx: float,
    dy: float,
    ws: StencilWorkspace,
    du: np.ndarray,
    dv: np.ndarray,
    dw: np.ndarray,
    dz: np.ndarray,
) -> float:
    """Explicit tendencies (taxis, reactions, growth) at the given state.

    Writes into du/dv/dw/dz and returns the largest taxis face speed of
    the step, which the caller checks against the CFL bound. Diffusive
    parts are deliberately absent (handled implicitly).
    """
    bp, tp, rp, gp = p.binding, p.taxis, p.reaction, p.growth
    direct = p.variant is ModelVariant.DIRECT_TAXIS

    sig1 = z if direct else v
    chi_arr = chi(sig1, w, bp, tp)
    xi_arr = xi(sig1, w, bp, tp)

    speed = taxis_velocities(chi_arr, sig1, dx, dy, ws.qx, ws.qy, ws)
    upwind_divergence_arrays(u, ws.qx, ws.qy, dx, dy, ws, du)
    speed = max(speed, taxis_velocities(xi_arr, w, dx, dy, ws.qx, ws.qy, ws))
    upwind_divergence_arrays(u, ws.qx, ws.qy, dx, dy, ws, du, accumulate=True)
    np.negative(du, out=du)

    if direct:
        dv.fill(0.0)
    else:
        ones = np.ones_like(v)
        speed = max(speed, taxis_velocities(ones, z, dx, dy, ws.qx, ws.qy, ws))
        upwind_divergence_arrays(v, ws.qx, ws.qy, dx, dy, ws, dv)
        np.negative(dv, out=dv)

    if p.variant is ModelVariant.CASCADE_WITH_GROWTH:
        du += mu_c(u, v, w, gp) * u
        dv += mu_e(u, v, z, gp) * v

    np.multiply(u, w, out=dw)
    np.copyto(dw, -psi(dw, rp))

    np.copyto(dz, phi(u))
    if direct:
        dz -= rp.mu_z * z
    else:
        dz -= rp.mu_z * v * z
    return speed


def max_taxis_speed(state: State, p: ModelParams, ws: StencilWorkspace | None = None) -> float:
    """Largest taxis face speed at the current state (for step-size control)."""
    g = state.grid
    ws = ws or StencilWorkspace(g)
    u, v, w, z = state.u.values, state.v.values, state.w.values, state.z.values
    bp, tp = p.binding, p.taxis
    direct = p.variant is ModelVariant.DIRECT_TAXIS
    sig1 = z if direct else v
    speed = taxis_velocities(chi(sig1, w, bp, tp), sig1, g.dx, g.dy, ws.qx, ws.qy, ws)
    speed = max(speed, taxis_velocities(xi(sig1, w, bp, tp), w, g.dx, g.dy, ws.qx, ws.qy, ws))
    if not direct:
        speed = max(speed, taxis_velocities(np.ones_like(v), z, g.dx, g.dy, ws.qx, ws.qy, ws))
    return speed


def _tendency_fields(state: State, p: ModelParams) -> dict[str, Field]:
    g = state.grid
    ws = StencilWorkspace(g)
    du = np.empty(g.shape)
    dv = np.empty(g.shape)
    dw = np.empty(g.shape)
    dz = np.empty(g.shape)
    eval_explicit_arrays(
        state.u.values, state.v.values, state.w.values, state.z.values,
        p, g.dx, g.dy, ws, du, dv, dw, dz,
    )
    return {name: Field(arr, g) for name, arr in (("u", du), ("v", dv), ("w", dw), ("z", dz))}


def explicit_rhs_cascade(state: State, p: ModelParams) -> dict[str, Field]:
    """Per-field explicit tendencies of the cascade variants.

    u: -div(u chi(v,w) grad v) - div(u xi(v,w) grad w) [+ mu_c u with
    growth]; v: -div(v grad z) [+ mu_e v]; w: -psi(u w); z: reaction part
    -mu_z v z + phi(u).
    """
    if p.variant is ModelVariant.DIRECT_TAXIS:
        raise ValidationError("cascade tendencies requested for the direct-taxis variant")
    return _tendency_fields(state, p)


def explicit_rhs_direct(state: State, p: ModelParams) -> dict[str, Field]:
    """Per-field explicit tendencies of the direct-taxis comparison variant.

    u: -div(u chi(z,w) grad z) - div(u xi(z,w) grad w); v: frozen (zero
    tendency); w: -psi(u w); z: -mu_z z + phi(u).
    """
    if p.variant is not ModelVariant.DIRECT_TAXIS:
        raise ValidationError("direct-taxis tendencies requested for a cascade variant")
    return _tendency_fields(state, p)


# ---------------------------------------------------------------------------
# Transformed variable a = u * exp(-Xi(v, w))


def transform_to_a(state: State, p: ModelParams) -> Field:
    """Pointwise a = u * exp(-Xi(v, w))."""
    Xi = big_xi(state.v.values, state.w.values, p.binding, p.taxis)
    return Field(state.u.values * np.exp(-Xi), state.grid)


def transform_from_a(a: Field, v: Field, w: Field, p: ModelParams) -> Field:
    """Recover u = a * exp(Xi(v, w))."""
    Xi = big_xi(v.values, w.values, p.binding, p.taxis)
    return Field(a.values * np.exp(Xi), a.grid)


def eval_a_explicit_arrays(
    a: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    z: np.ndarray,
    p: ModelParams,
    dx: float,
    dy: float,
    ws: StencilWorkspace,
    exp_xi: np.ndarray,
    exp_neg_xi: np.ndarray,
    xi_v_arr: np.ndarray,
    da: np.ndarray,
    scratch: np.ndarray,
    scratch2: np.ndarray,
) -> float:
    """Explicit tendency of the transformed variable.

    da = -exp(-Xi) * div(a * exp(Xi)(chi - Xi_v) grad v)
         - a * Xi_v * (lap v - div(v grad z))          [discrete v_t]
         + a * xi(v,w) * psi(a w exp(Xi))

    The weighted diffusion exp(-Xi) div(exp(Xi) grad a) goes to the
    implicit solve. The v_t factor uses the same-step discrete
    replacement by the v-equation right-hand side, evaluated with the
    very operators that advance v, so both routes see one discretization.
    Returns a conservative face-speed bound for the drift term.
    """
    bp, tp, rp = p.binding, p.taxis, p.reaction

    drift_coeff = exp_xi * (chi(v, w, bp, tp) - xi_v_arr)
    qmax = taxis_velocities(drift_coeff, v, dx, dy, ws.qx, ws.qy, ws)
    upwind_divergence_arrays(a, ws.qx, ws.qy, dx, dy, ws, da)
    da *= exp_neg_xi
    np.negative(da, out=da)
    # the cell factor exp(-Xi) <= exp(max -Xi) scales the effective speed
    speed = qmax * float(np.max(exp_neg_xi))

    qz = taxis_velocities(np.ones_like(v), z, dx, dy, ws.qx, ws.qy, ws)
    speed = max(speed, qz)
    upwind_divergence_arrays(v, ws.qx, ws.qy, dx, dy, ws, scratch)
    np.negative(scratch, out=scratch)
    laplacian_arrays(v, dx, dy, ws, scratch2)
    scratch += scratch2

    da -= a * xi_v_arr * scratch
    da += a * xi(v, w, bp, tp) * psi(a * w * exp_xi, rp)
    return speed
