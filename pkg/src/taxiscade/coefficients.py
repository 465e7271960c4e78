"""Scalar coefficient functions of the model and their certified bounds.

The tumor flux responses to endothelial-cell gradients (chi) and tissue
gradients (xi) both derive from one receptor-occupancy balance

    B(v, w) = k1_plus*v/v_M + k2_plus*w/w_M + k_minus,

through chi = kappa1 / (B^2 (1+B)) and xi = kappa2 / (B^2 (1+B)). The
tissue degradation law psi and the VEGF production law phi are saturating
rational functions. Xi(v, w), the w-antiderivative of xi, feeds the
transformed-variable cross-check in models.

validate_assumptions certifies the structural hypotheses the
well-posedness of the system rests on: bounded chi*(v+1) (chi), bounded
xi and d(xi)/dv (xi), sublinear s*psi'(s) (psi), and nonnegative phi with
bounded u*phi'(u) (phi). Alternative reaction laws from a small registry
can be vetted through the same machinery before a run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Inputs this much below zero are treated as genuinely negative rather
# than solver noise; matches the global negativity tolerance.
NEG_TOL = 1e-12


def _reject_negative(name: str, *arrays) -> None:
    for arr in arrays:
        if np.any(np.asarray(arr) < -NEG_TOL):
            raise ValidationError(f"{name} requires nonnegative inputs")


# ---------------------------------------------------------------------------
# Parameter records


@dataclass(frozen=True)
class BindingParams:
    """Receptor attachment/detachment rates and reference densities.

    k1_plus: attachment rate to ECs; k2_plus: attachment rate to tissue;
    k_minus: detachment rate; v_M, w_M: EC and tissue reference densities.
    """

    k1_plus: float = 1.0
    k2_plus: float = 1.0
    k_minus: float = 1.0
    v_M: float = 1.0
    w_M: float = 1.0

    def validate(self) -> list[str]:
        return [
            f"binding parameter {name} must be strictly positive"
            for name in ("k1_plus", "k2_plus", "k_minus", "v_M", "w_M")
            if getattr(self, name) <= 0
        ]


@dataclass(frozen=True)
class TaxisParams:
    """Chemotaxis (kappa1) and haptotaxis (kappa2) strength constants."""

    kappa1: float = 1.0
    kappa2: float = 1.0

    def validate(self) -> list[str]:
        out = []
        if self.kappa1 <= 0:
            out.append("(chi): kappa1 > 0 required")
        if self.kappa2 <= 0:
            out.append("(xi): kappa2 > 0 required")
        return out


@dataclass(frozen=True)
class ReactionParams:
    """VEGF diffusivity/uptake and the tissue degradation scale.

    D_z: VEGF diffusivity (fast relative to the unit cell motilities);
    mu_z: VEGF uptake rate; beta: scale of psi(s) = beta*s/(1+s).
    """

    D_z: float = 10.0
    mu_z: float = 0.1
    beta: float = 1.0

    def validate(self) -> list[str]:
        out = []
        if self.D_z <= 0:
            out.append("D_z must be strictly positive")
        if self.mu_z <= 0:
            out.append("mu_z must be strictly positive")
        if self.beta <= 0:
            out.append("(psi): beta > 0 required (psi positivity)")
        return out


@dataclass(frozen=True)
class GrowthParams:
    """Logistic proliferation rates and carrying capacities.

    mu_u, mu_v: maximal tumor and EC growth rates. K_u, K_v, K_w:
    carrying capacities in the shared competition factor; K_z: maximal
    admissible VEGF concentration gating EC proliferation.
    """

    mu_u: float = 0.1
    mu_v: float = 0.1
    K_u: float = 1.0
    K_v: float = 1.0
    K_w: float = 1.0
    K_z: float = 1.0

    def validate(self) -> list[str]:
        return [
            f"growth parameter {name} must be strictly positive"
            for name in ("mu_u", "mu_v", "K_u", "K_v", "K_w", "K_z")
            if getattr(self, name) <= 0
        ]


@dataclass(frozen=True)
class KineticParams:
    """Microscale run-and-turn parameters behind the macro coefficients.

    speed_c, speed_e: tumor and EC cell speeds. lambda0: baseline tumor
    turning rate; lambda1: receptor modulation of the turning rate (must
    stay below lambda0 so the modulated rate stays positive); eta0:
    baseline EC turning rate. dim: spatial dimension of the walk.
    """

    speed_c: float = 1.0
    speed_e: float = 1.0
    lambda0: float = 1.0
    lambda1: float = 0.5
    eta0: float = 1.0
    dim: int = 2

    def validate(self) -> list[str]:
        out = [
            f"kinetic parameter {name} must be strictly positive"
            for name in ("speed_c", "speed_e", "lambda0", "lambda1", "eta0")
            if getattr(self, name) <= 0
        ]
        if self.dim < 1:
            out.append("dim must be >= 1")
        if self.lambda1 >= self.lambda0:
            out.append("lambda1 < lambda0 required (turning rate positivity)")
        return out


@dataclass(frozen=True)
class AssumptionBounds:
    """Certified structural constants of the coefficient hypotheses."""

    C_chi: float
    C_xi: float
    C_psi: float
    C_phi: float

    def validate(self) -> list[str]:
        return [
            f"assumption bound {name} must be positive and finite"
            for name in ("C_chi", "C_xi", "C_psi", "C_phi")
            if not (0 < getattr(self, name) < np.inf)
        ]


# ---------------------------------------------------------------------------
# Coefficient formulas


def binding_B(v, w, bp: BindingParams):
    """Receptor occupancy B(v, w) = k1_plus*v/v_M + k2_plus*w/w_M + k_minus."""
    _reject_negative("binding_B", v, w)
    return bp.k1_plus * np.asarray(v) / bp.v_M + bp.k2_plus * np.asarray(w) / bp.w_M + bp.k_minus


def chi(v, w, bp: BindingParams, tp: TaxisParams):
    """EC-gradient sensitivity kappa1 / (B^2 (1 + B))."""
    B = binding_B(v, w, bp)
    return tp.kappa1 / (B * B * (1.0 + B))


def xi(v, w, bp: BindingParams, tp: TaxisParams):
    """Tissue-gradient sensitivity kappa2 / (B^2 (1 + B))."""
    B = binding_B(v, w, bp)
    return tp.kappa2 / (B * B * (1.0 + B))


def xi_dv(v, w, bp: BindingParams, tp: TaxisParams):
    """d(xi)/dv; the chain rule through B collapses to a single rational.

    d/dB [1/(B^2(1+B))] = -(3B + 2)/(B^3 (1+B)^2), and dB/dv = k1_plus/v_M.
    """
    B = binding_B(v, w, bp)
    return -tp.kappa2 * (bp.k1_plus / bp.v_M) * (3.0 * B + 2.0) / (B**3 * (1.0 + B) ** 2)


def psi(s, rp: ReactionParams):
    """Tissue degradation rate beta*s/(1+s), driven by s = u*w; in [0, beta)."""
    _reject_negative("psi", s)
    s = np.asarray(s, dtype=np.float64)
    return rp.beta * s / (1.0 + s)


def phi(u):
    """VEGF production u/(1+u), saturating in the tumor density; in [0, 1)."""
    _reject_negative("phi", u)
    u = np.asarray(u, dtype=np.float64)
    return u / (1.0 + u)


def mu_c(u, v, w, gp: GrowthParams):
    """Tumor growth rate (mu_u/K_u)(1 - u/K_u - v/K_v - w/K_w); may be negative."""
    return (gp.mu_u / gp.K_u) * (
        1.0 - np.asarray(u) / gp.K_u - np.asarray(v) / gp.K_v - np.asarray(w) / gp.K_w
    )


def mu_e(u, v, z, gp: GrowthParams):
    """EC growth rate mu_v (z/K_z)(1 - v/K_v - u/K_u); may be negative."""
    return gp.mu_v * (np.asarray(z) / gp.K_z) * (1.0 - np.asarray(v) / gp.K_v - np.asarray(u) / gp.K_u)


def diffusion_constants(kp: KineticParams) -> tuple[float, float]:
    """Parabolic-limit diffusivities (tumor, EC): speed^2 / (dim * turning rate).

    Documentation-level quantities: the nondimensional system already
    absorbs them into unit cell diffusivities, so they never multiply the
    discrete Laplacian.
    """
    problems = kp.validate()
    if problems:
        raise ValidationError(problems)
    return kp.speed_c**2 / (kp.dim * kp.lambda0), kp.speed_e**2 / (kp.dim * kp.eta0)


def tactic_sensitivity_g(v, w, bp: BindingParams, kp: KineticParams):
    """Receptor-modulated turning bias g = lambda1*k_minus / (B^2 (lambda0 + B)).

    The microscale ancestor of chi and xi; exposed for cross-checks only,
    since the nondimensional kappa1, kappa2 absorb it.
    """
    B = binding_B(v, w, bp)
    return kp.lambda1 * bp.k_minus / (B * B * (kp.lambda0 + B))


# ---------------------------------------------------------------------------
# Xi(v, w) = integral of xi(v, s) ds, s in [0, w], by adaptive Simpson.
# The closed form via partial fractions of 1/(B^2(1+B)) exists for the
# default xi and is kept out of the implementation on purpose: user
# override laws have no closed form, and the exact antiderivative serves
# as an independent oracle in the tests.

_SIMPSON_START = 8
_SIMPSON_MAX = 4096


def _adaptive_simpson_in_w(integrand, v, w, tol: float) -> np.ndarray:
    """Vectorized integral of integrand(v, s) ds over [0, w] per cell.

    Doubles the subinterval count until successive composite-Simpson
    values agree within tol absolutely (integrand must be smooth, which
    the rational coefficient families are). Simpson values are formed by
    one Richardson step on incrementally refined trapezoid sums, so each
    doubling only evaluates the new midpoints instead of every node.
    """
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    v_b, w_b = np.broadcast_arrays(v, w)
    shape = v_b.shape
    v_f = v_b.reshape(-1)
    w_f = w_b.reshape(-1)

    ends = np.asarray(integrand(v_f[None, :], np.stack([np.zeros_like(w_f), w_f])),
                      dtype=np.float64)
    trap = 0.5 * w_f * (ends[0] + ends[1])
    n = 1
    simpson = None
    while True:
        frac = (np.arange(n, dtype=np.float64)[:, None] + 0.5) / n
        mid_sum = np.asarray(integrand(v_f[None, :], w_f[None, :] * frac),
                             dtype=np.float64).sum(axis=0)
        trap_prev = trap
        trap = 0.5 * trap + (w_f / (2.0 * n)) * mid_sum
        n *= 2
        prev = simpson
        simpson = (4.0 * trap - trap_prev) / 3.0
        if (prev is not None and n >= 2 * _SIMPSON_START
                and float(np.max(np.abs(simpson - prev))) <= tol):
            return simpson.reshape(shape)
        if n >= _SIMPSON_MAX:
            # smooth integrands converge long before this; returning the
            # finest estimate keeps degenerate overrides from hanging
            return simpson.reshape(shape)


def big_xi(v, w, bp: BindingParams, tp: TaxisParams, law=None, tol: float = 1e-10):
    """Xi(v, w) = integral of xi(v, s) ds over [0, w], abs error <= tol.

    law, if given, replaces the default xi(v, s) integrand (signature
    law(v, s) -> sensitivity, broadcastable).
    """
    _reject_negative("big_xi", v, w)
    f = law if law is not None else (lambda vv, ss: xi(vv, ss, bp, tp))
    return _adaptive_simpson_in_w(f, v, w, tol)


def big_xi_dv(v, w, bp: BindingParams, tp: TaxisParams, tol: float = 1e-10):
    """d(Xi)/dv by differentiating under the integral: integral of d(xi)/dv ds."""
    _reject_negative("big_xi_dv", v, w)
    return _adaptive_simpson_in_w(lambda vv, ss: xi_dv(vv, ss, bp, tp), v, w, tol)


# ---------------------------------------------------------------------------
# Override registry: named closed-form families the validator can sample
# safely. Families map a scale and exponents to a law s -> rate.


def make_rate_law(family: str, scale: float, p: float = 1.0, q: float = 1.0):
    """Build a reaction law from the registry.

    "rational": scale * s^p / (1+s)^q (the default degradation law is
    p = q = 1; a superlinear s^2 variant is p = 2, q = 0).
    "exponential-decay": scale * (1 - exp(-s)), saturating at scale.
    "constant": scale, independent of s.
    """
    if family == "rational":
        if p < 1 or q < 0:
            raise ValidationError("rational law needs p >= 1 and q >= 0")
        return lambda s: scale * np.asarray(s, dtype=np.float64) ** p / (1.0 + np.asarray(s)) ** q
    if family == "exponential-decay":
        return lambda s: scale * (-np.expm1(-np.asarray(s, dtype=np.float64)))
    if family == "constant":
        return lambda s: np.full_like(np.asarray(s, dtype=np.float64), scale)
    raise ValidationError(f"unknown rate-law family '{family}'")


# ---------------------------------------------------------------------------
# Structural-hypothesis certification

_SAMPLES_2D = 801
_SAMPLES_1D = 8001


@dataclass(frozen=True)
class BoundRow:
    """One row of the certified-bounds table."""

    hypothesis: str
    quantity: str
    supremum: float
    argmax: tuple
    holds: bool
    note: str = ""


def _sup_with_growth_flag(vals: np.ndarray, axes_coords: list[np.ndarray]) -> tuple[float, tuple, bool]:
    """Supremum over a sampled box plus a saturation heuristic.

    If the sup over the full box exceeds the sup over the half box (each
    axis halved) by more than 20%, the quantity is still climbing toward
    the boundary and no finite certificate is claimed.
    """
    k = int(np.argmax(vals))
    sup_full = float(vals.reshape(-1)[k])
    half = vals[tuple(slice(0, n // 2 + 1) for n in vals.shape)]
    sup_half = float(np.max(half))
    saturated = not (sup_half > 0 and sup_full > 1.2 * sup_half)
    idx = np.unravel_index(k, vals.shape)
    arg = tuple(float(axes_coords[d][idx[d]]) for d in range(len(idx)))
    return sup_full, arg, saturated


def _central_slope(f, x: np.ndarray) -> np.ndarray:
    h = 1e-6 * max(1.0, float(np.max(x)))
    xp = x + h
    xm = np.maximum(x - h, 0.0)
    return (np.asarray(f(xp), dtype=np.float64) - np.asarray(f(xm))) / (xp - xm)


def validate_assumptions(
    bp: BindingParams,
    tp: TaxisParams,
    rp: ReactionParams,
    v_max: float = 10.0,
    w_max: float = 10.0,
    u_max: float = 10.0,
    psi_law=None,
    phi_law=None,
    declared: AssumptionBounds | None = None,
) -> tuple[AssumptionBounds, list[BoundRow]]:
    """Certify the structural hypotheses by dense sampling.

    Samples chi*(v+1), |xi| and |d(xi)/dv| over [0,v_max]x[0,w_max], and
    s*psi'(s), u*|phi'(u)| over [0, u_max*w_max] and [0, u_max]. Returns
    the observed suprema as certified bounds plus the full table. Raises
    ValidationError naming the violated hypothesis tag when a quantity is
    unbounded on the sampled range, psi or phi loses positivity, or a
    declared bound is exceeded.
    """
    problems = bp.validate() + tp.validate() + rp.validate()
    if problems:
        raise ValidationError(problems)

    v = np.linspace(0.0, v_max, _SAMPLES_2D)
    w = np.linspace(0.0, w_max, _SAMPLES_2D)
    V, W = np.meshgrid(v, w, indexing="ij")
    rows: list[BoundRow] = []

    sup, arg, ok = _sup_with_growth_flag(chi(V, W, bp, tp) * (V + 1.0), [v, w])
    rows.append(BoundRow("(chi)", "chi(v,w)*(v+1)", sup, arg, ok,
                         "" if ok else "still growing at the sampling edge"))
    c_chi = sup

    sup, arg, ok = _sup_with_growth_flag(np.abs(xi(V, W, bp, tp)), [v, w])
    rows.append(BoundRow("(xi)", "|xi(v,w)|", sup, arg, ok,
                         "" if ok else "still growing at the sampling edge"))
    c_xi = sup
    sup, arg, ok = _sup_with_growth_flag(np.abs(xi_dv(V, W, bp, tp)), [v, w])
    rows.append(BoundRow("(xi)", "|d(xi)/dv|", sup, arg, ok,
                         "" if ok else "still growing at the sampling edge"))

    s = np.linspace(0.0, u_max * w_max, _SAMPLES_1D)
    f_psi = psi_law if psi_law is not None else (lambda x: psi(x, rp))
    slope = s * _central_slope(f_psi, s)
    if np.any(slope < -1e-9):
        k = int(np.argmin(slope))
        rows.append(BoundRow("(psi)", "s*psi'(s)", float(slope[k]), (float(s[k]),), False,
                             "degradation law not nondecreasing"))
        c_psi = float("nan")
    else:
        sup, arg, ok = _sup_with_growth_flag(slope, [s])
        rows.append(BoundRow("(psi)", "s*psi'(s)", sup, arg, ok,
                             "" if ok else "superlinear growth: unbounded on sampled range"))
        c_psi = sup

    u = np.linspace(0.0, u_max, _SAMPLES_1D)
    f_phi = phi_law if phi_law is not None else phi
    phi_vals = np.asarray(f_phi(u), dtype=np.float64)
    phi_nonneg = bool(np.all(phi_vals >= -1e-14))
    rows.append(BoundRow("(phi)", "phi(u) >= 0", float(np.min(phi_vals)),
                         (float(u[int(np.argmin(phi_vals))]),), phi_nonneg,
                         "" if phi_nonneg else "production law takes negative values"))
    uslope = u * np.abs(_central_slope(f_phi, u))
    sup, arg, ok = _sup_with_growth_flag(uslope, [u])
    rows.append(BoundRow("(phi)", "u*|phi'(u)|", sup, arg, ok,
                         "" if ok else "superlinear growth: unbounded on sampled range"))
    c_phi = sup

    # logarithmic envelope psi(s) <= beta*(1 + ln_+ s), sampled
    envelope = rp.beta * (1.0 + np.log(np.maximum(s, 1.0)))
    env_ok = bool(np.all(np.asarray(f_psi(s)) <= envelope + 1e-12))
    rows.append(BoundRow("(psi)", "psi(s) <= beta*(1+ln+ s)", float(np.max(np.asarray(f_psi(s)) - envelope)),
                         (float(s[int(np.argmax(np.asarray(f_psi(s)) - envelope))]),), env_ok,
                         "" if env_ok else "logarithmic envelope violated"))

    violations = [
        f"{r.hypothesis}: {r.quantity} fails ({r.note or 'no finite bound observed'})"
        for r in rows
        if not r.holds
    ]
    if declared is not None:
        # caps key on the exact quantity each constant names; the extra
        # table rows (|d(xi)/dv|, positivity, envelope) are informational
        caps = {"chi(v,w)*(v+1)": declared.C_chi, "|xi(v,w)|": declared.C_xi,
                "s*psi'(s)": declared.C_psi, "u*|phi'(u)|": declared.C_phi}
        for r in rows:
            cap = caps.get(r.quantity)
            # slack covers the sampler's own finite-difference truncation
            # error, so declaring the exact supremum passes
            if cap is not None and r.holds and r.supremum > cap * (1.0 + 1e-6):
                violations.append(
                    f"{r.hypothesis}: observed {r.quantity} = {r.supremum:.6g} exceeds declared {cap:.6g}"
                )
    if violations:
        raise ValidationError(violations)
    return AssumptionBounds(C_chi=c_chi, C_xi=c_xi, C_psi=c_psi, C_phi=c_phi), rows
