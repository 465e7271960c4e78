"""Runtime invariant monitoring and run comparison.

The conservation identities (constant masses of u and v without sources,
nonincreasing total tissue) and the nonnegativity of all fields are the
analytically proven facts this artifact can check mechanically; they are
computed here every record interval and appended to the diagnostics CSV.
The functional F = int(v ln v) + 1/2 int(|grad z|^2 / z) is monitored
only: with VEGF production switched on it satisfies a differential
inequality rather than a decay law, so it is recorded, never asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Field, State

Z_FLOOR = 1e-30

CSV_COLUMNS = [
    "t", "mass_u", "mass_v", "total_w",
    "min_u", "min_v", "min_w", "min_z",
    "max_u", "max_v", "max_w", "max_z",
    "functional_F", "negativity_excess",
    "cg_iters_max", "cg_residual_max", "change_rate",
]


def mass(f: Field, compensated: bool = False) -> float:
    """Discrete integral: sum of cell values times the cell area.

    compensated=True switches to exact (fsum) accumulation, bounding the
    relative summation error by ~1e-14 even on adversarial cancellation.
    """
    if compensated:
        return math.fsum(f.values.ravel()) * f.grid.cell_area
    return float(np.sum(f.values)) * f.grid.cell_area


def negativity_excess(state: State) -> float:
    """Integral of the negative parts over all four fields (0 when clean)."""
    total = 0.0
    for fld in state.fields().values():
        neg = fld.values[fld.values < 0.0]
        if neg.size:
            total += -float(np.sum(neg))
    return total * state.grid.cell_area


def functional_F(v: Field, z: Field) -> float:
    """int(v ln v) + 1/2 int(|grad z|^2 / z), or NaN when z is too small.

    v ln v uses the continuous extension 0*ln 0 = 0 (values <= 0
    contribute nothing; tiny solver-noise negatives fall under the same
    rule). The gradient quadrature lives on interior faces with z
    averaged onto the face; a min z at or below the 1e-30 floor makes
    the 1/z weight meaningless and flags the value as undefined (NaN).
    """
    g = v.grid
    if float(np.min(z.values)) <= Z_FLOOR:
        return float("nan")
    vv = v.values
    pos = vv > 0.0
    ent = float(np.sum(vv[pos] * np.log(vv[pos]))) * g.cell_area

    zz = z.values
    dzx = (zz[:, 1:] - zz[:, :-1]) / g.dx
    zfx = 0.5 * (zz[:, 1:] + zz[:, :-1])
    dzy = (zz[1:, :] - zz[:-1, :]) / g.dy
    zfy = 0.5 * (zz[1:, :] + zz[:-1, :])
    grad_part = (float(np.sum(dzx * dzx / zfx)) + float(np.sum(dzy * dzy / zfy)))
    return ent + 0.5 * grad_part * g.cell_area


def l1_norm(f: Field) -> float:
    return float(np.sum(np.abs(f.values))) * f.grid.cell_area


def linf_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of the run time series (column order in CSV_COLUMNS)."""

    t: float
    mass_u: float
    mass_v: float
    total_w: float
    min_u: float
    min_v: float
    min_w: float
    min_z: float
    max_u: float
    max_v: float
    max_w: float
    max_z: float
    functional_F: float
    negativity_excess: float
    cg_iters_max: int
    cg_residual_max: float
    change_rate: float

    def as_row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


def relative_change_rate(state: State, prev: State | None) -> float:
    """max over fields of |f(t) - f(t_prev)|_L1 / ((t - t_prev) * |f(t)|_L1).

    NaN when no previous state exists. A field that is identically zero
    at both times contributes zero; one that vanishes to exact zero
    while still moving contributes infinity (the relative scale is gone,
    so it can't certify a steady state).
    """
    if prev is None:
        return float("nan")
    dt = state.t - prev.t
    if dt <= 0:
        raise ValidationError("records must have strictly increasing times")
    rate = 0.0
    for name, fld in state.fields().items():
        diff = float(np.sum(np.abs(fld.values - prev.fields()[name].values)))
        if diff == 0.0:
            continue
        denom = float(np.sum(np.abs(fld.values)))
        rate = max(rate, diff / (dt * denom) if denom > 0 else float("inf"))
    return rate


def make_record(state: State, prev: State | None = None,
                cg_iters_max: int = 0, cg_residual_max: float = 0.0) -> DiagnosticsRecord:
    u, v, w, z = state.u.values, state.v.values, state.w.values, state.z.values
    return DiagnosticsRecord(
        t=state.t,
        mass_u=mass(state.u),
        mass_v=mass(state.v),
        total_w=mass(state.w),
        min_u=float(np.min(u)), min_v=float(np.min(v)),
        min_w=float(np.min(w)), min_z=float(np.min(z)),
        max_u=float(np.max(u)), max_v=float(np.max(v)),
        max_w=float(np.max(w)), max_z=float(np.max(z)),
        functional_F=functional_F(state.v, state.z),
        negativity_excess=negativity_excess(state),
        cg_iters_max=cg_iters_max,
        cg_residual_max=cg_residual_max,
        change_rate=relative_change_rate(state, prev),
    )


def steady_state_reached(history, window: int = 100, tol: float = 1e-6) -> bool:
    """True iff the change rate stayed below tol over the last `window` records.

    history: sequence of DiagnosticsRecord (or of raw change rates).
    Requires at least `window` records; NaN rates (first record) never
    count as steady.
    """
    if window < 1:
        raise ValidationError("window must be at least 1")
    rates = [r.change_rate if isinstance(r, DiagnosticsRecord) else float(r) for r in history]
    if len(rates) < window:
        return False
    tail = rates[-window:]
    return all(math.isfinite(r) and r < tol for r in tail)


def compare_states(a: State, b: State) -> State:
    """Pointwise difference state a - b (same grid and time required)."""
    if a.grid != b.grid:
        raise ValidationError("compared snapshots live on different grids")
    if not math.isclose(a.t, b.t, rel_tol=0.0, abs_tol=1e-12):
        raise ValidationError(f"compared snapshots have different times ({a.t} vs {b.t})")
    g = a.grid
    return State(
        Field(a.u.values - b.u.values, g),
        Field(a.v.values - b.v.values, g),
        Field(a.w.values - b.w.values, g),
        Field(a.z.values - b.z.values, g),
        t=a.t,
    )


def compare_runs(series_a, series_b) -> tuple[list[State], list[dict]]:
    """Difference series between two snapshot lists plus norm time series.

    Returns (difference states, norm rows); each row holds the L1 and
    Linf norms of every field difference at one time. Mismatched lengths,
    grids, or times are rejected.
    """
    if len(series_a) != len(series_b):
        raise ValidationError(
            f"snapshot series differ in length ({len(series_a)} vs {len(series_b)})"
        )
    diffs = []
    rows = []
    for a, b in zip(series_a, series_b):
        d = compare_states(a, b)
        diffs.append(d)
        row = {"t": d.t}
        for name, fld in d.fields().items():
            row[f"l1_{name}"] = l1_norm(fld)
            row[f"linf_{name}"] = linf_norm(fld)
        rows.append(row)
    return diffs, rows
