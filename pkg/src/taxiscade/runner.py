"""Run orchestration: stepping loop, recording schedule, persistence.

A run records diagnostics at every multiple of snapshot_every up to
t_end (so the CSV has floor(t_end/snapshot_every)+1 rows) and writes a
TXCS snapshot at those times; when t_end is not itself a multiple, one
extra off-schedule final snapshot is written so the end state is never
lost. Steps are clipped so record times are hit exactly, and the clock
is snapped to the exact schedule value after each clipped step to keep
snapshot timestamps reproducible across platforms.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .coefficients import validate_assumptions
from .config import RunConfig, render_resolved
from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    compare_runs,
    make_record,
    steady_state_reached,
)
from .errors import ValidationError
from .grid import State, build_initial_state
from .integrator import StepBuffers, cfl_bound, imex_step
from .models import ModelParams, max_taxis_speed, parse_variant

_T_EPS = 1e-12


@dataclass
class RunResult:
    config: RunConfig
    records: list[DiagnosticsRecord]
    final_state: State
    states: list[State] = field(default_factory=list)
    out_dir: Path | None = None
    first_steady_time: float | None = None
    wall_time: float = 0.0


def _write_csv(path: Path, records: list[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in rec.as_row()])


def first_steady_time(records: list[DiagnosticsRecord], window: int, tol: float) -> float | None:
    """Earliest record time at which the trailing window is steady."""
    for i in range(window, len(records) + 1):
        if steady_state_reached(records[:i], window, tol):
            return records[i - 1].t
    return None


def run_simulation(cfg: RunConfig, write_outputs: bool = True,
                   keep_states: bool = False) -> RunResult:
    """Execute one run of the configured variant from t=0 to t_end."""
    from .snapshots import snapshot_name, write_snapshot

    started = time.perf_counter()
    cfg.params.validate()
    cfg.solver.validate()
    # certify the structural hypotheses before any stepping
    bounds, _rows = validate_assumptions(
        cfg.params.binding, cfg.params.taxis, cfg.params.reaction,
        v_max=cfg.check.v_max, w_max=cfg.check.w_max, u_max=cfg.check.u_max,
        declared=cfg.check.declared_bounds(),
    )

    state = build_initial_state(cfg.grid, cfg.ics)
    bufs = StepBuffers(cfg.grid)
    out_dir: Path | None = None
    if write_outputs:
        out_dir = Path(cfg.output.directory)
        out_dir.mkdir(parents=True, exist_ok=True)

    every = cfg.output.snapshot_every
    t_end = cfg.solver.t_end
    records: list[DiagnosticsRecord] = []
    states: list[State] = []
    prev_recorded: State | None = None
    snap_index = 0

    def record(st: State, iters_max: int, res_max: float, on_schedule: bool) -> None:
        nonlocal prev_recorded, snap_index
        st.check_finite()
        if on_schedule:
            records.append(make_record(st, prev_recorded, iters_max, res_max))
            prev_recorded = st.copy()
        if keep_states:
            states.append(st.copy())
        if out_dir is not None:
            write_snapshot(st, out_dir / snapshot_name(snap_index))
            snap_index += 1

    record(state, 0, 0.0, on_schedule=True)

    k = 1
    iters_acc = 0
    res_acc = 0.0
    while state.t < t_end - _T_EPS:
        on_schedule = k * every <= t_end + _T_EPS
        target = min(k * every, t_end) if on_schedule else t_end
        dt = min(cfg.solver.dt, target - state.t)
        state, report = imex_step(state, cfg.params, cfg.solver, bufs, dt=dt, clip=True)
        iters_acc = max(iters_acc, report.max_iterations)
        res_acc = max(res_acc, report.max_residual)
        if state.t >= target - _T_EPS:
            state.t = target  # snap the clock to the exact schedule value
            record(state, iters_acc, res_acc, on_schedule=on_schedule)
            iters_acc = 0
            res_acc = 0.0
            if on_schedule:
                k += 1

    steady_t = first_steady_time(records, cfg.output.steady_window, cfg.output.steady_tol)
    wall = time.perf_counter() - started
    if out_dir is not None:
        _write_csv(out_dir / "diagnostics.csv", records)
        extra = {
            "code_version": __version__,
            "created_unix": f"{time.time():.0f}",
            "records": len(records),
            "snapshots": snap_index,
            "final_t": repr(state.t),
            "wall_time_s": f"{wall:.3f}",
            "certified_c_chi": repr(bounds.C_chi),
            "certified_c_xi": repr(bounds.C_xi),
            "certified_c_psi": repr(bounds.C_psi),
            "certified_c_phi": repr(bounds.C_phi),
            "first_steady_time": "none" if steady_t is None else repr(steady_t),
        }
        (out_dir / "metadata.ini").write_text(render_resolved(cfg, extra))

    return RunResult(config=cfg, records=records, final_state=state, states=states,
                     out_dir=out_dir, first_steady_time=steady_t, wall_time=wall)


def run_compare(cfg: RunConfig, write_outputs: bool = True) -> dict:
    """Run two variants from one grid/IC/solver and difference them.

    Returns a dict with the two RunResults, the difference states, and
    the norm time series. Identical variants are allowed but flagged
    with a warning entry since every difference is then zero.
    """
    from dataclasses import replace

    from .snapshots import snapshot_name, write_snapshot

    va = parse_variant(cfg.compare.variant_a)
    vb = parse_variant(cfg.compare.variant_b)
    warning = None
    if va is vb:
        warning = f"compare requested identical variants ({va.value}); differences are zero"

    base_out = Path(cfg.output.directory)

    def sub_config(variant, label: str) -> RunConfig:
        params = replace(cfg.params, variant=variant)
        output = replace(cfg.output, directory=str(base_out / label))
        return RunConfig(grid=cfg.grid, ics=cfg.ics, params=params, solver=cfg.solver,
                         output=output, check=cfg.check, compare=cfg.compare)

    res_a = run_simulation(sub_config(va, va.value), write_outputs, keep_states=True)
    res_b = run_simulation(sub_config(vb, vb.value), write_outputs, keep_states=True)
    if len(res_a.states) != len(res_b.states):
        raise ValidationError("comparison runs produced different snapshot counts")
    diffs, norm_rows = compare_runs(res_a.states, res_b.states)

    if write_outputs:
        diff_dir = base_out / "diff"
        diff_dir.mkdir(parents=True, exist_ok=True)
        for i, d in enumerate(diffs):
            write_snapshot(d, diff_dir / snapshot_name(i))
        if norm_rows:
            with open(diff_dir / "norms.csv", "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(norm_rows[0].keys()))
                writer.writeheader()
                for row in norm_rows:
                    writer.writerow({k: repr(v) if isinstance(v, float) else v
                                     for k, v in row.items()})
        if warning:
            (diff_dir / "WARNING.txt").write_text(warning + "\n")

    return {
        "a": res_a,
        "b": res_b,
        "diffs": diffs,
        "norms": norm_rows,
        "warning": warning,
    }


def initial_cfl_report(cfg: RunConfig) -> dict:
    """Admissible step at t=0 (logged by the CLI before a run)."""
    state = build_initial_state(cfg.grid, cfg.ics)
    speed = max_taxis_speed(state, cfg.params)
    bound = cfl_bound(speed, cfg.grid, cfg.solver)
    return {
        "max_face_speed": speed,
        "cfl_bound": bound,
        "dt": cfg.solver.dt,
        "dt_effective": min(cfg.solver.dt, bound, 1.0 / cfg.params.reaction.beta),
    }
