"""Run configuration: flat INI sections, full validation, resolved echo.

Sections and keys (all optional; defaults shown by `taxiscade run
--print-config`):

    [grid]     nx, ny, length_x, length_y
    [initial]  u, v, w, z   as  kind:key=value,...   e.g.
               u = gaussian:amplitude=1,center_x=75,center_y=75,width=10
               v = uniform:level=0.5
               w = file:path=tissue.txt
    [model]    variant, k1_plus, k2_plus, k_minus, v_M, w_M, kappa1,
               kappa2, D_z, mu_z, beta, mu_u, mu_v, K_u, K_v, K_w, K_z,
               speed_c, speed_e, lambda0, lambda1, eta0
    [solver]   dt, t_end, cg_tol, cg_max_iter, cfl_safety, precondition,
               semi_implicit_uptake
    [output]   directory, snapshot_every, series_name, steady_window,
               steady_tol
    [check]    v_max, w_max, u_max, psi_family, psi_scale, psi_p, psi_q,
               declared_C_chi, declared_C_xi, declared_C_psi, declared_C_phi
    [compare]  variant_a, variant_b

Every defaulted value is echoed into the run metadata so the resolved
file alone reproduces the run.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

from .coefficients import (
    AssumptionBounds,
    BindingParams,
    GrowthParams,
    KineticParams,
    ReactionParams,
    TaxisParams,
)
from .errors import ValidationError
from .grid import MIN_CELLS, FieldIC, GridSpec
from .integrator import SolverConfig
from .models import ModelParams, ModelVariant, parse_variant


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshot_every: float = 1.0
    series_name: str = "run"
    steady_window: int = 100
    steady_tol: float = 1e-6

    def validate(self) -> list[str]:
        out = []
        if self.snapshot_every <= 0:
            out.append("snapshot_every must be positive")
        if self.steady_window < 1:
            out.append("steady_window must be at least 1")
        if self.steady_tol <= 0:
            out.append("steady_tol must be positive")
        if not self.series_name:
            out.append("series_name must not be empty")
        return out


@dataclass(frozen=True)
class CheckConfig:
    """Sampling ranges and optional overrides for assumption certification."""

    v_max: float = 10.0
    w_max: float = 10.0
    u_max: float = 10.0
    psi_family: str = ""
    psi_scale: float = 1.0
    psi_p: float = 1.0
    psi_q: float = 1.0
    declared_C_chi: float = 0.0
    declared_C_xi: float = 0.0
    declared_C_psi: float = 0.0
    declared_C_phi: float = 0.0

    def validate(self) -> list[str]:
        out = []
        for name in ("v_max", "w_max", "u_max"):
            if getattr(self, name) <= 0:
                out.append(f"check range {name} must be positive")
        return out

    def declared_bounds(self) -> AssumptionBounds | None:
        vals = (self.declared_C_chi, self.declared_C_xi,
                self.declared_C_psi, self.declared_C_phi)
        if all(v == 0.0 for v in vals):
            return None
        return AssumptionBounds(*(v if v > 0 else float("inf") for v in vals))


@dataclass(frozen=True)
class CompareConfig:
    variant_a: str = "cascade"
    variant_b: str = "direct-taxis"


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    ics: dict
    params: ModelParams
    solver: SolverConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    check: CheckConfig = field(default_factory=CheckConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)


def default_config() -> RunConfig:
    grid = GridSpec(nx=100, ny=100, dx=1.0, dy=1.0)
    ics = {
        "u": FieldIC("gaussian", {"amplitude": 1.0, "center_x": 75.0, "center_y": 75.0, "width": 10.0}),
        "v": FieldIC("uniform", {"level": 0.5}),
        "w": FieldIC("uniform", {"level": 1.0}),
        "z": FieldIC("gaussian", {"amplitude": 1.0, "center_x": 75.0, "center_y": 75.0, "width": 10.0}),
    }
    return RunConfig(grid=grid, ics=ics, params=ModelParams(), solver=SolverConfig())


_MODEL_FLOAT_KEYS = {
    "k1_plus": ("binding", "k1_plus"), "k2_plus": ("binding", "k2_plus"),
    "k_minus": ("binding", "k_minus"), "v_m": ("binding", "v_M"), "w_m": ("binding", "w_M"),
    "kappa1": ("taxis", "kappa1"), "kappa2": ("taxis", "kappa2"),
    "d_z": ("reaction", "D_z"), "mu_z": ("reaction", "mu_z"), "beta": ("reaction", "beta"),
    "mu_u": ("growth", "mu_u"), "mu_v": ("growth", "mu_v"),
    "k_u": ("growth", "K_u"), "k_v": ("growth", "K_v"),
    "k_w": ("growth", "K_w"), "k_z": ("growth", "K_z"),
    "speed_c": ("kinetic", "speed_c"), "speed_e": ("kinetic", "speed_e"),
    "lambda0": ("kinetic", "lambda0"), "lambda1": ("kinetic", "lambda1"),
    "eta0": ("kinetic", "eta0"),
}


def parse_ic_string(text: str) -> FieldIC:
    """Parse 'kind:key=value,...' into an initial-condition recipe."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    params: dict = {}
    if rest.strip():
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValidationError(f"malformed initial-condition entry '{item.strip()}'")
            key = key.strip().lower()
            value = value.strip()
            params[key] = value if key == "path" else _parse_float(value, f"initial-condition {key}")
    allowed = {
        "uniform": {"level"},
        "gaussian": {"amplitude", "center_x", "center_y", "width"},
        "file": {"path"},
    }
    if kind not in allowed:
        raise ValidationError(f"unknown initial-condition kind '{kind}'")
    extra = set(params) - allowed[kind]
    if extra:
        raise ValidationError(f"initial-condition kind '{kind}' does not accept {sorted(extra)}")
    required = {"uniform": {"level"}, "gaussian": {"amplitude"}, "file": {"path"}}[kind]
    missing = required - set(params)
    if missing:
        raise ValidationError(f"initial-condition kind '{kind}' requires {sorted(missing)}")
    return FieldIC(kind, params)


def render_ic_string(ic: FieldIC) -> str:
    if not ic.params:
        return ic.kind
    parts = ",".join(f"{k}={v}" for k, v in sorted(ic.params.items()))
    return f"{ic.kind}:{parts}"


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"{what}: '{text}' is not a number") from None


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"{what}: '{text}' is not an integer") from None


def _parse_bool(text: str, what: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"{what}: '{text}' is not a boolean")


_KNOWN_SECTIONS = {"grid", "initial", "model", "solver", "output", "check", "compare"}


def load_config(path: str | None = None, text: str | None = None) -> RunConfig:
    """Parse and fully validate a run configuration.

    Either a path or raw text; omitted keys take the documented defaults.
    All violations are collected and reported together.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    if text is not None:
        cp.read_string(text)
    elif path is not None:
        read = cp.read(path)
        if not read:
            raise ValidationError(f"config file '{path}' not found or unreadable")
    problems: list[str] = []

    unknown = set(cp.sections()) - _KNOWN_SECTIONS
    if unknown:
        problems.append(f"unknown config sections: {sorted(unknown)}")

    def section(name: str) -> dict:
        return dict(cp[name]) if cp.has_section(name) else {}

    def take(sec: dict, key: str, conv, default, what: str):
        if key not in sec:
            return default
        raw = sec.pop(key)
        try:
            return conv(raw, what)
        except ValidationError as exc:
            problems.extend(exc.violations)
            return default

    g = section("grid")
    nx = take(g, "nx", _parse_int, 100, "grid nx")
    ny = take(g, "ny", _parse_int, 100, "grid ny")
    lx = take(g, "length_x", _parse_float, 100.0, "grid length_x")
    ly = take(g, "length_y", _parse_float, 100.0, "grid length_y")
    if g:
        problems.append(f"unknown [grid] keys: {sorted(g)}")
    if nx < MIN_CELLS or ny < MIN_CELLS:
        problems.append(f"grid must be at least {MIN_CELLS}x{MIN_CELLS} cells")
    if lx <= 0 or ly <= 0:
        problems.append("grid lengths must be positive")
    grid = GridSpec(nx=max(nx, MIN_CELLS), ny=max(ny, MIN_CELLS),
                    dx=(lx if lx > 0 else 100.0) / max(nx, MIN_CELLS),
                    dy=(ly if ly > 0 else 100.0) / max(ny, MIN_CELLS))

    ics = dict(default_config().ics)
    ini = section("initial")
    for name in ("u", "v", "w", "z"):
        if name in ini:
            try:
                ics[name] = parse_ic_string(ini.pop(name))
            except ValidationError as exc:
                problems.extend(f"initial {name}: {m}" for m in exc.violations)
    if ini:
        problems.append(f"unknown [initial] keys: {sorted(ini)}")

    m = section("model")
    variant = ModelVariant.CASCADE_NO_SOURCE
    if "variant" in m:
        try:
            variant = parse_variant(m.pop("variant"))
        except ValidationError as exc:
            problems.extend(exc.violations)
    groups = {
        "binding": dict(), "taxis": dict(), "reaction": dict(),
        "growth": dict(), "kinetic": dict(),
    }
    for key in list(m):
        if key in _MODEL_FLOAT_KEYS:
            group, attr = _MODEL_FLOAT_KEYS[key]
            groups[group][attr] = take(m, key, _parse_float, None, f"model {key}")
    if m:
        problems.append(f"unknown [model] keys: {sorted(m)}")
    for group in groups.values():
        for k in [k for k, val in group.items() if val is None]:
            del group[k]
    params = ModelParams(
        binding=BindingParams(**groups["binding"]),
        taxis=TaxisParams(**groups["taxis"]),
        reaction=ReactionParams(**groups["reaction"]),
        growth=GrowthParams(**groups["growth"]),
        kinetic=KineticParams(**groups["kinetic"]),
        variant=variant,
    )

    s = section("solver")
    solver = SolverConfig(
        dt=take(s, "dt", _parse_float, 0.01, "solver dt"),
        t_end=take(s, "t_end", _parse_float, 50.0, "solver t_end"),
        cg_tol=take(s, "cg_tol", _parse_float, 1e-12, "solver cg_tol"),
        cg_max_iter=take(s, "cg_max_iter", _parse_int, 500, "solver cg_max_iter"),
        cfl_safety=take(s, "cfl_safety", _parse_float, 0.5, "solver cfl_safety"),
        precondition=take(s, "precondition", lambda t, _w: t.strip().lower(), "none", "solver precondition"),
        semi_implicit_uptake=take(s, "semi_implicit_uptake", _parse_bool, False,
                                  "solver semi_implicit_uptake"),
    )
    if s:
        problems.append(f"unknown [solver] keys: {sorted(s)}")

    o = section("output")
    output = OutputConfig(
        directory=take(o, "directory", lambda t, _w: t.strip(), "out", "output directory"),
        snapshot_every=take(o, "snapshot_every", _parse_float, 1.0, "output snapshot_every"),
        series_name=take(o, "series_name", lambda t, _w: t.strip(), "run", "output series_name"),
        steady_window=take(o, "steady_window", _parse_int, 100, "output steady_window"),
        steady_tol=take(o, "steady_tol", _parse_float, 1e-6, "output steady_tol"),
    )
    if o:
        problems.append(f"unknown [output] keys: {sorted(o)}")

    c = section("check")
    check = CheckConfig(
        v_max=take(c, "v_max", _parse_float, 10.0, "check v_max"),
        w_max=take(c, "w_max", _parse_float, 10.0, "check w_max"),
        u_max=take(c, "u_max", _parse_float, 10.0, "check u_max"),
        psi_family=take(c, "psi_family", lambda t, _w: t.strip().lower(), "", "check psi_family"),
        psi_scale=take(c, "psi_scale", _parse_float, 1.0, "check psi_scale"),
        psi_p=take(c, "psi_p", _parse_float, 1.0, "check psi_p"),
        psi_q=take(c, "psi_q", _parse_float, 1.0, "check psi_q"),
        declared_C_chi=take(c, "declared_c_chi", _parse_float, 0.0, "check declared_C_chi"),
        declared_C_xi=take(c, "declared_c_xi", _parse_float, 0.0, "check declared_C_xi"),
        declared_C_psi=take(c, "declared_c_psi", _parse_float, 0.0, "check declared_C_psi"),
        declared_C_phi=take(c, "declared_c_phi", _parse_float, 0.0, "check declared_C_phi"),
    )
    if c:
        problems.append(f"unknown [check] keys: {sorted(c)}")

    cmp_sec = section("compare")
    compare = CompareConfig(
        variant_a=take(cmp_sec, "variant_a", lambda t, _w: t.strip().lower(), "cascade", "compare variant_a"),
        variant_b=take(cmp_sec, "variant_b", lambda t, _w: t.strip().lower(), "direct-taxis", "compare variant_b"),
    )
    if cmp_sec:
        problems.append(f"unknown [compare] keys: {sorted(cmp_sec)}")

    cfg = RunConfig(grid=grid, ics=ics, params=params, solver=solver,
                    output=output, check=check, compare=compare)
    problems.extend(collect_violations(cfg))
    if problems:
        raise ValidationError(problems)
    return cfg


def collect_violations(cfg: RunConfig) -> list[str]:
    """Static validation of a RunConfig (no field construction)."""
    problems = []
    problems.extend(cfg.params.binding.validate())
    problems.extend(cfg.params.taxis.validate())
    problems.extend(cfg.params.reaction.validate())
    problems.extend(cfg.params.growth.validate())
    problems.extend(cfg.params.kinetic.validate())
    try:
        cfg.solver.validate()
    except ValidationError as exc:
        problems.extend(exc.violations)
    problems.extend(cfg.output.validate())
    problems.extend(cfg.check.validate())
    for vname in (cfg.compare.variant_a, cfg.compare.variant_b):
        try:
            parse_variant(vname)
        except ValidationError as exc:
            problems.extend(exc.violations)
    return problems


@dataclass
class Overrides:
    """CLI-level overrides applied after the file is parsed."""

    variant: str | None = None
    out: str | None = None
    tend: float | None = None
    dt: float | None = None
    nx: int | None = None
    ny: int | None = None
    snapshot_every: float | None = None
    seed: int | None = None  # reserved: the pipeline has no randomness


def apply_overrides(cfg: RunConfig, ov: Overrides) -> RunConfig:
    problems = []
    grid = cfg.grid
    if ov.nx is not None or ov.ny is not None:
        nx = ov.nx if ov.nx is not None else grid.nx
        ny = ov.ny if ov.ny is not None else grid.ny
        if nx < MIN_CELLS or ny < MIN_CELLS:
            problems.append(f"grid must be at least {MIN_CELLS}x{MIN_CELLS} cells")
        else:
            grid = GridSpec(nx=nx, ny=ny, dx=grid.length_x / nx, dy=grid.length_y / ny)
    params = cfg.params
    if ov.variant is not None:
        try:
            params = replace(params, variant=parse_variant(ov.variant))
        except ValidationError as exc:
            problems.extend(exc.violations)
    solver = cfg.solver
    solver_updates = {}
    if ov.tend is not None:
        solver_updates["t_end"] = ov.tend
    if ov.dt is not None:
        solver_updates["dt"] = ov.dt
    if solver_updates:
        solver = replace(solver, **solver_updates)
    output = cfg.output
    output_updates = {}
    if ov.out is not None:
        output_updates["directory"] = ov.out
    if ov.snapshot_every is not None:
        output_updates["snapshot_every"] = ov.snapshot_every
    if output_updates:
        output = replace(output, **output_updates)
    out_cfg = RunConfig(grid=grid, ics=cfg.ics, params=params, solver=solver,
                        output=output, check=cfg.check, compare=cfg.compare)
    problems.extend(collect_violations(out_cfg))
    if problems:
        raise ValidationError(problems)
    return out_cfg


def render_resolved(cfg: RunConfig, extra: dict | None = None) -> str:
    """Serialize every resolved value back to INI text (run metadata)."""
    cp = configparser.ConfigParser()
    cp.optionxform = str.lower
    cp["grid"] = {
        "nx": str(cfg.grid.nx), "ny": str(cfg.grid.ny),
        "length_x": repr(cfg.grid.length_x), "length_y": repr(cfg.grid.length_y),
    }
    cp["initial"] = {name: render_ic_string(ic) for name, ic in sorted(cfg.ics.items())}
    p = cfg.params
    cp["model"] = {
        "variant": p.variant.value,
        "k1_plus": repr(p.binding.k1_plus), "k2_plus": repr(p.binding.k2_plus),
        "k_minus": repr(p.binding.k_minus), "v_m": repr(p.binding.v_M), "w_m": repr(p.binding.w_M),
        "kappa1": repr(p.taxis.kappa1), "kappa2": repr(p.taxis.kappa2),
        "d_z": repr(p.reaction.D_z), "mu_z": repr(p.reaction.mu_z), "beta": repr(p.reaction.beta),
        "mu_u": repr(p.growth.mu_u), "mu_v": repr(p.growth.mu_v),
        "k_u": repr(p.growth.K_u), "k_v": repr(p.growth.K_v),
        "k_w": repr(p.growth.K_w), "k_z": repr(p.growth.K_z),
        "speed_c": repr(p.kinetic.speed_c), "speed_e": repr(p.kinetic.speed_e),
        "lambda0": repr(p.kinetic.lambda0), "lambda1": repr(p.kinetic.lambda1),
        "eta0": repr(p.kinetic.eta0),
    }
    s = cfg.solver
    cp["solver"] = {
        "dt": repr(s.dt), "t_end": repr(s.t_end), "cg_tol": repr(s.cg_tol),
        "cg_max_iter": str(s.cg_max_iter), "cfl_safety": repr(s.cfl_safety),
        "precondition": s.precondition,
        "semi_implicit_uptake": str(s.semi_implicit_uptake).lower(),
    }
    o = cfg.output
    cp["output"] = {
        "directory": o.directory, "snapshot_every": repr(o.snapshot_every),
        "series_name": o.series_name, "steady_window": str(o.steady_window),
        "steady_tol": repr(o.steady_tol),
    }
    c = cfg.check
    cp["check"] = {
        "v_max": repr(c.v_max), "w_max": repr(c.w_max), "u_max": repr(c.u_max),
        "psi_family": c.psi_family, "psi_scale": repr(c.psi_scale),
        "psi_p": repr(c.psi_p), "psi_q": repr(c.psi_q),
        "declared_c_chi": repr(c.declared_C_chi), "declared_c_xi": repr(c.declared_C_xi),
        "declared_c_psi": repr(c.declared_C_psi), "declared_c_phi": repr(c.declared_C_phi),
    }
    cp["compare"] = {"variant_a": cfg.compare.variant_a, "variant_b": cfg.compare.variant_b}
    if extra:
        cp["meta"] = {k: str(v) for k, v in extra.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
