"""Command surface: ``taxiscade run|compare|check``.

Exit statuses: 0 success, 2 validation failure, 3 numerical failure
(advective step bound or linear solver), 4 I/O or snapshot-format
failure. Validation failures list every violated constraint at once,
tagged with the structural hypothesis they break where applicable.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .coefficients import make_rate_law, validate_assumptions
from .config import Overrides, apply_overrides, load_config, render_resolved
from .errors import (
    CFLViolation,
    ConvergenceError,
    SnapshotFormatError,
    ValidationError,
)
from .runner import initial_cfl_report, run_compare, run_simulation

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _add_override_flags(p: argparse.ArgumentParser, with_variant: bool = True) -> None:
    if with_variant:
        p.add_argument("--variant", help="model variant (cascade, cascade-growth, direct-taxis)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tend", type=float, help="final time")
    p.add_argument("--dt", type=float, help="nominal time step")
    p.add_argument("--nx", type=int, help="cells in x (domain length is kept)")
    p.add_argument("--ny", type=int, help="cells in y (domain length is kept)")
    p.add_argument("--snapshot-every", type=float, dest="snapshot_every",
                   help="snapshot/diagnostics interval")
    p.add_argument("--seed", type=int,
                   help="reserved; the default pipeline has no randomness")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxiscade",
        description="Finite-difference simulator for a cell-invasion taxis cascade.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one variant and write outputs")
    p_run.add_argument("--config", help="INI config path (defaults used when omitted)")
    _add_override_flags(p_run)
    p_run.add_argument("--print-config", action="store_true",
                       help="echo the fully resolved config and exit")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run two variants from one config and difference them")
    p_cmp.add_argument("--config", help="INI config path (defaults used when omitted)")
    _add_override_flags(p_cmp, with_variant=False)
    p_cmp.set_defaults(func=cmd_compare)

    p_chk = sub.add_parser("check", help="certify the structural hypotheses and print the bounds table")
    p_chk.add_argument("--config", help="INI config path (defaults used when omitted)")
    p_chk.set_defaults(func=cmd_check)

    return parser


def _overrides(args: argparse.Namespace) -> Overrides:
    return Overrides(
        variant=getattr(args, "variant", None),
        out=args.out,
        tend=args.tend,
        dt=args.dt,
        nx=args.nx,
        ny=args.ny,
        snapshot_every=args.snapshot_every,
        seed=args.seed,
    )


def _load(args: argparse.Namespace):
    cfg = load_config(args.config)
    return apply_overrides(cfg, _overrides(args))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.print_config:
        sys.stdout.write(render_resolved(cfg))
        return EXIT_OK
    rep = initial_cfl_report(cfg)
    print(f"variant {cfg.params.variant.value}: dt {rep['dt']:g}, "
          f"advective bound {rep['cfl_bound']:g}, effective dt {rep['dt_effective']:g}")
    result = run_simulation(cfg)
    first, last = result.records[0], result.records[-1]
    drift = abs(last.mass_u - first.mass_u) / abs(first.mass_u)
    print(f"done: t={last.t:g}, {len(result.records)} records, "
          f"relative mass drift {drift:.3e}, wall {result.wall_time:.2f}s, "
          f"outputs in {result.out_dir}")
    if result.first_steady_time is not None:
        print(f"steady state reached by t={result.first_steady_time:g}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = run_compare(cfg)
    if out["warning"]:
        print(f"warning: {out['warning']}", file=sys.stderr)
    last = out["norms"][-1]
    print(f"compared {cfg.compare.variant_a} vs {cfg.compare.variant_b}: "
          f"{len(out['norms'])} snapshots, final Linf diffs "
          f"u={last['linf_u']:.3e} v={last['linf_v']:.3e} "
          f"w={last['linf_w']:.3e} z={last['linf_z']:.3e}")
    print(f"outputs in {out['a'].out_dir.parent}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    chk = cfg.check
    psi_law = None
    if chk.psi_family:
        psi_law = make_rate_law(chk.psi_family, chk.psi_scale, chk.psi_p, chk.psi_q)
    bounds, rows = validate_assumptions(
        cfg.params.binding, cfg.params.taxis, cfg.params.reaction,
        v_max=chk.v_max, w_max=chk.w_max, u_max=chk.u_max,
        psi_law=psi_law, declared=chk.declared_bounds(),
    )
    print(f"{'hypothesis':<12}{'quantity':<28}{'supremum':>14}  {'at':<22}{'holds'}")
    for r in rows:
        arg = "(" + ", ".join(f"{x:.4g}" for x in r.argmax) + ")"
        line = f"{r.hypothesis:<12}{r.quantity:<28}{r.supremum:>14.6e}  {arg:<22}{'yes' if r.holds else 'NO'}"
        if r.note:
            line += f"  [{r.note}]"
        print(line)
    print(f"certified: C_chi={bounds.C_chi:.6g} C_xi={bounds.C_xi:.6g} "
          f"C_psi={bounds.C_psi:.6g} C_phi={bounds.C_phi:.6g}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CFLViolation, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SnapshotFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
