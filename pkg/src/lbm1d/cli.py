"""Command line entry point: ``lbm1d {run,exact,compare,coeffs}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from . import cases
from .equilibrium import SingularMatrixError, VelocitySet, Zeta2TooSmallError, format_coefficients
from .gas import DegenerateStateError, GasModel, MacroState
from .riemann import VacuumError
from .solver import ConfigError, run

log = logging.getLogger("lbm1d")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 1, 2, 3

CONFIG_KEYS = ("case", "gamma", "tau", "theta", "zeta2", "cells", "dt_factor",
               "t_end", "left", "right", "strict_zeta2", "snapshot_times", "out")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text, n=None, what="value"):
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"cannot parse {what} {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def _add_case_flags(p):
    p.add_argument("--config", help="JSON file with case fields (flags override it)")
    p.add_argument("--case", choices=cases.PRESET_NAMES + ("custom",))
    p.add_argument("--gamma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--zeta2", type=float)
    p.add_argument("--cells", type=int)
    p.add_argument("--dt-factor", type=float, help="dt = tau * factor (default 0.25)")
    p.add_argument("--t-end", type=float)
    p.add_argument("--left", help='left state "rho,u,e"')
    p.add_argument("--right", help='right state "rho,u,e"')
    p.add_argument("--snapshot-times", help="comma-separated output times")
    p.add_argument("--strict-zeta2", action="store_true", default=None,
                   help="abort if the local rest energy exceeds zeta2")


def build_parser():
    parser = _Parser(prog="lbm1d", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run the lattice Boltzmann solver")
    _add_case_flags(p)
    p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("exact", help="sample the exact Riemann solution")
    _add_case_flags(p)
    p.add_argument("--out", help="output CSV path")

    p = sub.add_parser("compare", help="error norms between two profiles")
    _add_case_flags(p)
    p.add_argument("--a", required=True, help="CSV file")
    p.add_argument("--b", required=True, help="CSV file or 'exact'")
    p.add_argument("--norms", default="l1,l2,linf")
    p.add_argument("--time", type=float, help="time for --b exact (default t_end)")
    p.add_argument("--assert-l1", type=float, help="fail (exit 3) if density L1 exceeds this")
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("coeffs", help="print the exact equilibrium polynomials")
    p.add_argument("--velocities", default="1,-1,2,-2")
    return parser


def _case_from_args(args):
    fields = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        fields.update(data)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = val

    name = fields.get("case", "sod")
    if name == "custom":
        if "left" not in fields or "right" not in fields:
            raise UsageError("custom case needs --left and --right")
        spec = cases.preset("sod")
        spec = cases.CaseSpec("custom", spec.config, output="custom.csv")
    else:
        spec = cases.preset(name)

    over = {}
    if "gamma" in fields:
        over["gas"] = GasModel(gamma=float(fields["gamma"]))
    for side in ("left", "right"):
        if side in fields:
            over[side] = MacroState(*_floats(fields[side], 3, f"--{side}"))
    for key in ("tau", "theta", "zeta2", "dt_factor", "t_end"):
        if key in fields:
            over[key] = float(fields[key])
    if "cells" in fields:
        over["cells"] = int(fields["cells"])
    if fields.get("strict_zeta2"):
        over["strict_zeta2"] = True
    spec = cases.with_overrides(spec, **over)

    times = tuple(_floats(fields["snapshot_times"], what="--snapshot-times")) \
        if "snapshot_times" in fields else ()
    out = fields.get("out", spec.output)
    return cases.CaseSpec(spec.name, spec.config, times, out)


def _output_times(spec):
    t_end = spec.config.t_end
    return sorted({t for t in spec.output_times if 0 <= t <= t_end} | {t_end})


def cmd_run(args):
    spec = _case_from_args(args)
    cfg = spec.config
    log.info("case %s: %d cells, dt=%g, CFL=%.4g", spec.name, cfg.cells, cfg.dt, cfg.cfl)
    snaps = run(cfg, spec.output_times)
    many = len(snaps) > 1
    for s in snaps:
        path = cases.snapshot_path(spec.output, s.t, many)
        cases.write_csv(path, cases.Profile.from_snapshot(s))
        print(f"t={s.t:.6g} step={s.step} -> {path}")
    return EXIT_OK


def cmd_exact(args):
    spec = _case_from_args(args)
    times = _output_times(spec)
    for t in times:
        path = cases.snapshot_path(spec.output, t, len(times) > 1)
        cases.write_csv(path, cases.exact_profile(spec.config, t))
        print(f"t={t:.6g} exact -> {path}")
    return EXIT_OK


def cmd_compare(args):
    a = cases.read_csv(args.a)
    if args.b == "exact":
        spec = _case_from_args(args)
        b = cases.exact_profile(spec.config, args.time)
    else:
        b = cases.read_csv(args.b)
    norms = [n.strip() for n in args.norms.split(",") if n.strip()]
    bad = [n for n in norms if n not in cases.NORMS]
    if bad:
        raise UsageError(f"unknown norms {bad}; choose from {','.join(cases.NORMS)}")
    report = cases.compare(a, b, norms=norms)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        print(report.format())
    if args.assert_l1 is not None:
        l1 = cases.compare(a, b, norms=("l1",), variables=("rho",))["rho"]["l1"]
        if l1 > args.assert_l1:
            print(f"density L1 {l1:.6e} exceeds {args.assert_l1:.6e}", file=sys.stderr)
            return EXIT_THRESHOLD
    return EXIT_OK


def cmd_coeffs(args):
    try:
        vel = tuple(Fraction(v.strip()) for v in args.velocities.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"cannot parse velocities {args.velocities!r}") from None
    print(format_coefficients(VelocitySet(vel)))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "exact": cmd_exact, "compare": cmd_compare, "coeffs": cmd_coeffs}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DegenerateStateError, Zeta2TooSmallError, VacuumError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ConfigError, SingularMatrixError, cases.UnknownPresetError,
            cases.GridMismatchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
