"""Command-line entry point.

Exit codes: 0 when every checked inequality holds and nothing failed,
1 when an inequality is violated, 2 on input or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .bounds import CATALOG, full_report, resolve_bounds
from .errors import ExclusionBoundsError
from .io import read_ensemble, read_state, to_jsonable, write_csv
from .scenarios import PRESETS, SCENARIOS, compare, get_scenario, grid, run_preset, run_sweep
from .tolerances import TAU_VERIFY
from .verification import default_ensembles, preset_ensembles, verify

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


class UsageError(ExclusionBoundsError, ValueError):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _name_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def parse_grid(text: str | None, scenario):
    """Apply ``k=v,...`` overrides to a scenario.

    The swept parameter takes ``start:stop:count`` or a single value; any
    other key becomes a fixed generator argument.
    """
    if not text:
        return scenario
    values = scenario.values
    fixed = dict(scenario.fixed)
    for item in _name_list(text):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"grid entry {item!r} is not of the form key=value")
        try:
            if key == scenario.parameter:
                parts = val.split(":")
                if len(parts) == 3:
                    count = int(parts[2])
                    if count < 1:
                        raise ValueError
                    values = grid(float(parts[0]), float(parts[1]), count)
                elif len(parts) == 1:
                    values = [float(val)]
                else:
                    raise ValueError
            elif key in fixed:
                fixed[key] = float(val)
            else:
                raise UsageError(f"unknown grid key {key!r} for scenario {scenario.name!r}")
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"bad grid value {item!r}; use start:stop:count or a number") from None
    s = scenario.with_values(values)
    s.fixed = fixed
    return s


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit_json(obj, path):
    fh, close = _open_out(path)
    try:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def cmd_bounds(args) -> int:
    state = read_state(args.state)
    ensemble = read_ensemble(args.ensemble)
    names = resolve_bounds(args.bounds, ensemble) if args.bounds else None
    report = full_report(state, ensemble, names)
    doc = report.to_dict()
    doc["violations"] = report.violations(args.tol)
    doc["tolerance"] = args.tol
    _emit_json(doc, args.out)
    return EXIT_OK if report.ok(args.tol) else EXIT_VIOLATION


def cmd_sweep(args) -> int:
    if args.preset:
        if args.scenario or args.grid or args.bounds:
            raise UsageError("--preset cannot be combined with --scenario, --grid or --bounds")
        table = run_preset(args.preset)
    else:
        if not args.scenario:
            raise UsageError("sweep needs --preset or --scenario")
        if not args.bounds:
            raise UsageError("sweep with --scenario needs --bounds")
        scenario = parse_grid(args.grid, get_scenario(args.scenario))
        resolve_bounds(args.bounds)
        diffs = []
        for d in args.diff or []:
            a, sep, b = d.partition(":")
            if not sep:
                raise UsageError(f"--diff expects A:B, got {d!r}")
            diffs.append((a, b))
        table = run_sweep(scenario, args.bounds, diffs)
    fh, close = _open_out(args.out)
    try:
        write_csv(fh, table.columns, table.rows)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _verify_ensembles(spec):
    out = []
    for item in _name_list(spec):
        if os.path.exists(item):
            out.append((item, read_ensemble(item)))
        else:
            try:
                out.extend(preset_ensembles(item))
            except KeyError:
                raise UsageError(f"{item!r} is neither an ensemble file nor a preset "
                                 f"(qubit, qutrit-three, qutrit-theta)") from None
    return out


def cmd_verify(args) -> int:
    if args.ensembles:
        ensembles = _verify_ensembles(args.ensembles)
    else:
        try:
            dims = [int(x) for x in _name_list(args.dims)]
            ensembles = [e for d in dims for e in default_ensembles(d)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    summary = verify(
        trials=args.trials,
        seed=args.seed,
        ensembles=ensembles,
        dominance_samples=args.dominance_samples,
        omega_scale=args.omega_scale,
        tolerance=args.tol,
    )
    if args.out:
        _emit_json(summary.to_dict(), args.out)
    else:
        for line in summary.lines():
            print(line)
        print("PASS" if summary.passed else "FAIL")
    return EXIT_OK if summary.passed else EXIT_VIOLATION


def cmd_compare(args) -> int:
    scenario = parse_grid(args.grid, get_scenario(args.scenario))
    ensemble = next(scenario.ensembles())[1]
    if args.bounds:
        names = resolve_bounds(args.bounds, ensemble)
    else:
        names = [n for n, s in CATALOG.items() if s.kind == "info" and s.applicable(ensemble)]
    result = compare(scenario, names)
    fh, close = _open_out(args.out)
    try:
        write_csv(fh, result["columns"], result["rows"])
        fh.write("\n")
        fh.write("bound,wins\n")
        for n in names:
            fh.write(f"{n},{result['wins'].get(n, 0)}\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exclusion-bounds", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="evaluate bounds for one state and ensemble (JSON)")
    b.add_argument("--state", required=True, help="state file")
    b.add_argument("--ensemble", required=True, help="ensemble file")
    b.add_argument("--bounds", type=_name_list, help="comma-separated bound names (default: all applicable)")
    b.add_argument("--tol", type=_positive_float, default=TAU_VERIFY)
    b.add_argument("--out", help="output path (default: stdout)")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("sweep", help="tabulate bounds over a scenario grid (CSV)")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--scenario", choices=sorted(SCENARIOS))
    s.add_argument("--grid", help="overrides, e.g. a=0.5:1:11,phi=1.5707963")
    s.add_argument("--bounds", type=_name_list)
    s.add_argument("--diff", action="append", help="difference column A:B (repeatable)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="randomised soundness checks")
    v.add_argument("--trials", type=_positive_int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--dims", default="2,3")
    v.add_argument("--ensembles", help="comma-separated ensemble files or presets")
    v.add_argument("--dominance-samples", type=_positive_int, default=500)
    v.add_argument("--omega-scale", type=_positive_float, help="multiply capitals (fault injection)")
    v.add_argument("--tol", type=_positive_float, default=TAU_VERIFY)
    v.add_argument("--out", help="write the summary as JSON")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compare", help="rank information bounds over a grid (CSV)")
    c.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    c.add_argument("--grid")
    c.add_argument("--bounds", type=_name_list)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ExclusionBoundsError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
