"""Command-line front end: ``strongfield {analyze,dirac,trace,quantize,verify}``.

Exit codes
----------
0 success, 1 verification failure, 2 invalid configuration, 3 chart error,
4 rank boundary or degenerate rank, 5 closed-form/quadrature cross-check
failure, 6 divergent ``c_n``.

A ``--config`` JSON document may stand in for any flag: its keys are the
long option names (``tol_rank`` or ``tol-rank``) plus an optional
``command``. Flags given on the command line override the document.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from pathlib import Path


from . import acceptance
from .constraints import coordinate_names, dirac_bracket_table
from .errors import (AmbiguousNullSpaceError, ChartError, CrossCheckError,
                     DegeneratePathError, DivergentIntegralError, NoLambdaFoundError,
                     QuadratureError, RankBoundaryError, RankRefusalError)
from .fockq import (KahlerWeight, build_space, commutator_matrix, lowering_matrix,
                    raising_matrix, su2_report)
from .fockq import _require_convergent
from .foliation import GridSpec, eom_residual, rank_map, region_summary_json, trace_leaf
from .geometry import DEFAULT_RANK_TOL, ChartPoint, make_potential

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CHART, EXIT_RANK, EXIT_CROSSCHECK, EXIT_DIVERGENT = range(7)

GEOMETRY_PRESETS = {
    "disc": ("r0", "power", "scale"),
    "stack": (),
    "monopole": ("N",),
    "darboux": ("p", "n"),
    "custom": ("file",),
}
WEIGHT_PRESETS = {
    "plane": ("hbar",),
    "disc": ("r0", "hbar"),
    "monopole": ("M", "N", "hbar"),
}
PARAM_NAMES = ("r0", "power", "scale", "N", "p", "n", "file", "hbar", "M")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ----------------------------------------------------------------------------
# small parsers

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_number(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_number(node.operand))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """A float, or arithmetic with ``pi`` such as ``pi/2``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        value = _eval_number(ast.parse(text, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot read number {text!r}") from None
    return float(value)


def parse_vector(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) if not isinstance(v, str) else parse_number(v) for v in text]
    return [parse_number(t) for t in str(text).split(",")]


def parse_grid(text, dim, exclude) -> GridSpec:
    axes = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        return GridSpec.parse([a.strip() for a in axes], dim, exclude)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ----------------------------------------------------------------------------
# argument handling

def _add_common(p):
    p.add_argument("--config", help="JSON document mirroring these flags")
    p.add_argument("--preset")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--tol-rank", type=float, help=f"rank tolerance (default {DEFAULT_RANK_TOL:g})")
    p.add_argument("--tol-quad", type=float, help="relative tolerance of the c_n cross-check")
    p.add_argument("--seed", type=int)
    p.add_argument("--r0", type=float)
    p.add_argument("--power", type=int)
    p.add_argument("--scale", type=float)
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--p", type=int, dest="p")
    p.add_argument("--n", type=int, dest="n")
    p.add_argument("--file")
    p.add_argument("--hbar", type=float)
    p.add_argument("--M", type=float, dest="M")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="strongfield", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("analyze", allow_abbrev=False, help="rank map, regions and leaf-space summary")
    _add_common(p)
    p.add_argument("--grid", help="min:max:cells, one per axis separated by commas")
    p.add_argument("--exclude", type=float, help="drop cells within this radius of the origin")
    p.add_argument("--chart")

    p = sub.add_parser("dirac", allow_abbrev=False, help="Dirac bracket table at a point")
    _add_common(p)
    p.add_argument("--point", help="comma-separated coordinates; pi is allowed")
    p.add_argument("--chart")
    p.add_argument("--derivative", choices=("exact", "finite_difference"))
    p.add_argument("--step", type=float, help="finite-difference step")

    p = sub.add_parser("trace", allow_abbrev=False, help="follow a leaf of the null foliation")
    _add_common(p)
    p.add_argument("--start", help="comma-separated coordinates")
    p.add_argument("--chart")
    p.add_argument("--step", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--direction", help="initial direction when the null space is ambiguous")

    p = sub.add_parser("quantize", allow_abbrev=False, help="weighted Fock space and operator matrices")
    _add_common(p)
    p.add_argument("--K", type=int, dest="K", help="truncation index")

    p = sub.add_parser("verify", allow_abbrev=False, help="run the acceptance checks")
    _add_common(p)
    p.add_argument("--only", help="comma-separated groups: " + ", ".join(acceptance.GROUPS))
    p.add_argument("--perturb-cn", type=float, help="test hook: relative c_n perturbation")
    return parser


def _value_options(parser):
    opts = set()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub.choices.values():
        for action in sp._actions:
            if action.nargs != 0:
                opts.update(s for s in action.option_strings if s.startswith("--"))
    return opts


def _join_values(argv, value_opts):
    """``--grid -2:2:50`` -> ``--grid=-2:2:50`` so negative values survive argparse."""
    out = []
    k = 0
    while k < len(argv):
        tok = argv[k]
        if tok in value_opts and k + 1 < len(argv):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def _config_to_argv(doc, sub_parser) -> list:
    known = {}
    for action in sub_parser._actions:
        for s in action.option_strings:
            if s.startswith("--") and s != "--config":
                known[s[2:].replace("-", "_")] = (s, action)
    argv = []
    for key, value in doc.items():
        if key == "command":
            continue
        norm = key.replace("-", "_")
        if norm not in known:
            raise ConfigError(f"unknown config key {key!r}")
        flag, action = known[norm]
        if isinstance(value, bool) or value is None:
            raise ConfigError(f"config key {key!r} needs a number or string")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        argv.append(f"{flag}={value}")
    return argv


def parse_args(argv):
    parser = build_parser()
    argv = _join_values(list(argv), _value_options(parser) | {"--config"})
    config_path = None
    for tok in argv:
        if tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    doc = {}
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    commands = set(subparsers.choices)
    cmd_in_argv = next((t for t in argv if t in commands), None)
    command = cmd_in_argv or doc.get("command")
    if command is None and any(t in ("-h", "--help") for t in argv):
        parser.parse_args(["--help"])
    if command is None:
        raise ConfigError("no command given (analyze, dirac, trace, quantize, verify)")
    if command not in commands:
        raise ConfigError(f"unknown command {command!r}")
    if cmd_in_argv and doc.get("command") not in (None, command):
        raise ConfigError(f"config is for {doc['command']!r}, command line says {command!r}")
    sub = subparsers.choices[command]
    rest = [t for t in argv if t != command and not t.startswith("--config=")]
    return parser.parse_args([command, *_config_to_argv(doc, sub), *rest])


# ----------------------------------------------------------------------------
# helpers

def _given_params(args):
    return {k: getattr(args, k) for k in PARAM_NAMES if getattr(args, k, None) is not None}


def _geometry(args):
    if args.preset is None:
        raise ConfigError("--preset is required")
    if args.preset not in GEOMETRY_PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r} for {args.command}; choose from "
                          + ", ".join(GEOMETRY_PRESETS))
    params = _given_params(args)
    extra = set(params) - set(GEOMETRY_PRESETS[args.preset])
    if extra:
        raise ConfigError(f"preset {args.preset} takes no parameter(s) {sorted(extra)}")
    if args.preset == "custom" and "file" not in params:
        raise ConfigError("custom preset needs --file")
    if args.preset == "monopole":
        params.setdefault("N", 1)
    if args.preset == "darboux":
        params.setdefault("p", 1)
        params.setdefault("n", 3)
    try:
        return make_potential(args.preset, **params)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot build {args.preset} potential: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _weight(args):
    if args.preset not in WEIGHT_PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r} for quantize; choose from "
                          + ", ".join(WEIGHT_PRESETS))
    params = _given_params(args)
    extra = set(params) - set(WEIGHT_PRESETS[args.preset])
    if extra:
        raise ConfigError(f"preset {args.preset} takes no parameter(s) {sorted(extra)}")
    hbar = params.get("hbar", 1.0)
    try:
        if args.preset == "plane":
            return KahlerWeight.plane(hbar)
        if args.preset == "disc":
            return KahlerWeight.disc(params.get("r0", 1.0), hbar)
        if "M" in params and "N" in params:
            raise ConfigError("give either --M or --N (with --hbar), not both")
        M = params["M"] if "M" in params else params.get("N", 4) / hbar
        if M <= 1:
            # no normalizable state at all
            raise DivergentIntegralError(f"c_0 diverges for M={M}")
        return KahlerWeight.monopole(M, hbar)
    except DivergentIntegralError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _point(text, name, chart, spec):
    if text is None:
        raise ConfigError(f"--{name} is required")
    try:
        coords = parse_vector(text)
        return ChartPoint(coords, chart or spec.default_chart)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _tol(args, name, default):
    value = getattr(args, name)
    if value is None:
        return default
    if not value > 0:
        raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    return value


# ----------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    spec = _geometry(args)
    chart = args.chart or spec.default_chart
    if chart not in spec.charts:
        raise ChartError(f"{spec.kind} potential has no chart {chart!r}")
    exclude = args.exclude or 0.0
    grid = parse_grid(args.grid or "-2:2:50", spec.dim, exclude)
    rm = rank_map(spec, grid, _tol(args, "tol_rank", DEFAULT_RANK_TOL), chart)
    out = _out_dir(args)
    buf = io.StringIO()
    rm.to_csv(buf)
    _write(out / "rank_map.csv", buf.getvalue())
    doc = json.loads(region_summary_json(rm))
    doc["grid"] = {"lo": list(grid.lo), "hi": list(grid.hi), "shape": list(grid.shape),
                   "exclude_radius": grid.exclude_radius}
    doc["chart"] = chart
    doc["potential"] = spec.describe()
    _write(out / "regions.json", _dumps(doc))
    print(f"{rm.n_regions} region(s): "
          + ", ".join(f"#{r['label']} rank {r['rank']} ({r['cells']} cells)" for r in rm.regions))
    print(doc["leaf_space"]["topology"])
    return EXIT_OK


def cmd_dirac(args) -> int:
    spec = _geometry(args)
    pt = _point(args.point, "point", args.chart, spec)
    derivative = args.derivative or "exact"
    table = dirac_bracket_table(spec, pt, _tol(args, "tol_rank", DEFAULT_RANK_TOL),
                                h=args.step, derivative=derivative)
    out = _out_dir(args)
    _write(out / "brackets.json", _dumps(table.to_dict()))
    if table.degenerate:
        print(f"F has rank 0 at {pt.coords}: every constraint is first class and the "
              "Dirac bracket is undefined (degenerate rank)", file=sys.stderr)
        return EXIT_RANK
    names = table.names
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            print(f"{{{names[i]}, {names[j]}}}_DB = {float(table.xx[i, j])!r}")
    c = table.classification
    print(f"constraints: {c.second_class} second class, {c.first_class} first class")
    return EXIT_OK


def cmd_trace(args) -> int:
    spec = _geometry(args)
    start = _point(args.start, "start", args.chart, spec)
    spec.check(start)
    direction = parse_vector(args.direction) if args.direction else None
    path = trace_leaf(spec, start, h=args.step or 1e-2, max_steps=args.max_steps or 100,
                      tol=_tol(args, "tol_rank", DEFAULT_RANK_TOL), direction=direction)
    try:
        residual = eom_residual(spec, path)
    except (DegeneratePathError, ChartError):
        residual = None
    names = list(coordinate_names(spec, start.chart))
    out = _out_dir(args)
    if (args.format or "csv") == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", *names])
        for k, row in enumerate(path.coords):
            w.writerow([k, *(repr(float(v)) for v in row)])
        _write(out / "leaf.csv", buf.getvalue())
    else:
        doc = {"chart": path.chart, "coordinates": names, "step": path.step,
               "reason": path.reason, "points": path.coords.tolist(), "eom_residual": residual}
        _write(out / "leaf.json", _dumps(doc))
    print(f"{len(path)} points, stopped by {path.reason}, eom residual {residual!r}")
    return EXIT_OK


def cmd_quantize(args) -> int:
    weight = _weight(args)
    if weight.kind == "monopole":
        # a ladder needs at least one excited state
        _require_convergent(weight, 1)
    space = build_space(weight, args.K, rtol=_tol(args, "tol_quad", 1e-8))
    out = _out_dir(args)
    rows = space.table_rows()
    if (args.format or "csv") == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "c_n", "method", "commutator_entry"])
        for n, c, method, entry in rows:
            w.writerow([n, repr(c), method, "" if entry is None else repr(entry)])
        _write(out / "cn.csv", buf.getvalue())
    else:
        doc = {"weight": weight.to_dict(),
               "rows": [{"n": n, "c_n": c, "method": m, "commutator_entry": e}
                        for n, c, m, e in rows]}
        _write(out / "cn.json", _dumps(doc))
    _write(out / "raising.json", _dumps(raising_matrix(space).to_dict()))
    _write(out / "lowering.json", _dumps(lowering_matrix(space).to_dict()))
    _write(out / "commutator.json", _dumps(commutator_matrix(space).to_dict()))
    print(f"{weight.kind}: D = {space.dim}")
    for n, _, _, entry in rows:
        if entry is not None:
            print(f"  [a, a^dagger]_{n}{n} = {entry!r}")
    if weight.kind == "monopole" and float(weight.M) == int(weight.M):
        rep = su2_report(space)
        _write(out / "su2.json", _dumps(rep.to_dict()))
        print(f"su(2): J = {rep.spin:g}, lambda* = {rep.lam_fit!r} (nominal {rep.lam_nominal:g}), "
              f"max residual {rep.max_residual_fit:.3g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    try:
        rows = acceptance.run_checks(only, seed=args.seed or 0,
                                     perturb_cn=args.perturb_cn or 0.0,
                                     tol_rank=_tol(args, "tol_rank", DEFAULT_RANK_TOL))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(acceptance.format_table(rows))
    passed = all(r.passed for r in rows)
    print(f"{sum(r.passed for r in rows)}/{len(rows)} checks passed")
    if args.out:
        doc = {"passed": passed, "checks": [r.to_dict() for r in rows]}
        _write(_out_dir(args) / "verify.json", _dumps(doc))
    return EXIT_OK if passed else EXIT_VERIFY


COMMANDS = {"analyze": cmd_analyze, "dirac": cmd_dirac, "trace": cmd_trace,
            "quantize": cmd_quantize, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergentIntegralError as exc:
        print(f"divergent integral: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except ChartError as exc:
        print(f"chart error: {exc}", file=sys.stderr)
        return EXIT_CHART
    except (RankBoundaryError, RankRefusalError, AmbiguousNullSpaceError) as exc:
        print(f"rank error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (CrossCheckError, QuadratureError, NoLambdaFoundError) as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
