"""Command-line front end.

Exit codes: 0 success, 1 property violation, 2 input or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import suites
from .channels import apply, identity_channel, replace_with
from .extremal import KL_SLACK, SearchBudget, f1_search, f2_search, knill_laflamme_check
from .factories import FAMILY_PARAM, channel_from_spec, family_member, state_from_spec
from .fidelity import TOL_AGREE, TOL_RANGE, entanglement_fidelity_kraus, fidelity_report, uhlmann_fidelity
from .numerics import DimensionError, ValidationError, partial_trace
from .states import DensityOperator, density_from_pure, epr_state

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
DIGITS = 12

REPORT_HELP = """\
Fidelities use the squared convention F = |<a|b>|^2 for pure states.

Tolerance overrides (--tol NAME=VALUE, repeatable):
  report     fe_le_fidelity, fe_formulas_agree
  verify     any property name in the first CSV column
  kl-check   slack

CSV columns:
  report     key,value
  verify     property,samples,max_violation,tol,pass
  sweep      parameter,fidelity,entanglement_fidelity
  kl-check   key,value
"""


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{DIGITS}g}"
    return str(x)


def _round(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flat_pairs(d: dict, prefix: str = ""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _flat_pairs(v, f"{prefix}{k}.")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for item in v:
                name = item.get("name", "")
                for kk, vv in item.items():
                    if kk != "name":
                        yield f"{prefix}{k}.{name}.{kk}", vv
        elif not isinstance(v, list):
            yield f"{prefix}{k}", v


def _write_mapping(data: dict, fmt: str, out: str | None):
    if fmt == "json":
        _emit(json.dumps(_round(data), indent=2) + "\n", out)
    else:
        _emit(_csv([("key", "value"), *_flat_pairs(data)]), out)


def _default_seed() -> int:
    env = os.environ.get("ENTFID_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"ENTFID_SEED must be an integer, got {env!r}") from None


def _budget(args, d_t=None) -> SearchBudget:
    return SearchBudget(
        restarts=args.restarts,
        iterations_per_restart=args.iterations,
        seed=args.seed,
        d_t=d_t if d_t is not None else args.dt,
    )


def _tolerances(args, allowed) -> dict:
    out = {}
    for item in args.tol or []:
        name, eq, value = item.partition("=")
        if not eq:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in allowed:
            raise InputError(f"--tol: unknown name {name!r} for {args.command}; expected one of {sorted(allowed)}")
        try:
            out[name] = float(value)
        except ValueError:
            raise InputError(f"--tol: {name} must be a number, got {value!r}") from None
        if not out[name] >= 0:
            raise InputError(f"--tol: {name} must be non-negative")
    return out


def _load_pair(args):
    if not args.state:
        raise InputError("--state is required")
    rho = state_from_spec(args.state)
    e = channel_from_spec(args.channel or "identity", dim=rho.dim)
    if e.dim_in != rho.dim or not e.is_square:
        raise DimensionError(f"channel {e.dim_in}->{e.dim_out} does not act on a {rho.dim}-dim state")
    return rho, e


def cmd_report(args) -> int:
    tols = _tolerances(args, {"fe_le_fidelity", "fe_formulas_agree"})
    rho, e = _load_pair(args)
    report = fidelity_report(
        rho,
        e,
        tol=tols.get("fe_le_fidelity", TOL_RANGE),
        agree_tol=tols.get("fe_formulas_agree", TOL_AGREE),
    )
    data = report.to_dict()
    ok = report.passed
    if args.search:
        budget = _budget(args)
        r2, r1 = f2_search(rho, e, budget), f1_search(rho, e, budget)
        data["search"] = {"f2": r2.to_dict(), "f1": r1.to_dict()}
    _write_mapping(data, args.format, args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_epr_demo(args) -> int:
    joint = density_from_pure(epr_state())
    rho_a = DensityOperator(partial_trace(joint.matrix, [2, 2], keep=0))
    dynamics = [
        ("E1", identity_channel(2), 1.0, 1.0),
        ("E2", replace_with(DensityOperator.maximally_mixed(2)), 1.0, 0.25),
    ]
    lines = ["rho_A = tr_B |psi><psi| =", np.array2string(rho_a.matrix.real, precision=6), ""]
    header = f"{'dynamics':<9}{'F(rho_A, E(rho_A))':>20}{'F_e(rho_A, E)':>16}"
    if not args.no_search:
        header += f"{'F2 search':>14}"
    if args.f1:
        header += f"{'F1 search':>14}"
    lines.append(header)
    ok = True
    for name, e, f_expected, fe_expected in dynamics:
        f = uhlmann_fidelity(rho_a, apply(e, rho_a)).value
        fe = entanglement_fidelity_kraus(rho_a, e).value
        ok &= abs(f - f_expected) <= 1e-6 and abs(fe - fe_expected) <= 1e-6
        row = f"{name:<9}{f:>20.{DIGITS}g}{fe:>16.{DIGITS}g}"
        budget = _budget(args, d_t=args.dt or 2)
        if not args.no_search:
            s2 = f2_search(rho_a, e, budget).search_value
            ok &= abs(s2 - fe) <= 1e-4
            row += f"{s2:>14.8f}"
        if args.f1:
            s1 = f1_search(rho_a, e, budget).search_value
            ok &= abs(s1 - fe) <= 1e-4
            row += f"{s1:>14.8f}"
        lines.append(row)
    lines.append("")
    lines.append("match" if ok else "MISMATCH")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_verify(args) -> int:
    tols = _tolerances(args, set(suites.SUITE_NAMES))
    rows = suites.run_all(samples=args.samples, seed=args.seed, fault=args.inject_fault, tol_overrides=tols)
    table = [("property", "samples", "max_violation", "tol", "pass")]
    table += [(r.name, r.samples, float(r.max_violation), r.tol, r.passed) for r in rows]
    if args.format == "json":
        _emit(json.dumps(_round([dict(zip(table[0], t)) for t in table[1:]]), indent=2) + "\n", args.out)
    else:
        _emit(_csv(table), args.out)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VIOLATION


def cmd_kl_check(args) -> int:
    tols = _tolerances(args, {"slack"})
    e = channel_from_spec(args.channel or "identity", dim=args.dim)
    report = knill_laflamme_check(
        e, n_states=args.samples, budget=_budget(args), slack=tols.get("slack", KL_SLACK)
    )
    _write_mapping(report.to_dict(), args.format, args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _grid(text: str | None) -> list[float]:
    if not text:
        raise InputError("--grid must list at least one value")
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--grid has a non-numeric entry: {text!r}") from None
    if not values:
        raise InputError("--grid must list at least one value")
    return values


def cmd_sweep(args) -> int:
    family = args.channel or "depolarizing"
    if family not in FAMILY_PARAM:
        raise InputError(f"unknown family {family!r}; expected one of {tuple(FAMILY_PARAM)}")
    _tolerances(args, set())
    grid = _grid(args.grid)
    rho = state_from_spec(args.state or f"mixed:dim={args.dim}")
    rows = [("parameter", "fidelity", "entanglement_fidelity")]
    for value in grid:
        e = family_member(family, value, rho.dim)
        f = uhlmann_fidelity(rho, apply(e, rho)).value
        rows.append((float(value), f, entanglement_fidelity_kraus(rho, e).value))
    if args.format == "json":
        _emit(json.dumps(_round([dict(zip(rows[0], r)) for r in rows[1:]]), indent=2) + "\n", args.out)
    else:
        _emit(_csv(rows), args.out)
    return EXIT_OK


COMMANDS = {
    "report": cmd_report,
    "verify": cmd_verify,
    "epr-demo": cmd_epr_demo,
    "kl-check": cmd_kl_check,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help="state JSON file or spec, e.g. mixed:dim=2")
    common.add_argument("--channel", help="channel JSON file or spec, e.g. depolarizing:p=0.25")
    common.add_argument("--seed", type=int, default=None, help="master seed (default $ENTFID_SEED or 0)")
    common.add_argument("--samples", type=int, default=None, help="sample count")
    common.add_argument("--dt", type=int, default=None, help="dimension of the auxiliary system T")
    common.add_argument("--restarts", type=int, default=6, help="search restarts")
    common.add_argument("--iterations", type=int, default=3000, help="evaluations per restart")
    common.add_argument("--dim", type=int, default=2, help="default dimension for factory specs")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override (repeatable)")

    parser = argparse.ArgumentParser(
        prog="entfid",
        description="Fidelity and entanglement fidelity of quantum states and channels.",
        epilog=REPORT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("report", parents=[common], help="fidelity report for one state and channel")
    p.add_argument("--search", action="store_true", help="also run the F1/F2 searches")
    sub.add_parser("verify", parents=[common], help="run the property suites").add_argument(
        "--inject-fault", action="store_true", help=argparse.SUPPRESS
    )
    p = sub.add_parser("epr-demo", parents=[common], help="one half of an EPR pair under identity and replace-with-I/2")
    p.add_argument("--no-search", action="store_true", help="skip the F2 search cross-check")
    p.add_argument("--f1", action="store_true", help="also cross-check with the F1 search")
    sub.add_parser("kl-check", parents=[common], help="empirical Knill-Laflamme bound")
    p = sub.add_parser("sweep", parents=[common], help="F and F_e across a channel family")
    p.add_argument("--grid", help="comma-separated parameter values")
    return parser


_DEFAULT_FORMAT = {"report": "json", "kl-check": "json", "verify": "csv", "sweep": "csv"}
_DEFAULT_SAMPLES = {"verify": 200, "kl-check": 50}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.samples is None:
            args.samples = _DEFAULT_SAMPLES.get(args.command, 200)
        if args.samples < 1:
            raise InputError("--samples must be at least 1")
        if args.format is None:
            args.format = _DEFAULT_FORMAT.get(args.command, "json")
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ValidationError as exc:
        field = f"{exc.field}: " if exc.field else ""
        print(f"error: {field}{exc}", file=sys.stderr)
    except (DimensionError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
