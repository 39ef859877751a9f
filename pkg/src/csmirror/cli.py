"""Command-line interface.

Exit codes:
  0  success
  2  command-line or mirror-spec parse error
  3  molecule file schema violation, or molecule class unsuitable for the family
  4  quadrature did not reach the requested accuracy
  5  validation report has a failing hard check
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, green, potentials, validation
from .layer import MirrorParseError, parse_mirror
from .molecule import ClassificationError, MoleculeError
from .quadrature import AccuracyError
from .schema import SchemaError, load_molecule
from .units import CONSTANTS_VERSION, EV

EXIT_PARSE, EXIT_SCHEMA, EXIT_ACCURACY, EXIT_VALIDATION = 2, 3, 4, 5

EPILOG = """\
mirror specs: cs:a=<float> | nrp:+1 | nrp:-1 | pc
exit codes: 0 ok, 2 parse error, 3 schema or class mismatch,
            4 accuracy not reached, 5 validation failure
CSV numbers use the shortest representation that round-trips to the same double.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _fmt(x: float) -> str:
    return repr(float(x))


def _add_request_args(p):
    p.add_argument("--mirror", required=True, help="mirror spec, e.g. cs:a=0.5")
    p.add_argument("--molecule", required=True, type=Path, help="molecule or CP-system JSON file")
    p.add_argument("--family", required=True, choices=potentials.FAMILIES)
    p.add_argument("--method", default="closed_form",
                   choices=potentials.METHODS + tuple(potentials.METHOD_ALIASES))
    p.add_argument("--variant", default="reconciled", choices=potentials.VARIANTS,
                   help="antisymmetric closed form: printed or reconciled")
    p.add_argument("--rel-tol", type=_positive, default=potentials.DEFAULT_REL_TOL)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csmirror", description="Casimir-Polder potentials near a "
                     "Chern-Simons or non-reciprocal mirror.",
                     epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", help="print reflection/transmission coefficients",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--mirror", required=True)

    p = sub.add_parser("green", help="coincident-point Green tensor as JSON",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--mirror", required=True)
    p.add_argument("--z", type=_positive, required=True, help="height above the mirror, m")
    p.add_argument("--xi", type=_positive, required=True, help="imaginary frequency, rad/s")
    p.add_argument("--route", choices=("radial", "polar"), default="radial")

    p = sub.add_parser("potential", help="potential at one distance",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_request_args(p)
    p.add_argument("--z", type=_positive, required=True, help="distance, m")

    p = sub.add_parser("curve", help="potential on a distance grid",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_request_args(p)
    p.add_argument("--z-min", type=_positive, required=True)
    p.add_argument("--z-max", type=_positive)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--spacing", choices=("log", "linear"), default="log")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", type=Path, required=True,
                   help="output file; metadata goes to <output>.meta.json")

    p = sub.add_parser("validate", help="run the self-consistency report",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")
    p.add_argument("--quick", action="store_true", help="fewer finite-difference points")
    return parser


def _request(args):
    mirror = parse_mirror(args.mirror)
    mol = load_molecule(args.molecule)
    return potentials.PotentialRequest(mirror, mol, args.family, args.method,
                                       args.variant, args.rel_tol)


def cmd_coeffs(args) -> int:
    spec = parse_mirror(args.mirror)
    out = {"mirror": spec.label(), **spec.coefficients().as_dict()}
    print(json.dumps(out, indent=2))
    return 0


def cmd_green(args) -> int:
    spec = parse_mirror(args.mirror)
    coeffs = spec.coefficients()
    if args.route == "radial":
        G = green.green_coincident(args.z, args.xi, coeffs)
    else:
        r = [0.0, 0.0, args.z]
        G = green.green_scattering(r, r, args.xi, coeffs)
    out = {
        "mirror": spec.label(), "z_m": args.z, "xi_rad_per_s": args.xi, "route": args.route,
        "units": "1/m", "tensor": G.tolist(),
        **{k: float(v) for k, v in green.decompose(G).items()},
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_potential(args) -> int:
    req = _request(args)
    U, err = potentials.evaluate(req, args.z)
    print(json.dumps({"z_m": args.z, "U_J": U, "U_eV": U / EV, "err_est": err,
                      "family": req.family, "method": req.method}, indent=2))
    return 0


def _config_echo(args, req) -> dict:
    return {
        "mirror": req.mirror.label(), "molecule": str(args.molecule), "family": req.family,
        "method": req.method, "variant": req.variant, "rel_tol": req.rel_tol,
        "z_min": args.z_min, "z_max": args.z_max, "points": args.points,
        "spacing": args.spacing, "format": args.format,
    }


def cmd_curve(args) -> int:
    req = _request(args)
    if args.threads < 1:
        raise ValueError("--threads must be at least 1")
    grid = potentials.z_grid(args.z_min, args.z_max if args.z_max else args.z_min,
                             args.points, args.spacing)
    t0 = time.perf_counter()
    curve = potentials.curve(req, grid, threads=args.threads)
    wall = time.perf_counter() - t0
    if args.format == "csv":
        lines = ["z_m,U_J,U_eV,err_est"]
        lines += [",".join(_fmt(v) for v in (z, u, u / EV, e))
                  for z, u, e in zip(curve.z, curve.U, curve.err)]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({
            "z_m": curve.z.tolist(), "U_J": curve.U.tolist(),
            "U_eV": (curve.U / EV).tolist(), "err_est": curve.err.tolist(),
        }, indent=1) + "\n"
    args.output.write_text(text)
    meta = {
        "config": _config_echo(args, req), "threads": args.threads,
        "constants": CONSTANTS_VERSION, "version": __version__, "wall_time_s": wall,
    }
    Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return 0


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(type(obj).__name__)


def cmd_validate(args) -> int:
    report = validation.run(quick=args.quick)
    text = json.dumps(report, indent=2, default=_jsonable) + "\n"
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    for name in report["failed"]:
        print(f"validation failed: {name}", file=sys.stderr)
    return 0 if report["all_hard_pass"] else EXIT_VALIDATION


COMMANDS = {"coeffs": cmd_coeffs, "green": cmd_green, "potential": cmd_potential,
            "curve": cmd_curve, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MirrorParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SchemaError, ClassificationError, MoleculeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except potentials.CurveAccuracyError as exc:
        print(f"error: {exc} (worst point index {exc.index})", file=sys.stderr)
        return EXIT_ACCURACY
    except AccuracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
