"""Command-line front end.

Subcommands::

    transform   evaluate transforms of a measure at points
    convolve    moment table of the bi-free convolution of two measures
    power       moment table of an n-fold bi-free convolution power
    idlaw       moment table of an infinitely divisible law from Levy data
    limit-demo  convergence of the wrapped-Gaussian or compound-Poisson arrays
    haar-check  convergence to the uniform law of convolution powers
    selftest    run the acceptance checks

Measures are JSON objects ``{"atoms": [{"s_angle": .., "t_angle": .., "weight": ..}, ...]}``
(angles in radians); circle measures use ``x_angle``.  Moment tables are CSV
with header ``p,q,re,im``.  Exit status is 0 on success, 1 on domain errors
and 2 on I/O errors; errors are reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .convolution import DEFAULT_GRID, DEFAULT_RADIUS, bifree_convolve, bifree_power, moment_table
from .limits import (
    LevyData,
    compound_poisson_array,
    haar_limit_check,
    id_law,
    limit_sweep,
    normal_levy,
    poisson_levy,
    two_point_jump_measure,
    wrapped_gaussian_array,
)
from .measure import AtomicMeasure1D, AtomicMeasure2D, MeasureError, MomentTable2D, marginal
from .transforms import (
    H2,
    AtomicInverseEta,
    TransformError,
    component,
    eta,
    psi1,
    psi2,
    s_op_transform,
    s_transform,
    sigma_op_pointwise,
    sigma_pointwise,
)

LOGGER = logging.getLogger(__name__)

FLOAT_FMT = "{:.17g}"


class InputError(Exception):
    """Unreadable input (mapped to exit status 2)."""


# ----------------------------------------------------------------------------
# measure files


def _atom_value(atom, key, index):
    if not isinstance(atom, dict) or key not in atom:
        raise MeasureError(f"atom index {index}: missing field '{key}'")
    val = atom[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise MeasureError(f"atom index {index}: field '{key}' must be a number")
    val = float(val)
    if not np.isfinite(val):
        raise MeasureError(f"atom index {index}: field '{key}' is not finite")
    return val


def measure_from_dict(obj, probability: bool = True):
    """Parse a measure object; returns an AtomicMeasure2D or AtomicMeasure1D."""
    if not isinstance(obj, dict) or not isinstance(obj.get("atoms"), list):
        raise MeasureError("measure must be an object with an 'atoms' array")
    atoms = obj["atoms"]
    if not atoms:
        if probability:
            raise MeasureError("a probability measure needs at least one atom")
        return AtomicMeasure2D.zero()
    one_d = isinstance(atoms[0], dict) and "x_angle" in atoms[0]
    keys = ("x_angle", "weight") if one_d else ("s_angle", "t_angle", "weight")
    cols = [[_atom_value(a, k, i) for i, a in enumerate(atoms)] for k in keys]
    for i, wgt in enumerate(cols[-1]):
        if wgt < 0:
            raise MeasureError(f"atom index {i}: negative weight")
    if one_d:
        return AtomicMeasure1D.from_angles(cols[0], cols[1], probability)
    return AtomicMeasure2D.from_angles(cols[0], cols[1], cols[2], probability)


def measure_to_dict(mu) -> dict:
    if isinstance(mu, AtomicMeasure1D):
        atoms = [{"x_angle": float(a), "weight": float(w)} for a, w in zip(mu.angles, mu.weights)]
    else:
        atoms = [
            {"s_angle": float(s), "t_angle": float(t), "weight": float(w)}
            for s, t, w in zip(mu.s_angles, mu.t_angles, mu.weights)
        ]
    return {"atoms": atoms}


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_measure(path, probability: bool = True):
    return measure_from_dict(_read_json(path), probability)


def dumps_measure(mu) -> str:
    return json.dumps(measure_to_dict(mu), indent=2) + "\n"


def levy_from_dict(obj) -> LevyData:
    if not isinstance(obj, dict):
        raise MeasureError("Levy data must be a JSON object")
    for key in ("rho1", "rho2", "a"):
        if key not in obj:
            raise MeasureError(f"Levy data is missing '{key}'")
    rho1 = measure_from_dict(obj["rho1"], probability=False)
    rho2 = measure_from_dict(obj["rho2"], probability=False)
    g1 = np.exp(1j * float(obj.get("gamma1_angle", 0.0)))
    g2 = np.exp(1j * float(obj.get("gamma2_angle", 0.0)))
    return LevyData(rho1, rho2, float(obj["a"]), complex(g1), complex(g2))


def levy_to_dict(ld: LevyData) -> dict:
    return {
        "rho1": measure_to_dict(ld.rho1),
        "rho2": measure_to_dict(ld.rho2),
        "a": ld.a,
        "gamma1_angle": float(np.angle(ld.gamma1)),
        "gamma2_angle": float(np.angle(ld.gamma2)),
    }


# ----------------------------------------------------------------------------
# output


def write_atomic(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit(text: str, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def table_csv(table: MomentTable2D) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "q", "re", "im"])
    for p, q, v in table.rows():
        writer.writerow([p, q, FLOAT_FMT.format(v.real), FLOAT_FMT.format(v.imag)])
    return buf.getvalue()


def table_json(table: MomentTable2D, diagnostics: dict | None = None) -> str:
    rows = [{"p": p, "q": q, "re": v.real, "im": v.imag} for p, q, v in table.rows()]
    out = {"order": table.order, "moments": rows}
    if diagnostics is not None:
        out["diagnostics"] = diagnostics
    return json.dumps(out, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _sidecar(out, suffix):
    if not out:
        return None
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


def _write_table(args, report):
    diag = _clean(report.as_dict())
    if args.format == "json":
        emit(table_json(report.table, diag), args.out)
        return
    emit(table_csv(report.table), args.out)
    text = json.dumps(diag, indent=2) + "\n"
    target = args.diagnostics or _sidecar(args.out, ".diagnostics.json")
    if target:
        write_atomic(target, text)
    else:
        sys.stderr.write(text)


# ----------------------------------------------------------------------------
# subcommands


def _parse_point(token: str) -> complex:
    parts = token.split(",")
    if len(parts) != 2:
        raise ValueError(f"point '{token}' must be written as re,im")
    return complex(float(parts[0]), float(parts[1]))


TRANSFORMS = ("psi", "H", "psi_1", "psi_2", "eta_1", "eta_2", "eta_inv_1", "eta_inv_2",
              "sigma", "S", "sigma_op", "S_op")


def evaluate_transform(mu: AtomicMeasure2D, which: str, z: complex, w: complex) -> complex:
    m1, m2 = marginal(mu, 1), marginal(mu, 2)
    table = {
        "psi": lambda: psi2(mu, z, w),
        "H": lambda: H2(mu, z, w),
        "psi_1": lambda: psi1(m1, z),
        "psi_2": lambda: psi1(m2, w),
        "eta_1": lambda: eta(m1, z),
        "eta_2": lambda: eta(m2, w),
        "eta_inv_1": lambda: AtomicInverseEta(m1)(z),
        "eta_inv_2": lambda: AtomicInverseEta(m2)(w),
        "sigma": lambda: sigma_pointwise(mu, z, w),
        "S": lambda: s_transform(mu, z, w),
        "sigma_op": lambda: sigma_op_pointwise(mu, z, w),
        "S_op": lambda: s_op_transform(mu, z, w),
    }
    return complex(np.asarray(table[which]()).reshape(-1)[0])


def cmd_transform(args):
    mu = load_measure(args.measure)
    if not isinstance(mu, AtomicMeasure2D):
        raise MeasureError("transform needs a torus measure (s_angle, t_angle atoms)")
    points = args.at or []
    if not points:
        raise ValueError("give at least one evaluation point with --at Z W")
    records = []
    for zt, wt in points:
        z, w = _parse_point(zt), _parse_point(wt)
        val = evaluate_transform(mu, args.which, z, w)
        records.append({
            "z": [z.real, z.imag],
            "w": [w.real, w.imag],
            "transform": args.which,
            "value": [val.real, val.imag],
            "component": component(z, w),
        })
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["z_re", "z_im", "w_re", "w_im", "transform", "re", "im", "component"])
        for r in records:
            writer.writerow([FLOAT_FMT.format(x) for x in r["z"] + r["w"]]
                            + [r["transform"]] + [FLOAT_FMT.format(x) for x in r["value"]] + [r["component"]])
        emit(buf.getvalue(), args.out)
    else:
        emit(json.dumps(records, indent=2) + "\n", args.out)


def _check_order(args):
    if args.order < 1:
        raise ValueError("order must be positive")
    if args.order > args.grid // 4:
        raise ValueError("order must not exceed grid/4")
    if abs(args.radius - 1.0) < 1e-9 or args.radius <= 0:
        raise ValueError("radius must be positive and different from 1")


def cmd_convolve(args):
    _check_order(args)
    mu1 = load_measure(args.first)
    mu2 = load_measure(args.second)
    law = bifree_convolve(mu1, mu2)
    _write_table(args, moment_table(law, args.order, grid=args.grid, radius=args.radius))


def cmd_power(args):
    _check_order(args)
    if args.n < 1:
        raise ValueError("power must be a positive integer")
    law = bifree_power(load_measure(args.measure), args.n)
    _write_table(args, moment_table(law, args.order, grid=args.grid, radius=args.radius))


def cmd_idlaw(args):
    _check_order(args)
    ld = levy_from_dict(_read_json(args.levy))
    _write_table(args, moment_table(id_law(ld), args.order, grid=args.grid, radius=args.radius))


def _figure_loglog(path, xs, series, xlabel, ylabel, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, ys in series:
        ax.loglog(xs, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp.png")
    try:
        fig.savefig(tmp, dpi=120)
        os.replace(tmp, path)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)


def cmd_limit_demo(args):
    levels = [int(x) for x in args.levels.split(",") if x.strip()]
    if not levels or any(n <= args.r for n in levels):
        raise ValueError("levels must be integers larger than the rate")
    if args.example == "3.5":
        array, target = wrapped_gaussian_array(args.r), normal_levy(args.r)
    else:
        jump = two_point_jump_measure()
        array, target = compound_poisson_array(args.r, jump), poisson_levy(args.r, jump)
    order = min(args.order, 4) if args.order_explicit is None else args.order
    rep = limit_sweep(array, levels, target, order=order, grid=args.grid)
    if args.format == "json":
        emit(json.dumps(_clean({
            "levels": rep.levels, "errors": rep.errors, "ratios": rep.ratios,
            "monotone": rep.monotone, "shortcut_check": rep.shortcut_check,
        }), indent=2) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "max_moment_error"])
        for n, e in rep.rows():
            writer.writerow([n, FLOAT_FMT.format(e)])
        emit(buf.getvalue(), args.out)
    if args.figure:
        ref = [rep.errors[0] * levels[0] / n for n in levels]
        _figure_loglog(args.figure, levels, [("max moment error", rep.errors), ("1/n reference", ref)],
                       "level n", "error", array.name)


def cmd_haar_check(args):
    spec = _read_json(args.spec)
    if not isinstance(spec, dict):
        raise MeasureError("haar-check input must be a JSON object")
    if "measures" in spec:
        measures = [measure_from_dict(m) for m in spec["measures"]]
    elif "measure" in spec:
        measures = measure_from_dict(spec["measure"])
    else:
        raise MeasureError("haar-check input needs 'measure' or 'measures'")
    ks = [int(k) for k in spec.get("k", spec.get("levels", []))]
    if not ks:
        raise MeasureError("haar-check input needs a nonempty 'k' list")
    if isinstance(measures, list) and len(measures) != len(ks):
        raise MeasureError("one measure per level is required")
    levels = [int(n) for n in spec.get("levels", ks)]
    pipeline_max = int(spec.get("pipeline_max", 32))
    rep = haar_limit_check(measures, ks, levels, pipeline_max=pipeline_max, grid=args.grid)
    records = rep.as_records()
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["level", "m11_power", "mean1_power", "mean2_power", "envelope", "max_moment"])
        for r in records:
            writer.writerow([r["level"]] + [FLOAT_FMT.format(r[k]) for k in
                                            ("m11_power", "mean1_power", "mean2_power", "envelope")]
                            + [FLOAT_FMT.format(r["max_moment"]) if "max_moment" in r else ""])
        emit(buf.getvalue(), args.out)
    else:
        emit(json.dumps(_clean({"tends_to_zero": rep.tends_to_zero, "levels": records}), indent=2) + "\n",
             args.out)
    if args.figure:
        series = [("envelope", rep.envelopes)]
        pts = [(n, m) for n, m in zip(ks, rep.moment_maxima) if m is not None]
        if pts:
            _figure_loglog(args.figure, [n for n, _ in pts],
                           [("envelope", [e for k, e in zip(ks, rep.envelopes) if k <= pts[-1][0]]),
                            ("max moment", [m for _, m in pts])], "k", "modulus", "convolution powers")
        else:
            _figure_loglog(args.figure, ks, series, "k", "modulus", "convolution powers")


def cmd_selftest(args):
    from .acceptance import run_all

    results = run_all(seed=args.seed)
    lines = [r.line() for r in results]
    emit("\n".join(lines) + "\n", args.out)
    if not all(r.passed for r in results):
        raise SelftestFailure(f"{sum(not r.passed for r in results)} acceptance checks failed")


class SelftestFailure(Exception):
    pass


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None, help="maximal |p|, |q| of the moment table (default 6)")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="FFT grid size M (power of two)")
    common.add_argument("--radius", type=float, default=DEFAULT_RADIUS,
                        help="requested grid radius; clamped to half the working window")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bifree", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("transform", parents=[common], help="evaluate transforms of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--which", choices=TRANSFORMS, default="sigma")
    p.add_argument("--at", nargs=2, action="append", metavar=("Z", "W"), help="point as re,im re,im")
    p.set_defaults(func=cmd_transform, default_format="json")

    p = sub.add_parser("convolve", parents=[common], help="bi-free convolution of two measures")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--diagnostics", default=None, help="diagnostics JSON path")
    p.set_defaults(func=cmd_convolve, default_format="csv")

    p = sub.add_parser("power", parents=[common], help="n-fold bi-free convolution power")
    p.add_argument("measure")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diagnostics", default=None)
    p.set_defaults(func=cmd_power, default_format="csv")

    p = sub.add_parser("idlaw", parents=[common], help="infinitely divisible law from Levy data")
    p.add_argument("levy")
    p.add_argument("--diagnostics", default=None)
    p.set_defaults(func=cmd_idlaw, default_format="csv")

    p = sub.add_parser("limit-demo", parents=[common], help="limit sweep for the two model arrays")
    p.add_argument("--example", choices=("3.5", "3.6"), default="3.5",
                   help="3.5: wrapped-Gaussian array; 3.6: compound-Poisson array")
    p.add_argument("--r", type=float, default=1.0, help="rate")
    p.add_argument("--levels", default="8,16,32,64")
    p.add_argument("--figure", default=None, help="also save a PNG plot of the error curve")
    p.set_defaults(func=cmd_limit_demo, default_format="csv")

    p = sub.add_parser("haar-check", parents=[common], help="convergence of powers to the uniform law")
    p.add_argument("spec")
    p.add_argument("--figure", default=None, help="also save a PNG plot of envelopes")
    p.set_defaults(func=cmd_haar_check, default_format="json")

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.set_defaults(func=cmd_selftest, default_format="csv")
    return parser


def _error(kind: str, exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.order_explicit = args.order
    if args.order is None:
        args.order = 6
    if args.format is None:
        args.format = args.default_format
    try:
        args.func(args)
    except InputError as exc:
        return _error("io", exc, 2)
    except SelftestFailure as exc:
        return _error("selftest", exc, 1)
    except (TransformError, MeasureError, ValueError, ArithmeticError) as exc:
        return _error("domain", exc, 1)
    except OSError as exc:
        return _error("io", exc, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
