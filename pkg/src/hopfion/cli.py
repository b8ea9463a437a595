"""Command line front end: ``hopfion <command> ...``.

Reports are JSON (sorted keys), sweeps and relaxation traces are CSV and
fields are QF3 files. Exit status is 0 on success, 2 on invalid input and 3
when an integrality or class check fails on the data; in the last case the
report is still written, with the failing entry flagged.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .errors import ClassMismatch, HopfionError, IntegralityFailure

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DATA = 3

SWEEP_CHECKS = ("develop_consistency", "flatness", "conjugation", "hopf", "degree_power", "commute")


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def parse_dims(text: str) -> tuple[int, int, int]:
    parts = [int(p) for p in str(text).split(",") if p.strip()]
    if len(parts) == 1:
        parts *= 3
    if len(parts) != 3 or min(parts) < 2:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}")
    return tuple(parts)


def parse_dims_list(text: str) -> list[int]:
    try:
        out = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not out or min(out) < 4:
        raise argparse.ArgumentTypeError(f"bad dims list {text!r}")
    return out


def parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"parameter {text!r} is not key=value")
    key, value = text.split("=", 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("-o", "--output", help="output path (report, field or CSV)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from reports")
    p.add_argument("--threads", type=int, default=None,
                   help="cap on internal threads (default: $HOPFION_THREADS)")
    p.add_argument("--snap-tol", type=float, default=None, help="integer snap threshold")
    p.add_argument("--integrality-tol", type=float, default=None, help="cocycle/class integrality threshold")


def _add_lattice(p: argparse.ArgumentParser):
    p.add_argument("--dims", type=parse_dims, default=(32, 32, 32), help="N or N1,N2,N3")
    p.add_argument("--domain", choices=("box", "torus"), default="box")
    p.add_argument("--R", type=float, default=6.0, help="box half width")
    p.add_argument("--L", type=float, default=1.0, help="torus period")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hopfion", description="Hopf-type invariants of lattice fields")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated field")
    g.add_argument("--name", required=True, help="generator name")
    g.add_argument("--param", type=parse_param, action="append", default=[],
                   help="generator parameter key=value (value parsed as JSON)")
    g.add_argument("--pN", type=int, default=None, help="post-compose with z -> z^N")
    g.add_argument("--seed", type=int, default=None, help="seed for random generators")
    _add_lattice(g)
    _add_common(g)

    inv = sub.add_parser("invariants", help="degree, Hopf, class, divisibility, upsilon")
    inv.add_argument("field")
    inv.add_argument("--degree", action="store_true")
    inv.add_argument("--hopf", action="store_true")
    inv.add_argument("--class", dest="klass", action="store_true")
    inv.add_argument("--divisibility", action="store_true")
    inv.add_argument("--upsilon", metavar="PSI", help="second S2 field for upsilon(phi, psi)")
    _add_common(inv)

    for name, text in (("energy", "Faddeev (S2) or Skyrme (S3) energy"),
                       ("lift", "global lift diagnostics"),
                       ("cech", "transition angles and cocycle on the standard cover")):
        p = sub.add_parser(name, help=text)
        p.add_argument("field")
        _add_common(p)

    it = sub.add_parser("intertwine", help="Phi with psi = Phi phi Phi^-1")
    it.add_argument("phi")
    it.add_argument("psi")
    it.add_argument("--report", help="JSON report path (default stdout)")
    _add_common(it)

    sw = sub.add_parser("sweep", help="re-run a check across grid sizes")
    sw.add_argument("--check", required=True, choices=SWEEP_CHECKS)
    sw.add_argument("--dims", type=parse_dims_list, default=[16, 32, 64])
    sw.add_argument("--R", type=float, default=4.0)
    _add_common(sw)

    rx = sub.add_parser("relax", help="Faddeev descent with invariant monitoring")
    rx.add_argument("field")
    rx.add_argument("--steps", type=int, default=500)
    rx.add_argument("--step-size", type=float, default=None)
    rx.add_argument("--record-every", type=int, default=50)
    rx.add_argument("--trace", help="CSV path for the energy/invariant trace")
    rx.add_argument("--report", help="JSON report path (default stdout)")
    _add_common(rx)
    return ap


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def tolerances(args) -> dict:
    from . import cech, invariants, intertwine, lift

    return {
        "snap_tol": args.snap_tol if args.snap_tol is not None else invariants.SNAP_TOL,
        "integrality_tol": args.integrality_tol if args.integrality_tol is not None else cech.INTEGRALITY_TOL,
        "glue_tol": intertwine.GLUE_FAIL,
        "lift_tol": lift.LIFT_TOL,
        "harmonic_tol": lift.HARMONIC_TOL,
    }


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def emit_report(report: dict, args, path: str | None = None) -> str:
    report = dict(report)
    report["tolerances"] = tolerances(args)
    if not args.no_timestamp:
        from datetime import datetime, timezone

        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _failure(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "confidence": "FAILED"}


def _apply_tolerances(args):
    from . import invariants

    if args.snap_tol is not None:
        invariants.SNAP_TOL = args.snap_tol


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    from .genmaps import GENERATORS, gen_pN
    from .grid import make_lattice, Box, Torus, write_field

    if args.name not in GENERATORS:
        raise ValueError(f"unknown generator {args.name!r}; choose from {sorted(GENERATORS)}")
    domain = Torus((args.L,) * 3) if args.domain == "torus" else Box(args.R)
    lattice = make_lattice(args.dims, domain)
    params = dict(args.param)
    if args.seed is not None:
        params["seed"] = args.seed
    phi = GENERATORS[args.name](lattice=lattice, **params)
    if args.pN is not None:
        phi = gen_pN(phi, args.pN)
    if not args.output:
        raise ValueError("gen needs -o/--output")
    write_field(phi, args.output)
    return EXIT_OK


def cmd_invariants(args) -> int:
    from .cech import primary_class
    from .grid import read_field
    from .invariants import degree, grid_info, hopf, upsilon

    phi = read_field(args.field)
    wanted = [k for k in ("degree", "hopf", "klass", "divisibility") if getattr(args, k)]
    if args.upsilon:
        wanted.append("upsilon")
    if not wanted:
        wanted = ["degree"] if phi.kind == "S3" else (["klass", "divisibility"] if phi.lattice.is_torus else ["hopf"])
    tol = tolerances(args)["integrality_tol"]
    results, failed = {}, False
    cls = None
    for key in wanted:
        name = "class" if key == "klass" else key
        try:
            if key == "degree":
                results[name] = degree(phi).as_dict()
            elif key == "hopf":
                results[name] = hopf(phi).as_dict()
            elif key in ("klass", "divisibility"):
                if cls is None:
                    cls = primary_class(phi, with_cocycle=True, tol=tol)
                results[name] = cls.as_dict() if key == "klass" else {"divisibility": cls.as_dict()["divisibility"]}
            elif key == "upsilon":
                results[name] = upsilon(phi, read_field(args.upsilon)).as_dict()
        except (IntegralityFailure, ClassMismatch) as exc:
            results[name] = _failure(exc)
            failed = True
    emit_report({"command": "invariants", "input": args.field, "grid": grid_info(phi.lattice),
                 "results": results}, args, args.output)
    return EXIT_DATA if failed else EXIT_OK


def cmd_energy(args) -> int:
    from .forms import faddeev_energy, skyrme_energy
    from .grid import read_field
    from .invariants import grid_info

    phi = read_field(args.field)
    if phi.kind == "S2":
        rep, functional = faddeev_energy(phi), "faddeev"
    elif phi.kind == "S3":
        rep, functional = skyrme_energy(phi), "skyrme"
    else:
        raise ValueError(f"no energy for kind {phi.kind}")
    emit_report({"command": "energy", "input": args.field, "functional": functional,
                 "grid": grid_info(phi.lattice), "energy": rep.as_dict()}, args, args.output)
    return EXIT_OK


def cmd_lift(args) -> int:
    from .grid import read_field
    from .invariants import global_lift, grid_info

    phi = read_field(args.field)
    if phi.kind != "S2":
        raise ValueError("lift needs an S2 field")
    _, res = global_lift(phi)
    diag = res.diagnostics()
    diag["alignment_angle"] = res.alignment_angle
    emit_report({"command": "lift", "input": args.field, "grid": grid_info(phi.lattice),
                 "lift": diag}, args, args.output)
    return EXIT_OK


def cmd_cech(args) -> int:
    from .cech import cocycle, cocycle_class, transition_angles
    from .grid import read_field
    from .invariants import grid_info

    phi = read_field(args.field)
    data = transition_angles(phi)
    report = {"command": "cech", "input": args.field, "grid": grid_info(phi.lattice)}
    code = EXIT_OK
    try:
        n = cocycle(data, tolerances(args)["integrality_tol"])
        report["cocycle_class"] = list(cocycle_class(n, data.cover))
    except IntegralityFailure as exc:
        report["cocycle_class"] = _failure(exc)
        code = EXIT_DATA
    report["cech"] = data.report()
    emit_report(report, args, args.output)
    return code


def cmd_intertwine(args) -> int:
    from .grid import read_field, write_field
    from .invariants import grid_info, intertwiner

    phi, psi = read_field(args.phi), read_field(args.psi)
    report = {"command": "intertwine", "inputs": [args.phi, args.psi], "grid": grid_info(phi.lattice)}
    try:
        res, cls = intertwiner(phi, psi)
    except (IntegralityFailure, ClassMismatch) as exc:
        report["intertwiner"] = _failure(exc)
        emit_report(report, args, args.report)
        return EXIT_DATA
    if args.output:
        write_field(res.Phi, args.output)
    report["intertwiner"] = res.report()
    report["class"] = list(cls)
    emit_report(report, args, args.report)
    return EXIT_OK


def _sweep_row(check: str, n: int, R: float) -> dict:
    from .genmaps import gen_hopf_box, gen_power, hopf_box_lift
    from .grid import box
    from .invariants import commute_check, degree, hopf
    from .lift import lift_chart

    lat = box(n, R=R)
    row = {"check": check, "dims": n, "h": lat.spacing[0], "value": "", "gap": "", "residual": ""}
    if check in ("develop_consistency", "flatness", "conjugation"):
        res = lift_chart(gen_hopf_box(lat), check_closed=False)
        key = {"develop_consistency": "path_consistency", "flatness": "flatness",
               "conjugation": "conjugation"}[check]
        row["residual"] = getattr(res, key)
    elif check == "hopf":
        rep = hopf(gen_hopf_box(lat))
        row.update(value=rep.raw, gap=rep.gap, residual=rep.gap)
    elif check == "degree_power":
        rep = degree(gen_power(2, lat))
        row.update(value=rep.raw, gap=rep.gap, residual=rep.gap)
    elif check == "commute":
        res = commute_check(hopf_box_lift(lat))
        row.update(value=res.integrated, residual=res.integrated)
    return row


def cmd_sweep(args) -> int:
    rows = []
    for n in args.dims:
        row = _sweep_row(args.check, n, args.R)
        prev = rows[-1]["residual"] if rows else None
        cur = row["residual"]
        row["ratio"] = prev / cur if (prev not in (None, "") and cur not in ("", 0)) else ""
        rows.append(row)
    fields = ["check", "dims", "h", "value", "gap", "residual", "ratio"]
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_relax(args) -> int:
    from .grid import read_field, write_field
    from .invariants import grid_info, relax

    if args.steps < 0:
        raise ValueError("steps must be non-negative")
    phi = read_field(args.field)
    if phi.kind != "S2":
        raise ValueError("relax needs an S2 field")
    res = relax(phi, args.steps, args.step_size, args.record_every)
    if args.output:
        write_field(res.phi, args.output)
    if args.trace:
        recs = {r["step"]: r for r in res.invariants}
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "energy", "step_size", "class", "hopf"])
            for k, e in enumerate(res.energy):
                tau = res.step_sizes[k - 1] if k > 0 else ""
                r = recs.get(k, {})
                cls = " ".join(str(v) for v in r["class"]) if "class" in r else ""
                w.writerow([k, repr(e), repr(tau) if tau != "" else "", cls, r.get("hopf", "")])
    report = {"command": "relax", "input": args.field, "grid": grid_info(phi.lattice),
              "steps": args.steps, "energy_initial": res.energy[0], "energy_final": res.energy[-1],
              "invariants": res.invariants, "class_constant": res.class_constant()}
    emit_report(report, args, args.report)
    return EXIT_OK if res.class_constant() else EXIT_DATA


COMMANDS = {
    "gen": cmd_gen,
    "invariants": cmd_invariants,
    "energy": cmd_energy,
    "lift": cmd_lift,
    "cech": cmd_cech,
    "intertwine": cmd_intertwine,
    "sweep": cmd_sweep,
    "relax": cmd_relax,
}


def set_threads(n: int | None):
    """Cap numerical library threads; must run before numpy is imported."""
    if n is None:
        env = os.environ.get("HOPFION_THREADS")
        n = int(env) if env else None
    if n is None:
        return
    if n < 1:
        raise ValueError("threads must be positive")
    for var in THREAD_VARS:
        os.environ[var] = str(n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        set_threads(args.threads)
        _apply_tolerances(args)
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"hopfion: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except HopfionError as exc:
        print(f"hopfion: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc, (IntegralityFailure, ClassMismatch)) else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
