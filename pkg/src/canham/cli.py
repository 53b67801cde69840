"""Command-line interface: ``canham <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical breakdown.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .canonical import ab_ratio
from .errors import K5Violation, LinearSolveFailure, NearSingular, SpecError
from .fields import Field, boundary_m, solve_field
from .fredholm import CSV_COLUMNS, hamiltonian_at, spectrum_at
from .kernels import SMOOTH_INFINITY, kernel_fourier, kernel_validate, load_spec
from .modelspace import boundary_identity, decay_scan, energy_identity, j_kernel
from .quadrature import Resolution
from .verify import CHECKS, PROFILES, RunConfig, build_report, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
BREAKDOWN = (NearSingular, LinearSolveFailure, K5Violation, FloatingPointError, np.linalg.LinAlgError)
FLOOR = 1e-13


class UsageError(Exception):
    pass


def parse_complex(text):
    """Accept 2i, 1+2i, -1+3i, 0+2j, (1+2j)."""
    s = str(text).strip().replace(" ", "").replace("i", "j").strip("()")
    if s.endswith("j") and (s == "j" or s[:-1] in ("", "+", "-")):
        s = s[:-1] + "1j"
    try:
        return complex(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def fmt_complex(z):
    return f"{z.real:.17e}{z.imag:+.17e}i"


def _threads():
    try:
        return max(1, int(os.environ.get("CANHAM_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Ordered map, parallel when CANHAM_THREADS > 1."""
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.17e" % v


def write_csv(path, header, rows):
    if path is None or path == "-":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in r] for r in rows])
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in r] for r in rows])


def emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


def _resolution(args):
    return Resolution(args.nodes, args.min_panels)


# -- commands ---------------------------------------------------------------


def cmd_kernel(args):
    spec = load_spec(args.spec)
    if args.action == "fourier":
        th = kernel_fourier(spec, args.z)
        emit_json({"z": fmt_complex(args.z), "theta": fmt_complex(th), "abs": abs(th)})
        return EXIT_OK
    rep = kernel_validate(spec)
    emit_json({
        "support_ok": rep.support_ok,
        "continuity_probe_max_jump": rep.continuity_probe_max_jump,
        "estimated_growth_c": rep.estimated_growth_c,
        "fourier_sup_bound": rep.fourier_sup_bound,
        "k5_small_symbol": rep.k5_small_symbol,
    })
    if not rep.k5_small_symbol:
        print("warning: symbol bound >= 1, invertibility of I +/- K[t] is not guaranteed", file=sys.stderr)
    return EXIT_OK if rep.support_ok else EXIT_FAIL


def cmd_hamiltonian(args):
    spec = load_spec(args.spec)
    if args.steps < 1 or args.t1 < args.t0:
        raise UsageError("need steps >= 1 and t1 >= t0")
    ts = np.linspace(args.t0, args.t1, args.steps + 1)
    res = _resolution(args)
    rows, failure = [], None
    results = _pmap(lambda t: _try(lambda: hamiltonian_at(spec, t, res)), ts)
    for t, r in zip(ts, results):
        if isinstance(r, Exception):
            failure = (t, r)
            break
        rows.append(r.row())
    write_csv(args.out, CSV_COLUMNS, rows)
    if failure is not None:
        print(f"invertibility fails at t={float(failure[0])!r}: {failure[1]}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _try(fn):
    try:
        return fn()
    except K5Violation as exc:
        return exc


def cmd_fields(args):
    spec = load_spec(args.spec)
    res = _resolution(args)
    xs = np.linspace(args.x0, args.x1, args.points)
    cols = [solve_field(spec, args.t, f, res)(xs) for f in Field]
    write_csv(args.out, ["x"] + [f.value for f in Field], np.column_stack([xs] + cols).tolist())
    return EXIT_OK


def cmd_spectrum(args):
    spec = load_spec(args.spec)
    res = _resolution(args)
    reps = _pmap(lambda t: spectrum_at(spec, t, res), args.t)
    rows = []
    for r in reps:
        l1p = r.lambda_plus[0] if r.lambda_plus else 0.0
        l1m = r.lambda_minus[0] if r.lambda_minus else 0.0
        rows.append([r.t, r.op_norm, r.gap_to_one, l1p, l1m, r.frobenius_sq, r.eig_sq_sum])
    write_csv(args.out, ["t", "op_norm", "gap_to_one", "lambda_plus_1", "lambda_minus_1",
                         "frobenius_sq", "eig_sq_sum"], rows)
    return EXIT_OK


def _config(args):
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read config {args.config}: {exc}") from exc
    spec_path = args.spec or data.pop("spec", None)
    if spec_path is None:
        raise UsageError("a kernel spec is required (--spec or 'spec' in --config)")
    data.pop("spec", None)
    for key in ("tmax", "nodes", "min_panels", "h", "tol_profile"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.z:
        data["z_list"] = args.z
    elif "z_list" in data:
        data["z_list"] = [parse_complex(z) for z in data["z_list"]]
    tols = dict(data.get("tolerances", {}))
    for item in args.tol or []:
        name, _, val = item.partition("=")
        tols[name] = float(val)
    data["tolerances"] = tols
    data["z_list"] = tuple(data.get("z_list", RunConfig.z_list))
    try:
        return spec_path, RunConfig(**data)
    except TypeError as exc:
        raise UsageError(f"bad config: {exc}") from exc


def cmd_verify(args):
    spec_path, cfg = _config(args)
    spec = load_spec(spec_path)
    names = None if args.identity == "all" else [args.identity]
    entries = run_suite(spec, cfg, names)
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    report = build_report(spec, cfg, entries, stamp)
    if args.report:
        emit_json(report, args.report)
    for e in entries:
        print(f"{'PASS' if e.passed else 'FAIL'}  {e.name:<20s} residual={e.residual:.3e}  tol={e.tolerance:.1e}")
    return EXIT_OK if report["all_passed"] else EXIT_FAIL


def _identity_error(spec, name, t, z, res):
    if name == "determinant":
        m = hamiltonian_at(spec, t, res).m
        inv_phi, psi = boundary_m(spec, t, res)
        return max(abs(m - inv_phi), abs(m - psi))
    if name == "boundary":
        return boundary_identity(spec, t, z, res)
    raise UsageError(f"refine supports determinant and boundary, not {name!r}")


def cmd_refine(args):
    if len(args.levels) < 2:
        raise UsageError("refine needs at least two resolution levels")
    spec = load_spec(args.spec)
    levels = sorted(args.levels)
    errs = [_identity_error(spec, args.identity, args.t, args.z, Resolution(n, args.min_panels)) for n in levels]
    spectral = spec.smoothness >= SMOOTH_INFINITY
    floor_order = math.log2(100.0) if spectral else 2.0
    orders, ok = [], True
    for (n0, e0), (n1, e1) in zip(zip(levels, errs), zip(levels[1:], errs[1:])):
        if e0 <= FLOOR:
            orders.append(None)
            continue
        order = math.log2(e0 / e1) / math.log2(n1 / n0) if e1 > 0 else math.inf
        orders.append(order if math.isfinite(order) else "inf")
        if e1 > FLOOR and order < floor_order:
            ok = False
    emit_json({
        "identity": args.identity,
        "t": args.t,
        "levels": levels,
        "errors": errs,
        "orders": orders,
        "floor_order": floor_order,
        "smoothness_class": "spectral" if spectral else "kinked",
        "passed": ok,
    })
    return EXIT_OK if ok else EXIT_FAIL


def cmd_modelspace(args):
    spec = load_spec(args.spec)
    res = _resolution(args)
    if args.action == "j":
        kv = j_kernel(spec, args.t, args.z, args.w, res)
        emit_json({"t": kv.t, "z": fmt_complex(kv.z), "w": fmt_complex(kv.w), "j_hat": fmt_complex(kv.j_hat)})
    elif args.action == "energy":
        er = energy_identity(spec, args.t, args.s, args.z, args.w, args.r_nodes, res)
        emit_json({"t": args.t, "s": args.s, "lhs": fmt_complex(er.lhs), "rhs": fmt_complex(er.rhs),
                   "residual": er.residual})
    else:
        ts = np.linspace(args.t0, args.t1, args.steps + 1)
        scan = decay_scan(spec, args.z, ts, resolution=res)
        write_csv(args.out, ["t", "j_hat_zz"], [list(v) for v in scan.values])
        if scan.increases:
            print(f"note: j(t;z,z) increased at t = {list(scan.increases)}", file=sys.stderr)
    return EXIT_OK


def cmd_ratio(args):
    spec = load_spec(args.spec)
    res = _resolution(args)
    rows = []
    for t in args.t:
        for z in args.z:
            p = ab_ratio(spec, t, z, args.route, res)
            rows.append([t, z.real, z.imag, p.a.real, p.a.imag, p.b.real, p.b.imag, p.route.value])
    write_csv(args.out, ["t", "re_z", "im_z", "re_a", "im_a", "re_b", "im_b", "route"], rows)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_res(p):
    p.add_argument("--nodes", type=int, default=64, help="Gauss nodes per panel")
    p.add_argument("--min-panels", dest="min_panels", type=int, default=2)


def build_parser():
    ap = argparse.ArgumentParser(prog="canham", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="validate a kernel spec or evaluate its Fourier transform")
    k.add_argument("action", choices=["validate", "fourier"])
    k.add_argument("--spec", required=True)
    k.add_argument("--z", type=parse_complex, default=2j)
    k.set_defaults(func=cmd_kernel)

    h = sub.add_parser("hamiltonian", help="write the Hamiltonian curve as CSV")
    h.add_argument("--spec", required=True)
    h.add_argument("--t0", type=float, default=0.0)
    h.add_argument("--t1", type=float, default=2.0)
    h.add_argument("--steps", type=int, default=64)
    h.add_argument("--out")
    _add_res(h)
    h.set_defaults(func=cmd_hamiltonian)

    f = sub.add_parser("fields", help="field profiles Phi, Psi, PhiPlus, PhiMinus at fixed t")
    f.add_argument("--spec", required=True)
    f.add_argument("--t", type=float, required=True)
    f.add_argument("--x0", type=float, default=-2.0)
    f.add_argument("--x1", type=float, default=2.0)
    f.add_argument("--points", type=int, default=81)
    f.add_argument("--out")
    _add_res(f)
    f.set_defaults(func=cmd_fields)

    s = sub.add_parser("spectrum", help="eigenvalue summary of K[t]")
    s.add_argument("--spec", required=True)
    s.add_argument("--t", type=float, nargs="+", required=True)
    s.add_argument("--out")
    _add_res(s)
    s.set_defaults(func=cmd_spectrum)

    r = sub.add_parser("ratio", help="a(t,z), b(t,z) on a (t, z) lattice")
    r.add_argument("--spec", required=True)
    r.add_argument("--t", type=float, nargs="+", required=True)
    r.add_argument("--z", type=parse_complex, nargs="+", default=[2j])
    r.add_argument("--route", default="PsiPhiTail", choices=["PsiPhiTail", "PhiPlusMinusTail"])
    r.add_argument("--out")
    _add_res(r)
    r.set_defaults(func=cmd_ratio)

    v = sub.add_parser("verify", help="run the identity suite")
    v.add_argument("identity", choices=["all", *CHECKS])
    v.add_argument("--spec")
    v.add_argument("--config", help="JSON run configuration")
    v.add_argument("--tmax", type=float)
    v.add_argument("--h", type=float)
    v.add_argument("--nodes", type=int)
    v.add_argument("--min-panels", dest="min_panels", type=int)
    v.add_argument("--z", type=parse_complex, nargs="+")
    v.add_argument("--tol-profile", dest="tol_profile", choices=sorted(PROFILES))
    v.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override one tolerance")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    rf = sub.add_parser("refine", help="observed convergence order under resolution doubling")
    rf.add_argument("--spec", required=True)
    rf.add_argument("--identity", default="determinant", choices=["determinant", "boundary"])
    rf.add_argument("--t", type=float, default=1.0)
    rf.add_argument("--z", type=parse_complex, default=2j)
    rf.add_argument("--levels", type=int, nargs="+", default=[8, 16, 32])
    rf.add_argument("--min-panels", dest="min_panels", type=int, default=2)
    rf.set_defaults(func=cmd_refine)

    m = sub.add_parser("modelspace", help="reproducing kernel, energy identity, decay scan")
    m.add_argument("action", choices=["j", "energy", "decay"])
    m.add_argument("--spec", required=True)
    m.add_argument("--t", type=float, default=0.0)
    m.add_argument("--s", type=float, default=1.0)
    m.add_argument("--z", type=parse_complex, default=2j)
    m.add_argument("--w", type=parse_complex, default=2j)
    m.add_argument("--r-nodes", dest="r_nodes", type=int, default=64)
    m.add_argument("--t0", type=float, default=0.0)
    m.add_argument("--t1", type=float, default=3.0)
    m.add_argument("--steps", type=int, default=12)
    m.add_argument("--out")
    _add_res(m)
    m.set_defaults(func=cmd_modelspace)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, UsageError, ValueError) as exc:
        if isinstance(exc, BREAKDOWN):
            print(f"numerical breakdown: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BREAKDOWN as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
