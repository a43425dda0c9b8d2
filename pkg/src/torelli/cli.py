"""Command-line driver: ``torelli <command> ...``.

Every command writes one JSON report to stdout and a short human summary to
stderr.  Exit codes: 0 ok, 2 invalid input, 3 nullspace dimension mismatch
(with --strict), 4 witness count differs from 2g - 2, 5 too many homotopy
paths, 6 singular-point restart budget exhausted, 7 membership check failed.

Default seeds are 0 for every stochastic command.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dubrovin
from .dubrovin import DimensionMismatchWarning, build_table, membership_residual, recover_quartics
from .fixtures import FixtureError, TauFile, read_json
from .poly import HomogeneousPoly, PolyError, normalize, round_to_integers, substitute_linear
from .solve import (BudgetExhausted, GenusTooSmall, TooManyPaths, TrackerOptions, find_singular_point,
                    random_riemann_matrix, witness_count)
from .theta import DEFAULT_ABS_TOL, ThetaError, singular_residual

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DIMENSION = 3
EXIT_WITNESS = 4
EXIT_PATHS = 5
EXIT_BUDGET = 6
EXIT_MEMBERSHIP = 7


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def to_json(self) -> str:
        doc = {"command": self.command, "inputs": self.inputs, "outputs": self.outputs,
               "diagnostics": self.diagnostics, "exit_code": self.exit_code}
        return json.dumps(_finite(doc), indent=2, sort_keys=True)


def _finite(obj):
    """Replace non-finite floats by None so the report stays valid JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _cvec(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def _say(msg: str):
    print(msg, file=sys.stderr)


def _load_tau(path) -> tuple[TauFile, dict]:
    try:
        tf = TauFile.from_dict(read_json(path))
        tf.riemann_matrix()
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    except (FixtureError, ThetaError, ValueError, TypeError) as exc:
        raise CliError(f"{path}: {exc}") from exc
    digest = hashlib.sha256(tf.riemann_matrix().digest()).hexdigest()
    return tf, {"path": str(path), "label": tf.label, "genus": tf.genus, "digest": digest}


def _polys_json(polys) -> list[dict]:
    return [p.to_json() for p in polys]


def _user_forms(tf: TauFile, polys) -> list[HomogeneousPoly] | None:
    A = tf.to_user
    return None if A is None else [normalize(substitute_linear(p, A)) for p in polys]


def _recover(tf: TauFile, abs_tol: float, rank_tol: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DimensionMismatchWarning)
        return recover_quartics(tf.riemann_matrix(), abs_tol, rank_tol)


def cmd_recover(args) -> RunReport:
    tf, inputs = _load_tau(args.file)
    t0 = time.perf_counter()
    res = _recover(tf, args.abs_tol, args.tol)
    report = RunReport("recover", inputs)
    report.outputs["quartics"] = _polys_json(res.quartics)
    report.diagnostics.update(nullspace_dim=res.dim, expected_dim=res.expected_dim,
                              singular_values=[float(s) for s in res.singular_values])
    forms = res.quartics
    if args.basis_change:
        if tf.pi_a is None:
            raise CliError(f"{args.file}: --basis-change needs pi_a in the input")
        forms = _user_forms(tf, res.quartics)
        report.outputs["user_quartics"] = _polys_json(forms)
    if args.round_integers:
        rounded = []
        for p in forms:
            r = round_to_integers(p)
            rounded.append(None if r is None else {"poly": r[0].to_json(), "max_error": r[1], "text": repr(r[0])})
        report.outputs["integer_quartics"] = rounded
    if args.out:
        doc = {"genus": tf.genus, "coordinates": "normalized", "polynomials": _polys_json(res.quartics)}
        Path(args.out).write_text(json.dumps(doc, indent=2), encoding="utf-8")
    if args.timings:
        report.diagnostics["timings"] = {"total": time.perf_counter() - t0,
                                         **{f"order_{k}": v for k, v in res.table.timings.items()}}
    _say(f"recover: {res.dim} quartic(s), expected {res.expected_dim}")
    if args.round_integers:
        for r in report.outputs["integer_quartics"]:
            _say("  " + (r["text"] if r else "no small integer scaling found"))
    if not res.dimension_ok and args.strict:
        report.exit_code = EXIT_DIMENSION
    return report


def _load_polys(doc) -> list[HomogeneousPoly] | None:
    if isinstance(doc, dict) and "polynomials" in doc:
        return [HomogeneousPoly.from_json(p) for p in doc["polynomials"]]
    if isinstance(doc, dict) and "terms" in doc:
        return [HomogeneousPoly.from_json(doc)]
    if isinstance(doc, list):
        return [HomogeneousPoly.from_json(p) for p in doc]
    return None


def cmd_witness(args) -> RunReport:
    try:
        doc = read_json(args.file)
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.file}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise CliError(f"{args.file}: {exc.strerror or exc}") from exc
    try:
        polys = _load_polys(doc)
    except PolyError as exc:
        raise CliError(f"{args.file}: {exc}") from exc
    if polys is None:
        tf, inputs = _load_tau(args.file)
        polys = _recover(tf, args.abs_tol, 1e-8).quartics
    else:
        inputs = {"path": str(args.file), "polynomials": len(polys)}
        if not polys or len({(p.nvars, p.degree) for p in polys}) != 1:
            raise CliError(f"{args.file}: polynomials must share nvars and degree")
    g = polys[0].nvars
    t0 = time.perf_counter()
    try:
        rep = witness_count(polys, args.seed, TrackerOptions(tol=args.tol))
    except TooManyPaths as exc:
        raise CliError(str(exc), EXIT_PATHS) from exc
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    report = RunReport("witness", {**inputs, "seed": args.seed, "tol": args.tol})
    report.outputs.update(count=rep.count, expected=2 * g - 2, points=[_cvec(p) for p in rep.points])
    report.diagnostics.update(paths_tracked=rep.paths_tracked, failures=rep.failures,
                              residual_max=rep.residual_max, candidates=rep.candidates)
    if args.timings:
        report.diagnostics["timings"] = {"total": time.perf_counter() - t0}
    _say(f"witness: {rep.count} point(s) from {rep.paths_tracked} paths; a canonical curve has {2 * g - 2}")
    report.exit_code = EXIT_OK if rep.count == 2 * g - 2 else EXIT_WITNESS
    return report


def _verdict(tau, seed: int, tol: float) -> dict:
    res = _recover(TauFile(tau.genus, tau.tau), DEFAULT_ABS_TOL, 1e-8)
    rep = witness_count(res.quartics, seed, TrackerOptions(tol=tol))
    g = tau.genus
    return {"seed": seed, "nullspace_dim": res.dim, "count": rep.count,
            "verdict": "consistent with Jacobian" if rep.count == 2 * g - 2 else "not a Jacobian"}


def cmd_schottky(args) -> RunReport:
    if args.genus < 3:
        raise CliError("--genus must be at least 3")
    if args.trials < 0:
        raise CliError("--trials must be non-negative")
    # Im tau >= I by default; larger imaginary parts push tau toward the cusp, where theta
    # hat is dominated by a few lattice terms and the recovered quartics degenerate
    scale = args.scale if args.scale is not None else 1.0 / args.genus
    if not scale > 0:
        raise CliError("--scale must be positive")
    report = RunReport("schottky", {"genus": args.genus, "trials": args.trials, "seed": args.seed, "scale": scale})
    t0 = time.perf_counter()
    trials = []
    try:
        if args.tau:
            tf, inputs = _load_tau(args.tau)
            report.inputs["tau"] = inputs
            trials.append(_verdict(tf.riemann_matrix(), args.seed, args.tol))
        else:
            for i in range(args.trials):
                tau = random_riemann_matrix(args.genus, seed=args.seed + i, scale=scale)
                trials.append(_verdict(tau, args.seed + i, args.tol))
    except TooManyPaths as exc:
        raise CliError(str(exc), EXIT_PATHS) from exc
    tally = {"consistent with Jacobian": 0, "not a Jacobian": 0}
    for t in trials:
        tally[t["verdict"]] += 1
    report.outputs.update(trials=trials, tally=tally)
    if args.timings:
        report.diagnostics["timings"] = {"total": time.perf_counter() - t0}
    _say(f"schottky: {tally['not a Jacobian']}/{len(trials)} not a Jacobian")
    return report


def cmd_singular(args) -> RunReport:
    tf, inputs = _load_tau(args.file)
    tau = tf.riemann_matrix()
    report = RunReport("singular", {**inputs, "seed": args.seed, "budget": args.budget})
    t0 = time.perf_counter()
    try:
        z0 = find_singular_point(tau, seed=args.seed, budget=args.budget, abs_tol=args.abs_tol)
    except GenusTooSmall as exc:
        raise CliError(f"GenusTooSmall: {exc}") from exc
    except BudgetExhausted as exc:
        report.diagnostics["best_residual"] = exc.best_residual
        if exc.best_z is not None:
            report.outputs["best_z"] = _cvec(exc.best_z)
        report.exit_code = EXIT_BUDGET
        _say(f"singular: {exc}")
        return report
    res = singular_residual(z0, tau, args.abs_tol)
    report.outputs["z0"] = _cvec(z0)
    report.diagnostics["residual"] = res
    emits = [("quadric", args.emit_quadric, dubrovin.quadric_from_singular),
             ("cubic", args.emit_cubic, dubrovin.cubic_from_singular)]
    for name, wanted, fn in emits:
        if not wanted:
            continue
        form = normalize(fn(z0, tau, args.abs_tol))
        report.outputs[name] = form.to_json()
        user = _user_forms(tf, [form])
        if user is not None:
            report.outputs[f"user_{name}"] = user[0].to_json()
            _say(f"  {name}: {user[0]!r}")
    if args.timings:
        report.diagnostics["timings"] = {"total": time.perf_counter() - t0}
    _say(f"singular: z0 found, residual {res:.2e}")
    return report


def cmd_constants(args) -> RunReport:
    tf, inputs = _load_tau(args.file)
    try:
        orders = tuple(int(k) for k in args.orders.split(","))
        table = build_table(tf.riemann_matrix(), args.abs_tol, orders)
    except ValueError as exc:
        raise CliError(f"--orders: {exc}") from exc
    g = tf.genus
    report = RunReport("constants", {**inputs, "orders": list(table.orders)})
    counts = {"order_0": sum(e.value0 is not None for e in table.entries.values()),
              "order_0_2": table.count_value_and_hessian(), "order_4": table.count_fourth()}
    report.outputs["counts"] = counts
    report.outputs["formulas"] = {"order_0_2": 2**g * (g * (g + 1) // 2 + 1), "order_4": 2**g * math.comb(g + 3, 4)}
    if args.out:
        entries = []
        for eps, e in table.entries.items():
            item = {"eps": list(eps)}
            if e.value0 is not None:
                item["value0"] = {"re": e.value0.real, "im": e.value0.imag}
            if e.hessian is not None:
                item["hessian"] = {"re": e.hessian.real.tolist(), "im": e.hessian.imag.tolist()}
            if e.fourth:
                item["fourth"] = [{"idx": list(k), "re": v.real, "im": v.imag} for k, v in sorted(e.fourth.items())]
            entries.append(item)
        doc = {"genus": g, "abs_tol": table.abs_tol, "orders": list(table.orders), "entries": entries}
        Path(args.out).write_text(json.dumps(_finite(doc), indent=2), encoding="utf-8")
    if args.timings:
        report.diagnostics["timings"] = {f"order_{k}": v for k, v in table.timings.items()}
    _say(f"constants: {counts['order_0_2']} of orders 0 and 2, {counts['order_4']} of order 4")
    return report


def cmd_verify(args) -> RunReport:
    tf, inputs = _load_tau(args.file)
    if not tf.sample_points:
        raise CliError(f"{args.file}: no sample_points to verify against")
    res = _recover(tf, args.abs_tol, 1e-8)
    forms = _user_forms(tf, res.quartics) or res.quartics
    resid = membership_residual(forms, tf.sample_points)
    report = RunReport("verify", {**inputs, "tol": args.tol})
    report.outputs.update(residual=resid, points=len(tf.sample_points), quartics=len(forms),
                          coordinates="user" if tf.pi_a is not None else "normalized")
    report.exit_code = EXIT_OK if resid <= args.tol else EXIT_MEMBERSHIP
    _say(f"verify: max residual {resid:.2e} over {len(tf.sample_points)} points "
         f"({'ok' if report.exit_code == EXIT_OK else 'FAILED'})")
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torelli", description="Recover canonical curves from Riemann matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--abs-tol", type=float, default=DEFAULT_ABS_TOL, help="theta truncation tolerance")
        p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("recover", help="quartics from the theta-constant nullspace")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-8, help="relative rank tolerance")
    p.add_argument("--basis-change", action="store_true", help="also emit quartics in the file's differentials")
    p.add_argument("--round-integers", action="store_true")
    p.add_argument("--strict", action="store_true", help="exit 3 when the nullspace dimension is unexpected")
    p.add_argument("--out", help="write the quartics as polynomial JSON")
    common(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("witness", help="count points of a hyperplane section")
    p.add_argument("file", help="polynomial JSON or tau file")
    p.add_argument("--tol", type=float, default=1e-8)
    common(p, seed=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("schottky", help="Jacobian test on random Riemann matrices")
    p.add_argument("--genus", type=int, default=4)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--scale", type=float, default=None, help="imaginary part scale (default 1/genus)")
    p.add_argument("--tau", help="test this tau file instead of random matrices")
    common(p, seed=True)
    p.set_defaults(func=cmd_schottky)

    p = sub.add_parser("singular", help="a singular point of the theta divisor")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--emit-quadric", action="store_true")
    p.add_argument("--emit-cubic", action="store_true")
    common(p, seed=True)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("constants", help="table of theta constants")
    p.add_argument("file")
    p.add_argument("--orders", default="0,2,4")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", help="check recovered quartics on sample points")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        report = args.func(args)
    except CliError as exc:
        report = RunReport(args.command, {"path": getattr(args, "file", None)},
                           diagnostics={"error": str(exc)}, exit_code=exc.code)
        _say(f"{args.command}: error: {exc}")
    print(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
