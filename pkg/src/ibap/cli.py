"""File-driven command-line front end.

Problem descriptions are JSON documents (schemas in the README): a
`check`/`solve`/`iterate` problem lists a field tag, the ambient
dimension, named spanning-vector lists, and optionally a prescription
and an anchor; `moments` and `signal` have their own small schemas.
Complex scalars are written as two-element [re, im] arrays; all numerals
are decimal.

Exit codes, stable across commands:
  0  success
  2  infeasible prescription (a certificate is printed)
  3  independence or inverse-best-approximation failure where required
  4  parse or validation error

The environment variable IBAP_DEFAULT_TOL, when set, overrides the
default iteration tolerance of 1e-10.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .applications import (
    HypothesisError,
    MaskedSignalProblem,
    SlowFamilySpec,
    dft,
    recover_with_measurements,
    slow_family,
    solve_moments,
    time_frequency_recover,
    worst_aligned_start,
)
from .family import (
    DependentFamilyError,
    Family,
    IbapFailureError,
    InfeasiblePrescriptionError,
    IbapReport,
    uniqueness_check,
    verify_ibap,
)
from .solvers import (
    SolveOptions,
    best_approximation,
    direct_solve,
    prescription_residual,
    rate_bound,
    solve_min_norm,
)
from .subspaces import COMPLEX, REAL, Subspace, add_all, field_dtype, inner

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NO_IBAP = 3
EXIT_PARSE = 4

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000
TOL_ENV_VAR = "IBAP_DEFAULT_TOL"


class ParseError(ValueError):
    pass


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return DEFAULT_TOL
    try:
        val = float(raw)
    except ValueError:
        raise ParseError(f"{TOL_ENV_VAR}={raw!r} is not a number") from None
    if not val > 0:
        raise ParseError(f"{TOL_ENV_VAR} must be positive")
    return val


# ---------------------------------------------------------------- parsing


def _scalar(value, field: str, what: str):
    if isinstance(value, bool):
        raise ParseError(f"{what}: booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, list):
        if field != COMPLEX:
            raise ParseError(f"{what}: [re, im] scalars require the complex field")
        if len(value) != 2 or not all(isinstance(p, (int, float)) and not isinstance(p, bool)
                                      for p in value):
            raise ParseError(f"{what}: complex scalars must be [re, im] number pairs")
        return complex(float(value[0]), float(value[1]))
    raise ParseError(f"{what}: expected a number or [re, im] pair, got {value!r}")


def _vector(values, n: int, field: str, what: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ParseError(f"{what}: expected a list of scalars")
    if len(values) != n:
        raise ParseError(f"{what}: has {len(values)} entries, expected {n}")
    entries = [_scalar(v, field, f"{what}[{i}]") for i, v in enumerate(values)]
    return np.asarray(entries, dtype=field_dtype(field))


def _encode_scalar(z, field: str):
    if field == COMPLEX:
        z = complex(z)
        return [z.real, z.imag]
    return float(np.real(z))


def _encode_vector(vec, field: str):
    return [_encode_scalar(z, field) for z in np.asarray(vec)]


@dataclass(frozen=True)
class Problem:
    """Raw content of a check/solve/iterate problem file."""

    field: str
    ambient_dim: int
    names: tuple
    spans: tuple          # one tuple of vectors per subspace
    prescription: tuple | None
    anchor: np.ndarray | None


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    return doc


def _field_of(doc: dict, path: str) -> str:
    field = doc.get("field", REAL)
    if field not in (REAL, COMPLEX):
        raise ParseError(f"{path}: field must be 'real' or 'complex', got {field!r}")
    return field


def load_problem(path: str) -> Problem:
    doc = _load_json(path)
    field = _field_of(doc, path)
    n = doc.get("ambient_dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"{path}: ambient_dim must be a positive integer")
    raw_subs = doc.get("subspaces")
    if not isinstance(raw_subs, list) or not raw_subs:
        raise ParseError(f"{path}: subspaces must be a nonempty list")
    names = []
    spans = []
    for i, entry in enumerate(raw_subs):
        if not isinstance(entry, dict) or "vectors" not in entry:
            raise ParseError(f"{path}: subspace {i + 1} must be an object with 'vectors'")
        name = entry.get("name", f"U{i + 1}")
        if not isinstance(name, str):
            raise ParseError(f"{path}: subspace {i + 1} name must be a string")
        vectors = entry["vectors"]
        if not isinstance(vectors, list):
            raise ParseError(f"{path}: subspace {name}: vectors must be a list")
        span = tuple(_vector(v, n, field, f"subspace {name} vector {j + 1}")
                     for j, v in enumerate(vectors))
        names.append(name)
        spans.append(span)
    prescription = None
    if doc.get("prescription") is not None:
        raw = doc["prescription"]
        if not isinstance(raw, list) or len(raw) != len(spans):
            raise ParseError(f"{path}: prescription must list one vector per subspace")
        prescription = tuple(_vector(v, n, field, f"prescription vector {j + 1}")
                             for j, v in enumerate(raw))
    anchor = None
    if doc.get("anchor") is not None:
        anchor = _vector(doc["anchor"], n, field, "anchor")
    return Problem(field=field, ambient_dim=n, names=tuple(names), spans=tuple(spans),
                   prescription=prescription, anchor=anchor)


def save_problem(path: str, problem: Problem) -> None:
    doc = {
        "field": problem.field,
        "ambient_dim": problem.ambient_dim,
        "subspaces": [
            {"name": name, "vectors": [_encode_vector(v, problem.field) for v in span]}
            for name, span in zip(problem.names, problem.spans)
        ],
    }
    if problem.prescription is not None:
        doc["prescription"] = [_encode_vector(v, problem.field) for v in problem.prescription]
    if problem.anchor is not None:
        doc["anchor"] = _encode_vector(problem.anchor, problem.field)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def build_family(problem: Problem) -> Family:
    subs = tuple(Subspace.from_spanning(list(span), problem.ambient_dim, field=problem.field)
                 for span in problem.spans)
    return Family(subs)


def _require_prescription(problem: Problem, path: str) -> list:
    if problem.prescription is None:
        raise ParseError(f"{path}: a prescription is required for this command")
    return list(problem.prescription)


def _parse_cli_vector(text: str, n: int, field: str, what: str) -> np.ndarray:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON ({exc})") from None
    return _vector(raw, n, field, what)


# ---------------------------------------------------------------- output


def _fmt_vector(vec, field: str) -> str:
    return json.dumps(_encode_vector(vec, field))


def _print_report(report: IbapReport, family: Family, names) -> None:
    print(f"ambient dimension: {family.ambient_dim} ({family.field})")
    print("subspaces: " + ", ".join(f"{name} (dim {s.dim})"
                                    for name, s in zip(names, family.subspaces)))
    print(f"independent: {'yes' if report.independent else 'no'}")
    print(f"inverse best approximation property: {'yes' if report.verdict else 'no'}")
    for lev in report.levels:
        gamma = "inf" if math.isinf(lev.gamma) else f"{lev.gamma:.12g}"
        flag = "  [degenerate]" if lev.degenerate else ""
        print(f"level {lev.index}: norm = {lev.norm:.12g}  cos angle = {lev.cos_angle:.12g}"
              f"  gamma = {gamma}{flag}")
    print(f"rate bound alpha: {report.alpha:.12g}")
    print(f"sum of dims: {report.sum_dims}  dim of sum: {report.dim_sum}")
    print("trailing sums closed: yes (finite dimension)")


def _report_dict(report: IbapReport, unique: bool) -> dict:
    return {
        "verdict": report.verdict,
        "independent": report.independent,
        "unique": unique,
        "alpha": report.alpha,
        "sum_dims": report.sum_dims,
        "dim_sum": report.dim_sum,
        "sums_closed": True,
        "levels": [
            {
                "index": lev.index,
                "norm": lev.norm,
                "cos_angle": lev.cos_angle,
                "gamma": None if math.isinf(lev.gamma) else lev.gamma,
                "degenerate": lev.degenerate,
            }
            for lev in report.levels
        ],
    }


def _write_trace_csv(path: str, trace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "max_residual", "dist_to_solution", "bound"])
        for rec in trace.records:
            writer.writerow([
                rec.index,
                repr(rec.max_residual),
                "" if rec.dist_to_solution is None else repr(rec.dist_to_solution),
                "" if rec.bound is None else repr(rec.bound),
            ])


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    problem = load_problem(args.problem)
    family = build_family(problem)
    report = verify_ibap(family)
    unique = uniqueness_check(family)
    _print_report(report, family, problem.names)
    print(f"unique solutions: {'yes' if unique else 'no'}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(_report_dict(report, unique), fh, indent=1)
            fh.write("\n")
    return EXIT_OK if report.verdict else EXIT_NO_IBAP


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    family = build_family(problem)
    prescription = _require_prescription(problem, args.problem)
    anchor = problem.anchor
    if args.anchor is not None:
        anchor = _parse_cli_vector(args.anchor, problem.ambient_dim, problem.field, "--anchor")
    if args.method == "direct":
        x = direct_solve(family, prescription, anchor=anchor).particular
    elif args.method == "recursion":
        x = solve_min_norm(family, prescription)
        if anchor is not None:
            parallel = add_all(family.subspaces).complement()
            x = x + parallel.project(anchor - x)
    else:
        opts = SolveOptions(max_iter=args.max_iter, tol=args.tol)
        start = anchor if anchor is not None else np.zeros(problem.ambient_dim,
                                                           dtype=family.dtype)
        x, trace = best_approximation(start, family, prescription, opts)
        if not trace.converged:
            print(f"warning: stopped after {trace.sweeps} sweeps above tolerance",
                  file=sys.stderr)
    print(f"method: {args.method}")
    if anchor is not None:
        print("best approximation to anchor")
    print(f"solution: {_fmt_vector(x, problem.field)}")
    print(f"norm: {float(np.linalg.norm(x))!r}")
    print(f"max residual: {prescription_residual(family, prescription, x):.6e}")
    return EXIT_OK


def cmd_iterate(args) -> int:
    problem = load_problem(args.problem)
    family = build_family(problem)
    prescription = _require_prescription(problem, args.problem)
    start = problem.anchor if problem.anchor is not None else np.zeros(
        problem.ambient_dim, dtype=family.dtype)
    opts = SolveOptions(max_iter=args.max_iter, tol=args.tol, record_trace=True)
    x, trace = best_approximation(start, family, prescription, opts)
    if args.trace:
        _write_trace_csv(args.trace, trace)
        print(f"trace written to {args.trace}")
    alpha = "none" if trace.alpha is None else f"{trace.alpha!r}"
    print(f"sweeps: {trace.sweeps}  converged: {'yes' if trace.converged else 'no'}")
    print(f"rate bound alpha: {alpha}")
    print(f"solution: {_fmt_vector(x, problem.field)}")
    print(f"max residual: {trace.records[-1].max_residual:.6e}")
    return EXIT_OK


def cmd_moments(args) -> int:
    path = args.problem
    doc = _load_json(path)
    field = _field_of(doc, path)
    n = doc.get("ambient_dim")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"{path}: ambient_dim must be a positive integer")
    if doc.get("space") is None:
        space = Subspace.full(n, field=field)
    else:
        if not isinstance(doc["space"], list):
            raise ParseError(f"{path}: space must be a list of spanning vectors")
        vecs = [_vector(v, n, field, f"space vector {i + 1}")
                for i, v in enumerate(doc["space"])]
        space = Subspace.from_spanning(vecs, n, field=field)
    constraints = doc.get("constraints")
    if not isinstance(constraints, list):
        raise ParseError(f"{path}: constraints must be a list")
    vectors = []
    values = []
    for i, entry in enumerate(constraints):
        if not isinstance(entry, dict) or "vector" not in entry or "value" not in entry:
            raise ParseError(f"{path}: constraint {i + 1} needs 'vector' and 'value'")
        vectors.append(_vector(entry["vector"], n, field, f"constraint vector {i + 1}"))
        values.append(_scalar(entry["value"], field, f"constraint value {i + 1}"))
    x = solve_moments(space, vectors, values)
    print(f"solution: {_fmt_vector(x, field)}")
    print(f"norm: {float(np.linalg.norm(x))!r}")
    gap = float(np.linalg.norm(space.project(x) - x))
    print(f"space membership residual: {gap:.6e}")
    for i, (v, eta) in enumerate(zip(vectors, values)):
        err = abs(inner(x, v) - eta)
        print(f"moment {i + 1} residual: {err:.6e}")
    return EXIT_OK


def cmd_signal(args) -> int:
    path = args.problem
    doc = _load_json(path)
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"{path}: n must be a positive integer")
    for key in ("time_mask", "freq_mask", "time_values", "freq_values"):
        if not isinstance(doc.get(key), list):
            raise ParseError(f"{path}: {key} must be a list")
    tmask = doc["time_mask"]
    fmask = doc["freq_mask"]
    if not all(isinstance(i, int) and not isinstance(i, bool) for i in tmask + fmask):
        raise ParseError(f"{path}: masks must contain integers")
    tvals = [_scalar(v, COMPLEX, f"time value {i + 1}") for i, v in enumerate(doc["time_values"])]
    fvals = [_scalar(v, COMPLEX, f"freq value {i + 1}") for i, v in enumerate(doc["freq_values"])]
    problem = MaskedSignalProblem(n=n, time_mask=tuple(tmask), freq_mask=tuple(fmask),
                                  time_values=np.asarray(tvals, dtype=np.complex128),
                                  freq_values=np.asarray(fvals, dtype=np.complex128))
    measurements = []
    values = []
    for i, entry in enumerate(doc.get("measurements", []) or []):
        if not isinstance(entry, dict) or "vector" not in entry or "value" not in entry:
            raise ParseError(f"{path}: measurement {i + 1} needs 'vector' and 'value'")
        measurements.append(_vector(entry["vector"], n, COMPLEX, f"measurement vector {i + 1}"))
        values.append(_scalar(entry["value"], COMPLEX, f"measurement value {i + 1}"))
    if measurements:
        x = recover_with_measurements(problem, measurements, values)
    else:
        x = time_frequency_recover(problem)
    spectrum = dft(x)
    print(f"solution: {_fmt_vector(x, COMPLEX)}")
    terr = max((abs(x[i] - problem.time_values[k]) for k, i in enumerate(problem.time_mask)),
               default=0.0)
    ferr = max((abs(spectrum[i] - problem.freq_values[k])
                for k, i in enumerate(problem.freq_mask)), default=0.0)
    print(f"time residual: {terr:.6e}")
    print(f"frequency residual: {ferr:.6e}")
    for i, (m, eta) in enumerate(zip(measurements, values)):
        print(f"measurement {i + 1} residual: {abs(inner(x, m) - eta):.6e}")
    return EXIT_OK


def cmd_slowdemo(args) -> int:
    if args.alphas is not None:
        try:
            raw = json.loads(args.alphas)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--alphas: invalid JSON ({exc})") from None
        if not isinstance(raw, list) or not raw:
            raise ParseError("--alphas must be a nonempty JSON list of positive numbers")
        spec = SlowFamilySpec(len(raw), tuple(float(a) for a in raw))
        if args.truncation is not None and args.truncation != len(raw):
            raise ParseError("--truncation disagrees with the length of --alphas")
    else:
        if args.truncation is None:
            raise ParseError("either --alphas or --truncation is required")
        spec = SlowFamilySpec.harmonic(args.truncation)
    family, predicted = slow_family(spec)
    if args.start is not None:
        start = _parse_cli_vector(args.start, family.ambient_dim, REAL, "--start")
    else:
        start = worst_aligned_start(spec)
    opts = SolveOptions(max_iter=args.max_iter, tol=args.tol, record_trace=True)
    zeros = np.zeros(family.ambient_dim)
    _, trace = best_approximation(start, family, [zeros, zeros], opts)
    print(f"predicted norm: {predicted!r}")
    print(f"rate bound alpha: {rate_bound(family)!r}")
    print(f"per-sweep contraction (squared norm): {predicted * predicted!r}")
    print(f"sweeps: {trace.sweeps}  converged: {'yes' if trace.converged else 'no'}")
    if args.trace:
        _write_trace_csv(args.trace, trace)
        print(f"trace written to {args.trace}")
    return EXIT_OK


# ---------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibap",
        description="Decide the inverse best approximation property and solve "
                    "prescribed-projection problems from JSON problem files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide the property and print certificates")
    p.add_argument("problem")
    p.add_argument("--json-out", default=None, help="write a machine-readable report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve the prescription in the problem file")
    p.add_argument("problem")
    p.add_argument("--method", choices=["direct", "recursion", "iterate"], default="direct")
    p.add_argument("--anchor", default=None,
                   help="JSON vector; computes the best approximation to it")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("iterate", help="run the periodic projection iteration")
    p.add_argument("problem")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--trace", default=None, help="write a CSV convergence trace")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("moments", help="constrained moment problem")
    p.add_argument("problem")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("signal", help="masked time/frequency recovery")
    p.add_argument("problem")
    p.set_defaults(func=cmd_signal)

    p = sub.add_parser("slowdemo", help="angle-degradation demonstration family")
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--alphas", default=None, help="JSON list of positive weights")
    p.add_argument("--start", default=None, help="JSON start vector")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--trace", default=None, help="write a CSV convergence trace")
    p.set_defaults(func=cmd_slowdemo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "tol") and args.tol is None:
        try:
            args.tol = default_tol()
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasiblePrescriptionError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        print(f"certificate residual: {exc.certificate.residual:.6e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DependentFamilyError as exc:
        print(f"dependent family: {exc}", file=sys.stderr)
        return EXIT_NO_IBAP
    except IbapFailureError as exc:
        print(f"property failure: {exc}", file=sys.stderr)
        return EXIT_NO_IBAP
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_NO_IBAP
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
