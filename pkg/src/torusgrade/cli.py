"""Command line entry point.

Subcommands::

    torusgrade check     --spec SPEC.json [--tol 1e-9]
    torusgrade decompose (--spec SPEC.json | --weights W) --element A.json --out DIR
    torusgrade fejer     --mode matrix|circle|arc --N 8,32,128 [--out table.csv]
    torusgrade demo      circle|restricted-arc|unboundedness --out DIR

Every subcommand accepts ``--seed``, ``--tol`` and ``--threads``.  Exit codes:
0 success, 1 an axiom or decomposition failure (report still written), 2 bad
input or unwritable output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import formats as fmt
from .cesaro import FiniteElement, MatrixElement, convergence_table
from .function_models import (
    DEFAULT_BANDS,
    DEFAULT_EXTENSION_BAND,
    DEFAULT_FINE_GRID,
    DEFAULT_ITERS,
    Arc,
    CircleFunction,
    SampledFunction,
    TrigPoly,
    abs_sin,
    arc_independence_rank,
    coefficient_distance,
    extend,
    lower_bound_ladder,
    restrict,
    restricted_cesaro_errors,
)
from .grading import (
    DEFAULT_SEED,
    DecompositionError,
    GradedDecomposer,
    check_grading,
    check_representation,
)
from .matrix_core import DEFAULT_TOL, InputError, op_norm
from .torus_action import (
    WeightedAction,
    random_torus_point,
    spectral_component,
    spectral_component_quadrature,
    support_degrees,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

CIRCLE_FUNCTIONS = {"abs-sin": abs_sin}


class UsageError(Exception):
    pass


def _header(args, command: str) -> dict:
    return {"tool": "torusgrade", "version": __version__, "command": command,
            "seed": args.seed, "tolerances": {"tol": args.tol}}


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _outdir(path: str) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
        probe = p / ".write-test"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"cannot write to {path}: {exc.strerror or exc}") from exc
    return p


def _degree_tag(g) -> str:
    return "_".join(f"m{-v}" if v < 0 else str(v) for v in g)


def cmd_check(args) -> int:
    spec = fmt.read_spec(args.spec)
    report = check_grading(spec, args.tol)
    rng = np.random.default_rng(args.seed)
    gamma = random_torus_point(rng, spec.rank)
    rep = check_representation(spec, gamma, max(args.tol, 1e-12))
    axioms = report.to_dict()
    axioms["representation"] = {
        "status": "pass" if rep.passed else "fail",
        "worst_residual": max(rep.worst_multiplicative, rep.worst_adjoint),
        "witness": rep.witness,
    }
    passed = report.passed and rep.passed
    doc = _header(args, "check")
    doc.update({"spec": {"rank": spec.rank, "dim": spec.dim, "degrees": [list(g) for g in spec.degrees()]},
                "axioms": axioms, "status": "pass" if passed else "fail"})
    sys.stdout.write(fmt.dumps(doc) + "\n")
    return EXIT_OK if passed else EXIT_FAIL


def _components(args, a: np.ndarray):
    """(components by degree, extra report fields) for the chosen grading."""
    if args.weights is not None:
        alpha = WeightedAction(fmt.parse_weights(args.weights))
        if alpha.dim != a.shape[0]:
            raise InputError(f"element has dim {a.shape[0]}, weights describe M_{alpha.dim}")
        comps = {n: spectral_component(alpha, a, n) for n in support_degrees(alpha, a)}
        quad = max((op_norm(spectral_component_quadrature(alpha, a, n, threads=args.threads) - c)
                    for n, c in comps.items()), default=0.0)
        return comps, {"mode": "weights", "weights": alpha.weights.tolist(), "quadrature_discrepancy": quad}
    spec = fmt.read_spec(args.spec)
    if spec.dim != a.shape[0]:
        raise InputError(f"element has dim {a.shape[0]}, spec has dim {spec.dim}")
    comps = GradedDecomposer(spec, args.tol).components(a)
    comps = {g: c for g, c in comps.items() if op_norm(c) > 0.0}
    return comps, {"mode": "spec"}


def cmd_decompose(args) -> int:
    a = fmt.read_matrix(args.element)
    out = _outdir(args.out)
    try:
        comps, extra = _components(args, a)
    except DecompositionError as exc:
        doc = _header(args, "decompose")
        doc.update({"status": "fail", "error": str(exc), "residual": exc.residual})
        sys.stdout.write(fmt.dumps(doc) + "\n")
        return EXIT_FAIL
    total = np.zeros_like(a)
    for c in comps.values():
        total = total + c
    err = op_norm(total - a)
    files = []
    for g, c in sorted(comps.items()):
        name = f"component_{_degree_tag(g)}.json"
        (out / name).write_text(fmt.dumps({"degree": list(g), "matrix": fmt.matrix_to_json(c)}) + "\n",
                                encoding="utf-8")
        files.append({"degree": list(g), "file": name, "norm": op_norm(c)})
    ok = err <= max(args.tol, 1e-12) * max(1.0, op_norm(a))
    doc = _header(args, "decompose")
    doc.update(extra)
    doc.update({"components": files, "reassembly_error": err, "status": "pass" if ok else "fail"})
    text = fmt.dumps(doc) + "\n"
    (out / "index.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _parse_N(text: str, k: int) -> list[tuple[int, ...]]:
    Ns = fmt.parse_multi_indices(text, k)
    if any(c < 0 for N in Ns for c in N):
        raise InputError("N must be nonnegative")
    return Ns


def _arc_target(args) -> SampledFunction:
    if args.samples:
        t, v = fmt.read_samples_csv(args.samples)
        X = Arc(float(t[0]), float(t[-1]), t.size)
        if np.max(np.abs(X.params() - t)) > 1e-9:
            raise InputError("arc samples must be on a uniform grid")
        return SampledFunction(X, v)
    return restrict(TrigPoly.monomial(args.degree), Arc(args.t0, args.t1, args.arc_grid))


def cmd_fejer(args) -> int:
    if args.mode == "matrix":
        if args.element is None or (args.weights is None) == (args.spec is None):
            raise UsageError("matrix mode needs --element and exactly one of --weights/--spec")
        a = fmt.read_matrix(args.element)
        if args.weights is not None:
            elem = MatrixElement(WeightedAction(fmt.parse_weights(args.weights)), a)
        else:
            spec = fmt.read_spec(args.spec)
            elem = FiniteElement(GradedDecomposer(spec, args.tol).components(a))
        Ns = _parse_N(args.N, elem.rank)
        rows = [tuple(N) + (err,) for N, err in convergence_table(elem, Ns)]
        header = [f"N_{j + 1}" for j in range(elem.rank)] + ["error"]
    elif args.mode == "circle":
        Ns = _parse_N(args.N, 1)
        elem = CircleFunction(CIRCLE_FUNCTIONS[args.function], args.sample_size)
        rows = [tuple(N) + (err,) for N, err in convergence_table(elem, Ns)]
        header = ["N_1", "error"]
    else:
        ns = [N[0] for N in _parse_N(args.N, 1)]
        f = _arc_target(args)
        cols = [restricted_cesaro_errors(extend(f, m, args.band), f, ns)
                for m in ("linear_gap", "smooth_gap")]
        rows = [(n, e1, e2) for n, e1, e2 in zip(ns, *cols)]
        header = ["N_1", "error_linear_gap", "error_smooth_gap"]
    _emit(fmt.format_csv(header, rows), args.out)
    return EXIT_OK


def _demo_circle(args, out: Path) -> list[str]:
    elem = CircleFunction(abs_sin, DEFAULT_FINE_GRID)
    B = 16
    fmt.write_csv(out / "fourier_coefficients.csv", ["n", "re", "im"],
                  [(n, elem.coefficient(n).real, elem.coefficient(n).imag) for n in range(-B, B + 1)])
    table = convergence_table(elem, [(8,), (32,), (128,)])
    fmt.write_csv(out / "fejer_convergence.csv", ["N_1", "error"], [N + (e,) for N, e in table])
    lines = ["demo circle: f(exp(2 pi i t)) = |sin(pi t)| on C(T)",
             f"fhat(0) = {elem.coefficient(0).real:.12f}   (2/pi = {2 / np.pi:.12f})",
             "sup-grid error of the Cesaro means:"]
    lines += [f"  N = {N[0]:4d}   error = {e:.6e}" for N, e in table]
    lines.append("files: fourier_coefficients.csv, fejer_convergence.csv")
    return lines


def _demo_arc(args, out: Path) -> list[str]:
    X = Arc(0.0, 0.5)
    f = restrict(TrigPoly.monomial(2), X)
    exts = {m: extend(f, m, DEFAULT_EXTENSION_BAND) for m in ("linear_gap", "smooth_gap")}
    g1, g2 = exts["linear_gap"], exts["smooth_gap"]
    B = 16
    fmt.write_csv(out / "coefficient_divergence.csv",
                  ["n", "re_linear_gap", "im_linear_gap", "re_smooth_gap", "im_smooth_gap", "abs_difference"],
                  [(n, g1.poly.coefficient(n).real, g1.poly.coefficient(n).imag,
                    g2.poly.coefficient(n).real, g2.poly.coefficient(n).imag,
                    abs(g1.poly.coefficient(n) - g2.poly.coefficient(n))) for n in range(-B, B + 1)])
    for m, e in exts.items():
        fmt.write_csv(out / f"extension_{m}.csv", ["n", "re", "im"], fmt.trigpoly_rows(e.poly))
    fmt.write_csv(out / "restricted_samples.csv", ["t", "re", "im"], fmt.samples_rows(X.params(), f.values))
    Ns = [16, 64, 256]
    cols = [restricted_cesaro_errors(e, f, Ns) for e in exts.values()]
    fmt.write_csv(out / "restricted_convergence.csv", ["N_1", "error_linear_gap", "error_smooth_gap"],
                  list(zip(Ns, *cols)))
    rank = arc_independence_rank(Arc(0.0, 0.5, 512), range(-8, 9))
    dist = coefficient_distance(g1.poly, g2.poly)
    lines = ["demo restricted-arc: X = arc [0, 1/2], f = e_2 restricted to X",
             f"Gram rank of e_-8..e_8 on X: {rank} of 17",
             f"extension error: linear_gap {g1.eps_ext:.3e}, smooth_gap {g2.eps_ext:.3e}",
             f"l-inf distance between coefficient sequences: {dist:.6e}",
             "restricted Cesaro errors (linear_gap, smooth_gap):"]
    lines += [f"  N = {n:4d}   {e1:.6e}   {e2:.6e}" for n, e1, e2 in zip(Ns, *cols)]
    lines.append("files: coefficient_divergence.csv, extension_linear_gap.csv, extension_smooth_gap.csv, "
                 "restricted_samples.csv, restricted_convergence.csv")
    return lines


def _demo_unbounded(args, out: Path) -> list[str]:
    bands = [int(b) for b in args.bands.split(",")] if args.bands else list(DEFAULT_BANDS)
    if any(b < 1 for b in bands):
        raise InputError("bands must be positive")
    arc = lower_bound_ladder(Arc(0.0, 0.5), bands, args.iters)
    control = lower_bound_ladder(Arc(0.0, 0.999), bands, args.iters)
    rows = [(lb.band, lb.bound, lb.value, lb.fine_value, lb.fine_bound, lb.status, cb.bound)
            for lb, cb in zip(arc, control)]
    fmt.write_csv(out / "zero_component_bounds.csv",
                  ["B", "lower_bound", "grid_max", "fine_grid_max", "fine_lower_bound", "status",
                   "full_circle_control"], rows)
    lines = ["demo unboundedness: c_0 functional on span{e_n|_X : |n| <= B}, X = arc [0, 1/2]",
             "   B    lower bound   (4x finer grid)   full-circle control"]
    lines += [f"  {lb.band:3d}   {lb.bound:12.6e}   {lb.fine_bound:12.6e}   {cb.bound:.6f}"
              for lb, cb in zip(arc, control)]
    lines.append("files: zero_component_bounds.csv")
    return lines


DEMOS = {"circle": _demo_circle, "restricted-arc": _demo_arc, "unboundedness": _demo_unbounded}


def cmd_demo(args) -> int:
    out = _outdir(args.out)
    lines = DEMOS[args.name](args, out)
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed for sampled checks")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    common.add_argument("--threads", type=int, default=1, help="workers for quadrature sums")

    p = argparse.ArgumentParser(prog="torusgrade", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="validate a grading spec")
    c.add_argument("--spec", required=True)
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("decompose", parents=[common], help="split an element into homogeneous components")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec")
    src.add_argument("--weights", help='e.g. "1,0" (k=1) or "1,0;0,1"')
    d.add_argument("--element", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decompose)

    f = sub.add_parser("fejer", parents=[common], help="Cesaro-mean convergence table")
    f.add_argument("--mode", choices=["matrix", "circle", "arc"], required=True)
    f.add_argument("--N", required=True, help='e.g. "8,32,128" or "1:2,3:4"')
    f.add_argument("--out")
    f.add_argument("--spec")
    f.add_argument("--weights")
    f.add_argument("--element")
    f.add_argument("--function", choices=sorted(CIRCLE_FUNCTIONS), default="abs-sin")
    f.add_argument("--sample-size", type=int, default=DEFAULT_FINE_GRID)
    f.add_argument("--t0", type=float, default=0.0)
    f.add_argument("--t1", type=float, default=0.5)
    f.add_argument("--arc-grid", type=int, default=2049)
    f.add_argument("--degree", type=int, default=2, help="arc mode: f = e_degree restricted to the arc")
    f.add_argument("--samples", help="arc mode: CSV t,re,im of f on a uniform arc grid")
    f.add_argument("--band", type=int, default=DEFAULT_EXTENSION_BAND)
    f.set_defaults(func=cmd_fejer)

    m = sub.add_parser("demo", parents=[common], help="run a canned example")
    m.add_argument("name", choices=sorted(DEMOS))
    m.add_argument("--out", required=True)
    m.add_argument("--bands", help="unboundedness: comma-separated bands")
    m.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    m.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except DecompositionError as exc:
        sys.stderr.write(f"torusgrade: {exc}\n")
        return EXIT_FAIL
    except (InputError, UsageError) as exc:
        sys.stderr.write(f"torusgrade: error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"torusgrade: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
