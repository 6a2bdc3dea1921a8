"""Command-line front end.

    imsv generate --a 1.3 --eps 0.7 --hbar 0.5 --out model.json
    imsv spectrum --model model.json --nmax 4 --oracle
    imsv verify --model model.json --suite all --seed 42
    imsv state --model model.json --n 1 --m 0 --grid 401 --span 10 --out state.csv

Exit codes: 0 success, 1 check failure, 2 input/validation error,
3 numerical-branch failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
from pathlib import Path


from . import quantum
from .errors import (
    ArgumentError,
    BranchSingularityError,
    BranchTrackingError,
    ConvergenceError,
    ImsvError,
)
from .model import ExampleParams, ModelSpec, build_example_model, match_example
from .verify import run_verify

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_BRANCH = 0, 1, 2, 3
BRANCH_ERRORS = (BranchSingularityError, BranchTrackingError, ConvergenceError)


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_model(args) -> ModelSpec:
    if getattr(args, "model", None):
        try:
            text = Path(args.model).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read model: {exc}") from exc
        return ModelSpec.from_json(text)
    return build_example_model(ExampleParams(args.a, args.eps, args.hbar))


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def coefficient_digest(model: ModelSpec) -> str:
    h = hashlib.sha256()
    for f in model.fs:
        for t in f.terms:
            h.update(f"{t.coeff!r}:{t.xpow}:{t.ypow}:{t.zpow}|".encode())
    return h.hexdigest()[:16]


def cmd_generate(args) -> int:
    model = build_example_model(ExampleParams(args.a, args.eps, args.hbar))
    _write_text(args.out, model.to_json())
    print(f"{args.out} sha256:{coefficient_digest(model)}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    model = _load_model(args)
    params = match_example(model)
    if model.n_dims != 2:
        raise UsageError("spectrum tables are for two-dimensional models")
    grid = quantum.Grid1D(-args.span, args.span, args.grid)
    header = ["n", "m", "h", "g", "omega"]
    if args.oracle:
        header += ["h_oracle", "delta", "flag"]
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    status = EXIT_OK
    for total in range(args.nmax + 1):
        for n in range(total + 1):
            m = total - n
            if params is not None:
                sp = quantum.joint_spectrum_example(params, n, m)
                row = [n, m, _fmt(sp.h[0]), _fmt(sp.h[1]), _fmt(quantum.omega(params, sp.h[0]))]
            else:
                sp = quantum.brute_force_joint_spectrum(model, (n, m), grid)
                row = [n, m, _fmt(sp.h[0]), _fmt(sp.h[1]), "nan"]
            if args.oracle:
                try:
                    brute = quantum.brute_force_joint_spectrum(model, (n, m), grid)
                    row += [_fmt(brute.h[0]), _fmt(brute.h[0] - sp.h[0]), "ok"]
                except BRANCH_ERRORS as exc:
                    print(f"row n={n} m={m}: {exc}", file=sys.stderr)
                    row += ["nan", "nan", "branch_error"]
                    status = EXIT_BRANCH
            out.writerow(row)
    _write_text(args.out, buf.getvalue())
    return status


def cmd_verify(args) -> int:
    model = _load_model(args)
    report = run_verify(model, args.suite, args.seed)
    sys.stdout.write(report.to_json())
    for c in report.checks:
        tag = "PASS" if c.passed else "FAIL"
        extra = f" ({c.error})" if c.error else ""
        print(f"[{tag}] {c.name}: {c.value:.3e} tol {c.tolerance:.1e}{extra}", file=sys.stderr)
    if not report.passed:
        print("failing: " + ", ".join(report.failing()), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_state(args) -> int:
    model = _load_model(args)
    params = match_example(model)
    if params is None:
        raise UsageError("state export needs the example model family")
    grid = quantum.Grid1D(-args.span, args.span, args.grid)
    st = quantum.product_state(params, args.n, args.m, grid)
    psi = st.values
    fh = quantum.apply_nonlinear_h(params, psi, grid)
    fg = quantum.apply_nonlinear_g(params, psi, grid)
    x = grid.points
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["q1", "q2", "psi", "h_field", "g_field", "mask"])
    for i in range(x.size):
        for j in range(x.size):
            out.writerow(
                [_fmt(x[i]), _fmt(x[j]), _fmt(psi[i, j]), _fmt(fh.values[i, j]), _fmt(fg.values[i, j]),
                 int(fh.mask[i, j])]
            )
    _write_text(args.out, buf.getvalue())
    h, g = st.spectral.h
    print(f"h = {_fmt(h)}  g = {_fmt(g)}")
    print(f"h_field: mean {_fmt(fh.mean)}  |mean - h| {abs(fh.mean - h):.3e}  max dev {fh.max_abs_deviation:.3e}")
    print(f"g_field: mean {_fmt(fg.mean)}  |mean - g| {abs(fg.mean - g):.3e}  max dev {fg.max_abs_deviation:.3e}")
    print(f"masked points: {int(fh.mask.sum())} of {fh.mask.size}")
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=1.3, help="deformation length (default 1.3)")
    p.add_argument("--eps", type=float, default=0.7, help="nonlinearity strength (default 0.7)")
    p.add_argument("--hbar", type=float, default=0.5, help="Planck constant (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imsv", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the example model as JSON")
    _add_params(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", help="joint spectrum table as CSV")
    p.add_argument("--model")
    _add_params(p)
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--oracle", action="store_true", help="add grid-diagonalization columns")
    p.add_argument("--grid", type=int, default=801)
    p.add_argument("--span", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run verification suites, JSON report on stdout")
    p.add_argument("--model")
    _add_params(p)
    p.add_argument("--suite", choices=("classical", "quantum", "limit", "all"), default="all")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("state", help="dump a product eigenstate and its fields as CSV")
    p.add_argument("--model")
    _add_params(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--span", type=float, default=10.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_state)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BRANCH_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    except (UsageError, ArgumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ImsvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
