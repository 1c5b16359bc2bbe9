"""Command-line front end.

Subcommands: spectrum | weyl | eigen | restrict | verify | graph.
All emitters are deterministic (same invocation, byte-identical files);
floats are written with 17 significant digits and LF line endings. Files
written with --out get a JSON metadata sidecar <out>.meta.json echoing the
configuration.

Exit codes: 0 success, 1 verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .circlegraph import build_level, graph_to_json, laplacian_matrix, laplacian_to_csv_rows
from .decimation import (
    COUNTING_EXPONENT,
    WEYL_ALPHA,
    level_spectrum,
    parse_branch_path,
    weyl_samples,
)
from .eigenbasis import full_eigenbasis, limit_eigenfunction, miniaturize  # noqa: F401
from .oracle import compare_spectra, dense_spectrum, multiplicity_near
from .restriction import (
    a_coeff,
    b_coeff,
    difference,
    lipschitz_diagnostic,
    midpoint_derivative,
    one_sided_derivatives,
    restriction_along_path,
)

SPECTRUM_LEVEL_CAP = 7
EIGEN_LEVEL_CAP = 6
VERIFY_LEVEL_CAP = 4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_output(text: str, out: str | None, args: argparse.Namespace,
                  tolerances: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="\n") as fh:
        fh.write(text)
    meta = {
        "tool": "vnle",
        "version": __version__,
        "command": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "tolerances": tolerances or {},
    }
    with open(out + ".meta.json", "w", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_graph(args) -> int:
    g = build_level(args.level)
    if args.format == "json":
        _write_output(graph_to_json(g) + "\n", args.out, args)
    else:
        rows = ([str(r), str(c), str(v)] for r, c, v in
                laplacian_to_csv_rows(laplacian_matrix(g)))
        _write_output(_csv(["row", "col", "value"], rows), args.out, args)
    return 0


def _spectrum_single(level: int, normalized: bool) -> str:
    spec = level_spectrum(level)
    rows = []
    for i, r in enumerate(spec.records):
        rows.append([
            str(i),
            _fmt(r.value),
            _fmt(r.normalized),
            str(r.multiplicity),
            str(r.path.birth),
            str(r.path.seed),
            ",".join(str(b) for b in r.path.branches),
        ])
    header = ["index", "value", "normalized", "multiplicity",
              "birth_level", "seed", "branches"]
    if normalized:
        # sorted identically either way; flag only marks the preferred column
        header[1], header[2] = header[2], header[1]
        for row in rows:
            row[0], row[1], row[2] = row[0], row[2], row[1]
    return _csv(header, (["\"" + r[6] + "\"" if i == 6 else v
                          for i, v in enumerate(r)] for r in rows))


def _spectrum_table(levels: list[int], normalized: bool, tol: float) -> str:
    # one row per aggregated value of the deepest level, with the
    # multiplicity each level assigns to it (eigenvalues reappear level to
    # level, though multiplicities change through miniaturization)
    per_level = {m: level_spectrum(m).aggregated(tol, normalized=normalized)
                 for m in levels}
    deepest = max(levels)
    rows = []
    for value, _ in per_level[deepest]:
        row = [_fmt(value)]
        for m in levels:
            mult = sum(n for v, n in per_level[m] if abs(v - value) <= tol)
            row.append(str(mult))
        rows.append(row)
    return _csv(["value"] + [f"multiplicity_m{m}" for m in levels], rows)


def cmd_spectrum(args) -> int:
    levels = [int(s) for s in str(args.level).split(",")]
    for m in levels:
        if not 1 <= m <= SPECTRUM_LEVEL_CAP:
            raise ValueError(f"spectrum level must be in [1, {SPECTRUM_LEVEL_CAP}]")
    if len(levels) == 1:
        text = _spectrum_single(levels[0], args.normalized)
    else:
        text = _spectrum_table(levels, args.normalized, args.tol)
    _write_output(text, args.out, args, {"aggregation": args.tol})
    return 0


def cmd_weyl(args) -> int:
    if not 1 <= args.level <= SPECTRUM_LEVEL_CAP:
        raise ValueError(f"level must be in [1, {SPECTRUM_LEVEL_CAP}]")
    spec = level_spectrum(args.level)
    data = weyl_samples(spec, normalized=args.normalized,
                        grid_points=args.grid, alpha=args.alpha)
    rows = ([_fmt(t), _fmt(n), _fmt(w)] for t, n, w in data)
    _write_output(_csv(["t", "count", "weyl_ratio"], rows), args.out, args,
                  {"alpha": args.alpha})
    return 0


def cmd_eigen(args) -> int:
    if not 1 <= args.level <= EIGEN_LEVEL_CAP:
        raise ValueError(f"level must be in [1, {EIGEN_LEVEL_CAP}]")
    if (args.index is None) == (args.path is None):
        raise ValueError("exactly one of --index or --path is required")
    if args.index is not None:
        basis = full_eigenbasis(args.level, level_cap=min(EIGEN_LEVEL_CAP, 4))
        if not 0 <= args.index < len(basis):
            raise ValueError(f"index must be in [0, {len(basis) - 1}]")
        u, rec = basis[args.index]
        path = rec.path
    else:
        path = parse_branch_path(args.path)
        u = limit_eigenfunction(path, args.level, member=args.member)
    g = build_level(args.level)
    size = 2 * 5**args.level
    rows = []
    for i, v in enumerate(g.vertices):
        for n in (v.n1, v.n2):
            rows.append((n, i, u.values[i]))
    rows.sort()
    text = _csv(["numerator", "vertex", "t", "value"],
                ([str(n), str(i), _fmt(n / size), _fmt(val)] for n, i, val in rows))
    _write_output(text, args.out, args,
                  {"eigenvalue": u.eigenvalue, "path": str(path)})
    return 0


def cmd_restrict(args) -> int:
    path = parse_branch_path(args.path)
    f = restriction_along_path(path, args.depth, member=args.member,
                               base_level=args.base_level)
    count = 3**f.m
    rows = ([str(k), str(f.m), _fmt(k / count), _fmt(f.values[k])]
            for k in range(count + 1))
    _write_output(_csv(["k", "level", "t", "value"], rows), args.out, args)

    base = path.level if args.base_level is None else args.base_level
    report = lipschitz_diagnostic(path, args.depth, member=args.member,
                                  base_level=base)
    n_base = 3**base
    samples = []
    for j in range(n_base):
        sided = one_sided_derivatives(f, j, base)
        samples.append({
            "j": j,
            "midpoint": midpoint_derivative(f, j, base),
            "right": sided.right,
            "left": sided.left,
        })
    diag = {
        "path": str(path),
        "member": args.member,
        "base_level": base,
        "eigenvalues": list(report.eigenvalues),
        "sup_difference_per_level": dict(zip(map(str, report.levels), report.sup_diff)),
        "a_coefficients": {str(m): a_coeff(m, path) for m in range(base + 1, base + 4)},
        "b_coefficients": {str(m): b_coeff(m, path) for m in range(base + 1, base + 4)},
        "derivative_samples": samples,
    }
    diag_text = json.dumps(diag, sort_keys=True, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(diag_text)
    else:
        with open(args.out + ".diagnostics.json", "w", newline="\n") as fh:
            fh.write(diag_text)
    return 0


def cmd_verify(args) -> int:
    if args.max_level > VERIFY_LEVEL_CAP:
        raise ValueError(f"dense verification capped at level {VERIFY_LEVEL_CAP}")
    failures = 0
    print(f"{'level':>5} {'check':<22} {'deviation':>12} {'tol':>9} status")
    for m in range(1, args.max_level + 1):
        tol = args.tol if args.tol is not None else (1e-9 if m <= 3 else 1e-8)
        dec = level_spectrum(m).expanded()
        if args.inject_error:
            dec = dec.copy()
            dec[len(dec) // 2] += 1e-5
        dense = dense_spectrum(m).eigenvalues
        report = compare_spectra(dec, dense, tol)
        status = "PASS" if report.passed else "FAIL"
        failures += not report.passed
        print(f"{m:>5} {'spectrum vs dense':<22} {report.max_deviation:>12.3e} "
              f"{tol:>9.0e} {status}")
        for value in (1.0, 3.0):
            want = level_spectrum(m).multiplicity_of(value)
            got = multiplicity_near(dense, value)
            ok = want == got
            failures += not ok
            print(f"{m:>5} {f'multiplicity at {value:g}':<22} "
                  f"{abs(want - got):>12d} {0:>9d} {'PASS' if ok else 'FAIL'}")
    print("verification " + ("FAILED" if failures else "passed"))
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vnle",
        description="Spectral computations on the loop-closed Vicsek fractal.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="emit a level graph or its Laplacian")
    p.add_argument("--level", "-m", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("spectrum", help="emit a level spectrum (or a multi-level table)")
    p.add_argument("--level", "-m", required=True,
                   help="level, or comma-separated levels for the side-by-side table")
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="value-aggregation tolerance for the table mode")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("weyl", help="emit counting function and Weyl ratio samples")
    p.add_argument("--level", "-m", type=int, required=True)
    p.add_argument("--normalized", action="store_true", default=True)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--alpha", type=float, default=WEYL_ALPHA,
                   help=f"ratio exponent (default {WEYL_ALPHA:.6f}; use "
                        f"{COUNTING_EXPONENT:.6f} for a bounded ratio)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("eigen", help="emit one eigenfunction over the circle")
    p.add_argument("--level", "-m", type=int, required=True)
    p.add_argument("--index", type=int, help="0-based position in the sorted eigenbasis")
    p.add_argument("--path", help="branch path, e.g. 3@2:1,1,1")
    p.add_argument("--member", type=int, default=0,
                   help="member of the born family when using --path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("restrict", help="emit a central-circle restriction and diagnostics")
    p.add_argument("--path", required=True)
    p.add_argument("--member", type=int, default=0)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--base-level", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_restrict)

    p = sub.add_parser("verify", help="compare decimation against the dense eigensolver")
    p.add_argument("--max-level", type=int, default=VERIFY_LEVEL_CAP)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--inject-error", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
