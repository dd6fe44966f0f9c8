"""Command-line entry point: ``invgs <subcommand> [flags]``.

Exit codes: 0 success, 2 usage error, 3 dependent input, 4 I/O or format error.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from pathlib import Path

import numpy as np

from . import core, io, lab
from .metrics import max_abs_po, metrics, po

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEPENDENT = 3
EXIT_IO = 4


def _read_set(path):
    if io.is_tensor_file(path):
        return io.read_tensor(path)
    return io.read_matrix(path)


def _write_set(v, path):
    if np.ndim(v) == 3:
        io.write_tensor(v, path)
    else:
        io.write_matrix(v, path)


def _shape_mn(v):
    return v.shape[0], v.shape[-1]


def cmd_ortho(args):
    v = _read_set(args.input)
    u, r = core.orthogonalize(v, args.method, args.tol)
    _write_set(u, args.output_u)
    io.write_coeffs(r, args.output_r)
    print(f"method={args.method} N={v.shape[-1]} max|po|={max_abs_po(u):.6e}")
    return EXIT_OK


def cmd_inverse(args):
    u = _read_set(args.input)
    r = io.read_coeffs(args.input_r)
    if r.n_vectors != u.shape[-1]:
        raise io.FormatError(
            args.input_r, f"coefficients are for {r.n_vectors} vectors, input has {u.shape[-1]}"
        )
    _write_set(core.reconstruct(u, r, args.method), args.output)
    return EXIT_OK


def cmd_roundtrip(args):
    v = _read_set(args.input)
    u, r = core.orthogonalize(v, args.method, args.tol)
    rep = metrics(v, core.reconstruct(u, r, args.method))
    m, n = _shape_mn(v)
    row = lab.ExperimentRow(
        n=n, max_po=max_abs_po(u), method=args.method, seed=None, m=m,
        mae=rep.mae, mse=rep.mse, psnr=rep.psnr,
    )
    io.write_report(row, args.output)
    print(f"mae={rep.mae:.6e} mse={rep.mse:.6e} psnr={rep.psnr:.4f}")
    return EXIT_OK


def cmd_po(args):
    u = _read_set(args.input)
    w = po(u)
    io.write_plot(w, args.output)
    print(f"pairs={w.size} max|po|={float(np.abs(w).max()) if w.size else 0.0:.6e}")
    return EXIT_OK


def cmd_bench(args):
    cfg = lab.ExperimentConfig(
        m=args.m, n_list=args.n_list, seed=args.seed, method=args.method, tol=args.tol
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plots = lab.run_table1(cfg)
    rows = lab.run_table2(cfg)
    summary = _stdio.StringIO()
    writer = csv.writer(summary, lineterminator="\n")
    writer.writerow(["method", "seed", "M", "N", "max_po", "mae", "mse", "psnr"])
    for plot_row, row in zip(plots, rows):
        io.write_report(row, out / f"report_N{row.n}.txt")
        io.write_plot(plot_row.po, out / f"po_N{row.n}.csv")
        values = [io.fmt(x) for x in (row.max_po, row.mae, row.mse, row.psnr)]
        writer.writerow([row.method, row.seed, row.m, row.n, *values])
        print(
            f"N={row.n:3d}  max|po|={row.max_po:.4e}  mae={row.mae:.4e}  "
            f"mse={row.mse:.4e}  psnr={row.psnr:.4f}"
        )
    io.atomic_write(out / "summary.csv", summary.getvalue())
    return EXIT_OK


def cmd_compress(args):
    v = _read_set(args.input)
    n = v.shape[-1]
    if not 1 <= args.keep <= n:
        raise _Usage(f"--keep must lie in [1, {n}] for this input")
    u, r = core.orthogonalize(v, args.method, args.tol)
    vhat = core.prune_reconstruct(u, r, args.keep, project=args.project)
    _write_set(vhat, args.output)
    rep = metrics(v, vhat)
    m, _ = _shape_mn(v)
    row = lab.ExperimentRow(
        n=n, max_po=max_abs_po(u), method=args.method, seed=None, m=m,
        mae=rep.mae, mse=rep.mse, psnr=rep.psnr, keep=args.keep,
    )
    report = args.report or f"{args.output}.report.txt"
    io.write_report(row, report)
    print(f"keep={args.keep}/{n} mae={rep.mae:.6e} mse={rep.mse:.6e} psnr={rep.psnr:.4f}")
    return EXIT_OK


def cmd_gen(args):
    io.write_matrix(lab.random_basis(args.m, args.n, args.seed), args.output)
    return EXIT_OK


class _Usage(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _n_list(text):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 2:
        raise argparse.ArgumentTypeError("every N must be >= 2")
    return values


def _tol(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"--tol must lie in (0, 1), got {text}")
    return value


def _seed(text):
    value = int(text)
    if value < 0 or value >= 2**64:
        raise argparse.ArgumentTypeError("--seed must be a 64-bit unsigned integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="invgs", description="Invertible Gram-Schmidt transforms and experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def method(p):
        p.add_argument("--method", choices=("gsp", "egsp", "mgs"), default="egsp")

    def tol(p):
        p.add_argument("--tol", type=_tol, default=core.DEFAULT_REL_DEP)

    p = sub.add_parser("ortho", help="orthogonalize a matrix or tensor file")
    p.add_argument("--input", required=True)
    method(p)
    tol(p)
    p.add_argument("--output-u", required=True)
    p.add_argument("--output-r", required=True)
    p.set_defaults(func=cmd_ortho)

    p = sub.add_parser("inverse", help="rebuild v from u and packed r")
    p.add_argument("--input", required=True, help="orthogonal set u")
    p.add_argument("--input-r", required=True, help="coefficient file")
    method(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("roundtrip", help="forward + inverse, write a report")
    p.add_argument("--input", required=True)
    method(p)
    tol(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("po", help="write pairwise inner products as plot data")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_po)

    p = sub.add_parser("bench", help="orthogonality and round-trip tables on random bases")
    p.add_argument("--m", type=_positive_int, default=20)
    p.add_argument("--n-list", type=_n_list, default=[5, 10, 15, 20])
    p.add_argument("--seed", type=_seed, default=0)
    method(p)
    tol(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compress", help="lossy reconstruction from the first K components")
    p.add_argument("--input", required=True)
    p.add_argument("--keep", type=_positive_int, required=True)
    method(p)
    tol(p)
    p.add_argument("--project", action="store_true",
                   help="also drop coefficients on the discarded components")
    p.add_argument("--output", required=True)
    p.add_argument("--report", help="report path (default: OUTPUT.report.txt)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("gen", help="write a uniform random basis")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.m < max(args.n_list):
        parser.error(f"--m {args.m} is smaller than max(--n-list) = {max(args.n_list)}")
    try:
        return args.func(args)
    except core.DependentVector as exc:
        print(f"invgs: error: column {exc.column}: {exc}", file=sys.stderr)
        return EXIT_DEPENDENT
    except _Usage as exc:
        print(f"invgs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"invgs: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
