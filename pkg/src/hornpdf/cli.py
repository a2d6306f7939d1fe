"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 usage error or case out of scope,
3 self-check failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import analytic, checks, experiment, support, svg
from .core_types import Ensemble, HornError, UnsupportedCaseError, analytic_table

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return list(experiment.parse_list(text))
    except HornError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _add_case(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--ensemble", choices=["hermitian", "symmetric", "skew-o", "skew-so"], required=required)
    p.add_argument("-n", type=int, required=required, help="matrix size")
    p.add_argument("--alpha", type=_floats, required=required, help="comma-separated eigenvalues of A")
    p.add_argument("--beta", type=_floats, required=required, help="comma-separated eigenvalues of B")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hornpdf",
        description="Eigenvalue densities of A + g B g^-1 on fixed-spectrum orbits, with a Monte-Carlo oracle.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", help="evaluate the analytic density on a grid")
    _add_case(p)
    p.add_argument("--grid", type=int, default=100, help="bins per axis (default 100)")
    p.add_argument("--out", default="pdf", help="output path prefix (default: pdf)")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")

    p = sub.add_parser("sample", help="run a Monte-Carlo experiment and write a histogram")
    _add_case(p, required=False)
    p.add_argument("-N", type=int, default=100_000, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=100, help="bins per axis (default 100)")
    p.add_argument("--out", default=None, help="histogram CSV path (default: stdout)")
    p.add_argument("--format", choices=["csv", "svg"], default="csv", help="svg also writes <out>.svg")
    p.add_argument("--samples-out", default=None, help="also write every sampled spectrum to this CSV")
    p.add_argument("--config", default=None, help="batch file with one [section] per run")

    p = sub.add_parser("compare", help="compare a histogram file with the analytic density")
    p.add_argument("histogram", help="histogram CSV written by 'sample'")
    _add_case(p, required=False)
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.add_argument("--floor", type=float, default=10.0, help="minimum expected count per retained bin")

    p = sub.add_parser("check", help="run the self-check suite")
    p.add_argument("--suite", choices=["all"] + list(checks.SUITES), default="all")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("hciz", help="evaluate the unitary orbital integral")
    p.add_argument("--alpha", type=_floats, required=True)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("-N", type=int, default=0, help="also estimate by Monte Carlo with N draws")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("support", help="Horn support test and the n = 3 polygon")
    p.add_argument("--alpha", type=_floats, required=True)
    p.add_argument("--beta", type=_floats, required=True)
    p.add_argument("--gamma", type=_floats, default=None, help="full gamma vector to test")
    p.add_argument("--out", default=None, help="write the n = 3 polygon as CSV")
    return parser


def _case(args) -> experiment.CaseModel:
    if args.ensemble is None or args.n is None or args.alpha is None or args.beta is None:
        raise UsageError("--ensemble, -n, --alpha and --beta are required")
    return experiment.CaseModel(Ensemble.parse(args.ensemble, args.n), args.alpha, args.beta)


def _write(path, text: str) -> None:
    Path(path).write_text(text)


# --------------------------------------------------------------------------

def cmd_pdf(args) -> int:
    model = _case(args)
    if not model.has_density:
        raise UnsupportedCaseError(
            f"no analytic density for {args.ensemble} n={args.n} (analytic cases: {analytic_table()}); "
            "use 'hornpdf sample' for a Monte-Carlo histogram")
    meta = model.metadata()
    out = args.out
    if model.atomic:
        atoms = analytic.pdf_skew(model.alpha, model.beta, group=model.ensemble.skew_group, canonical=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "weight"])
        for p, wt in zip(atoms.points, atoms.weights):
            w.writerow([repr(float(p)), repr(float(wt))])
        meta["atomic"] = True
        _write(f"{out}.csv", buf.getvalue())
        _write(f"{out}.json", json.dumps(meta, indent=2) + "\n")
        print(f"wrote {out}.csv ({len(atoms.points)} atoms)")
        return EXIT_OK
    grid = experiment.default_grid(model, args.grid)
    xc, yc = grid.centers()
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    values = model.density(X, Y)
    regions = model.regions(X, Y).reshape(X.shape)
    meta.update(grid=grid.to_list(), columns=["x", "y", "value", "region"])
    rows = [(repr(float(X[i, j])), repr(float(Y[i, j])), repr(float(values[i, j])), regions[i, j])
            for i in range(grid.nx) for j in range(grid.ny)]
    if args.format == "json":
        meta["rows"] = [[float(r[0]), float(r[1]), float(r[2]), r[3]] for r in rows]
        _write(f"{out}.json", json.dumps(meta) + "\n")
        print(f"wrote {out}.json")
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma_x", "gamma_y", "value", "region"])
    w.writerows(rows)
    _write(f"{out}.csv", buf.getvalue())
    _write(f"{out}.json", json.dumps(meta, indent=2) + "\n")
    written = [f"{out}.csv", f"{out}.json"]
    if args.format == "svg":
        poly = model.polygon()
        text = svg.heatmap(values, grid.x_edges, grid.y_edges,
                           polylines=[[s.start, s.end] for s in model.overlay_segments()],
                           polygons=[poly.vertices] if poly is not None else [],
                           title=f"{args.ensemble} n={args.n} alpha={args.alpha} beta={args.beta}")
        _write(f"{out}.svg", text)
        written.append(f"{out}.svg")
    print("wrote " + ", ".join(written))
    return EXIT_OK


def _emit_histogram(hist: experiment.HistogramGrid, model, out, fmt: str) -> None:
    text = hist.to_csv()
    if out is None:
        sys.stdout.write(text)
    else:
        _write(out, text)
    if fmt == "svg":
        target = (out or "histogram") + ".svg"
        poly = model.polygon()
        _write(target, svg.heatmap(hist.density(), hist.grid.x_edges, hist.grid.y_edges,
                                   polylines=[[s.start, s.end] for s in model.overlay_segments()],
                                   polygons=[poly.vertices] if poly is not None else [],
                                   title=f"{model.kind.value} n={model.ensemble.n}, {hist.total} samples"))


def cmd_sample(args) -> int:
    if args.config:
        if not Path(args.config).exists():
            raise FileNotFoundError(args.config)
        for cfg, hist in experiment.iter_runs(experiment.load_batch(args.config)):
            model = experiment.CaseModel(cfg.ensemble, cfg.alpha, cfg.beta)
            target = cfg.out or f"{cfg.name}.csv"
            _emit_histogram(hist, model, target, args.format)
            print(f"[{cfg.name}] {hist.total} samples, overflow {hist.overflow} -> {target}", file=sys.stderr)
        return EXIT_OK
    model = _case(args)
    grid = experiment.default_grid(model, args.grid)
    hist = experiment.run_mc(model.alpha, model.beta, model.ensemble, args.N, grid, args.seed,
                             samples_out=args.samples_out)
    _emit_histogram(hist, model, args.out, args.format)
    print(f"{hist.total} samples, overflow {hist.overflow}, degenerate {hist.metadata.get('degenerate', 0)}",
          file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    hist = experiment.HistogramGrid.read(args.histogram)
    meta = hist.metadata
    given = {"ensemble": args.ensemble, "n": args.n, "alpha": args.alpha, "beta": args.beta}
    for key, value in given.items():
        if value is None:
            continue
        stored = meta.get(key)
        same = (np.allclose(value, stored, rtol=0, atol=1e-12) if key in ("alpha", "beta")
                and stored is not None and len(stored) == len(value) else value == stored)
        if not same:
            raise UsageError(f"--{key} {value} does not match the histogram metadata ({stored})")
    report = experiment.compare(hist, floor=args.floor)
    if args.out:
        _write(args.out, json.dumps(report.__dict__, indent=2) + "\n")
    print(report.summary())
    return EXIT_OK


def cmd_check(args) -> int:
    results = checks.run_suite(args.suite, args.seed)
    print(checks.format_table(results))
    return EXIT_OK if checks.all_passed(results) else EXIT_CHECK


def cmd_hciz(args) -> int:
    value = analytic.hciz_unitary(args.alpha, args.x)
    print(f"exact  {_fmt(value.real)} {'+' if value.imag >= 0 else '-'} {_fmt(abs(value.imag))}i")
    if args.N > 0:
        mc, se = experiment.hciz_mc(args.alpha, args.x, args.N, args.seed)
        print(f"MC     {_fmt(mc.real)} {'+' if mc.imag >= 0 else '-'} {_fmt(abs(mc.imag))}i  (se {_fmt(se)})")
    return EXIT_OK


def cmd_support(args) -> int:
    n = len(args.alpha)
    if args.gamma is not None:
        v = support.check_horn(args.alpha, args.beta, args.gamma)
        state = "boundary" if v.boundary else ("inside" if v.inside else "outside")
        print(f"{state}  margin {_fmt(v.margin)}  active {', '.join(v.active) or '-'}")
    if n == 3:
        poly = support.polygon_n3(args.alpha, args.beta)
        text = poly.to_csv()
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
    elif args.gamma is None:
        raise UsageError("give --gamma, or n = 3 spectra for the polygon")
    return EXIT_OK


COMMANDS = {
    "pdf": cmd_pdf,
    "sample": cmd_sample,
    "compare": cmd_compare,
    "check": cmd_check,
    "hciz": cmd_hciz,
    "support": cmd_support,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, HornError) as exc:
        print(f"hornpdf {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hornpdf {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
