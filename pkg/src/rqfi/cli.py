"""Command-line front end.

Exit codes: 0 success, 2 bad configuration, 3 numerical budget exceeded,
4 input/output failure.  ``RQFI_THREADS`` caps the worker threads used for
sweeps; results are always written in grid order.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np

from . import __version__
from .beamsplitter import ImagingSystem, f_functions_from, normalized_bound, qfi_upper_bound
from .errors import (
    CutoffOverflow,
    FlatLikelihood,
    IllConditioned,
    RqfiError,
    TruncationBudgetExceeded,
)
from .figures import DEFAULT_GRID, write_figures
from .measurement import Grid, crb_benchmark, default_grid, write_samples_csv, sample_counts
from .psf import gaussian_psf, load_psf_csv
from .qfi import qfi_report
from .sources import CorrThermal, FockPM, Thermal, Tmsv, source_params

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NUMERIC_ERRORS = (TruncationBudgetExceeded, IllConditioned, CutoffOverflow, FlatLikelihood)


class ConfigError(Exception):
    pass


def parse_grid(text: str) -> tuple[float, float, int, bool]:
    """``min:max:points[@geometric|@linear]`` or a single value."""
    spec, _, spacing = text.partition("@")
    if spacing not in ("", "geometric", "linear"):
        raise ConfigError(f"--s: unknown spacing '{spacing}'")
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            lo, hi, n = v, v, 1
        elif len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise ConfigError(f"--s: expected min:max:points[@geometric], got '{text}'") from None
    geometric = spacing == "geometric"
    if n < 1 or hi < lo or lo < 0:
        raise ConfigError(f"--s: need 0 <= min <= max and points >= 1, got '{text}'")
    if geometric and lo <= 0:
        raise ConfigError("--s: geometric spacing needs min > 0")
    return lo, hi, n, geometric


def grid_values(grid) -> np.ndarray:
    lo, hi, n, geometric = grid
    if n == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, n) if geometric else np.linspace(lo, hi, n)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("RQFI_THREADS", "1")))
    except ValueError:
        raise ConfigError("RQFI_THREADS must be an integer") from None


def sweep(fn, points) -> list:
    n = threads()
    if n == 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, points))


def make_psf(args):
    if args.psf == "gaussian":
        if not args.xr > 0:
            raise ConfigError("--xr must be positive")
        return gaussian_psf(args.xr)
    return load_psf_csv(args.psf)


def make_system(args, eta: float | None = None) -> ImagingSystem:
    eta = args.eta if eta is None else eta
    try:
        return ImagingSystem(eta, make_psf(args))
    except RqfiError as exc:
        raise ConfigError(f"--eta: {exc}") from None


def make_source(args):
    kind = args.source
    try:
        if kind == "thermal":
            return Thermal(args.N)
        if kind == "fock":
            return FockPM(args.N_plus, args.N_minus)
        if kind == "tmsv":
            return Tmsv(args.xi)
        if kind == "corr-thermal":
            return CorrThermal(args.N, args.w)
    except ValueError as exc:
        raise ConfigError(f"--source {kind}: {exc}") from None
    raise ConfigError(f"--source: unknown family '{kind}'")


@contextmanager
def opened(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def emit(args, header: list[str], rows: list[list]) -> None:
    with opened(args.output) as fh:
        if args.format == "json":
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=2)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([[repr(v) if isinstance(v, float) else v for v in r] for r in rows])


def emit_json(args, text: str) -> None:
    with opened(args.output) as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


# -- subcommands --------------------------------------------------------------------


def cmd_functionals(args) -> int:
    system = make_system(args)
    s = grid_values(parse_grid(args.s))

    def row(x):
        fn = system.functionals(float(x))
        fp, fm = f_functions_from(system, fn)
        return [float(x), fn.delta, fn.gamma, fn.beta, fn.dk2, fn.eps_plus_sq, fn.eps_minus_sq, fp, fm]

    header = ["s", "delta", "gamma", "beta", "dk2", "eps_plus_sq", "eps_minus_sq", "f_plus", "f_minus"]
    emit(args, header, sweep(row, s))
    return EXIT_OK


def cmd_bound(args) -> int:
    s = grid_values(parse_grid(args.s))
    systems = [make_system(args, eta) for eta in args.eta]
    rows = []
    for system in systems:
        rows += sweep(lambda x: [float(x), system.eta, qfi_upper_bound(system, float(x), args.N),
                                 normalized_bound(system, float(x))], s)
    emit(args, ["s", "eta", "bound", "normalized_bound"], rows)
    return EXIT_OK


def cmd_qfi(args) -> int:
    system = make_system(args)
    source = make_source(args)
    s = grid_values(parse_grid(args.s))
    variants = [None] if not isinstance(source, Tmsv) else ["squared_derivative", "as_printed"]
    rows = []
    for variant in variants:
        def row(x, variant=variant):
            rep = qfi_report(source, system, float(x), variant or "squared_derivative")
            r = rep.row()
            if variant:
                r[3] = f"{r[3]};variant={variant}"
            return r
        rows += sweep(row, s)
    if isinstance(source, Tmsv) and args.with_oracle:
        from .oracle import qfi_sld

        for x in s:
            res = qfi_sld(source, system, float(x))
            ref = qfi_report(source, system, float(x))
            rows.append([repr(float(x)), repr(system.eta), source.family,
                         f"{source_params(source)};variant=oracle", repr(res.qfi),
                         repr(res.qfi * ref.qfi_normalized / ref.qfi if ref.qfi else 0.0),
                         repr(1 / res.qfi ** 0.5 if res.qfi > 0 else float("inf")), repr(ref.bound)])
    header = ["s", "eta", "family", "params", "qfi", "qfi_normalized", "crb", "bound"]
    if args.format == "json":
        rows = [[_num(v) for v in r] for r in rows]
    with opened(args.output) as fh:
        if args.format == "json":
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=2)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    return EXIT_OK


def _num(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return v


def cmd_oracle(args) -> int:
    from .oracle import adjudicate_tmsv, qfi_sld
    from .qfi import qfi

    system = make_system(args)
    if system.psf.kind != "gaussian":
        raise ConfigError("--psf: the oracle supports the Gaussian PSF only")
    s = [float(x) for x in grid_values(parse_grid(args.s))]
    kw = dict(K=args.K, n_max=args.n_max, fd_step=args.fd_step)
    if args.source == "tmsv":
        report = adjudicate_tmsv(args.xi, system, s, **kw)
        emit_json(args, report.to_json())
        return EXIT_OK
    source = make_source(args)
    points = []
    for x in s:
        res = qfi_sld(source, system, x, **kw)
        ref = qfi(source, system, x)
        points.append({"s": x, "oracle": res.qfi, "analytic": ref,
                       "rel_dev": abs(res.qfi - ref) / ref if ref else abs(res.qfi),
                       "K": res.K, "n_max": res.n_max, "method": res.method,
                       "truncation": res.truncation_report})
    out = {"family": source.family, "params": source_params(source), "eta": system.eta,
           "fd_step": args.fd_step, "points": points}
    emit_json(args, json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_measure(args) -> int:
    system = make_system(args)
    try:
        source = FockPM(args.N_plus, args.N_minus)
    except ValueError as exc:
        raise ConfigError(f"--N-plus/--N-minus: {exc}") from None
    if args.repeats < 100:
        raise ConfigError("--repeats must be >= 100")
    if args.shots < 1:
        raise ConfigError("--shots must be >= 1")
    grid = default_grid(system.x_r)
    if args.grid:
        lo, hi, n, geometric = parse_grid(args.grid)
        grid = Grid(lo, hi, n, geometric)
    run = crb_benchmark(source, system, args.s, args.shots, args.repeats, args.seed, grid)
    if args.samples_csv:
        write_samples_csv(args.samples_csv, sample_counts(source, system, args.s, args.shots, args.seed))
    emit_json(args, run.to_json())
    return EXIT_OK


def cmd_figures(args) -> int:
    grid = parse_grid(args.s) if args.s else DEFAULT_GRID
    n = threads()
    if n == 1:
        write_figures(args.output, grid)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            write_figures(args.output, grid, mapper=pool.map)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def _common(p, eta_multi: bool = False):
    p.add_argument("--psf", default="gaussian", help="'gaussian' or a CSV file with x,amplitude")
    p.add_argument("--xr", type=float, default=1.0, help="Rayleigh length of the Gaussian PSF")
    if eta_multi:
        p.add_argument("--eta", type=float, nargs="+", default=[0.1, 0.4, 0.5])
    else:
        p.add_argument("--eta", type=float, default=0.4)
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _source_args(p, default="thermal"):
    p.add_argument("--source", choices=("thermal", "fock", "tmsv", "corr-thermal"), default=default)
    p.add_argument("--N", type=float, default=1.0, help="mean photons per source")
    p.add_argument("--N-plus", dest="N_plus", type=int, default=0)
    p.add_argument("--N-minus", dest="N_minus", type=int, default=2)
    p.add_argument("--xi", type=float, default=1.0, help="two-mode squeezing")
    p.add_argument("--w", type=float, default=0.0, help="source correlation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rqfi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("functionals", help="overlap functionals and f_plus/f_minus on a grid")
    _common(p)
    p.add_argument("--s", default="0.1:6:200")
    p.set_defaults(func=cmd_functionals)

    p = sub.add_parser("bound", help="ultimate QFI bound")
    _common(p, eta_multi=True)
    p.add_argument("--s", default="0.001:10:200@geometric")
    p.add_argument("--N", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("qfi", help="closed-form QFI for a source family")
    _common(p)
    _source_args(p)
    p.add_argument("--s", default="0.01:10:200@geometric")
    p.add_argument("--with-oracle", action="store_true", help="add Fock-space oracle rows (tmsv)")
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("oracle", help="Fock-space SLD oracle; adjudicates tmsv by default")
    _common(p)
    _source_args(p, default="tmsv")
    p.add_argument("--s", default="0.5:2:3@geometric")
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--fd-step", dest="fd_step", type=float, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("measure", help="parity-counting ML estimator benchmark")
    _common(p)
    p.add_argument("--N-plus", dest="N_plus", type=int, default=0)
    p.add_argument("--N-minus", dest="N_minus", type=int, default=2)
    p.add_argument("--s", type=float, default=0.5, help="true separation")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--grid", default=None, help="estimation grid min:max:points[@geometric]")
    p.add_argument("--samples-csv", dest="samples_csv", default=None)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("figures", help="write figure tables and a manifest")
    p.add_argument("--output", "-o", default="figures")
    p.add_argument("--s", default=None, help="override the s grid")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rqfi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"rqfi: numerical budget exceeded: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rqfi: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RqfiError as exc:
        print(f"rqfi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
