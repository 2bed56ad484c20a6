"""Command-line entry point: ``pfcorr <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import ConfigurationError, PfcorrError
from .identities import run_all
from .kernel import (bin_average_density, correlation_asymmetric, correlation_bruteforce,
                     correlation_hermitian, kernel_entries)
from .measures import ASYMMETRIC, CUSTOM, HERMITIAN, SpectralPoint, build_measure, load_custom_table
from .partition import (BRUTEFORCE_MAX_N, build_moment_matrices, monomial_basis, z_bruteforce,
                        z_pfaffian)
from .sampler import density_estimate, fraction_within, sample_many, z_scores
from .skeworth import construct_family, invert_w

SEED_ENV = "PFCORR_SEED"
COMMANDS = ("validate", "partition", "family", "kernel", "correlate", "sample", "compare")


class Failure(Exception):
    """A check ran to completion but did not pass."""


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(f"{float(v):.17g}")
        return v if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_table(args, columns, rows):
    if args.format == "json":
        doc = {"tool": "pfcorr", "version": __version__, "command": args.command,
               "columns": list(columns), "rows": [[_jsonable(v) for v in r] for r in rows]}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        lines = [f"# pfcorr {__version__} {args.command}", ",".join(columns)]
        lines += [",".join(_fmt(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _range(text: str):
    try:
        lo, hi, count = text.split(":")
        return float(lo), float(hi), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}") from None


def _nodes_complex(text: str):
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or NX,NY, got {text!r}") from None
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return tuple(parts)
    raise argparse.ArgumentTypeError(f"expected N or NX,NY, got {text!r}")


def _point_list(text: str):
    out = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        try:
            out.append(complex(item.replace("i", "j")))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad point {item!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("no points given")
    return out


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--ensemble", choices=(HERMITIAN, ASYMMETRIC), default=HERMITIAN)
    g.add_argument("--n", type=int, default=3, help="matrix size (odd)")
    g.add_argument("--nodes-real", type=int, default=80)
    g.add_argument("--nodes-complex", type=_nodes_complex, default=(48, 32))
    g.add_argument("--weight-table", default=None,
                   help="file of 'x w' rows; replaces the Gaussian weight (Hermitian type only)")
    g.add_argument("--seed", type=int, default=None, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")
    g.add_argument("--tol", type=float, default=None, help="pass/fail tolerance for checks")
    g.add_argument("--out", default=None, help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--config", default=None, help="JSON file with flag-equivalent keys")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfcorr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pfcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("validate", parents=[common], help="run the Pfaffian identity suites")
    sub.add_parser("partition", parents=[common], help="partition function, Pfaffian vs brute force")
    sub.add_parser("family", parents=[common], help="skew-orthogonal polynomials, r_j and s_n")
    k = sub.add_parser("kernel", parents=[common], help="tabulate kernel entries on a grid")
    k.add_argument("--grid", type=_range, default=(-3.0, 3.0, 7), help="lo:hi:count")
    c = sub.add_parser("correlate", parents=[common], help="evaluate a correlation function")
    c.add_argument("--points", type=_point_list, required=True,
                   help="comma-separated points, complex as a+bj")
    c.add_argument("--bruteforce", action="store_true", help="also integrate the joint density directly")
    for name in ("sample", "compare"):
        s = sub.add_parser(name, parents=[common],
                           help="Monte Carlo histogram" if name == "sample" else
                           "Monte Carlo histogram against the kernel density")
        s.add_argument("--count", type=int, default=100_000)
        s.add_argument("--bins", type=_range, default=(-4.0, 4.0, 32), help="lo:hi:count")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(config, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(k.replace("-", "_") for k in config) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
        args = parser.parse_args(argv)
        if isinstance(args.nodes_complex, (int, str)):
            args.nodes_complex = _nodes_complex(str(args.nodes_complex))
        for key in ("grid", "bins"):
            if isinstance(getattr(args, key, None), str):
                setattr(args, key, _range(getattr(args, key)))
        if isinstance(getattr(args, "points", None), str):
            args.points = _point_list(args.points)
    if args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            parser.error(f"${SEED_ENV} must be an integer, got {env!r}")
    if args.n < 1 or args.n % 2 == 0:
        parser.error(f"--n must be a positive odd integer, got {args.n}")
    if args.weight_table and args.ensemble != HERMITIAN:
        parser.error("--weight-table only applies to the hermitian-beta1 ensemble")
    return args


def _measure(args):
    if args.weight_table:
        return build_measure(CUSTOM, args.nodes_real, table=load_custom_table(args.weight_table))
    return build_measure(args.ensemble, args.nodes_real, args.nodes_complex)


def cmd_validate(args):
    results = run_all(args.seed)
    rows = [(r.name, r.instances, r.failures, r.max_rel_err, r.tol, "pass" if r.passed else "FAIL")
            for r in results]
    write_table(args, ("suite", "instances", "failures", "max_rel_err", "tol", "status"), rows)
    bad = [r.name for r in results if not r.passed]
    if bad:
        raise Failure(f"identity suites failed: {', '.join(bad)}")


def cmd_partition(args):
    m = _measure(args)
    zp = z_pfaffian(build_moment_matrices(m, monomial_basis(args.n), args.n))
    zb = gap = float("nan")
    if args.n <= BRUTEFORCE_MAX_N:
        zb = z_bruteforce(m, args.n)
        gap = abs(zp - zb) / abs(zb)
    write_table(args, ("ensemble", "n", "z_pfaffian", "z_bruteforce", "rel_gap"),
                [(m.kind, args.n, zp, zb, gap)])
    tol = 1e-5 if args.tol is None else args.tol
    if np.isfinite(gap) and gap > tol:
        raise Failure(f"Pfaffian and brute-force partition functions differ by {gap:.3e} > {tol:g}")


def cmd_family(args):
    m = _measure(args)
    f = construct_family(m, args.n)
    rows = []
    for k, c in enumerate(f.coeffs):
        r = f.r[k // 2] if k < args.n - 1 else float("nan")
        padded = np.r_[c, np.zeros(args.n - c.size)]
        rows.append((k, r, f.s[k], *padded))
    write_table(args, ("k", "r_pair", "s", *[f"c{i}" for i in range(args.n)]), rows)


def _family_and_inverse(args):
    m = _measure(args)
    f = construct_family(m, args.n)
    return m, f, invert_w(f)


def cmd_kernel(args):
    m, f, c = _family_and_inverse(args)
    lo, hi, count = args.grid
    if count < 1 or hi < lo:
        raise ConfigurationError(f"empty grid {args.grid}")
    grid = np.linspace(lo, hi, count)
    rows = []
    for y in grid:
        for y2 in grid:
            k = kernel_entries(f, c, m, SpectralPoint.real(y), SpectralPoint.real(y2))
            rows.append((y, y2, k.ds.real, k.s.real, k.s_swapped.real, k.sni.real,
                         k.block()[1, 1].real))
    write_table(args, ("y", "y2", "ds", "s", "s_swapped", "sni", "k22"), rows)


def cmd_correlate(args):
    m, f, c = _family_and_inverse(args)
    pts = args.points
    reals = [p.real for p in pts if p.imag == 0]
    pairs = [p for p in pts if p.imag != 0]
    if m.kind == ASYMMETRIC:
        value = correlation_asymmetric(f, c, m, reals, pairs)
    else:
        if pairs:
            raise ConfigurationError("complex points need --ensemble real-asymmetric")
        value = correlation_hermitian(f, c, m, [SpectralPoint.real(x) for x in reals])
    label = " ".join(f"{_fmt(p.real)}{p.imag:+.17g}j" if p.imag else _fmt(p.real) for p in pts)
    columns = ["ensemble", "n", "n_real", "n_pairs", "points", "value"]
    row = [m.kind, args.n, len(reals), len(pairs), label, value]
    if args.bruteforce:
        brute = correlation_bruteforce(m, args.n, reals, pairs)
        columns += ["bruteforce", "rel_gap"]
        row += [brute, abs(value - brute) / max(abs(brute), 1e-300)]
    write_table(args, columns, [row])


def _histogram(args):
    if args.weight_table:
        raise ConfigurationError("sampling is only defined for the Gaussian ensembles")
    samples = sample_many(args.ensemble, args.n, args.count, args.seed)
    return samples, density_estimate(samples, args.bins)


def cmd_sample(args):
    samples, h = _histogram(args)
    rows = list(zip(h.bin_lo, h.bin_hi, h.density, h.stderr))
    write_table(args, ("bin_lo", "bin_hi", "density", "stderr"), rows)


def cmd_compare(args):
    samples, h = _histogram(args)
    m = _measure(args)
    f = construct_family(m, args.n)
    pred = bin_average_density(f, m, h.bin_lo, h.bin_hi)
    z = z_scores(h, pred)
    rows = list(zip(h.bin_lo, h.bin_hi, h.density, h.stderr, pred, z))
    write_table(args, ("bin_lo", "bin_hi", "density", "stderr", "predicted", "z_score"), rows)
    need = 0.95 if args.tol is None else 1.0 - args.tol
    frac = fraction_within(h, pred)
    if frac < need:
        raise Failure(f"only {frac:.1%} of bins within 3 standard errors (need {need:.0%})")


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def main(argv=None) -> int:
    args = parse_args(sys.argv[1:] if argv is None else argv)
    try:
        HANDLERS[args.command](args)
    except (PfcorrError, Failure, OSError) as exc:
        record = {"status": "error", "command": args.command, "type": type(exc).__name__,
                  "message": str(exc)}
        sys.stderr.write(json.dumps(record) + "\n")
        return 1
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
