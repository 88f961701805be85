"""Command-line interface.

Exit codes: 0 when every invoked check passes (or its hypothesis is not
met), 2 on invalid input, 3 when a verification fails, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import majorization, minmax_verifier, suite
from .matrix_spectra import (ConvergenceError, DegenerateSpectrumError, Hermitian,
                             MatrixValidationError, load_hermitian, random_hermitian,
                             spectral_distribution)
from .measures import MeasureValidationError, discretize, load_measure, quantile_of_measure
from .projection_lattice import CertificateError, haar_bases
from .reports import CSV_HEADER, FAIL, fmt

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _intervals(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        try:
            lo, hi = part.split(":")
            out.append((int(lo), int(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad interval {part!r}; expected i0:i1") from None
    return out


def _random_spec(tokens: list[str]) -> tuple[int, int]:
    fields = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or key not in ("n", "seed"):
            raise UsageError(f"--random expects n=<N> seed=<S>, got {tok!r}")
        fields[key] = int(value)
    if "n" not in fields:
        raise UsageError("--random needs n=<N>")
    return fields["n"], fields.get("seed", 0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectral-minmax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("quantile", help="tabulate the quantile function of a measure")
    p.add_argument("measure")
    p.add_argument("--grid", type=int, default=16)

    p = sub.add_parser("spectrum", help="eigenvalues and spectral atoms of a matrix")
    p.add_argument("matrix")

    p = sub.add_parser("discretize", help="n-atom midpoint discretization of a measure")
    p.add_argument("measure")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("generate", help="reproducible random Hermitian matrix as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check one minmax identity")
    p.add_argument("theorem", choices=["kyfan", "cf", "wielandt", "lidskii", "domination", "conditional"])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--random", nargs="+", metavar="KEY=VALUE")
    p.add_argument("--other", help="second matrix for lidskii/domination")
    p.add_argument("--indefinite", action="store_true",
                   help="with --random domination: b - a indefinite instead of a rank-one PSD bump")
    p.add_argument("--j", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--intervals", type=_intervals)
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--equality", action="store_true", help="kyfan with rank(p) = j")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--outer-trials", type=int, default=100)
    p.add_argument("--inner-trials", type=int, default=100)
    p.add_argument("--perturb", type=float, help="split repeated eigenvalues by this epsilon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.add_argument("--criteria", type=lambda s: [int(x) for x in s.split(",")])
    return parser


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_quantile(args) -> int:
    q = quantile_of_measure(load_measure(args.measure))
    if args.grid < 1:
        raise UsageError("--grid must be positive")
    s = np.arange(args.grid) / args.grid
    rows = ["s,x"] + [f"{fmt(si)},{fmt(xi)}" for si, xi in zip(s, q(s))]
    print("\n".join(rows))
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    a = load_hermitian(args.matrix)
    rows = ["index,eigenvalue"] + [f"{i + 1},{fmt(v)}" for i, v in enumerate(a.eigenvalues)]
    rows += ["", "location,weight"]
    rows += [f"{fmt(c)},{fmt(w)}" for c, w in spectral_distribution(a).atoms]
    print("\n".join(rows))
    return EXIT_OK


def _cmd_discretize(args) -> int:
    mu = discretize(load_measure(args.measure), args.n)
    _write(json.dumps(mu.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_generate(args) -> int:
    _write(json.dumps(random_hermitian(args.n, args.seed).to_json()) + "\n", args.out)
    return EXIT_OK


def _matrices(args):
    if args.matrix:
        a = load_hermitian(args.matrix)
        b = load_hermitian(args.other) if args.other else None
        return a, b
    n, seed = _random_spec(args.random)
    a = random_hermitian(n, seed)
    if args.other:
        return a, load_hermitian(args.other)
    rng = np.random.default_rng([seed, 1])
    if args.theorem == "domination":
        if args.indefinite:
            u = haar_bases(rng, 1, n, n)[0]
            signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
            return a, Hermitian(a.entries + (u * signs) @ u.conj().T)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return a, Hermitian(a.entries + np.outer(c, c.conj()))
    return a, random_hermitian(n, [seed, 2])


def _require(value, flag):
    if value is None:
        raise UsageError(f"this theorem needs {flag}")
    return value


def _cmd_verify(args) -> int:
    a, b = _matrices(args)
    kw = {"perturb": args.perturb}
    th = args.theorem
    if th == "kyfan":
        rep = minmax_verifier.verify_kyfan(a, _require(args.j, "--j"), args.trials, args.seed,
                                           equality=args.equality, **kw)
    elif th == "cf":
        rep = minmax_verifier.verify_courant_fischer(
            a, _require(args.i, "--i"), _require(args.j, "--j"),
            args.outer_trials, args.inner_trials, args.seed, **kw)
    elif th == "wielandt":
        rep = minmax_verifier.verify_wielandt(a, _require(args.intervals, "--intervals"),
                                              args.outer_trials, args.inner_trials, args.seed, **kw)
    elif th == "conditional":
        if args.t0 is not None and args.t1 is not None:
            t0, t1 = args.t0, args.t1
        else:
            (lo, hi), = _require(args.intervals, "--t0/--t1 or --intervals i0:i1")
            lam = a.eigenvalues
            if not 0 <= lo < hi <= a.dim:
                raise ValueError(f"index interval [{lo}, {hi}) outside [0, {a.dim}]")
            t0 = float(lam[lo])
            t1 = float(lam[hi]) if hi < a.dim else math.inf
        rep = minmax_verifier.verify_conditional_min(a, t0, t1, args.trials, args.seed, **kw)
    elif th == "lidskii":
        rep = majorization.lidskii_check(a, b)
    else:
        rep = majorization.domination_check(a, b)
    if args.random and th in ("lidskii", "domination"):
        rep.parameters["random"] = " ".join(args.random)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rep.to_json() + "\n")
    print(CSV_HEADER)
    print(rep.csv_row())
    if rep.status != "pass":
        print(f"status: {rep.status}", file=sys.stderr)
    return EXIT_FAILED if rep.status == FAIL else EXIT_OK


def _cmd_suite(args) -> int:
    results = suite.run_suite(args.seed, args.criteria)
    print(suite.format_table(results))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(suite.suite_json(args.seed, results) + "\n")
    return EXIT_OK if all(r.passed and r.within_time for r in results) else EXIT_FAILED


COMMANDS = {
    "quantile": _cmd_quantile, "spectrum": _cmd_spectrum, "discretize": _cmd_discretize,
    "generate": _cmd_generate, "verify": _cmd_verify, "suite": _cmd_suite,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeasureValidationError, MatrixValidationError, DegenerateSpectrumError,
            minmax_verifier.GranularityError, CertificateError, ConvergenceError,
            ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
