"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every failure prints one line starting with ``catconv: error:`` to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapConfig, NullModel
from .diagnose import DiagnosticRequest, Mode, run
from .errors import DataError, NumericalError
from .io import format_report, parse_chain_csv, write_rows, write_wide_csv
from .simulate import (
    Dar1Params,
    MarkovParams,
    NdarmaParams,
    derive_stream,
    simulate_dar1,
    simulate_markov,
    simulate_ndarma,
)
from .stats import Method
from .study import PAPER_P, PAPER_Q, StudyGrid, concordance, concordance_rows, run_bench, run_study

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _matrix(text: str) -> np.ndarray:
    return np.array([_floats(row) for row in text.split(";")])


def _methods(text: str) -> tuple:
    try:
        return tuple(Method(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown method in {text!r}") from None


METHOD_CHOICES = [m.value for m in Method]
NULL_CHOICES = [n.value for n in NullModel]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catconv", description="Convergence diagnostics for categorical MCMC output.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("diagnose", help="test chains for homogeneity")
    d.add_argument("--input", required=True, help="chain CSV file")
    d.add_argument("--format", choices=["auto", "long", "wide"], default="auto", help="input layout")
    d.add_argument("--no-header", action="store_true", help="input has no header row")
    d.add_argument("--method", choices=METHOD_CHOICES)
    d.add_argument("--method-family", choices=["frequency", "transition"], default="frequency",
                   help="default method when --method is absent: weiss or billingsley")
    d.add_argument("--mode", choices=[m.value for m in Mode], default="between")
    d.add_argument("--window-fraction", type=float, default=0.30)
    group = d.add_mutually_exclusive_group()
    group.add_argument("--sequential", type=int, metavar="K", help="evaluate at K evenly spaced prefixes")
    group.add_argument("--checkpoints", type=_ints, help="explicit prefix lengths, comma-separated")
    d.add_argument("--alpha", type=float, default=0.05)
    d.add_argument("--boot-B", type=int, default=1000)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--null", choices=NULL_CHOICES, default=NullModel.POOLED.value)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--report-format", choices=["csv", "jsonl"], default="csv")
    d.add_argument("--output", help="report path (default: stdout)")

    s = sub.add_parser("simulate", help="simulate categorical chains as a wide CSV")
    s.add_argument("--model", choices=["dar1", "ndarma", "markov"], required=True)
    s.add_argument("--p", type=_floats, help="marginal probabilities (dar1, ndarma)")
    s.add_argument("--phi", type=float, help="copy probability (dar1)")
    s.add_argument("--phi-weights", type=_floats, default=(), help="past-value selection weights (ndarma)")
    s.add_argument("--varphi-weights", type=_floats, help="innovation selection weights, lag 0 first (ndarma)")
    s.add_argument("--transition", type=_matrix, help="rows separated by ';' (markov)")
    s.add_argument("--initial", type=_floats, help="initial distribution (markov)")
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--chains", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", help="CSV path (default: stdout)")

    st = sub.add_parser("simstudy", help="run the operating-characteristics study")
    st.add_argument("--lengths", type=_ints, default=(10, 100, 1000, 10000))
    st.add_argument("--phis", type=_floats, default=(0.0, 0.25, 0.5, 0.75))
    st.add_argument("--betas", type=_floats, default=(0.0, 0.3, 0.5, 0.7, 0.8, 0.85, 0.9, 0.94, 0.96, 1.0))
    st.add_argument("--p", type=_floats, default=PAPER_P)
    st.add_argument("--q", type=_floats, default=PAPER_Q)
    st.add_argument("--methods", type=_methods, default=tuple(Method))
    st.add_argument("--replications", type=int, default=1000)
    st.add_argument("--alpha", type=float, default=0.05)
    st.add_argument("--boot-B", type=int, default=1000)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--null", choices=NULL_CHOICES, default=NullModel.POOLED.value)
    st.add_argument("--workers", type=int, default=1)
    st.add_argument("--output-dir", required=True)

    b = sub.add_parser("bench", help="time every method on simulated DAR(1) chains")
    b.add_argument("--chains", type=_ints, default=(2, 4, 6, 8, 10))
    b.add_argument("--categories", type=_ints, default=(2, 4, 6, 8, 10))
    b.add_argument("--lengths", type=_ints, default=(10, 100, 1000, 10000))
    b.add_argument("--methods", type=_methods, default=tuple(Method))
    b.add_argument("--reps", type=int, default=100)
    b.add_argument("--boot-B", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", help="CSV path (default: stdout)")
    return parser


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _diagnose(args) -> None:
    method = args.method or ("weiss" if args.method_family == "frequency" else "billingsley")
    checkpoints = args.sequential if args.sequential is not None else args.checkpoints
    try:
        request = DiagnosticRequest(
            method=method,
            mode=args.mode,
            window_fraction=args.window_fraction,
            checkpoints=checkpoints,
            alpha=args.alpha,
            bootstrap=BootstrapConfig(B=args.boot_B, seed=args.seed, parallelism=args.workers, null_model=args.null),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if checkpoints is not None and request.mode is not Mode.BETWEEN:
        raise UsageError("sequential evaluation is only defined for between mode")
    try:
        chains = parse_chain_csv(args.input, args.format, header=not args.no_header)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror}") from None
    report = run(chains, request)
    out, close = _open_out(args.output)
    try:
        out.write(format_report(report, args.report_format))
    finally:
        if close:
            out.close()


def _simulate(args) -> None:
    if args.length < 1 or args.chains < 1:
        raise UsageError("--length and --chains must be positive")
    try:
        if args.model == "dar1":
            if args.p is None or args.phi is None:
                raise UsageError("dar1 needs --p and --phi")
            params, fn = Dar1Params(np.array(args.p), args.phi), simulate_dar1
        elif args.model == "ndarma":
            if args.p is None or args.varphi_weights is None:
                raise UsageError("ndarma needs --p and --varphi-weights")
            params, fn = NdarmaParams(np.array(args.p), args.phi_weights, args.varphi_weights), simulate_ndarma
        else:
            if args.transition is None:
                raise UsageError("markov needs --transition")
            r = args.transition.shape[0]
            initial = np.array(args.initial) if args.initial is not None else np.full(r, 1.0 / r)
            params, fn = MarkovParams(args.transition, initial), simulate_markov
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    columns = [(fn(params, args.length, derive_stream(args.seed, k)) + 1).tolist() for k in range(args.chains)]
    out, close = _open_out(args.output)
    try:
        write_wide_csv(columns, [f"c{k + 1}" for k in range(args.chains)], out)
    finally:
        if close:
            out.close()


def _simstudy(args) -> None:
    try:
        grid = StudyGrid(
            lengths=args.lengths, phis=args.phis, betas=args.betas, p=args.p, q=args.q,
            replications=args.replications, alpha=args.alpha, methods=args.methods,
            B=args.boot_B, seed=args.seed, null_model=args.null,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_study(grid, workers=args.workers)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    tables = {
        "rejection.csv": result.rejection_rows(),
        "pvalues.csv": result.pvalue_rows(),
        "concordance.csv": concordance_rows(concordance(result)),
    }
    for name, rows in tables.items():
        with open(outdir / name, "w", encoding="utf-8", newline="") as fh:
            write_rows(rows, fh)


def _bench(args) -> None:
    rows = run_bench(
        chains=args.chains, categories=args.categories, lengths=args.lengths,
        repetitions=args.reps, methods=args.methods, B=args.boot_B, seed=args.seed,
    )
    fields = ["method", "chains", "categories", "length", "reps", "median", "mean", "min", "max"]
    out, close = _open_out(args.output)
    try:
        write_rows(rows, out, fields)
    finally:
        if close:
            out.close()


COMMANDS = {"diagnose": _diagnose, "simulate": _simulate, "simstudy": _simstudy, "bench": _bench}


def _fail(kind: str, message: str, code: int) -> int:
    message = " ".join(str(message).split())
    print(f"catconv: error: {kind}: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="catconv: %(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except DataError as exc:
        return _fail("data", exc, EXIT_DATA)
    except NumericalError as exc:
        return _fail("numerical", exc, EXIT_NUMERIC)
    except SystemExit as exc:
        # --help exits through argparse with code 0
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
