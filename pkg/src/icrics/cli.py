"""Command line entry point: ``icrics {recover,bench,analyze}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure
(divergence reported by ``analyze``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze
from .bench import BenchConfig, DatasetError, emit_csv, emit_markdown, run_benchmark, summarize
from .feedback import INIT_MODES, FeedbackConfig, run_on_image
from .imagecore import PGMError, load_pgm, save_pgm
from .metrics import psnr, ssim
from .recon import KINDS, ReconstructorSpec
from .sensing import DimensionError, make_operator, sampling_dims

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rates(text: str) -> tuple[float, ...]:
    try:
        rates = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}")
    if not rates or any(not 0.0 < r <= 1.0 for r in rates):
        raise argparse.ArgumentTypeError(f"rates must be a comma list of values in (0, 1], got {text!r}")
    return rates


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--recon", choices=KINDS, default="ista")
    p.add_argument("--ista-iters", type=int, default=200)
    p.add_argument("--ista-tau", type=float, default=10.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=5, help="total iterations n_max (default 5)")
    p.add_argument("--init", choices=INIT_MODES, default="y0")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--block", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="icrics", description="Closed-loop compensation recovery for block compressive sensing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("recover", help="sense and reconstruct one PGM image")
    r.add_argument("--image", required=True)
    r.add_argument("--rates", type=_rates, default=(0.25,))
    r.add_argument("--out", required=True, help="output directory")
    _add_common(r)

    b = sub.add_parser("bench", help="run the (image, rate) grid over a dataset directory")
    b.add_argument("--dataset", required=True)
    b.add_argument("--rates", type=_rates, default=(0.1, 0.25, 0.5))
    b.add_argument("--out", required=True)
    b.add_argument("--format", choices=("csv", "md"), default="csv")
    b.add_argument("--summary", action="store_true", help="with --format csv, write per-rate averages")
    b.add_argument("--workers", type=int, default=1)
    _add_common(b)

    a = sub.add_parser("analyze", help="stability report for one operator / reconstructor / lambda")
    a.add_argument("--rates", type=_rates, default=(0.25,))
    a.add_argument("--measurements", type=int, default=None, help="d; overrides --rates")
    a.add_argument("--probe-step", type=float, default=1e-3)
    a.add_argument("--horizon", type=int, default=100)
    a.add_argument("--out", default=None, help="append the report as a CSV row")
    a.add_argument("--format", choices=("text", "csv"), default="text")
    _add_common(a)
    return p


def _configs(args):
    if args.block < 1:
        raise UsageError("--block must be >= 1")
    try:
        spec = ReconstructorSpec(args.recon, args.ista_iters, args.ista_tau)
        fb = FeedbackConfig(lam=args.lam, n_max=args.iters, init=args.init, init_seed=args.init_seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    return spec, fb


def cmd_recover(args) -> int:
    spec, fb = _configs(args)
    img = load_pgm(args.image)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    D = args.block**2
    for rate in args.rates:
        op = make_operator(args.seed, D, sampling_dims(rate, D))
        res = run_on_image(img, op, spec, fb, args.block)
        tag = f"{stem}_r{rate:g}"
        save_pgm(res.baseline, out / f"{tag}_baseline.pgm")
        save_pgm(res.compensated, out / f"{tag}_compensated.pgm")
        print(
            f"{tag} psnr_original={psnr(img, res.baseline):.4f} psnr_proposed={psnr(img, res.compensated):.4f} "
            f"ssim_original={ssim(img, res.baseline):.4f} ssim_proposed={ssim(img, res.compensated):.4f}"
        )
    return EXIT_OK


def cmd_bench(args) -> int:
    spec, fb = _configs(args)
    cfg = BenchConfig(
        dataset_dir=args.dataset,
        rates=args.rates,
        recon=spec,
        feedback=fb,
        block_size=args.block,
        seed=args.seed,
        output=args.out,
    )
    rows = run_benchmark(cfg, workers=args.workers)
    if args.format == "md":
        emit_markdown(summarize(rows), args.out)
    elif args.summary:
        emit_csv(summarize(rows), args.out)
    else:
        emit_csv(rows, args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    spec, fb = _configs(args)
    D = args.block**2
    d = args.measurements if args.measurements is not None else sampling_dims(args.rates[0], D)
    op = make_operator(args.seed, D, d)
    try:
        report = analyze(op, spec, fb, h=args.probe_step, horizon=args.horizon, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "csv":
        sys.stdout.write(report.csv_header() + report.csv_row())
    else:
        sys.stdout.write(report.to_text())
    if args.out:
        path = Path(args.out)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", encoding="utf-8") as fh:
            if new:
                fh.write(report.csv_header())
            fh.write(report.csv_row())
    return EXIT_NUMERIC if report.divergent else EXIT_OK


COMMANDS = {"recover": cmd_recover, "bench": cmd_bench, "analyze": cmd_analyze}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DimensionError) as exc:
        print(f"icrics: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, PGMError, OSError) as exc:
        print(f"icrics: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, RuntimeError, FloatingPointError) as exc:
        print(f"icrics: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
