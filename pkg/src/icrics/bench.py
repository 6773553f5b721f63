"""Benchmark harness: dataset scanning, the (image, rate) grid, and tables.

Rows compare the open-loop reconstruction ("original") with the compensated
one ("proposed"), both computed from the same measurements.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .feedback import FeedbackConfig, run_on_image
from .imagecore import Image, PGMError, load_pgm
from .metrics import psnr, ssim
from .recon import ReconstructorSpec
from .sensing import make_operator, sampling_dims

log = logging.getLogger(__name__)

CSV_HEADER = "dataset,image,rate,psnr_original,psnr_proposed,ssim_original,ssim_proposed,lambda,n_max,seed"
SUMMARY_CSV_HEADER = "dataset,rate,images,psnr_original,psnr_proposed,ssim_original,ssim_proposed"


class DatasetError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    dataset_dir: str
    rates: tuple[float, ...] = (0.1, 0.25, 0.5)
    recon: ReconstructorSpec = field(default_factory=ReconstructorSpec)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    block_size: int = 32
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise ValueError("at least one sampling rate is required")
        for r in rates:
            if not 0.0 < r <= 1.0:
                raise ValueError(f"sampling rate {r} outside (0, 1]")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    image: str
    rate: float
    psnr_original: float
    psnr_proposed: float
    ssim_original: float
    ssim_proposed: float
    lam: float
    n_max: int
    seed: int

    @property
    def psnr_gain(self) -> float:
        return self.psnr_proposed - self.psnr_original

    @property
    def ssim_gain(self) -> float:
        return self.ssim_proposed - self.ssim_original


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    rate: float
    images: int
    psnr_original: float
    psnr_proposed: float
    ssim_original: float
    ssim_proposed: float


def scan_dataset(directory) -> list[tuple[str, Image]]:
    """Load every ``*.pgm`` in ``directory`` sorted by file name bytes.

    Non-PGM files are ignored. A malformed PGM raises :class:`DatasetError`
    naming the file rather than being skipped.
    """
    d = Path(directory)
    if not d.is_dir():
        raise DatasetError(f"dataset directory not found: {d}")
    names = sorted(
        (p for p in os.listdir(d) if p.lower().endswith(".pgm") and (d / p).is_file()),
        key=os.fsencode,
    )
    out = []
    for name in names:
        try:
            out.append((Path(name).stem, load_pgm(d / name)))
        except PGMError as exc:
            raise DatasetError(f"{d / name}: {exc}") from exc
    if not out:
        raise DatasetError(f"no images (*.pgm) in {d}")
    return out


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def run_benchmark(config: BenchConfig, workers: int = 1) -> list[BenchRow]:
    """One row per (image, rate), ordered by image name then rate.

    ``workers`` parallelizes over blocks inside each image; output is
    identical for any worker count.
    """
    images = scan_dataset(config.dataset_dir)
    dataset = Path(config.dataset_dir).resolve().name
    D = config.block_size**2
    ops = {r: make_operator(config.seed, D, sampling_dims(r, D)) for r in config.rates}
    rows = []
    for name, img in images:
        for r in config.rates:
            res = run_on_image(img, ops[r], config.recon, config.feedback, config.block_size, workers=workers)
            rows.append(
                BenchRow(
                    dataset=dataset,
                    image=name,
                    rate=r,
                    psnr_original=psnr(img, res.baseline),
                    psnr_proposed=psnr(img, res.compensated),
                    ssim_original=ssim(img, res.baseline),
                    ssim_proposed=ssim(img, res.compensated),
                    lam=config.feedback.lam,
                    n_max=config.feedback.n_max,
                    seed=config.seed,
                )
            )
            log.info("%s r=%s psnr %.4f -> %.4f", name, r, rows[-1].psnr_original, rows[-1].psnr_proposed)
    rows.sort(key=lambda row: (row.dataset, row.image, row.rate))
    return rows


def summarize(rows) -> list[SummaryRow]:
    """Per-(dataset, rate) means of the four metrics."""
    rows = list(rows)
    if not rows:
        raise ValueError("cannot summarize an empty row list")
    groups: dict[tuple[str, float], list[BenchRow]] = {}
    for row in rows:
        groups.setdefault((row.dataset, row.rate), []).append(row)
    out = []
    for (dataset, rate), grp in sorted(groups.items()):
        out.append(
            SummaryRow(
                dataset=dataset,
                rate=rate,
                images=len(grp),
                psnr_original=float(np.mean([g.psnr_original for g in grp])),
                psnr_proposed=float(np.mean([g.psnr_proposed for g in grp])),
                ssim_original=float(np.mean([g.ssim_original for g in grp])),
                ssim_proposed=float(np.mean([g.ssim_proposed for g in grp])),
            )
        )
    return out


def format_csv(items) -> str:
    items = list(items)
    if not items:
        raise ValueError("nothing to write")
    if all(isinstance(i, BenchRow) for i in items):
        lines = [CSV_HEADER]
        for r in items:
            lines.append(
                ",".join(
                    [
                        r.dataset,
                        r.image,
                        _fmt(r.rate),
                        _fmt(r.psnr_original),
                        _fmt(r.psnr_proposed),
                        _fmt(r.ssim_original),
                        _fmt(r.ssim_proposed),
                        _fmt(r.lam),
                        str(r.n_max),
                        str(r.seed),
                    ]
                )
            )
    elif all(isinstance(i, SummaryRow) for i in items):
        lines = [SUMMARY_CSV_HEADER]
        for s in items:
            lines.append(
                ",".join(
                    [
                        s.dataset,
                        _fmt(s.rate),
                        str(s.images),
                        _fmt(s.psnr_original),
                        _fmt(s.psnr_proposed),
                        _fmt(s.ssim_original),
                        _fmt(s.ssim_proposed),
                    ]
                )
            )
    else:
        raise TypeError("expected a list of BenchRow or of SummaryRow")
    return "\n".join(lines) + "\n"


def format_markdown(summaries) -> str:
    summaries = list(summaries)
    if not summaries:
        raise ValueError("nothing to write")
    lines = [
        "| dataset | r | PSNR-orig | PSNR-prop | SSIM-orig | SSIM-prop |",
        "|---|---|---|---|---|---|",
    ]
    for s in summaries:
        lines.append(
            f"| {s.dataset} | {s.rate:.2f} | {s.psnr_original:.2f} | {s.psnr_proposed:.2f} "
            f"| {s.ssim_original:.4f} | {s.ssim_proposed:.4f} |"
        )
    return "\n".join(lines) + "\n"


def _write(text: str, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def emit_csv(items, path) -> None:
    # format first so an empty input never creates the file
    _write(format_csv(items), path)


def emit_markdown(summaries, path) -> None:
    _write(format_markdown(summaries), path)
