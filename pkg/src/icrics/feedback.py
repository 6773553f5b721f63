"""Closed-loop iterative compensation recovery (ICRICS).

Given a measurement operator ``MS`` and a reconstructor ``RC``, the open-loop
estimate ``y0 = RC(MS(x0))`` is refined by negative feedback::

    x_1 = y0            (or zero, or random)
    e_n = y0 - RC(MS(x_n))
    x_{n+1} = x_n + lam * e_n

so that the re-reconstruction of the estimate is driven back to ``y0``.
The loop output is ``x_n``, never ``y_n``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .imagecore import Image, from_blocks, to_blocks
from .recon import ReconstructorSpec, recover
from .sensing import DimensionError, MeasurementOperator, measure

INIT_MODES = ("y0", "zero", "random")

# blocks per unit of work in run_on_image; fixed so results do not depend
# on the number of workers
CHUNK_BLOCKS = 32


@dataclass(frozen=True)
class FeedbackConfig:
    """Loop settings. Defaults are ``lam = 1`` and ``n_max = 5``.

    ``n_max`` counts every iterate including the initial one, so the loop
    applies ``n_max - 1`` updates. ``init_seed`` is only used by the
    ``random`` init mode.
    """

    lam: float = 1.0
    n_max: int = 5
    init: str = "y0"
    init_seed: int = 0

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not np.isfinite(self.lam):
            raise ValueError("lambda must be finite")
        if self.init not in INIT_MODES:
            raise ValueError(f"unknown init mode {self.init!r}; expected one of {INIT_MODES}")


@dataclass(frozen=True)
class IterationRecord:
    n: int
    x: np.ndarray
    error: np.ndarray  # y0 - RC(MS(x_n)), drives the next update
    correction: np.ndarray  # lam * error
    measurement_residual: np.ndarray | float  # ||MS(x_n) - z0||
    recon_residual: np.ndarray | float  # ||y0 - RC(MS(x_n))||


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self):
        return iter(self.records)

    @property
    def measurement_residuals(self) -> np.ndarray:
        return np.array([r.measurement_residual for r in self.records])

    @property
    def recon_residuals(self) -> np.ndarray:
        return np.array([r.recon_residual for r in self.records])

    def select(self, i: int) -> "IterationTrace":
        """Per-block trace out of a trace recorded on a stack of blocks."""
        return IterationTrace(
            [
                IterationRecord(
                    n=r.n,
                    x=r.x[i],
                    error=r.error[i],
                    correction=r.correction[i],
                    measurement_residual=float(r.measurement_residual[i]),
                    recon_residual=float(r.recon_residual[i]),
                )
                for r in self.records
            ]
        )


@dataclass
class RecoveryResult:
    z0: np.ndarray
    y0: np.ndarray
    x_final: np.ndarray
    trace: IterationTrace

    def select(self, i: int) -> "RecoveryResult":
        return RecoveryResult(self.z0[i], self.y0[i], self.x_final[i], self.trace.select(i))


def init_estimate(config: FeedbackConfig, y0, D: Optional[int] = None, stream: int = 0) -> np.ndarray:
    """First iterate ``x_1`` in the configured mode.

    ``random`` draws uniform values in [0, 255] with shape of ``y0`` from a
    generator seeded by ``(init_seed, stream)``.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    if D is not None and y0.shape[-1] != D:
        raise DimensionError(f"y0 has dimension {y0.shape[-1]}, expected {D}")
    if config.init == "y0":
        return y0.copy()
    if config.init == "zero":
        return np.zeros_like(y0)
    rng = np.random.default_rng([config.init_seed, stream])
    return rng.uniform(0.0, 255.0, size=y0.shape)


def _norm(v):
    n = np.linalg.norm(v, axis=-1)
    return n if n.ndim else float(n)


def icrics_step(op: MeasurementOperator, spec: ReconstructorSpec, y0, x_prev, lam: float):
    """One compensation update. Returns ``(x_next, e)``."""
    y0 = np.asarray(y0, dtype=np.float64)
    x_prev = np.asarray(x_prev, dtype=np.float64)
    if y0.shape != x_prev.shape:
        raise DimensionError(f"y0 shape {y0.shape} != x_prev shape {x_prev.shape}")
    e = y0 - recover(op, measure(op, x_prev), spec)
    return x_prev + lam * e, e


def icrics_run(
    op: MeasurementOperator,
    spec: ReconstructorSpec,
    x0_block=None,
    config: FeedbackConfig = FeedbackConfig(),
    *,
    z0=None,
    y0=None,
    stream: int = 0,
) -> RecoveryResult:
    """Run the full loop on one block (shape ``(D,)``) or a stack ``(k, D)``.

    Pass either the original ``x0_block`` or a measurement ``z0`` (with an
    optional precomputed ``y0 = RC(z0)``) when the original is unavailable.
    """
    if x0_block is not None:
        if z0 is not None:
            raise ValueError("pass either x0_block or z0, not both")
        z0 = measure(op, x0_block)
    elif z0 is None:
        raise ValueError("need x0_block or z0")
    z0 = np.asarray(z0, dtype=np.float64)
    if z0.shape[-1] != op.d:
        raise DimensionError(f"measurement dimension {z0.shape[-1]} != {op.d}")
    if y0 is None:
        y0 = recover(op, z0, spec)
    y0 = np.asarray(y0, dtype=np.float64)
    if y0.shape[:-1] != z0.shape[:-1] or y0.shape[-1] != op.D:
        raise DimensionError(f"y0 shape {y0.shape} does not match measurement shape {z0.shape}")

    lam = config.lam
    x = init_estimate(config, y0, op.D, stream=stream)
    trace = IterationTrace()
    for n in range(1, config.n_max + 1):
        zn = measure(op, x)
        e = y0 - recover(op, zn, spec)
        c = lam * e
        trace.records.append(
            IterationRecord(
                n=n,
                x=x,
                error=e,
                correction=c,
                measurement_residual=_norm(zn - z0),
                recon_residual=_norm(e),
            )
        )
        if n < config.n_max:
            x = x + c
    return RecoveryResult(z0=z0, y0=y0, x_final=x, trace=trace)


@dataclass
class ImageRecovery:
    baseline: Image
    compensated: Image
    results: list[RecoveryResult]  # one per block, row-major block order

    @property
    def traces(self) -> list[IterationTrace]:
        return [r.trace for r in self.results]

    def __iter__(self):
        # unpacks as (baseline, compensated, traces)
        return iter((self.baseline, self.compensated, self.traces))


def run_on_image(
    image: Image,
    op: MeasurementOperator,
    spec: ReconstructorSpec,
    config: FeedbackConfig = FeedbackConfig(),
    block_size: int = 32,
    workers: int = 1,
) -> ImageRecovery:
    """Tile, sense and recover every block, with and without compensation.

    Both output images are clipped to [0, 255]; nothing is clipped inside
    the loop. Blocks are processed in fixed chunks of ``CHUNK_BLOCKS``;
    ``workers > 1`` runs chunks on a thread pool with identical results.
    """
    if op.D != block_size * block_size:
        raise DimensionError(f"operator dimension {op.D} != block_size^2 = {block_size ** 2}")
    bs = to_blocks(image, block_size)
    starts = range(0, bs.layout.n_blocks, CHUNK_BLOCKS)

    def work(start):
        chunk = bs.blocks[start : start + CHUNK_BLOCKS]
        return icrics_run(op, spec, chunk, config, stream=start // CHUNK_BLOCKS)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunk_results = list(pool.map(work, starts))
    else:
        chunk_results = [work(s) for s in starts]

    results = [res.select(i) for res in chunk_results for i in range(res.y0.shape[0])]
    y0 = np.concatenate([res.y0 for res in chunk_results])
    xf = np.concatenate([res.x_final for res in chunk_results])
    baseline = from_blocks(bs.with_blocks(y0)).clipped()
    compensated = from_blocks(bs.with_blocks(xf)).clipped()
    return ImageRecovery(baseline, compensated, results)
