"""Seeded row-orthonormal Gaussian measurement operators.

Every operator is a ``d x D`` matrix with orthonormal rows, so the adjoint
doubles as the pseudo-inverse and the operator norm is exactly one. All
functions accept a single block vector of shape ``(D,)`` or a stack of
blocks of shape ``(k, D)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_REDRAWS = 8
# a row whose norm collapses below this fraction during orthogonalization
# is treated as linearly dependent on the previous rows
RANK_TOL = 1e-10
# orthonormality defect that triggers a second Gram-Schmidt pass
REORTH_TOL = 1e-12


class DimensionError(ValueError):
    pass


class RankDeficientError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """Row-orthonormal sensing matrix.

    Attributes
    ----------
    matrix : ndarray, shape (d, D)
    seed : int
        Seed the operator was requested with.
    draw_seed : int
        Seed of the accepted draw (``seed`` plus the number of redraws).
    """

    matrix: np.ndarray
    seed: int = 0
    draw_seed: int = 0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise DimensionError("measurement matrix must be 2-D")
        if not 1 <= m.shape[0] <= m.shape[1]:
            raise DimensionError(f"need 1 <= d <= D, got d={m.shape[0]}, D={m.shape[1]}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def D(self) -> int:
        return self.matrix.shape[1]

    @property
    def rate(self) -> float:
        return self.d / self.D

    def gram(self) -> np.ndarray:
        """``Phi^T Phi``: the exact Jacobian of the linear min-norm pipeline."""
        return self.matrix.T @ self.matrix


def _mgs_rows(a: np.ndarray) -> np.ndarray | None:
    """Modified Gram-Schmidt over the rows of ``a`` in row order, in place.

    Returns None if some row is numerically dependent on its predecessors.
    """
    d = a.shape[0]
    start_norms = np.linalg.norm(a, axis=1)
    for i in range(d):
        row = a[i]
        norm = np.linalg.norm(row)
        if not np.isfinite(norm) or norm <= RANK_TOL * start_norms[i]:
            return None
        row /= norm
        if i + 1 < d:
            rest = a[i + 1 :]
            rest -= np.outer(rest @ row, row)
    return a


def make_operator(seed: int, D: int, d: int) -> MeasurementOperator:
    """Draw a ``d x D`` standard-normal matrix and orthonormalize its rows.

    Draws come from ``numpy.random.default_rng(seed)`` (PCG64) in row-major
    order. Modified Gram-Schmidt runs over the rows in order; a second pass
    is made whenever ``max |Phi Phi^T - I|`` exceeds ``REORTH_TOL`` (square or
    ill-conditioned draws). A rank-deficient
    draw is retried with ``seed + 1``, at most ``MAX_REDRAWS`` times.
    """
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    if d < 1 or D < 1 or d > D:
        raise DimensionError(f"need 1 <= d <= D, got d={d}, D={D}")
    for attempt in range(MAX_REDRAWS + 1):
        draw_seed = int(seed) + attempt
        a = np.random.default_rng(draw_seed).standard_normal((d, D))
        a = _mgs_rows(a)
        if a is not None and np.max(np.abs(a @ a.T - np.eye(d))) > REORTH_TOL:
            a = _mgs_rows(a)
        if a is not None:
            return MeasurementOperator(a, seed=int(seed), draw_seed=draw_seed)
    raise RankDeficientError(
        f"rank-deficient draws for seeds {seed}..{seed + MAX_REDRAWS}"
    )


def _check_last(x: np.ndarray, n: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] != n:
        raise DimensionError(f"{what} must have last dimension {n}, got shape {x.shape}")
    return x


def measure(op: MeasurementOperator, x) -> np.ndarray:
    """``Phi x`` for one block or a stack of blocks."""
    x = _check_last(x, op.D, "block")
    return x @ op.matrix.T


def adjoint(op: MeasurementOperator, z) -> np.ndarray:
    """``Phi^T z``."""
    z = _check_last(z, op.d, "measurement")
    return z @ op.matrix


def sampling_dims(r: float, D: int) -> int:
    """Measurement count for sampling rate ``r``: ``max(1, round(r D))``, halves away from zero."""
    if not (0.0 < r <= 1.0):
        raise ValueError(f"sampling rate must lie in (0, 1], got {r}")
    if D < 1:
        raise DimensionError("D must be >= 1")
    return max(1, int(np.floor(r * D + 0.5)))
