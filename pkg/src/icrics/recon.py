"""Baseline block reconstructors: min-norm back-projection and DCT-domain ISTA."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.fft

from .sensing import DimensionError, MeasurementOperator, adjoint, measure

KINDS = ("pinv", "ista")


@dataclass(frozen=True)
class ReconstructorSpec:
    """Which reconstructor to run and its ISTA settings.

    ``ista_threshold`` is the soft-threshold level on the 0-255 coefficient
    scale. Both ISTA fields are ignored by the ``pinv`` reconstructor.
    """

    kind: str = "pinv"
    ista_iterations: int = 200
    ista_threshold: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown reconstructor kind {self.kind!r}; expected one of {KINDS}")
        if self.ista_iterations < 1:
            raise ValueError("ista_iterations must be >= 1")
        if not self.ista_threshold >= 0:
            raise ValueError("ista_threshold must be >= 0")

    @property
    def is_linear(self) -> bool:
        return self.kind == "pinv"


def _side(D: int) -> int:
    B = math.isqrt(D)
    if B * B != D:
        raise DimensionError(f"block dimension {D} is not a perfect square")
    return B


def dct2(block) -> np.ndarray:
    """Orthonormal type-II 2-D DCT of flattened square blocks (last axis)."""
    x = np.asarray(block, dtype=np.float64)
    B = _side(x.shape[-1])
    c = scipy.fft.dctn(x.reshape(x.shape[:-1] + (B, B)), type=2, axes=(-2, -1), norm="ortho")
    return c.reshape(x.shape)


def idct2(coeffs) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    c = np.asarray(coeffs, dtype=np.float64)
    B = _side(c.shape[-1])
    x = scipy.fft.idctn(c.reshape(c.shape[:-1] + (B, B)), type=2, axes=(-2, -1), norm="ortho")
    return x.reshape(c.shape)


def soft_threshold(v, tau):
    """``sign(v) * max(|v| - tau, 0)``, elementwise."""
    if np.any(np.asarray(tau) < 0):
        raise ValueError("threshold must be non-negative")
    v = np.asarray(v, dtype=np.float64)
    out = np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)
    return out if out.ndim else float(out)


def recover_pinv(op: MeasurementOperator, z) -> np.ndarray:
    # row-orthonormal Phi: the pseudo-inverse is Phi^T
    return adjoint(op, z)


_synthesis_cache: "weakref.WeakKeyDictionary[MeasurementOperator, np.ndarray]" = weakref.WeakKeyDictionary()


def synthesis_matrix(op: MeasurementOperator) -> np.ndarray:
    """``Phi idct2(.)`` as a ``d x D`` matrix: row ``i`` is ``dct2(Phi[i])``.

    Cached per operator.
    """
    M = _synthesis_cache.get(op)
    if M is None:
        M = dct2(op.matrix)
        M.setflags(write=False)
        _synthesis_cache[op] = M
    return M


def ista_objective(op: MeasurementOperator, coeffs, z, tau: float) -> np.ndarray:
    """``||Phi idct2(c) - z||^2 / 2 + tau ||c||_1`` per block."""
    r = measure(op, idct2(coeffs)) - np.asarray(z, dtype=np.float64)
    return 0.5 * np.sum(r * r, axis=-1) + tau * np.sum(np.abs(coeffs), axis=-1)


def recover_ista(
    op: MeasurementOperator,
    z,
    spec: ReconstructorSpec,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
) -> np.ndarray:
    """Sparse recovery in the 2-D DCT basis by iterative soft-thresholding.

    Solves ``min_c ||Phi idct2(c) - z||^2 / 2 + tau ||c||_1`` with unit step
    (valid because ``||Phi||_2 = 1``), starting from ``dct2(Phi^T z)`` and
    running exactly ``spec.ista_iterations`` steps.

    Parameters
    ----------
    op : MeasurementOperator
    z : array_like, shape (d,) or (k, d)
    spec : ReconstructorSpec
    callback : callable, optional
        Called as ``callback(k, c)`` with the coefficients after step ``k``
        (``k = 0`` is the initialization).

    Returns
    -------
    ndarray, shape (D,) or (k, D)
    """
    if spec.kind != "ista":
        raise ValueError(f"recover_ista needs an ista spec, got {spec.kind!r}")
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 0 or z.shape[-1] != op.d:
        raise DimensionError(f"measurement must have last dimension {op.d}, got shape {z.shape}")
    tau = spec.ista_threshold
    M = synthesis_matrix(op)
    # coefficient domain: dct2(Phi^T r) = r @ M and Phi idct2(c) = c @ M.T
    c = z @ M
    if callback is not None:
        callback(0, c)
    for k in range(1, spec.ista_iterations + 1):
        c = soft_threshold(c + (z - c @ M.T) @ M, tau)
        if callback is not None:
            callback(k, c)
    return idct2(c)


def recover(op: MeasurementOperator, z, spec: ReconstructorSpec) -> np.ndarray:
    if spec.kind == "pinv":
        return recover_pinv(op, z)
    if spec.kind == "ista":
        return recover_ista(op, z, spec)
    raise ValueError(f"unknown reconstructor kind {spec.kind!r}")
