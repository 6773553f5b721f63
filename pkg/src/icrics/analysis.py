"""Linearized stability diagnostics for the compensation loop.

Around a reference point the pipeline ``RC(MS(.))`` is replaced by its
Jacobian ``G``; the estimation error then evolves as
``(x0 - x_n) = (I - lam G)(x0 - x_{n-1})``. This module estimates ``G``,
reports ``||I - lam G||_F`` and the spectral radius of ``I - lam G``, and
iterates the discrete error recursion to its steady state.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .feedback import FeedbackConfig
from .recon import ReconstructorSpec, recover
from .sensing import MeasurementOperator, measure

MAX_JACOBIAN_DIM = 256
DENSE_EIG_DIM = 64


@dataclass(frozen=True)
class JacobianEstimate:
    G: np.ndarray
    probe_step: float
    reference_point: np.ndarray


@dataclass(frozen=True)
class StabilityReport:
    D: int
    d: int
    lam: float
    recon: str
    jacobian: str  # "exact" or "central-difference"
    contraction_frobenius: float
    admissible_low: float
    admissible_high: float
    spectral_radius: float
    diagonal_dominance: float
    steady_state_error_norm: Optional[float]
    steady_state_status: str

    @property
    def admissible_interval(self) -> tuple[float, float]:
        return (self.admissible_low, self.admissible_high)

    @property
    def divergent(self) -> bool:
        return self.steady_state_status == "divergent" or self.spectral_radius > 1.0 + 1e-6

    def as_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = []
        for key, val in self.as_dict().items():
            if isinstance(val, float):
                val = f"{val:.10g}"
            elif val is None:
                val = "n/a"
            lines.append(f"{key}={val}")
        return "\n".join(lines) + "\n"

    def csv_header(self) -> str:
        return ",".join(self.as_dict()) + "\n"

    def csv_row(self) -> str:
        vals = []
        for val in self.as_dict().values():
            if isinstance(val, float):
                vals.append(f"{val:.10g}")
            elif val is None:
                vals.append("")
            else:
                vals.append(str(val))
        return ",".join(vals) + "\n"


def estimate_jacobian(
    op: MeasurementOperator, spec: ReconstructorSpec, x_ref, h: float = 1e-3
) -> JacobianEstimate:
    """Central-difference Jacobian of ``x -> RC(MS(x))`` at ``x_ref``.

    Column ``j`` is ``[RC(MS(x_ref + h u_j)) - RC(MS(x_ref - h u_j))] / 2h``.
    Exact up to roundoff for the linear ``pinv`` pipeline; for ISTA the
    soft-threshold kinks make the estimate step-size dependent.
    """
    if not h > 0:
        raise ValueError(f"probe step must be positive, got {h}")
    D = op.D
    if D > MAX_JACOBIAN_DIM:
        raise ValueError(f"Jacobian estimation limited to D <= {MAX_JACOBIAN_DIM}, got {D}")
    x_ref = np.asarray(x_ref, dtype=np.float64)
    if x_ref.shape != (D,):
        raise ValueError(f"reference point must have shape ({D},), got {x_ref.shape}")
    probes = h * np.eye(D)
    # row j of each stack is the pipeline output for probe j
    plus = recover(op, measure(op, x_ref + probes), spec)
    minus = recover(op, measure(op, x_ref - probes), spec)
    G = ((plus - minus) / (2.0 * h)).T
    return JacobianEstimate(G=G, probe_step=h, reference_point=x_ref.copy())


def _square(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def iteration_matrix(G, lam: float) -> np.ndarray:
    G = _square(G)
    return np.eye(G.shape[0]) - lam * G


def contraction_factor(G, lam: float) -> float:
    """``||I - lam G||_F``."""
    return float(np.linalg.norm(iteration_matrix(G, lam), "fro"))


def admissible_lambda_interval(D: int) -> tuple[float, float]:
    """Open interval of ``lam`` with ``|1 - lam| sqrt(D) < 1``."""
    if D < 1:
        raise ValueError("D must be >= 1")
    w = 1.0 / np.sqrt(D)
    return (1.0 - w, 1.0 + w)


def spectral_radius(M, max_iter: int = 1000, rtol: float = 1e-12) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Matrices up to ``DENSE_EIG_DIM`` go straight to a dense eigensolve.
    Larger ones use power iteration from the all-ones vector; if that does
    not settle (complex or equal-modulus competing eigenvalues) the dense
    solve is used after all.
    """
    M = _square(M)
    n = M.shape[0]
    if n == 0:
        return 0.0
    if n <= DENSE_EIG_DIM:
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    v = np.ones(n) / np.sqrt(n)
    # below this the start vector has (numerically) no dominant component
    floor = 1e-10 * np.linalg.norm(M, "fro")
    est = 0.0
    for _ in range(max_iter):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw <= floor:
            break
        if est > 0 and abs(nw - est) <= rtol * est:
            return float(nw)
        est = nw
        v = w / nw
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def diagonal_dominance(G) -> float:
    """``||diag(G)||_F / ||G||_F`` (1 for a diagonal matrix)."""
    G = _square(G)
    total = np.linalg.norm(G, "fro")
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(np.diag(G)) / total)


def steady_state_error(
    op: MeasurementOperator,
    lam: float,
    y0,
    horizon: int = 100,
    x1=None,
) -> tuple[float, str]:
    """Iterate the linear error recursion of the ``pinv`` loop.

    ``u_0 = y0 - Phi^T Phi x1`` and ``u_n = (I - lam Phi^T Phi) u_{n-1}``;
    ``u_n`` is exactly the loop error ``y0 - y_n``. ``x1`` defaults to
    ``y0``. Returns ``(||u_horizon||, status)`` with status one of
    ``converged``, ``divergent``, ``oscillating``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    y0 = np.asarray(y0, dtype=np.float64)
    x1 = y0 if x1 is None else np.asarray(x1, dtype=np.float64)
    P = op.gram()
    u = y0 - P @ x1
    u0 = np.linalg.norm(u)
    norms = [u0]
    prev = u
    for _ in range(horizon):
        prev = u
        u = u - lam * (P @ u)
        norms.append(np.linalg.norm(u))
    final = float(norms[-1])
    # roundoff level of the loop quantities
    noise = 1e-12 * max(np.linalg.norm(y0), np.linalg.norm(P @ x1))

    if u0 <= noise or final < 1e-9 * u0 or final <= noise:
        return final, "converged"
    tail = np.array(norms[-11:])
    if len(tail) >= 2 and np.all(np.diff(tail) > 0):
        return final, "divergent"
    if np.linalg.norm(u - prev) <= 1e-9 * u0:
        # settled on a nonzero stable error
        return final, "converged"
    return final, "oscillating"


def analyze(
    op: MeasurementOperator,
    spec: ReconstructorSpec,
    config: FeedbackConfig = FeedbackConfig(),
    x_ref=None,
    h: float = 1e-3,
    horizon: int = 100,
    seed: int = 0,
) -> StabilityReport:
    """Assemble a :class:`StabilityReport` for one (operator, reconstructor, lam).

    The ``pinv`` pipeline uses its exact Jacobian ``Phi^T Phi`` at any ``D``.
    ISTA pipelines are probed by central differences at ``x_ref`` (default:
    a seeded uniform block on the 0-255 scale) and need ``D <= 256``.
    The steady-state error is only defined for the linear pipeline; its
    ``y0`` is the min-norm reconstruction of ``x_ref`` and ``x1`` follows
    ``config.init``.
    """
    lam = config.lam
    rng = np.random.default_rng(seed)
    if x_ref is None:
        x_ref = rng.uniform(0.0, 255.0, size=op.D)
    x_ref = np.asarray(x_ref, dtype=np.float64)

    if spec.is_linear:
        G = op.gram()
        how = "exact"
    else:
        G = estimate_jacobian(op, spec, x_ref, h).G
        how = "central-difference"

    M = iteration_matrix(G, lam)
    lo, hi = admissible_lambda_interval(op.D)

    es_norm, status = None, "n/a"
    if spec.is_linear:
        y0 = recover(op, measure(op, x_ref), spec)
        if config.init == "y0":
            x1 = y0
        elif config.init == "zero":
            x1 = np.zeros_like(y0)
        else:
            x1 = np.random.default_rng([config.init_seed, 0]).uniform(0.0, 255.0, size=op.D)
        es_norm, status = steady_state_error(op, lam, y0, horizon, x1=x1)

    return StabilityReport(
        D=op.D,
        d=op.d,
        lam=float(lam),
        recon=spec.kind,
        jacobian=how,
        contraction_frobenius=float(np.linalg.norm(M, "fro")),
        admissible_low=lo,
        admissible_high=hi,
        spectral_radius=spectral_radius(M),
        diagonal_dominance=diagonal_dominance(G),
        steady_state_error_norm=es_norm,
        steady_state_status=status,
    )
