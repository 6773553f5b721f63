"""Linearized stability of the compensation loop.

    python demos/02_stability_analysis.py

The per-step error map of the loop is I - lam*G, where G is the Jacobian of
x -> RC(MS(x)). For the min-norm reconstructor G = Phi^T Phi exactly, a
projector of rank d: its range contracts by |1 - lam| per step while the null
space is left untouched. The Frobenius bound ||I - lam G||_F < 1 therefore only
holds when G is (close to) the identity.
"""

import numpy as np

from icrics import (
    FeedbackConfig,
    ReconstructorSpec,
    admissible_lambda_interval,
    analyze,
    contraction_factor,
    estimate_jacobian,
    icrics_run,
    make_operator,
)

PINV = ReconstructorSpec("pinv")

# %% The admissible lambda interval shrinks like 1/sqrt(D)
for D in (1, 4, 64, 1024):
    lo, hi = admissible_lambda_interval(D)
    print(f"D={D:5d}: lambda in ({lo:.5f}, {hi:.5f})")

# %% Reports for a 16x16-block operator at quarter rate
op = make_operator(0, 256, 64)
print("\n lam   ||I-lam G||_F   rho(I-lam G)   steady state (init=zero)")
for lam in (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
    rep = analyze(op, PINV, FeedbackConfig(lam, 5, "zero"))
    print(
        f"{lam:4.2f}   {rep.contraction_frobenius:13.4f}   {rep.spectral_radius:12.6f}   "
        f"{rep.steady_state_status} ({rep.steady_state_error_norm:.3g})"
    )
print("G = I instead:", contraction_factor(np.eye(256), 1.0 + 0.5 / 16), "< 1")

# %% Residual growth when the loop diverges
x0 = np.random.default_rng(0).uniform(0, 255, 256)
res = icrics_run(op, PINV, x0, FeedbackConfig(3.0, 6, "zero"))
r = res.trace.measurement_residuals
print("\nlam=3 residual ratios:", np.round(r[1:] / r[:-1], 12))

# %% ISTA: a finite-difference Jacobian around a real block
small = make_operator(1, 64, 24)
spec = ReconstructorSpec("ista")
x_ref = np.random.default_rng(1).uniform(0, 255, 64)
G = estimate_jacobian(small, spec, x_ref, 1e-3).G
rep = analyze(small, spec, FeedbackConfig(1.0), x_ref=x_ref)
print(f"\nISTA 8x8 block, r=0.375: diag dominance {rep.diagonal_dominance:.3f}, "
      f"rho(I-G) {rep.spectral_radius:.4f}, ||I-G||_F {rep.contraction_frobenius:.3f}")
print("eigenvalues of G (largest 5):", np.round(np.sort(np.abs(np.linalg.eigvals(G)))[::-1][:5], 4))
