import numpy as np
import pytest

from icrics.analysis import (
    admissible_lambda_interval,
    analyze,
    contraction_factor,
    diagonal_dominance,
    estimate_jacobian,
    iteration_matrix,
    spectral_radius,
    steady_state_error,
)
from icrics.feedback import FeedbackConfig, icrics_run
from icrics.recon import ReconstructorSpec
from icrics.sensing import MeasurementOperator, make_operator

PINV = ReconstructorSpec("pinv")


@pytest.mark.parametrize("D", [4, 16, 64])
def test_jacobian_of_linear_pipeline(D):
    op = make_operator(D, D, max(1, D // 4))
    x = np.random.default_rng(D).uniform(0, 255, D)
    est = estimate_jacobian(op, PINV, x, 1e-3)
    assert est.G.shape == (D, D)
    assert np.max(np.abs(est.G - op.matrix.T @ op.matrix)) <= 1e-6


def test_jacobian_full_rate_is_identity():
    op = make_operator(1, 16, 16)
    est = estimate_jacobian(op, PINV, np.zeros(16), 1e-3)
    np.testing.assert_allclose(est.G, np.eye(16), atol=1e-6)


def test_jacobian_guards():
    op = make_operator(1, 16, 4)
    with pytest.raises(ValueError):
        estimate_jacobian(op, PINV, np.zeros(16), 0.0)
    with pytest.raises(ValueError):
        estimate_jacobian(make_operator(1, 289, 10), PINV, np.zeros(289), 1e-3)


def test_jacobian_ista_runs():
    op = make_operator(2, 16, 8)
    est = estimate_jacobian(op, ReconstructorSpec("ista", 30, 2.0), np.full(16, 100.0), 1e-3)
    assert np.all(np.isfinite(est.G))


def test_contraction_factor_values():
    assert contraction_factor(np.eye(5), 1.0) == 0.0
    assert abs(contraction_factor(np.eye(9), 0.0) - 3.0) <= 1e-15
    assert abs(contraction_factor(np.diag([0.5, 1.0]), 1.0) - 0.5) <= 1e-15
    with pytest.raises(ValueError):
        contraction_factor(np.ones((2, 3)), 1.0)


@pytest.mark.parametrize("D, lo, hi", [(1, 0.0, 2.0), (4, 0.5, 1.5), (1024, 0.96875, 1.03125)])
def test_admissible_interval(D, lo, hi):
    a, b = admissible_lambda_interval(D)
    assert abs(a - lo) <= 1e-12 and abs(b - hi) <= 1e-12
    assert abs((a + b) / 2 - 1.0) <= 1e-15


def test_admissible_interval_rejects_zero():
    with pytest.raises(ValueError):
        admissible_lambda_interval(0)


def test_spectral_radius_small():
    assert spectral_radius(np.zeros((3, 3))) == 0.0
    assert abs(spectral_radius(np.diag([0.2, -1.5])) - 1.5) <= 1e-12
    op = make_operator(3, 16, 5)
    assert abs(spectral_radius(np.eye(16) - op.gram()) - 1.0) <= 1e-10


@pytest.mark.parametrize("lam, expected", [(0.5, 1.0), (1.0, 1.0), (3.0, 2.0), (2.5, 1.5)])
def test_spectral_radius_power_path(lam, expected):
    # D > 64 goes through power iteration
    op = make_operator(4, 256, 64)
    M = iteration_matrix(op.gram(), lam)
    assert abs(spectral_radius(M) - expected) <= 1e-6


def test_spectral_radius_zero_start_vector_fallback():
    # all-ones start lies in the kernel; power iteration must not report 0
    n = 100
    v = np.ones(n) / np.sqrt(n)
    M = np.eye(n) - np.outer(v, v)
    assert abs(spectral_radius(M) - 1.0) <= 1e-9


def test_diagonal_dominance():
    assert diagonal_dominance(np.eye(16)) == 1.0
    op = make_operator(5, 16, 16)
    assert abs(diagonal_dominance(op.gram()) - 1.0) <= 1e-12
    assert diagonal_dominance(make_operator(5, 16, 6).gram()) < 1.0


def test_steady_state_fixed_point():
    op = make_operator(6, 64, 16)
    y0 = op.matrix.T @ np.random.default_rng(6).standard_normal(16)
    norm, status = steady_state_error(op, 1.0, y0, 1, x1=y0)
    assert norm == pytest.approx(0.0, abs=1e-12)
    assert status == "converged"


def test_steady_state_geometric_decay():
    op = MeasurementOperator(np.array([[1.0, 0.0]]))
    y0 = np.array([3.0, 0.0])
    norm, status = steady_state_error(op, 0.5, y0, 20, x1=np.zeros(2))
    assert norm == pytest.approx(3 * 0.5**20, rel=1e-12)
    assert status == "oscillating" or status == "converged"
    norm, status = steady_state_error(op, 0.5, y0, 60, x1=np.zeros(2))
    assert status == "converged"


def test_steady_state_divergent():
    op = MeasurementOperator(np.array([[1.0, 0.0]]))
    norm, status = steady_state_error(op, 2.5, np.array([3.0, 0.0]), 20, x1=np.zeros(2))
    assert status == "divergent"
    assert norm == pytest.approx(3 * 1.5**20, rel=1e-12)


def test_steady_state_oscillating_and_frozen():
    op = MeasurementOperator(np.array([[1.0, 0.0]]))
    y0 = np.array([3.0, 0.0])
    assert steady_state_error(op, 2.0, y0, 20, x1=np.zeros(2))[1] == "oscillating"
    norm, status = steady_state_error(op, 0.0, y0, 20, x1=np.zeros(2))
    assert (norm, status) == (3.0, "converged")


def test_steady_state_matches_loop_error():
    # u_n is exactly y0 - RC(MS(x_n)) of the running loop
    op = make_operator(7, 64, 16)
    x0 = np.random.default_rng(7).uniform(0, 255, 64)
    res = icrics_run(op, PINV, x0, FeedbackConfig(0.6, 6, "zero"))
    norm, _ = steady_state_error(op, 0.6, res.y0, 5, x1=np.zeros(64))
    assert norm == pytest.approx(res.trace[-1].recon_residual, rel=1e-9)


def test_norm_ordering_random():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(2, 80))
        G = rng.standard_normal((n, n))
        lam = float(rng.uniform(0, 2))
        assert spectral_radius(iteration_matrix(G, lam)) <= contraction_factor(G, lam) + 1e-9


def test_contraction_below_one_inside_interval_for_identity():
    for D in (1, 4, 64, 1024):
        lo, hi = admissible_lambda_interval(D)
        for lam in np.linspace(lo, hi, 23)[1:-1]:
            assert contraction_factor(np.eye(D), lam) < 1.0


def test_frobenius_bound_fails_honestly_below_full_rate():
    # null-space eigenvalues 0 make ||I - G||_F = sqrt(D - d) > 1
    op = make_operator(9, 16, 4)
    assert contraction_factor(op.gram(), 1.0) == pytest.approx(np.sqrt(12), rel=1e-12)


def test_analyze_report():
    op = make_operator(10, 64, 16)
    rep = analyze(op, PINV, FeedbackConfig(3.0, 5, "zero"))
    assert rep.jacobian == "exact"
    assert abs(rep.spectral_radius - 2.0) <= 1e-6
    assert rep.steady_state_status == "divergent"
    assert rep.divergent
    assert rep.spectral_radius <= rep.contraction_frobenius + 1e-9
    lo, hi = rep.admissible_interval
    assert (lo, hi) == (0.875, 1.125)
    text = rep.to_text()
    assert "spectral_radius=2" in text and "steady_state_status=divergent" in text
    assert rep.csv_header().count(",") == rep.csv_row().count(",")


def test_analyze_stable_and_ista():
    op = make_operator(11, 16, 8)
    rep = analyze(op, PINV, FeedbackConfig(0.5, 5, "zero"))
    assert rep.steady_state_status == "converged" and not rep.divergent
    rep = analyze(op, ReconstructorSpec("ista", 20, 1.0), FeedbackConfig())
    assert rep.jacobian == "central-difference"
    assert rep.steady_state_error_norm is None and rep.steady_state_status == "n/a"
    assert "steady_state_error_norm=n/a" in rep.to_text()
