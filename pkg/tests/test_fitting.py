import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkoopman import (
    DiagonalHamiltonian,
    FitError,
    PhaseTrajectory,
    ShapeError,
    build_layout,
    estimate_rates,
    fit_alphas,
    fit_system,
    unwrap_phases,
    wrap_phase,
)
from qkoopman.fitting import parity_matrix
from qkoopman.unitary import eigenvalue_table


def linear_trajectory(rates_per_step, steps, phi0=None, dt=1.0):
    rates_per_step = np.asarray(rates_per_step, dtype=float)
    if phi0 is None:
        phi0 = np.zeros_like(rates_per_step)
    k = np.arange(steps + 1)[:, None]
    return PhaseTrajectory(dt=dt, phases=phi0 + k * rates_per_step)


class TestUnwrap:
    def test_constant_phases_unchanged(self):
        traj = linear_trajectory(np.zeros(4), 10, phi0=np.array([0.3, -1, 2, 3]))
        np.testing.assert_array_equal(unwrap_phases(traj).phases, traj.phases)

    def test_wrap_then_unwrap_round_trip(self):
        true = np.array([[0.0, 0.0], [3.0, 1.0], [6.0, 2.0]])
        wrapped = wrap_phase(true)
        assert wrapped[2, 0] == pytest.approx(6.0 - 2 * np.pi)
        out = unwrap_phases(PhaseTrajectory(dt=1.0, phases=wrapped)).phases
        np.testing.assert_allclose(out, true, atol=1e-12)

    def test_pi_increment_maps_to_plus_pi(self):
        traj = PhaseTrajectory(dt=1.0, phases=np.array([[0.0, 0.0], [-np.pi, np.pi]]))
        out = unwrap_phases(traj).phases
        # both +-pi raw increments land on +pi by the half-open convention
        np.testing.assert_allclose(out[1], [np.pi, np.pi], atol=1e-12)

    def test_first_row_preserved(self):
        rng = np.random.default_rng(1)
        phases = rng.uniform(-10, 10, (5, 8))
        out = unwrap_phases(PhaseTrajectory(dt=0.5, phases=phases))
        np.testing.assert_array_equal(out.phases[0], phases[0])


class TestEstimateRates:
    def test_noiseless_line(self):
        slopes = np.array([0.03, -0.4, 1.1, 0.0])
        traj = linear_trajectory(slopes, 20)
        np.testing.assert_allclose(estimate_rates(traj), slopes, atol=1e-12)

    def test_small_noise_bound(self):
        rng = np.random.default_rng(8)
        slopes = np.array([0.2, -0.1])
        traj = linear_trajectory(slopes, 60)
        noisy = traj.phases + rng.uniform(-1e-6, 1e-6, traj.phases.shape)
        est = estimate_rates(PhaseTrajectory(dt=1.0, phases=noisy))
        assert np.max(np.abs(est - slopes)) < 1e-6

    def test_constant_phases_zero_rate(self):
        traj = linear_trajectory(np.zeros(4), 7, phi0=np.array([1.0, 2, 3, 4]))
        np.testing.assert_allclose(estimate_rates(traj), 0.0, atol=1e-14)

    def test_single_step_is_plain_difference(self):
        traj = PhaseTrajectory(dt=1.0, phases=np.array([[0.0, 1.0], [0.5, 0.25]]))
        np.testing.assert_allclose(estimate_rates(traj), [0.5, -0.75], atol=1e-14)


class TestFitAlphas:
    def test_round_trip_through_eigenvalues(self):
        rng = np.random.default_rng(13)
        n, dt = 4, 0.1
        lo = build_layout(2**n, 1, 1)
        alphas = rng.uniform(-1, 1, n)
        H = DiagonalHamiltonian(layout=lo, alphas=(alphas,))
        rates = eigenvalue_table(H, 1) * dt
        res = fit_alphas(rates, lo, 1, dt)
        np.testing.assert_allclose(res.alphas, alphas, atol=1e-10)
        assert res.residual_rms <= 1e-12
        assert res.global_phase_rate is None

    def test_all_zero_rates(self):
        lo = build_layout(8, 1, 1)
        res = fit_alphas(np.zeros(8), lo, 1, 0.5)
        np.testing.assert_allclose(res.alphas, 0.0, atol=1e-15)
        assert res.residual_rms == 0.0

    def test_constant_rates_absorbed_by_global_phase(self):
        lo = build_layout(8, 1, 1)
        res = fit_alphas(np.full(8, 0.37), lo, 1, 0.1, include_global_phase=True)
        np.testing.assert_allclose(res.alphas, 0.0, atol=1e-12)
        assert res.global_phase_rate == pytest.approx(0.37, abs=1e-12)

    def test_underdetermined_via_mask(self):
        lo = build_layout(4, 1, 1)
        mask = np.array([True, True, False, False])
        with pytest.raises(FitError):
            fit_alphas(np.zeros(4), lo, 1, 0.1, include_global_phase=True, mask=mask)

    def test_two_level_with_global_phase_is_square(self):
        lo = build_layout(2, 1, 1)
        res = fit_alphas(np.array([0.4, 0.1]), lo, 1, 1.0, include_global_phase=True)
        # square system: solved exactly, residual zero by construction
        assert res.residual_rms <= 1e-14

    def test_wrong_length_rejected(self):
        lo = build_layout(8, 1, 1)
        with pytest.raises(ShapeError):
            fit_alphas(np.zeros(4), lo, 1, 0.1)

    def test_residual_orthogonal_to_design_columns(self):
        rng = np.random.default_rng(17)
        n, dt = 5, 0.2
        lo = build_layout(2**n, 1, 1)
        rates = rng.normal(size=2**n)
        res = fit_alphas(rates, lo, 1, dt, include_global_phase=True)
        design = np.column_stack([-(dt / 2) * parity_matrix(n), np.ones(2**n)])
        np.testing.assert_allclose(design.T @ res.residuals, 0.0, atol=1e-9)

    def test_scaling_consistency_across_time_steps(self):
        rng = np.random.default_rng(23)
        n = 4
        lo = build_layout(2**n, 1, 1)
        alphas = rng.uniform(-0.5, 0.5, n)
        H = DiagonalHamiltonian(layout=lo, alphas=(alphas,))
        lam = eigenvalue_table(H, 1)
        for dt in (0.1, 0.2):
            res = fit_alphas(lam * dt, lo, 1, dt)
            np.testing.assert_allclose(res.alphas, alphas, atol=1e-8)


@pytest.mark.parametrize("n", range(1, 13))
def test_parity_columns_balanced_and_orthogonal(n):
    cols = parity_matrix(n)
    np.testing.assert_array_equal(cols.sum(axis=0), np.zeros(n))
    gram = cols.T @ cols
    np.testing.assert_array_equal(gram, 2**n * np.eye(n))
    # the constant column is orthogonal to every parity column
    np.testing.assert_array_equal(np.ones(2**n) @ cols, np.zeros(n))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_identifiability_inside_nyquist(n, seed):
    rng = np.random.default_rng(seed)
    dt = 0.1
    # keep |alpha_k| * dt safely inside the Nyquist bound pi/n
    alphas = rng.uniform(-1, 1, n) * (np.pi / (n * dt)) * 0.3
    lo = build_layout(2**n, 1, 1)
    H = DiagonalHamiltonian(layout=lo, alphas=(alphas,))
    lam = eigenvalue_table(H, 1)
    phi0 = rng.uniform(-np.pi, np.pi, 2**n)
    k = np.arange(21)[:, None]
    wrapped = wrap_phase(phi0 + k * lam * dt)
    traj = PhaseTrajectory(dt=dt, phases=wrapped)
    rates = estimate_rates(unwrap_phases(traj))
    res = fit_alphas(rates, lo, 1, dt)
    np.testing.assert_allclose(res.alphas, alphas, atol=1e-8)


class TestFitSystem:
    def test_two_blocks_recovered_independently(self):
        rng = np.random.default_rng(29)
        lo = build_layout(4, 1, 2)  # dims (4, 2)
        dt = 0.1
        a1 = rng.uniform(-1, 1, 2)
        a2 = rng.uniform(-1, 1, 1)
        H = DiagonalHamiltonian(layout=lo, alphas=(a1, a2))
        trajs = []
        for j in (1, 2):
            lam = eigenvalue_table(H, j)
            k = np.arange(31)[:, None]
            trajs.append(PhaseTrajectory(dt=dt, phases=(k * lam * dt)))
        fitted, results, diag = fit_system(trajs, lo, dt)
        np.testing.assert_allclose(fitted.block(1), a1, atol=1e-10)
        np.testing.assert_allclose(fitted.block(2), a2, atol=1e-10)
        assert max(diag["residual_rms"]) <= 1e-12

    def test_wrong_trajectory_count(self):
        lo = build_layout(4, 1, 2)
        with pytest.raises(FitError):
            fit_system([linear_trajectory(np.zeros(4), 3)], lo, 1.0)

    def test_wrong_block_width(self):
        lo = build_layout(4, 1, 2)
        trajs = [linear_trajectory(np.zeros(4), 3), linear_trajectory(np.zeros(4), 3)]
        with pytest.raises(ShapeError):
            fit_system(trajs, lo, 1.0)

    def test_report_format(self):
        lo = build_layout(4, 1, 1)
        res = fit_alphas(np.zeros(4), lo, 1, 0.1, include_global_phase=True)
        report = res.report(1)
        assert report.startswith("subsystem 1\n")
        assert "alpha 1 " in report and "alpha 2 " in report
        assert "global_phase_rate " in report
        assert "residual_rms " in report
