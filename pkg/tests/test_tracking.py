import math

import numpy as np
import pytest

import oracles
from adiab.linalg import max_abs
from adiab.models import (
    SchwingerParams,
    custom_model,
    schwinger_analytic_eigensystem,
    schwinger_hamiltonian_derivative,
    schwinger_model,
)
from adiab.propagate import TimeGrid
from adiab.tracking import (
    DegeneracyError,
    LevelCrossingError,
    analytic_path,
    berry_phase,
    eigen_derivative_fd,
    eigen_derivative_pert,
    qac_ratio,
    qac_ratios,
    rotate_gauge,
    track,
)

SLOW = SchwingerParams(1.0, 0.1, math.pi / 2)
TILTED = SchwingerParams(1.0, 0.1, math.pi / 4)


@pytest.fixture(scope="module")
def slow_analytic_path():
    return track(schwinger_model(SLOW), TimeGrid(0.0, 20.0, 2000), gauge="analytic")


@pytest.fixture(scope="module")
def tilted_analytic_path():
    return track(schwinger_model(TILTED), TimeGrid(0.0, 20.0, 2000), gauge="analytic")


@pytest.fixture(scope="module")
def static_path():
    h = np.diag([-0.7, 0.4]).astype(complex)
    model = custom_model(lambda t: h, lambda t: np.zeros_like(h), dim=2)
    return track(model, TimeGrid(0.0, 5.0, 100))


class TestTrack:
    def test_rotating_field_eigenvalues_constant(self, slow_analytic_path):
        assert np.max(np.abs(slow_analytic_path.eigenvalues[:, 0] + 0.5)) < 1e-12
        assert np.max(np.abs(slow_analytic_path.eigenvalues[:, 1] - 0.5)) < 1e-12

    def test_transport_with_reference_matches_closed_forms_at_equator(self):
        # at theta = pi/2 the fixed-phase gauge is transport-flat, so pinning
        # frame 0 reproduces the closed-form vectors along the whole run
        model = schwinger_model(SLOW)
        grid = TimeGrid(0.0, 20.0, 2000)
        _, v0 = schwinger_analytic_eigensystem(SLOW, 0.0)
        path = track(model, grid, gauge="transport", reference=v0)
        worst = 0.0
        for k in range(0, path.n_samples, 97):
            _, va = schwinger_analytic_eigensystem(SLOW, float(path.times[k]))
            worst = max(worst, max_abs(path.eigenvectors[k] - va))
        assert worst <= 1e-6

    def test_analytic_gauge_matches_closed_forms_at_any_angle(self, tilted_analytic_path):
        path = tilted_analytic_path
        for k in (0, 711, path.n_samples - 1):
            _, va = schwinger_analytic_eigensystem(TILTED, float(path.times[k]))
            assert max_abs(path.eigenvectors[k] - va) <= 1e-10

    def test_static_hamiltonian_frames_identical(self, static_path):
        assert max_abs(static_path.eigenvectors - static_path.eigenvectors[0]) == 0.0
        assert max_abs(static_path.derivatives) == 0.0

    def test_gauge_continuity(self, slow_analytic_path):
        v = slow_analytic_path.eigenvectors
        overlaps = np.einsum("kji,kji->ki", v[:-1].conj(), v[1:])
        assert np.min(overlaps.real) > 0.0

    def test_degenerate_spectrum_reported_with_sample(self):
        model = custom_model(lambda t: np.eye(2, dtype=complex), dim=2)
        with pytest.raises(DegeneracyError, match="sample 0"):
            track(model, TimeGrid(0.0, 1.0, 10))

    def test_level_crossing_reported(self):
        def h(t):
            return np.diag([t - 1.0, 1.0 - t]).astype(complex)

        model = custom_model(h, dim=2)
        with pytest.raises(LevelCrossingError):
            track(model, TimeGrid(0.0, 2.0, 11))  # samples straddle the crossing

    def test_unknown_gauge_rejected(self):
        with pytest.raises(ValueError, match="gauge"):
            track(schwinger_model(SLOW), TimeGrid(0.0, 1.0, 10), gauge="nope")

    def test_analytic_gauge_needs_closed_forms(self):
        model = custom_model(lambda t: np.diag([0.0, 1.0]).astype(complex), dim=2)
        with pytest.raises(ValueError, match="closed-form"):
            track(model, TimeGrid(0.0, 1.0, 10), gauge="analytic")

    def test_analytic_path_no_solver(self):
        grid = TimeGrid(0.0, 5.0, 500)
        path = analytic_path(schwinger_model(TILTED), grid)
        k = 123
        _, va = schwinger_analytic_eigensystem(TILTED, float(path.times[k]))
        assert max_abs(path.eigenvectors[k] - va) == 0.0
        assert max_abs(path.derivatives[k][:, 0] - oracles.lower_eigvec_derivative(TILTED, float(path.times[k]))) == 0.0


class TestEigenvectorDerivatives:
    def test_static_derivative_vanishes(self, static_path):
        assert max_abs(eigen_derivative_fd(static_path, 5, 0)) == 0.0

    def test_interior_coupling_matches_closed_form(self, slow_analytic_path):
        # <E_2|Ė_1> = -(i omega/2) sin theta in the fixed-phase gauge
        path = slow_analytic_path
        expected = -0.5j * SLOW.omega * math.sin(SLOW.theta)
        for k in (1, 500, path.n_samples - 2):
            d1 = eigen_derivative_fd(path, k, 0)
            coupling = np.vdot(path.eigenvectors[k, :, 1], d1)
            assert abs(coupling - expected) <= 1e-6

    def test_endpoints_use_one_sided_stencils(self, slow_analytic_path):
        path = slow_analytic_path
        expected = -0.5j * SLOW.omega * math.sin(SLOW.theta)
        for k in (0, path.n_samples - 1):
            coupling = np.vdot(path.eigenvectors[k, :, 1], eigen_derivative_fd(path, k, 0))
            assert abs(coupling - expected) <= 1e-5

    def test_index_out_of_range(self, slow_analytic_path):
        with pytest.raises(IndexError):
            eigen_derivative_fd(slow_analytic_path, slow_analytic_path.n_samples, 0)

    def test_fd_agrees_with_perturbation_route(self, tilted_analytic_path):
        path = tilted_analytic_path
        k = 800
        hdot = schwinger_hamiltonian_derivative(TILTED, float(path.times[k]))
        pert = eigen_derivative_pert(path, k, hdot, 0)
        fd = eigen_derivative_fd(path, k, 0)
        v1 = path.eigenvectors[k, :, 1]
        fd_offlevel = np.vdot(v1, fd) * v1  # project out the gauge (diagonal) part
        assert max_abs(pert - fd_offlevel) <= 1e-6

    def test_perturbation_zero_drive(self, static_path):
        out = eigen_derivative_pert(static_path, 3, np.zeros((2, 2)), 0)
        assert max_abs(out) == 0.0

    def test_perturbation_reproduces_hand_derivative(self, tilted_analytic_path):
        path = tilted_analytic_path
        k = 400
        t = float(path.times[k])
        hdot = schwinger_hamiltonian_derivative(TILTED, t)
        pert = eigen_derivative_pert(path, k, hdot, 0)
        exact = oracles.lower_eigvec_derivative(TILTED, t)
        exact_offlevel = np.vdot(path.eigenvectors[k, :, 1], exact) * path.eigenvectors[k, :, 1]
        assert max_abs(pert - exact_offlevel) <= 1e-8

    def test_derivative_couplings_antisymmetric(self, tilted_analytic_path):
        # <Ė_m|E_n> = -<E_m|Ė_n>, from differentiating orthonormality
        path = tilted_analytic_path
        for k in (50, 900, 1500):
            d0 = eigen_derivative_fd(path, k, 0)
            d1 = eigen_derivative_fd(path, k, 1)
            v0 = path.eigenvectors[k, :, 0]
            v1 = path.eigenvectors[k, :, 1]
            assert abs(np.vdot(d1, v0) + np.vdot(v1, d0)) <= 1e-8
            assert abs(np.vdot(d0, v1) + np.vdot(v0, d1)) <= 1e-8

    def test_diagonal_coupling_purely_imaginary(self, tilted_analytic_path):
        path = tilted_analytic_path
        diag = np.einsum("kji,kji->ki", path.eigenvectors.conj(), path.derivatives)
        assert np.max(np.abs(diag.real)) <= 1e-9


class TestBerryPhase:
    def test_static_phase_is_minus_energy_times_time(self, static_path):
        acc = berry_phase(static_path, 0)
        assert acc.values[0] == 0.0
        assert np.max(np.abs(acc.values - 0.7 * static_path.times)) <= 1e-12
        assert acc.imag_residue <= 1e-12

    def test_closed_form_at_tilted_angle(self, tilted_analytic_path):
        acc = berry_phase(tilted_analytic_path, 0)
        expected = oracles.beta1(TILTED, tilted_analytic_path.times)
        assert np.max(np.abs(acc.values - expected)) <= 1e-6
        assert acc.imag_residue <= 1e-9

    def test_equatorial_value_at_t_pi(self):
        grid = TimeGrid(0.0, math.pi, 1000)
        path = track(schwinger_model(SLOW), grid, gauge="analytic")
        acc = berry_phase(path, 0)
        assert acc.values[-1] == pytest.approx(math.pi / 2, abs=1e-6)

    def test_broken_gauge_is_rejected(self, slow_analytic_path):
        # jagged per-sample phases wreck <E_n|Ė_n>; the quadrature must notice
        rng = np.random.default_rng(0)
        phases = rng.uniform(-1.0, 1.0, size=(slow_analytic_path.n_samples, 2))
        jagged = rotate_gauge(slow_analytic_path, phases)
        with pytest.raises(ValueError, match="gauge"):
            berry_phase(jagged, 0)


class TestCouplingRatio:
    def test_static_ratio_zero(self, static_path):
        assert qac_ratio(static_path, 10, 1, 0) == 0.0

    def test_slow_equatorial_value(self, slow_analytic_path):
        ratios = qac_ratios(slow_analytic_path, 0)[:, 1]
        assert np.max(np.abs(ratios - 0.05)) <= 1e-8

    def test_fast_small_angle_value(self):
        p = SchwingerParams(1.0, 10.0, 0.1)
        path = track(schwinger_model(p), TimeGrid(0.0, 2.0, 4000), gauge="analytic")
        interior = qac_ratios(path, 0)[1:-1, 1]
        assert np.max(np.abs(interior - 0.499167)) <= 1e-4

    def test_same_level_rejected(self, slow_analytic_path):
        with pytest.raises(ValueError):
            qac_ratio(slow_analytic_path, 0, 1, 1)

    def test_nan_on_tracked_column(self, slow_analytic_path):
        ratios = qac_ratios(slow_analytic_path, 0)
        assert np.all(np.isnan(ratios[:, 0]))
        assert not np.any(np.isnan(ratios[:, 1]))

    def test_invariant_under_smooth_gauge_rotation(self):
        model = schwinger_model(TILTED)
        grid = TimeGrid(0.0, 10.0, 4000)
        path = track(model, grid)
        rng = np.random.default_rng(11)
        amps = rng.uniform(0.005, 0.02, size=2)
        freqs = rng.uniform(0.1, 0.25, size=2)
        rel = path.times - path.times[0]
        phases = np.stack([a * np.sin(f * rel) for a, f in zip(amps, freqs)], axis=1)
        rotated = rotate_gauge(path, phases)
        base = qac_ratios(path, 0)[:, 1]
        turned = qac_ratios(rotated, 0)[:, 1]
        assert np.max(np.abs(base - turned)) <= 1e-9


class TestRotateGauge:
    def test_shape_validation(self, static_path):
        with pytest.raises(ValueError, match="shape"):
            rotate_gauge(static_path, np.zeros((3, 2)))

    def test_rotation_changes_vectors_but_not_spectrum(self, slow_analytic_path):
        phases = np.full((slow_analytic_path.n_samples, 2), 0.3)
        rotated = rotate_gauge(slow_analytic_path, phases)
        assert max_abs(rotated.eigenvalues - slow_analytic_path.eigenvalues) == 0.0
        assert max_abs(rotated.eigenvectors - slow_analytic_path.eigenvectors) > 0.01
