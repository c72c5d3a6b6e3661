import dataclasses
import math
import warnings

import numpy as np
import pytest

from closedlambda import (
    AtomParams,
    CellGeometry,
    DegenerateDenominatorError,
    FieldParams,
    InsufficientDataError,
    PhaseScan,
    Polarization,
    Spectrum,
    ValidationError,
    apply_polarization,
    fit_sinusoid,
    peak_amplitude,
    propagate_closed_form,
    scan_detuning,
    scan_position,
)
from closedlambda.experiment import sinusoid

Z_GRID = np.round(np.arange(31) * 0.3, 12)  # 0 .. 9 cm in 3 mm steps


class TestScanDetuning:
    def test_constructive_peak_at_zero(self, fig6_atom, fig6_fields, fig6_cell):
        spec = scan_detuning(fig6_atom, fig6_fields, fig6_cell, -2, 2, 41)
        assert spec.detunings[np.argmax(spec.transmissions)] == 0.0
        assert spec.atom is fig6_atom and spec.cell is fig6_cell

    def test_microwave_off_is_symmetric(self, fig6_atom, fig6_fields, fig6_cell):
        f = dataclasses.replace(fig6_fields, omega_mu=0)
        t = scan_detuning(fig6_atom, f, fig6_cell, -2, 2, 81).transmissions
        assert np.max(np.abs(t - t[::-1]) / t) < 1e-12

    def test_two_level_lorentzian(self, fig6_atom, fig6_cell):
        # no drive: alpha = eta / (gamma_ab + i delta)
        f = FieldParams(0.1, 0, 0)
        spec = scan_detuning(fig6_atom, f, fig6_cell, -10, 10, 51)
        d = spec.detunings
        expected = np.exp(-2 * 0.9 * 5 * 2.5 / (25 + d**2))
        assert np.allclose(spec.transmissions, expected, rtol=1e-12, atol=0)
        assert spec.transmissions[25] == spec.transmissions.min()

    def test_count_and_range_validation(self, fig6_atom, fig6_fields, fig6_cell):
        with pytest.raises(ValidationError):
            scan_detuning(fig6_atom, fig6_fields, fig6_cell, -2, 2, 1)
        with pytest.raises(ValidationError):
            scan_detuning(fig6_atom, fig6_fields, fig6_cell, 2, -2, 5)

    def test_errors_name_the_detuning(self, fig6_cell):
        atom = AtomParams(1e-8, 1e-8, 1.0)
        f = FieldParams(0.1, 0, 0)
        with pytest.raises(DegenerateDenominatorError, match="delta=0.0"):
            scan_detuning(atom, f, fig6_cell, -1, 1, 3)

    def test_parallel_matches_serial(self, fig6_atom, fig6_fields, fig6_cell):
        a = scan_detuning(fig6_atom, fig6_fields, fig6_cell, -2, 2, 21)
        b = scan_detuning(fig6_atom, fig6_fields, fig6_cell, -2, 2, 21, workers=4)
        assert np.array_equal(a.transmissions, b.transmissions)


class TestSpectrumType:
    def test_increasing(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, 0.0], [1.0, 1.0])

    def test_lengths_match(self):
        with pytest.raises(ValidationError):
            Spectrum([0.0, 1.0], [1.0])


class TestScanPosition:
    def test_fig6_period(self, fig6_atom, fig6_fields, fig6_cell):
        scan = scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID)
        fit = fit_sinusoid(scan)
        assert fit.period == pytest.approx(2 * math.pi / 1.5, rel=1e-2)
        assert fit.period == pytest.approx(4.19, abs=0.01)

    def test_physical_beat_period(self, fig6_atom, fig6_fields, fig6_cell):
        f = dataclasses.replace(fig6_fields, delta_k=1.4317)
        fit = fit_sinusoid(scan_position(fig6_atom, f, fig6_cell, Z_GRID))
        assert fit.period == pytest.approx(4.39, abs=0.01)

    def test_microwave_off_is_flat(self, fig6_atom, fig6_fields, fig6_cell):
        f = dataclasses.replace(fig6_fields, omega_mu=0)
        peaks = scan_position(fig6_atom, f, fig6_cell, Z_GRID).peak_amplitudes
        assert np.ptp(peaks) <= 1e-15 * peaks[0]

    @pytest.mark.filterwarnings("ignore:position grid spans")
    def test_uses_zero_detuning(self, fig6_atom, fig6_fields, fig6_cell):
        detuned = dataclasses.replace(fig6_fields, delta=1.0)
        a = scan_position(fig6_atom, detuned, fig6_cell, Z_GRID[:4]).peak_amplitudes
        b = scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID[:4]).peak_amplitudes
        assert np.array_equal(a, b)

    def test_short_grid_warns(self, fig6_atom, fig6_fields, fig6_cell):
        with pytest.warns(UserWarning, match="less than one period"):
            scan_position(fig6_atom, fig6_fields, fig6_cell, [0, 0.5, 1.0, 1.5])

    def test_full_grid_does_not_warn(self, fig6_atom, fig6_fields, fig6_cell):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID)

    def test_needs_four_points(self, fig6_atom, fig6_fields, fig6_cell):
        with pytest.raises(ValidationError):
            scan_position(fig6_atom, fig6_fields, fig6_cell, [0.0, 5.0, 9.0])


class TestPolarization:
    def test_left_flips_microwave(self, fig6_fields):
        assert apply_polarization(fig6_fields, "left").omega_mu == -fig6_fields.omega_mu
        assert apply_polarization(fig6_fields, Polarization.RIGHT) is fig6_fields

    def test_involution(self, fig6_fields):
        twice = apply_polarization(apply_polarization(fig6_fields, "left"), "left")
        assert twice == fig6_fields

    def test_microwave_off_identical(self, fig6_atom, fig6_fields, fig6_cell):
        f = dataclasses.replace(fig6_fields, omega_mu=0)
        r = scan_position(fig6_atom, f, fig6_cell, Z_GRID, "right").peak_amplitudes
        l = scan_position(fig6_atom, f, fig6_cell, Z_GRID, "left").peak_amplitudes
        assert np.array_equal(r, l)

    def test_half_period_shift(self, fig6_atom, fig6_fields, fig6_cell):
        shift = math.pi / fig6_fields.delta_k
        left = scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID, "left").peak_amplitudes
        right = scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID + shift, "right").peak_amplitudes
        assert np.max(np.abs(left - right) / right) < 1e-12

    def test_fitted_phases_differ_by_pi(self, fig6_atom, fig6_fields, fig6_cell):
        fr = fit_sinusoid(scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID, "right"))
        fl = fit_sinusoid(scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID, "left"))
        dphi = (fl.phase - fr.phase) % (2 * math.pi)
        assert dphi == pytest.approx(math.pi, abs=1e-8)


class TestFitSinusoid:
    def test_exact_recovery(self):
        z = np.linspace(0, 9, 30)
        fit = fit_sinusoid(PhaseScan(z, sinusoid(z, 0.5, 0.2, 4.4, 1.0)))
        for got, want in zip((fit.offset, fit.amplitude, fit.period, fit.phase), (0.5, 0.2, 4.4, 1.0)):
            assert got == pytest.approx(want, rel=1e-8)
        assert fit.converged and not fit.degenerate
        assert 0 < fit.iterations <= 200

    def test_negative_amplitude_normalized(self):
        z = np.linspace(0, 9, 30)
        # -0.2 sin(x + 1) == 0.2 sin(x + 1 - pi)
        fit = fit_sinusoid(PhaseScan(z, sinusoid(z, 0.5, -0.2, 4.4, 1.0)))
        assert fit.amplitude == pytest.approx(0.2, rel=1e-8)
        assert fit.phase == pytest.approx(1.0 - math.pi, rel=1e-8)
        assert -math.pi <= fit.phase < math.pi

    def test_fixed_period(self):
        z = np.linspace(0, 3, 12)  # less than a period: only allowed with fix_period
        fit = fit_sinusoid(PhaseScan(z, sinusoid(z, 1.0, 0.3, 4.4, -2.0)), fix_period=4.4)
        assert fit.period == 4.4
        assert fit.phase == pytest.approx(-2.0, rel=1e-8)

    def test_short_span_needs_fixed_period(self):
        z = np.linspace(0, 3, 12)
        with pytest.raises(InsufficientDataError):
            fit_sinusoid(PhaseScan(z, sinusoid(z, 1.0, 0.3, 4.4, -2.0)))

    def test_nonuniform_sampling(self):
        z = np.sort(np.random.default_rng(3).uniform(0, 12, 40))
        fit = fit_sinusoid(PhaseScan(z, sinusoid(z, 0.1, 1.0, 3.3, 0.4)))
        assert fit.period == pytest.approx(3.3, rel=1e-8)

    def test_flat_is_degenerate(self):
        fit = fit_sinusoid(PhaseScan(np.linspace(0, 9, 10), np.full(10, 0.7)))
        assert fit.degenerate and not fit.converged
        assert fit.amplitude < 1e-12 * fit.offset

    def test_noisy_fit(self, fig6_atom, fig6_fields, fig6_cell):
        scan = scan_position(fig6_atom, fig6_fields, fig6_cell, Z_GRID)
        clean = fit_sinusoid(scan)
        rng = np.random.default_rng(12345)
        noisy = PhaseScan(Z_GRID, scan.peak_amplitudes + rng.normal(0, 0.05 * clean.amplitude, Z_GRID.size))
        assert fit_sinusoid(noisy).period == pytest.approx(clean.period, rel=0.02)

    def test_iteration_budget_exhausted(self):
        z = np.linspace(0, 9, 30)
        fit = fit_sinusoid(PhaseScan(z, sinusoid(z, 0.5, 0.2, 4.4, 1.0) + 0.01 * np.sin(7 * z)), max_iterations=1)
        assert not fit.converged


class TestPeakAmplitude:
    def test_maximum_at_center(self, fig6_atom, fig6_fields, fig6_cell):
        spec = scan_detuning(fig6_atom, fig6_fields, fig6_cell, -2, 2, 41)
        assert peak_amplitude(spec) == spec.transmissions.max()

    def test_destructive_reduced(self, fig6_atom, fig6_fields):
        # entry position near the minimum of the beat
        cell = CellGeometry(2.1, 2.5)
        spec = scan_detuning(fig6_atom, fig6_fields, cell, -2, 2, 41)
        off = scan_detuning(fig6_atom, dataclasses.replace(fig6_fields, omega_mu=0), cell, -2, 2, 41)
        assert peak_amplitude(spec) < 0.7 * peak_amplitude(off)

    def test_single_point(self):
        assert peak_amplitude(Spectrum([0.0], [0.42])) == 0.42

    def test_nearest_to_zero(self):
        assert peak_amplitude(Spectrum([-0.3, 0.1, 0.5], [1.0, 2.0, 3.0])) == 2.0
