"""
Tests for sweep axes, presets, grid evaluation and CSV rows.
"""

import numpy as np
import pytest

from optomech.errors import UsageError
from optomech.parameters import SweepFile
from optomech.sweeps import (
    NEGATIVITY_COLUMNS,
    PRESETS,
    STABILITY_COLUMNS,
    TRIPARTITE_COLUMNS,
    SweepAxis,
    SweepSpec,
    evaluate_grid,
    evaluate_point,
    negativity_columns,
    negativity_row,
    preset,
    spec_from_file,
    stability_row,
    tripartite_row,
    unit_scale,
    write_csv,
)


class TestSweepAxis:
    """Tests for axis construction and units"""

    def test_range_in_omega_m(self, lab_params):
        """Test values are stored in rad/s and displayed in the axis unit"""
        axis = SweepAxis.from_range("delta_b", -2.0, 0.0, 3, "omega_m", lab_params)
        omega_m = lab_params.mirror.omega_m
        assert axis.values == pytest.approx((-2 * omega_m, -omega_m, 0.0))
        np.testing.assert_allclose(axis.display, [-2.0, -1.0, 0.0])
        assert axis.label == "Δ_b / ω_m"

    def test_empty_range(self, lab_params):
        """Test lo > hi is rejected"""
        with pytest.raises(UsageError, match="empty"):
            SweepAxis.from_range("delta_b", 1.0, -1.0, 5, "omega_m", lab_params)

    def test_single_point_range(self, lab_params):
        """Test lo == hi gives exactly one point"""
        axis = SweepAxis.from_range("p_b", 0.5, 0.5, 41, "p_a", lab_params)
        assert axis.values == pytest.approx((0.5 * lab_params.cavity_a.power,))

    def test_too_few_points(self, lab_params):
        """Test a proper range needs two points"""
        with pytest.raises(UsageError):
            SweepAxis.from_range("p_b", 0.0, 1.0, 1, "p_a", lab_params)

    def test_unit_mismatch(self, lab_params):
        """Test a power unit cannot scale a detuning"""
        with pytest.raises(UsageError, match="does not apply"):
            unit_scale("W", "delta_a", lab_params)
        with pytest.raises(UsageError):
            unit_scale("omega_m", "temperature", lab_params)

    def test_empty_value_list(self, lab_params):
        """Test an explicit axis needs at least one value"""
        with pytest.raises(UsageError):
            SweepAxis.from_values("p_b", [], "p_a", lab_params)


class TestSweepSpec:
    """Tests for presets and grid ordering"""

    @pytest.mark.parametrize("name", PRESETS)
    def test_presets_build(self, lab_params, name):
        """Test every preset builds with the requested resolution"""
        spec = preset(name, lab_params, points=7)
        assert spec.shape[1] == 7
        assert len(spec.grid()) == spec.shape[0] * spec.shape[1]

    def test_preset_shapes(self, lab_params):
        """Test preset y axes"""
        assert preset("stability-map", lab_params, 9).shape == (9, 9)
        assert preset("backaction", lab_params, 9).shape == (5, 9)
        assert preset("extended", lab_params, 9).shape == (3, 9)
        spec = preset("pump-detuning", lab_params, 9)
        assert spec.shape == (1, 9)
        assert spec.fixed == {"p_b": 0.0}

    def test_x_range_override(self, lab_params):
        """Test --x-range replaces the preset range in the preset unit"""
        spec = preset("extended", lab_params, 3, x_range=(-1.0, 0.0))
        np.testing.assert_allclose(spec.x.display, [-1.0, -0.5, 0.0])

    def test_unknown_preset(self, lab_params):
        """Test an unknown preset name is a usage error"""
        with pytest.raises(UsageError, match="unknown preset"):
            preset("no-such-preset", lab_params, 5)

    def test_grid_order(self, lab_params):
        """Test y is the outer loop and x the inner one"""
        x = SweepAxis.from_values("delta_b", [1.0, 2.0], "rad_s", lab_params)
        y = SweepAxis.from_values("p_b", [0.1, 0.2, 0.3], "W", lab_params)
        grid = SweepSpec(x=x, y=y, fixed={"delta_a": 5.0}).grid()
        assert [(g["p_b"], g["delta_b"]) for g in grid] == [
            (0.1, 1.0), (0.1, 2.0), (0.2, 1.0), (0.2, 2.0), (0.3, 1.0), (0.3, 2.0),
        ]
        assert all(g["delta_a"] == 5.0 for g in grid)

    def test_same_variable_twice(self, lab_params):
        """Test both axes cannot sweep the same variable"""
        x = SweepAxis.from_values("p_b", [0.1], "W", lab_params)
        with pytest.raises(UsageError):
            SweepSpec(x=x, y=x)

    def test_spec_from_file(self, lab_params):
        """Test fixed overrides default to rad/s and W"""
        sweep = SweepFile.model_validate(
            {
                "x": {"variable": "delta_b", "range": [-1.0, 1.0], "points": 3, "unit": "kappa_a"},
                "fixed": {"delta_a": 2.0, "p_b": 0.3},
                "fixed_unit": {"p_b": "p_a"},
            }
        )
        spec = spec_from_file(sweep, lab_params)
        assert spec.fixed["delta_a"] == 2.0
        assert spec.fixed["p_b"] == pytest.approx(0.3 * lab_params.cavity_a.power)
        assert spec.x.values[-1] == pytest.approx(lab_params.cavity_a.kappa)


class TestGridEvaluation:
    """Tests for evaluated sweeps at laboratory parameters"""

    def test_workers_give_identical_results(self, lab_params):
        """Test parallel evaluation returns the serial results in grid order"""
        spec = preset("backaction", lab_params, 5)
        serial = evaluate_grid(lab_params, spec, workers=1)
        parallel = evaluate_grid(lab_params, spec, workers=3)
        assert [stability_row(p) for p in serial] == [stability_row(p) for p in parallel]
        assert [negativity_row(p) for p in serial] == [negativity_row(p) for p in parallel]

    def test_dark_second_cavity_not_entangled(self, lab_params):
        """Test P_b = 0 leaves cavity B in vacuum and unentangled"""
        spec = preset("pump-detuning", lab_params, 5)
        for point in evaluate_grid(lab_params, spec):
            assert point.stable
            pairs = point.entanglement.pair_results
            assert pairs[("b", "m")].log_neg == 0.0
            assert pairs[("a", "b")].log_neg == 0.0
            assert pairs[("a", "m")].log_neg >= 0.0
            assert point.nu_min >= 0.5 - 1e-9

    def test_extended_low_power_stable(self, lab_params):
        """Test the two lower-power rows of the extended sweep are stable throughout"""
        spec = preset("extended", lab_params, 17)
        points = evaluate_grid(lab_params, spec, entanglement=False)
        rows, cols = spec.shape
        for r in range(2):
            assert all(p.stable for p in points[r * cols : (r + 1) * cols])

    def test_weak_second_drive_always_stable(self, lab_params):
        """Test P_b <= 0.3 P_a is stable at any detuning of cavity B"""
        x = SweepAxis.from_range("delta_b", -1.5, 1.5, 31, "kappa_a", lab_params)
        y = SweepAxis.from_range("p_b", 0.0, 0.3, 4, "p_a", lab_params)
        points = evaluate_grid(lab_params, SweepSpec(x=x, y=y), entanglement=False)
        assert all(p.stable for p in points)

    def test_red_second_drive_always_stable(self, lab_params):
        """Test a red-detuned cavity B is stable up to P_b < P_a"""
        x = SweepAxis.from_range("delta_b", 0.0, 1.5, 16, "kappa_a", lab_params)
        y = SweepAxis.from_range("p_b", 0.0, 0.95, 5, "p_a", lab_params)
        points = evaluate_grid(lab_params, SweepSpec(x=x, y=y), entanglement=False)
        assert all(p.stable for p in points)

    def test_unstable_point_rows(self, lab_params):
        """Test an unstable point has empty entanglement fields"""
        point = evaluate_point(
            lab_params,
            {"delta_b": -0.44 * lab_params.cavity_b.kappa, "p_b": 0.9 * lab_params.cavity_a.power},
        )
        assert not point.stable
        assert point.entanglement is None
        row = negativity_row(point)
        assert row["stable"] is False
        assert row["En_am"] is None and row["nu_minus_ab"] is None
        assert tripartite_row(point)["fully_inseparable"] is None


class TestRows:
    """Tests for row builders and CSV output"""

    def test_row_keys_match_columns(self, lab_params):
        """Test every row builder fills exactly its column set"""
        point = evaluate_point(lab_params, {})
        assert list(stability_row(point)) == STABILITY_COLUMNS
        assert list(negativity_row(point)) == NEGATIVITY_COLUMNS
        assert list(negativity_row(point, log2=True)) == negativity_columns(log2=True)
        assert list(tripartite_row(point)) == TRIPARTITE_COLUMNS

    def test_log2_rescales(self, lab_params):
        """Test base-2 negativities are the natural ones over ln 2"""
        point = evaluate_point(lab_params, {})
        natural = negativity_row(point)
        base2 = negativity_row(point, log2=True)
        for key in ("am", "bm", "ab"):
            assert base2[f"En_{key}_log2"] == pytest.approx(natural[f"En_{key}"] / np.log(2.0))

    def test_csv_format(self, lab_params, tmp_path):
        """Test booleans are lower-case and missing values are empty fields"""
        stable = evaluate_point(lab_params, {})
        unstable = evaluate_point(
            lab_params,
            {"delta_b": -0.44 * lab_params.cavity_b.kappa, "p_b": 0.9 * lab_params.cavity_a.power},
        )
        path = write_csv(
            [negativity_row(stable), negativity_row(unstable)], NEGATIVITY_COLUMNS, tmp_path / "n.csv"
        )
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(NEGATIVITY_COLUMNS)
        first, second = lines[1].split(","), lines[2].split(",")
        stable_index = NEGATIVITY_COLUMNS.index("stable")
        assert first[stable_index] == "true"
        assert second[stable_index] == "false"
        assert second[stable_index + 1 :] == [""] * 6


class TestLaboratoryEntanglement:
    """Regression values for entanglement at the laboratory parameter set"""

    def test_pump_working_point(self, lab_params):
        """Test E_N between pumped cavity and mirror at delta_a = omega_m with cavity B dark"""
        point = evaluate_point(lab_params, {"delta_a": lab_params.mirror.omega_m, "p_b": 0.0})
        assert point.stable
        pairs = point.entanglement.pair_results
        assert pairs[("a", "m")].log_neg == pytest.approx(1.36e-4, rel=0.05)
        assert pairs[("b", "m")].log_neg == 0.0
        assert pairs[("a", "b")].log_neg == 0.0

    def test_pump_detuning_scan_peaks_at_upper_edge(self, lab_params):
        """Test E_N^am grows across delta_a in [0.5, 1.5] omega_m and stays below 1e-3"""
        spec = preset("pump-detuning", lab_params, 41)
        points = evaluate_grid(lab_params, spec)
        assert all(p.stable for p in points)
        values = [p.entanglement.pair_results[("a", "m")].log_neg for p in points]
        assert int(np.argmax(values)) == len(values) - 1
        assert values[-1] == pytest.approx(1.9e-4, rel=0.06)
        assert max(values) < 1e-3

    def test_second_drive_scan(self, lab_params):
        """Test no point trades am for ab entanglement and none has all three pairs above 1e-3"""
        x = preset("extended", lab_params, 41).x
        y = SweepAxis.from_values("p_b", [0.15, 0.6, 0.9, 0.95, 0.99], "p_a", lab_params)
        points = evaluate_grid(lab_params, SweepSpec(x=x, y=y))
        stable = [p for p in points if p.stable]
        assert stable
        for point in stable:
            pairs = point.entanglement.pair_results
            am, bm, ab = (pairs[key].log_neg for key in (("a", "m"), ("b", "m"), ("a", "b")))
            assert not (am < 1e-3 and ab > 1e-2)
            assert not (min(am, bm, ab) > 1e-3 and point.entanglement.fully_inseparable)
