"""
Tests for parameter, desk and sweep files.
"""

import json
import math

import pytest

from optomech.errors import ConfigError
from optomech.parameters import (
    AxisConfig,
    ParameterFile,
    convert_hz_keys,
    load_desk,
    load_parameters,
    load_sweep,
)

TWO_PI = 2.0 * math.pi


def _write(path, data):
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


@pytest.fixture
def parameter_data():
    return {
        "cavity_a": {
            "omega_laser_over_2pi": 3.7e14,
            "length": 1e-3,
            "kappa_over_2pi": 8.8e7,
            "power": 0.05,
            "detuning_over_2pi": 1e7,
        },
        "cavity_b": {
            "omega_laser_over_2pi": 3.7e14,
            "length": 1e-3,
            "kappa_over_2pi": 8.8e7,
            "power": 0.0075,
            "detuning": -1e6,
        },
        "mirror": {"omega_m_over_2pi": 1e7, "gamma_m_over_2pi": 100, "mass": 5e-12, "temperature": 0.4},
    }


class TestHzConversion:
    """Tests for `_over_2pi` keys"""

    def test_converts_to_angular(self):
        """Test Hz values are multiplied by 2 pi"""
        assert convert_hz_keys({"kappa_over_2pi": 1.0, "length": 2.0}) == {"kappa": TWO_PI, "length": 2.0}

    def test_both_spellings_rejected(self):
        """Test a key given in both units is rejected"""
        with pytest.raises(ValueError, match="both"):
            convert_hz_keys({"kappa": 1.0, "kappa_over_2pi": 1.0})

    def test_non_numeric_rejected(self):
        """Test a string value in Hz is rejected"""
        with pytest.raises(ValueError):
            convert_hz_keys({"kappa_over_2pi": "fast"})


class TestParameterFile:
    """Tests for loading the physical parameter file"""

    def test_shipped_file(self, lab_params):
        """Test the packaged laboratory parameters"""
        assert lab_params.cavity_a.kappa == pytest.approx(TWO_PI * 8.8e7)
        assert lab_params.cavity_b.power == pytest.approx(0.0075)
        assert lab_params.cavity_b.detuning_effective == pytest.approx(-TWO_PI * 5e6)
        assert lab_params.mirror.omega_m == pytest.approx(TWO_PI * 1e7)
        assert lab_params.mirror.temperature == 0.4

    def test_mixed_units(self, parameter_data, tmp_path):
        """Test rad/s and Hz keys can be mixed per field"""
        params = load_parameters(_write(tmp_path / "p.json", parameter_data))
        assert params.cavity_a.detuning_effective == pytest.approx(TWO_PI * 1e7)
        assert params.cavity_b.detuning_effective == -1e6
        assert params.cavity_a.omega_cavity == params.cavity_a.omega_laser

    def test_default_constants(self, parameter_data):
        """Test CODATA constants are used when none are given"""
        params = ParameterFile.model_validate(parameter_data).to_system()
        assert params.constants.hbar == pytest.approx(1.054571817e-34)

    def test_unknown_key(self, parameter_data, tmp_path):
        """Test an unexpected key names its location"""
        parameter_data["mirror"]["colour"] = "silver"
        with pytest.raises(ConfigError, match="mirror.colour"):
            load_parameters(_write(tmp_path / "p.json", parameter_data))

    def test_missing_section(self, parameter_data, tmp_path):
        """Test a missing cavity is reported"""
        del parameter_data["cavity_b"]
        with pytest.raises(ConfigError, match="cavity_b"):
            load_parameters(_write(tmp_path / "p.json", parameter_data))

    def test_negative_kappa(self, parameter_data, tmp_path):
        """Test a negative decay rate is rejected"""
        parameter_data["cavity_a"]["kappa_over_2pi"] = -1.0
        with pytest.raises(ConfigError, match="cavity_a"):
            load_parameters(_write(tmp_path / "p.json", parameter_data))

    def test_malformed_json(self, tmp_path):
        """Test a syntax error reports its position"""
        with pytest.raises(ConfigError, match="line 1 column"):
            load_parameters(_write(tmp_path / "p.json", "{not json"))

    def test_missing_file(self, tmp_path):
        """Test an unreadable path is a configuration error"""
        with pytest.raises(ConfigError, match="cannot read"):
            load_parameters(tmp_path / "absent.json")

    def test_infinite_value(self, parameter_data, tmp_path):
        """Test non-finite numbers are rejected"""
        parameter_data["cavity_a"]["power"] = float("inf")
        with pytest.raises(ConfigError):
            load_parameters(_write(tmp_path / "p.json", parameter_data))


class TestDeskAndSweepFiles:
    """Tests for the scaled-rate and sweep descriptions"""

    def test_shipped_desk(self, desk_config):
        """Test the packaged desk file"""
        assert desk_config.omega_m == 1.0
        assert desk_config.integrator.dt == 0.005
        assert desk_config.integrator.n_trajectories % desk_config.integrator.n_batches == 0

    def test_desk_requires_integrator(self, tmp_path):
        """Test the integrator section is mandatory"""
        data = {"omega_m": 1.0, "gamma_m": 0.05, "nbar": 1.0, "kappa_a": 1.0, "kappa_b": 1.0}
        with pytest.raises(ConfigError, match="integrator"):
            load_desk(_write(tmp_path / "d.json", data))

    def test_sweep_file(self, tmp_path):
        """Test a two-axis sweep with a fixed override"""
        data = {
            "x": {"variable": "delta_b", "range": [-2.0, 2.0], "points": 5, "unit": "omega_m"},
            "y": {"variable": "p_b", "values": [0.1, 0.2], "unit": "p_a"},
            "fixed": {"delta_a": 1.0},
            "fixed_unit": {"delta_a": "omega_m"},
        }
        sweep = load_sweep(_write(tmp_path / "s.json", data))
        assert sweep.x.range == (-2.0, 2.0)
        assert sweep.y.values == [0.1, 0.2]
        assert sweep.fixed == {"delta_a": 1.0}

    def test_axis_needs_exactly_one_source(self):
        """Test range and values are mutually exclusive"""
        with pytest.raises(ValueError):
            AxisConfig(variable="p_b", unit="p_a")
        with pytest.raises(ValueError):
            AxisConfig(variable="p_b", unit="p_a", range=(0.0, 1.0), values=[0.5])

    def test_unknown_variable(self, tmp_path):
        """Test only the four working-point variables can be swept"""
        data = {"x": {"variable": "temperature", "range": [0.0, 1.0], "unit": "W"}}
        with pytest.raises(ConfigError, match="x.variable"):
            load_sweep(_write(tmp_path / "s.json", data))
