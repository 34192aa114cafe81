"""Unit tests for configuration loading and validation."""

import json

import pytest

from gradfit.config import environment_overrides, load_config, resolve_settings
from gradfit.constants import CONFIG_FILENAME, ENV_CG_TOL, ENV_LOG_LEVEL, ENV_QUAD_MARGIN
from gradfit.exceptions import ConfigurationError, InvalidConfigError, UnknownFunctionError
from gradfit.state import ExperimentConfig

ENV_VARIABLES = (ENV_CG_TOL, ENV_QUAD_MARGIN, ENV_LOG_LEVEL)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for variable in ENV_VARIABLES:
        monkeypatch.delenv(variable, raising=False)


class TestLoadConfig:
    """Test reading .gradfit.json."""

    def test_missing_file(self, tmp_path):
        """Test a missing file gives None."""
        assert load_config(str(tmp_path)) is None

    def test_valid_object(self, tmp_path):
        """Test a JSON object is returned as a dict."""
        (tmp_path / CONFIG_FILENAME).write_text(json.dumps({"degree": 2, "function": "x_squared"}))
        assert load_config(str(tmp_path)) == {"degree": 2, "function": "x_squared"}

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON raises InvalidConfigError."""
        (tmp_path / CONFIG_FILENAME).write_text("{degree: 2")
        with pytest.raises(InvalidConfigError) as exc_info:
            load_config(str(tmp_path))
        assert exc_info.value.key == CONFIG_FILENAME

    def test_not_an_object(self, tmp_path):
        """Test a JSON list raises InvalidConfigError."""
        (tmp_path / CONFIG_FILENAME).write_text("[1, 2]")
        with pytest.raises(InvalidConfigError):
            load_config(str(tmp_path))


class TestEnvironmentOverrides:
    """Test GRADFIT_* variables and .env files."""

    def test_no_variables(self, tmp_path):
        """Test an empty environment gives no overrides."""
        assert environment_overrides(str(tmp_path)) == {}

    def test_typed_values(self, tmp_path, monkeypatch):
        """Test values are cast to the setting types."""
        monkeypatch.setenv(ENV_CG_TOL, "1e-9")
        monkeypatch.setenv(ENV_QUAD_MARGIN, "6")
        monkeypatch.setenv(ENV_LOG_LEVEL, "DEBUG")
        overrides = environment_overrides(str(tmp_path))
        assert overrides == {"cg_tol": 1e-9, "quad_margin": 6, "log_level": "DEBUG"}
        assert isinstance(overrides["quad_margin"], int)

    def test_empty_value_skipped(self, tmp_path, monkeypatch):
        """Test an empty variable is ignored."""
        monkeypatch.setenv(ENV_CG_TOL, "")
        assert "cg_tol" not in environment_overrides(str(tmp_path))

    def test_bad_value(self, tmp_path, monkeypatch):
        """Test an unparsable value raises InvalidConfigError naming the variable."""
        monkeypatch.setenv(ENV_QUAD_MARGIN, "four")
        with pytest.raises(InvalidConfigError) as exc_info:
            environment_overrides(str(tmp_path))
        assert exc_info.value.key == ENV_QUAD_MARGIN

    def test_dotenv_file(self, tmp_path, monkeypatch):
        """Test variables are read from .env in the project root."""
        # registered with monkeypatch so teardown removes what load_dotenv sets
        monkeypatch.setenv(ENV_QUAD_MARGIN, "0")
        monkeypatch.delenv(ENV_QUAD_MARGIN)
        (tmp_path / ".env").write_text(f"{ENV_QUAD_MARGIN}=7\n")
        assert environment_overrides(str(tmp_path)) == {"quad_margin": 7}

    def test_process_environment_wins(self, tmp_path, monkeypatch):
        """Test .env never overrides a variable that is already set."""
        monkeypatch.setenv(ENV_CG_TOL, "1e-9")
        (tmp_path / ".env").write_text(f"{ENV_CG_TOL}=1e-6\n")
        assert environment_overrides(str(tmp_path))["cg_tol"] == 1e-9


class TestResolveSettings:
    """Test the precedence file < environment < flags."""

    def test_precedence(self, tmp_path, monkeypatch):
        """Test flags beat the environment and the environment beats the file."""
        (tmp_path / CONFIG_FILENAME).write_text(
            json.dumps({"degree": 2, "cg_tol": 1e-8, "function": "x_squared"})
        )
        monkeypatch.setenv(ENV_CG_TOL, "1e-10")
        settings = resolve_settings(str(tmp_path), degree=3, seed=None)

        assert settings == {"degree": 3, "cg_tol": 1e-10, "function": "x_squared"}

    def test_none_flags_ignored(self, tmp_path):
        """Test None flags never shadow file values."""
        (tmp_path / CONFIG_FILENAME).write_text(json.dumps({"degree": 2}))
        assert resolve_settings(str(tmp_path), degree=None) == {"degree": 2}


class TestExperimentConfig:
    """Test ExperimentConfig.validate."""

    def test_defaults_from_registry(self):
        """Test bc and mesh default to the target's first condition and domain."""
        config = ExperimentConfig(command="rates").validate()
        assert config.function == "sine"
        assert config.bc == "dirichlet0"
        assert config.mesh == "unit-square"

        lshape = ExperimentConfig(command="tree", function="lshape").validate()
        assert lshape.bc == "neumann"
        assert lshape.mesh == "l-shape"

    def test_mesh_info_defaults(self):
        """Test mesh-info needs no registered function."""
        config = ExperimentConfig(command="mesh-info", function="not-used").validate()
        assert config.mesh == "unit-square"
        assert config.bc == "dirichlet0"

    def test_explicit_values_kept(self):
        """Test explicit bc and mesh are not replaced."""
        config = ExperimentConfig(command="rates", function="sine", bc="neumann", mesh="l-shape").validate()
        assert (config.bc, config.mesh) == ("neumann", "l-shape")

    def test_mesh_file(self, tmp_path):
        """Test an existing file is accepted as mesh source."""
        path = tmp_path / "square.mesh"
        path.write_text("")
        assert ExperimentConfig(command="rates", mesh=str(path)).validate().mesh == str(path)

    def test_unknown_function(self):
        """Test an unregistered function raises UnknownFunctionError."""
        with pytest.raises(UnknownFunctionError):
            ExperimentConfig(command="rates", function="cosine").validate()

    @pytest.mark.parametrize("overrides,key", [
        ({"degree": 5}, "degree"),
        ({"degree": 0}, "degree"),
        ({"function": "lshape", "bc": "dirichlet0"}, "bc"),
        ({"bc": "robin"}, "bc"),
        ({"mesh": "missing.mesh"}, "mesh"),
        ({"levels": [0, -1]}, "levels"),
        ({"thresholds": [0.1, 0.0]}, "thresholds"),
        ({"budgets": [0]}, "budget"),
        ({"variant": "greedy"}, "variant"),
        ({"quad_degree": 25}, "quad_degree"),
        ({"quad_margin": -1}, "quad_margin"),
        ({"cg_tol": 0.0}, "cg_tol"),
        ({"workers": 0}, "workers"),
        ({"seed": -1}, "seed"),
    ])
    def test_invalid_fields(self, overrides, key):
        """Test each invalid field raises InvalidConfigError with its key."""
        with pytest.raises(InvalidConfigError) as exc_info:
            ExperimentConfig(command="tree", **overrides).validate()
        assert exc_info.value.key == key

    def test_bad_command(self):
        """Test an unknown command is a configuration error."""
        with pytest.raises(ConfigurationError):
            ExperimentConfig(command="plot").validate()

    def test_to_dict(self):
        """Test the dict form carries every field."""
        data = ExperimentConfig(command="rates").validate().to_dict()
        assert data["command"] == "rates"
        assert data["levels"] == [0, 1, 2, 3]
