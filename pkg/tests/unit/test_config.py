"""
Unit tests for settings, experiment files, validators, helpers and errors.
"""

import json
import logging
import math

import pytest
from pydantic import ValidationError as PydanticValidationError

from morsewitten.config import AsymptoticsSettings, LoggingSettings, Settings
from morsewitten.models.landscape import DomainKind
from morsewitten.models.spectral import Scheme
from morsewitten.utils.exceptions import (
    ConfigurationError,
    MorseWittenError,
    NonFiniteValueError,
    NotSymmetricError,
    SolverStallError,
    ValidationError,
    WindowOnCriticalValueError,
)
from morsewitten.utils.helpers import (
    format_float,
    parse_float,
    periodic_distance,
    relative_error,
    text_hash,
)
from morsewitten.utils.logging import setup_logging
from morsewitten.utils.validators import (
    validate_finite,
    validate_h_list,
    validate_resolution,
    validate_symmetric,
    validate_window,
)
from morsewitten.models.experiment import ExperimentConfig
from tests.conftest import EXPERIMENTS_DIR
from tests.factories import ExperimentConfigFactory


class TestSettings:
    """Test environment-driven settings"""

    def test_defaults(self, test_settings):
        """Defaults match the documented tolerances"""
        assert test_settings.spectral.dense_max_unknowns == 4096
        assert test_settings.spectral.weight_guard == 5.0
        assert test_settings.asymptotics.h_max_factor == 0.3
        assert test_settings.harness.float_format == "%.17g"

    def test_environment_override(self, monkeypatch):
        """Section prefixes select the nested settings"""
        monkeypatch.setenv("MW_SPECTRAL_DENSE_MAX_UNKNOWNS", "128")
        monkeypatch.setenv("MW_LOG_LEVEL", "debug")

        settings = Settings()

        assert settings.spectral.dense_max_unknowns == 128
        assert settings.logging.level == "DEBUG"

    def test_invalid_values(self):
        """Bad log levels, formats and a zero kappa are rejected"""
        with pytest.raises(PydanticValidationError):
            LoggingSettings(level="chatty")
        with pytest.raises(PydanticValidationError):
            LoggingSettings(format="xml")
        with pytest.raises(PydanticValidationError):
            AsymptoticsSettings(default_kappa=0.0)


class TestExperimentConfig:
    """Test experiment files"""

    def test_bundled_file(self):
        """The double well experiment parses with sorted h values"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "double_well.env")

        assert config.name == "double_well"
        assert config.function == "double_well"
        assert config.resolution == 2048
        assert config.h_list == [0.3, 0.25, 0.2, 0.15, 0.12, 0.1]
        assert config.degrees == [0, 1]
        assert config.scheme == Scheme.CONJUGATED_DEC
        assert config.domain_lengths == (2 * math.pi,)

    def test_relative_complex_path(self):
        """Complex files resolve against the experiment directory"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "genus2.env")

        assert config.domain == DomainKind.ABSTRACT_COMPLEX
        assert config.complex_file.endswith("genus2.simplicial")
        assert config.domain_lengths == ()

    def test_window_and_kappa(self, experiment_file):
        """Infinite window ends and PAIR=VALUE kappa entries"""
        path = experiment_file(
            "windowed", function="double_well", window="-inf,0.5", kappa="2-1=1.5,3-0=0.5", h_list="0.1,0.3,0.2"
        )

        config = ExperimentConfig.from_file(path)

        assert config.name == "windowed"
        assert config.window == (-math.inf, 0.5)
        assert config.kappa_table() == {(2, 1): 1.5, (3, 0): 0.5}
        assert config.h_list == [0.3, 0.2, 0.1]

    def test_overrides_win(self, experiment_file):
        """Command-line overrides replace file values"""
        path = experiment_file("base", function="cosine", resolution=256)

        config = ExperimentConfig.from_file(path, overrides={"resolution": 512, "scheme": None})

        assert config.resolution == 512
        assert config.scheme == Scheme.CONJUGATED_DEC

    @pytest.mark.parametrize(
        "values",
        [
            {"function": "cosine", "resolution": 100},
            {"function": "cosine", "resolution": 16},
            {"function": "cosine", "h_list": "0.2,0.2"},
            {"function": "cosine", "h_list": "0.2,-0.1"},
            {"function": "cosine", "window": "1,0"},
            {"function": "cosine", "window": "0.5"},
            {"function": "cosine", "kappa": "1.5"},
            {"function": "cosine", "complex_file": "x.simplicial"},
            {"complex_file": "x.simplicial", "domain": "circle"},
            {"function": "cosine", "domain": "interval"},
            {},
        ],
        ids=[
            "not-power-of-two",
            "too-coarse",
            "repeated-h",
            "negative-h",
            "reversed-window",
            "one-level",
            "kappa-without-pair",
            "two-sources",
            "complex-on-circle",
            "interval-without-window",
            "no-source",
        ],
    )
    def test_invalid(self, values):
        """Invalid experiments raise configuration errors"""
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_mapping(values)

    def test_missing_file(self, tmp_path):
        """A missing experiment file is a configuration error"""
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_file(tmp_path / "absent.env")

    def test_hash_tracks_content(self):
        """Equal configs hash equal and any change moves the hash"""
        first = ExperimentConfigFactory(name="same")
        second = ExperimentConfigFactory(name="same")
        third = ExperimentConfigFactory(name="same", resolution=512)

        assert first.config_hash() == second.config_hash()
        assert first.config_hash() != third.config_hash()


class TestValidators:
    """Test shared validation helpers"""

    @pytest.mark.parametrize("resolution", [32, 1024, 8192])
    def test_resolution_accepted(self, resolution):
        """Powers of two between 2^5 and 2^13"""
        assert validate_resolution(resolution) == resolution

    @pytest.mark.parametrize("resolution", [0, 48, 16, 16384])
    def test_resolution_rejected(self, resolution):
        """Everything else is refused"""
        with pytest.raises(ValidationError):
            validate_resolution(resolution)

    def test_h_list(self):
        """h values come back descending"""
        assert validate_h_list([0.1, 0.3, 0.2]) == [0.3, 0.2, 0.1]
        assert validate_h_list([]) == []
        with pytest.raises(ValidationError):
            validate_h_list([0.1, math.inf])

    def test_window(self):
        """Ordered levels pass; NaN and reversed levels do not"""
        assert validate_window(-math.inf, 0.5) == (-math.inf, 0.5)
        with pytest.raises(ValidationError):
            validate_window(math.nan, 1.0)
        with pytest.raises(ValidationError):
            validate_window(1.0, 1.0)

    def test_finite(self):
        """Non-finite entries are reported by index"""
        with pytest.raises(NonFiniteValueError) as excinfo:
            validate_finite([0.0, math.nan, 1.0, math.inf])

        assert "2 non-finite" in excinfo.value.message

    def test_symmetric(self):
        """Asymmetry above the tolerance raises"""
        assert validate_symmetric([[1.0, 2.0], [2.0, 1.0]], 1e-12) == 0.0
        with pytest.raises(NotSymmetricError):
            validate_symmetric([[1.0, 2.0], [2.5, 1.0]], 1e-12)


class TestHelpers:
    """Test formatting and geometry helpers"""

    def test_float_format(self):
        """Infinities are spelled out and finite values keep 17 digits"""
        assert format_float(math.inf) == "inf"
        assert format_float(-math.inf) == "-inf"
        assert float(format_float(1.0 / 3.0)) == 1.0 / 3.0
        assert parse_float(" -Inf ") == -math.inf
        assert parse_float("0.25") == 0.25

    def test_relative_error(self):
        """Zero predictions only match zero"""
        assert relative_error(1.1, 1.0) == pytest.approx(0.1)
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1e-9, 0.0) == math.inf

    def test_periodic_distance(self):
        """Distances wrap around periodic axes"""
        assert periodic_distance([0.1], [6.2], [2 * math.pi], [True]) == pytest.approx(2 * math.pi - 6.1)
        assert periodic_distance([0.1, 0.0], [6.2, 0.0], [2 * math.pi, 1.0], [False, True]) == pytest.approx(6.1)

    def test_text_hash(self):
        """SHA-256 of text and bytes agree"""
        assert text_hash("abc") == text_hash(b"abc")
        assert len(text_hash("abc")) == 64


class TestErrors:
    """Test the exception hierarchy"""

    def test_exit_codes(self):
        """Input errors exit with 2 and computation errors with 3"""
        assert ValidationError("bad").exit_code == 2
        assert ConfigurationError("bad").exit_code == 2
        assert SolverStallError("stall").exit_code == 3
        assert WindowOnCriticalValueError("level", level=1.0, value=1.0).exit_code == 3

    def test_to_dict(self):
        """Errors serialise with their code and details"""
        error = ValidationError("bad h", field="h", value=-1)

        payload = error.to_dict()

        assert payload["error_type"] == "ValidationError"
        assert payload["error_code"] == "VALIDATION_ERROR"
        assert payload["details"] == {"field": "h", "value": "-1"}
        assert isinstance(error, MorseWittenError)


class TestLogging:
    """Test logging setup"""

    def test_json_file(self, tmp_path):
        """JSON lines go to the rotating log file"""
        root = logging.getLogger()
        saved_handlers, saved_level = root.handlers[:], root.level
        log_file = tmp_path / "logs" / "run.log"
        try:
            setup_logging(LoggingSettings(level="DEBUG", format="json", file_path=str(log_file)))
            logging.getLogger("morsewitten.test").info("plain stdlib record")
            for handler in root.handlers:
                handler.flush()
        finally:
            for handler in root.handlers:
                if handler not in saved_handlers:
                    handler.close()
            root.handlers[:] = saved_handlers
            root.setLevel(saved_level)

        records = [json.loads(line) for line in log_file.read_text().splitlines()]
        assert any(record["event"] == "plain stdlib record" for record in records)
        assert all("timestamp" in record for record in records)
        assert logging.getLogger("asyncio").level == logging.WARNING
        assert logging.getLogger("plotly").level == logging.WARNING
