"""Tests for the run file reader and the configuration schema."""

from __future__ import annotations

from pathlib import Path

import pytest
import voluptuous as vol

from fermion_sewing.config_flow import (
    DEFAULT_POINTS,
    load_config,
    parse_complex,
    parse_points,
    read_config_file,
)
from fermion_sewing.const import (
    DEFAULT_ORDER,
    Command,
    DegenerateTwistError,
    OutputFormat,
    ParseError,
)
from fermion_sewing.sewing import SurfacePoint

EXAMPLE = Path(__file__).resolve().parent.parent / "config" / "example.conf"


def write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.conf"
    path.write_text(text, encoding="utf-8")
    return path


class TestParseComplex:
    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("i", 1j),
            ("-i", -1j),
            ("+i", 1j),
            ("1.2i", 1.2j),
            ("0.8+0.5i", 0.8 + 0.5j),
            ("0.01", 0.01 + 0j),
            ("1e-3-2e-3j", 1e-3 - 2e-3j),
            (" 0.5 - 0.25i ", 0.5 - 0.25j),
        ],
    )
    def test_literals(self, text, expected):
        """i or j mark the imaginary unit; bare i and -i are accepted."""
        assert parse_complex(text) == expected

    def test_numbers_pass_through(self):
        """Numbers are converted without parsing."""
        assert parse_complex(2) == 2 + 0j

    @pytest.mark.parametrize("text", ["abc", "1+", ""])
    def test_garbage(self, text):
        """Unparseable text is invalid."""
        with pytest.raises(vol.Invalid):
            parse_complex(text)


class TestParsePoints:
    def test_default(self):
        """The default points put w on torus 1 and z on torus 2."""
        assert parse_points(DEFAULT_POINTS) == (
            SurfacePoint(1, 0.8 + 0.5j),
            SurfacePoint(2, 0.7 - 0.6j),
        )

    def test_bad_torus(self):
        """Only tori 1 and 2 exist."""
        with pytest.raises(vol.Invalid):
            parse_points("3:0.5")


class TestReadConfigFile:
    def test_comments_and_blank_lines(self, tmp_path):
        """Comments and blank lines are skipped; line numbers are kept."""
        path = write(tmp_path, "# header\n\ncommand = z1  # trailing\neps=0.01\n")
        assert read_config_file(path) == {"command": ("z1", 3), "eps": ("0.01", 4)}

    def test_malformed_line(self, tmp_path):
        """A line without '=' names its line number."""
        path = write(tmp_path, "command = z1\nnonsense\n")
        with pytest.raises(ParseError, match=":2:"):
            read_config_file(path)

    def test_unknown_key(self, tmp_path):
        """Unknown keys are refused."""
        path = write(tmp_path, "colour = blue\n")
        with pytest.raises(ParseError, match="colour"):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        """A missing file is a ParseError."""
        with pytest.raises(ParseError):
            read_config_file(tmp_path / "absent.conf")


class TestLoadConfig:
    def test_defaults(self):
        """Only the command is required."""
        settings = load_config(overrides={"command": "z2"})
        assert settings.command == Command.Z2
        assert settings.order == DEFAULT_ORDER
        assert settings.tau1 == 1j
        assert settings.output_format == OutputFormat.Json

    def test_example_file(self):
        """The shipped example file validates."""
        settings = load_config(EXAMPLE)
        assert settings.tau2 == 1.2j
        assert settings.twists[0].alpha == 0.3
        assert len(settings.points) == 2

    def test_flags_override_file(self, tmp_path):
        """Flags win over file values; None flags are ignored."""
        path = write(tmp_path, "command = z2\nM = 16\neps = 0.01\n")
        settings = load_config(path, {"M": "20", "eps": None})
        assert settings.order == 20
        assert settings.eps == 0.01

    def test_bad_value_names_line_and_key(self, tmp_path):
        """Validation errors carry the file position and the key."""
        path = write(tmp_path, "command = z2\n\nM = many\n")
        with pytest.raises(ParseError, match=r"run\.conf:3: key 'M'"):
            load_config(path)

    def test_lower_half_plane(self):
        """tau must lie in the upper half-plane."""
        with pytest.raises(ParseError, match="tau1"):
            load_config(overrides={"command": "z1", "tau1": "-1i"})

    def test_bad_xi(self):
        """xi is +i or -i."""
        with pytest.raises(ParseError, match="xi"):
            load_config(overrides={"command": "z2", "xi": "1"})

    def test_characteristic_range(self):
        """Characteristics lie in [0, 1)."""
        with pytest.raises(ParseError, match="alpha1"):
            load_config(overrides={"command": "z2", "alpha1": "1.0"})

    def test_half_integer_weight(self):
        """W is a multiple of 1/2."""
        with pytest.raises(ParseError, match="'W'"):
            load_config(overrides={"command": "z2", "W": "2.3"})

    @pytest.mark.parametrize(
        ("key", "value"), [("max_terms", "4"), ("rel_tol", "1"), ("rel_tol", "0"), ("rel_tol", "-1e-9")]
    )
    def test_series_policy_range(self, key, value):
        """Series settings the summation cannot honour are refused with the key named."""
        with pytest.raises(ParseError, match=key):
            load_config(overrides={"command": "z2", key: value})

    def test_smallest_max_terms(self):
        """The floor on max_terms is accepted."""
        assert load_config(overrides={"command": "z2", "max_terms": "8"}).max_terms == 8

    def test_unknown_override(self):
        """Unknown override keys are refused."""
        with pytest.raises(ParseError):
            load_config(overrides={"command": "z2", "colour": "blue"})

    def test_degenerate_chars(self):
        """(1/2, 1/2) validates but is refused when the characteristics are built."""
        settings = load_config(overrides={"command": "z2", "alpha1": "0.5", "beta1": "0.5"})
        with pytest.raises(DegenerateTwistError):
            settings.chars()

    def test_echo(self):
        """The echo lists the effective values under their file keys."""
        echo = load_config(overrides={"command": "z2", "M": "8"}).echo()
        assert echo["command"] == "z2"
        assert echo["M"] == 8
        assert echo["points"][0] == {"torus": 1, "z": 0.8 + 0.5j}
