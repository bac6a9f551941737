"""Tests for the flat key-value configuration format."""

import pytest

from nightdehaze.config import (
    ConfigError,
    PipelineConfig,
    load_config,
    parse_config,
    serialize_config,
)


class TestRoundTrip:
    def test_empty_text_is_the_default_config(self):
        assert parse_config("") == PipelineConfig()

    def test_serialize_then_parse_is_lossless(self):
        cfg = PipelineConfig()
        assert parse_config(serialize_config(cfg)) == cfg

    def test_round_trip_preserves_non_default_values(self):
        text = "\n".join(
            [
                "dcp.patch_radius = 5",
                "correction.bright_threshold = 0.35",
                "airlight.sigma_coarse = 12.5",
                "star.outer_iters = 8",
                "msrcr.scales = 10.0, 40.0, 120.0",
                "enhance.gamma = 0.45",
                "fusion.scale = 0.6",
                "pipeline.skip_star = true",
                "pipeline.threads = 4",
            ]
        )
        cfg = parse_config(text)
        assert cfg.dcp.patch_radius == 5
        assert cfg.correction.bright_threshold == 0.35
        assert cfg.airlight.sigma_coarse == 12.5
        assert cfg.star.outer_iters == 8
        assert cfg.enhance.msrcr.scales == (10.0, 40.0, 120.0)
        assert cfg.enhance.gamma == 0.45
        assert cfg.fusion.scale == 0.6
        assert cfg.skip_star is True
        assert cfg.threads == 4
        assert parse_config(serialize_config(cfg)) == cfg

    def test_serialization_lists_every_key_once(self):
        lines = [l for l in serialize_config(PipelineConfig()).splitlines() if l]
        names = [l.split(" = ")[0] for l in lines]
        assert len(names) == len(set(names))
        assert "airlight.sigma_coarse = auto" in lines
        assert "pipeline.threads = 1" in lines


class TestParsing:
    def test_comments_and_blank_lines_ignored(self):
        text = "# full comment\n\nenhance.gamma = 0.3  # trailing comment\n"
        assert parse_config(text).enhance.gamma == 0.3

    def test_auto_means_derive_from_image(self):
        cfg = parse_config("airlight.sigma_coarse = auto\n")
        assert cfg.airlight.sigma_coarse is None

    def test_booleans_are_strict(self):
        assert parse_config("pipeline.debug_dump = TRUE\n").debug_dump is True
        with pytest.raises(ConfigError, match="true/false"):
            parse_config("pipeline.debug_dump = 1\n")

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("just words", "expected"),
            ("gamma = 0.4", "lacks a section"),
            ("nosuch.key = 1", "unknown section"),
            ("enhance.nope = 1", "unknown key"),
            ("enhance.gamma = fast", "bad value"),
            ("enhance.msrcr = 1", "unknown key"),
        ],
    )
    def test_errors_carry_line_numbers(self, line, fragment):
        text = "# header\n" + line + "\n"
        with pytest.raises(ConfigError, match=fragment) as err:
            parse_config(text)
        assert "line 2" in str(err.value)

    def test_out_of_range_value_is_a_config_error(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_config("enhance.gamma = 1.5\n")

    def test_threads_must_be_positive(self):
        with pytest.raises(ConfigError):
            parse_config("pipeline.threads = 0\n")
        with pytest.raises(ValueError):
            PipelineConfig(threads=0)

    def test_later_lines_override_earlier_ones(self):
        cfg = parse_config("enhance.gamma = 0.3\nenhance.gamma = 0.7\n")
        assert cfg.enhance.gamma == 0.7


class TestLoadConfig:
    def test_reads_a_file(self, tmp_path):
        path = tmp_path / "pipeline.conf"
        path.write_text("star.alpha = 0.01\n")
        assert load_config(path).star.alpha == 0.01

    def test_missing_file_is_a_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.conf")
