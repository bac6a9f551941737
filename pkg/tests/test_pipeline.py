"""Tests for the end-to-end pipeline and its ablation switches."""

import numpy as np
import pytest

from nightdehaze.config import PipelineConfig
from nightdehaze.fusion import linear_fuse
from nightdehaze.pipeline import (
    PipelineResult,
    StageError,
    run_pipeline,
    run_pipeline_detailed,
)


@pytest.fixture(scope="module")
def hazy():
    from nightdehaze.synth import HazeSpec, generate_scene, synthesize_scene

    rng = np.random.default_rng(313)
    clean = generate_scene((64, 80), rng)
    return synthesize_scene(clean, HazeSpec(noise_sigma=0.01), rng).hazy


class TestRunPipeline:
    def test_output_shape_and_range(self, hazy):
        out = run_pipeline(hazy)
        assert out.shape == hazy.shape
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_deterministic(self, hazy):
        assert np.array_equal(run_pipeline(hazy), run_pipeline(hazy))

    def test_detailed_wrapper_agrees(self, hazy):
        res = run_pipeline_detailed(hazy)
        assert isinstance(res, PipelineResult)
        assert np.array_equal(res.output, run_pipeline(hazy))

    @pytest.mark.parametrize("bad", [np.zeros((8, 8)), np.zeros((8, 8, 4))])
    def test_rejects_non_rgb_shapes(self, bad):
        with pytest.raises(ValueError, match="HxWx3"):
            run_pipeline(bad)

    def test_rejects_non_finite_input(self):
        img = np.zeros((12, 12, 3))
        img[3, 3, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            run_pipeline(img)

    def test_out_of_range_input_is_clipped_not_rejected(self, hazy):
        out = run_pipeline(hazy * 1.2)
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestAblations:
    def test_all_skips_reduce_to_identity(self, hazy):
        cfg = PipelineConfig(skip_dehaze=True, skip_star=True)
        out = run_pipeline(hazy, cfg)
        # both fusion inputs are the unmodified frame, averaged back together
        np.testing.assert_allclose(out, linear_fuse(hazy, hazy), atol=1e-12)

    def test_skip_star_returns_stage1_exactly(self, hazy):
        cfg = PipelineConfig(skip_star=True)
        res = run_pipeline_detailed(hazy, cfg, collect_intermediates=True)
        np.testing.assert_allclose(
            res.output, linear_fuse(res.intermediates["dehazed"], res.intermediates["dehazed"])
        )
        assert "structure" not in res.intermediates

    def test_skip_dehaze_feeds_input_to_stage2(self, hazy):
        res = run_pipeline_detailed(hazy, PipelineConfig(skip_dehaze=True), collect_intermediates=True)
        np.testing.assert_allclose(res.intermediates["dehazed"], hazy)

    def test_skip_t_correction_changes_the_map(self, hazy):
        full = run_pipeline_detailed(hazy, collect_intermediates=True)
        raw = run_pipeline_detailed(
            hazy, PipelineConfig(skip_t_correction=True), collect_intermediates=True
        )
        assert not np.array_equal(full.intermediates["t_used"], raw.intermediates["t_used"])
        np.testing.assert_allclose(
            raw.intermediates["t_used"],
            np.maximum(raw.intermediates["t_initial"], 1e-3),
        )


class TestDiagnostics:
    def test_stage_timings_cover_the_pipeline(self, hazy):
        res = run_pipeline_detailed(hazy)
        assert set(res.stage_ms) == {
            "transmittance",
            "airlight",
            "dehaze",
            "decompose",
            "enhance",
            "fuse",
            "total",
        }
        assert all(v >= 0.0 for v in res.stage_ms.values())
        stage_sum = sum(v for k, v in res.stage_ms.items() if k != "total")
        assert res.stage_ms["total"] >= stage_sum * 0.5

    def test_intermediates_off_by_default(self, hazy):
        assert run_pipeline_detailed(hazy).intermediates == {}

    def test_intermediate_snapshots(self, hazy):
        res = run_pipeline_detailed(hazy, collect_intermediates=True)
        expected = {
            "t_initial",
            "t_used",
            "airlight_global",
            "airlight_map",
            "dehazed",
            "structure",
            "texture",
            "structure_enhanced",
            "texture_enhanced",
            "recombined",
            "objective_trace",
        }
        assert set(res.intermediates) == expected
        assert res.intermediates["t_used"].shape == hazy.shape[:2]
        assert res.intermediates["airlight_map"].shape == hazy.shape

    def test_stage_error_names_the_failing_stage(self, hazy, monkeypatch):
        import nightdehaze.pipeline as pl

        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(pl, "estimate_airlight_map", boom)
        with pytest.raises(StageError, match="airlight") as err:
            run_pipeline(hazy)
        assert err.value.stage == "airlight"
        assert isinstance(err.value.cause, RuntimeError)
