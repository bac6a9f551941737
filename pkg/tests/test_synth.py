"""Tests for scene generation and the haze degradation simulator."""

import numpy as np
import pytest

from nightdehaze.dehaze import synthesize_haze
from nightdehaze.synth import (
    SCENE_PRESETS,
    HazeSpec,
    generate_scene,
    haze_preset,
    make_airlight,
    make_transmittance,
    synthesize_scene,
)


class TestHazeSpecValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"t_mode": "linear"},
            {"airlight_mode": "gradient"},
            {"t_constant": 0.0},
            {"t_constant": 1.5},
            {"t_floor": 1.0},
            {"t_floor": -0.1},
            {"noise_sigma": -0.01},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            HazeSpec(**kwargs)

    def test_defaults_are_noise_free(self):
        assert HazeSpec().noise_sigma == 0.0


class TestPresets:
    def test_known_names(self):
        assert set(SCENE_PRESETS) == {"street", "glow"}

    def test_street_is_default_plus_sensor_noise(self):
        assert haze_preset("street") == HazeSpec(noise_sigma=0.01)

    def test_glow_is_dense_and_washed_out(self):
        spec = haze_preset("glow")
        assert spec.t_near < 0.3  # heavy attenuation everywhere
        assert min(spec.airlight_base) > 0.5  # bright ambient field

    def test_overrides_apply(self):
        spec = haze_preset("street", t_mode="constant", t_constant=0.4)
        assert spec.t_mode == "constant" and spec.t_constant == 0.4

    def test_unknown_name_raises(self):
        with pytest.raises(ValueError, match="unknown preset"):
            haze_preset("daylight")


class TestGenerateScene:
    def test_shape_range_and_channels(self):
        img = generate_scene((40, 56), np.random.default_rng(1))
        assert img.shape == (40, 56, 3)
        assert img.min() >= 0.0 and img.max() <= 1.0

    def test_deterministic_for_a_seed(self):
        a = generate_scene((32, 32), np.random.default_rng(42))
        b = generate_scene((32, 32), np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_seeds_differ(self):
        a = generate_scene((32, 32), np.random.default_rng(1))
        b = generate_scene((32, 32), np.random.default_rng(2))
        assert not np.array_equal(a, b)

    def test_scene_is_dark_overall_with_bright_spots(self):
        img = generate_scene((64, 64), np.random.default_rng(7))
        assert img.mean() < 0.5  # nighttime
        assert img.max() > 0.6  # lamps / windows


class TestMakeTransmittance:
    def test_constant_mode_is_exact(self):
        spec = HazeSpec(t_mode="constant", t_constant=0.37)
        t, params = make_transmittance((10, 12), spec, np.random.default_rng(0))
        assert (t == 0.37).all()
        assert params == {"mode": "constant", "value": 0.37}

    def test_radial_mode_obeys_floor_and_near(self):
        spec = HazeSpec(t_near=0.7, t_floor=0.25)
        t, params = make_transmittance((48, 48), spec, np.random.default_rng(3))
        assert t.min() >= 0.25
        assert t.max() <= 0.7 + 1e-12
        assert params["mode"] == "radial"
        assert spec.beta_range[0] <= params["beta"] <= spec.beta_range[1]

    def test_radial_peaks_at_the_sampled_center(self):
        spec = HazeSpec(t_floor=0.0)
        t, params = make_transmittance((64, 64), spec, np.random.default_rng(9))
        cy, cx = (int(round(v)) for v in params["center"])
        assert t[cy, cx] == t.max()


class TestMakeAirlight:
    def test_constant_mode_is_exact(self):
        spec = HazeSpec(airlight_mode="constant", airlight_base=(0.1, 0.2, 0.3))
        a, params = make_airlight((6, 8), spec, np.random.default_rng(0))
        np.testing.assert_allclose(a, np.broadcast_to((0.1, 0.2, 0.3), (6, 8, 3)))
        assert params["base"] == [0.1, 0.2, 0.3]

    def test_bump_mode_adds_a_localized_source(self):
        spec = HazeSpec()
        a, params = make_airlight((64, 64), spec, np.random.default_rng(5))
        assert a.shape == (64, 64, 3)
        assert a.min() >= 0.0 and a.max() <= 1.0
        cy, cx = (int(round(v)) for v in params["center"])
        corner = a[0, 0].sum()
        assert a[cy, cx].sum() > corner  # brighter at the source


class TestSynthesizeScene:
    def test_noise_free_composition_matches_forward_model(self):
        rng = np.random.default_rng(11)
        clean = generate_scene((48, 48), rng)
        scene = synthesize_scene(clean, HazeSpec(), rng)
        want = synthesize_haze(scene.clean, scene.airlight, scene.transmittance)
        np.testing.assert_allclose(scene.hazy, want, atol=1e-12)

    def test_noise_is_applied_and_clipped(self):
        rng = np.random.default_rng(12)
        clean = generate_scene((48, 48), rng)
        scene = synthesize_scene(clean, HazeSpec(noise_sigma=0.05), rng)
        composed = synthesize_haze(scene.clean, scene.airlight, scene.transmittance)
        assert not np.array_equal(scene.hazy, composed)
        assert scene.hazy.min() >= 0.0 and scene.hazy.max() <= 1.0

    def test_deterministic_per_seed(self):
        def build():
            rng = np.random.default_rng(77)
            return synthesize_scene(generate_scene((32, 32), rng), HazeSpec(noise_sigma=0.01), rng)

        a, b = build(), build()
        assert np.array_equal(a.hazy, b.hazy)
        assert np.array_equal(a.transmittance, b.transmittance)
        assert a.params == b.params

    def test_records_sampled_parameters(self, night_scene):
        assert set(night_scene.params) == {"transmittance", "airlight"}
        assert night_scene.params["transmittance"]["mode"] == "radial"
        assert night_scene.params["airlight"]["mode"] == "bump"

    def test_glow_preset_washes_out_the_scene(self):
        rng = np.random.default_rng(21)
        clean = generate_scene((64, 64), rng)
        scene = synthesize_scene(clean, haze_preset("glow"), rng)
        # dense bright haze: hazy frame is brighter and flatter than clean
        assert scene.hazy.mean() > clean.mean()
        assert scene.hazy.std() < clean.std()
