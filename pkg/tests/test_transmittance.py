"""Transmittance chain: dark channel, global airlight, correction pipeline."""

import numpy as np
import pytest

from nightdehaze.transmittance import (
    STAGE_INITIAL,
    STAGE_NORMALIZED,
    BoundaryParams,
    CorrectionParams,
    DcpParams,
    TransmittanceMap,
    bright_region_compensation,
    correct_transmittance,
    dark_channel,
    global_airlight,
    initial_transmittance,
    light_source_compensation,
    normalize_transmittance,
)
from oracles import dark_channel_ref, global_airlight_ref


class TestDarkChannel:
    def test_matches_brute_force(self, rng):
        img = rng.random((18, 22, 3))
        for radius in (1, 3, 7):
            got = dark_channel(img, DcpParams(patch_radius=radius))
            np.testing.assert_array_equal(got, dark_channel_ref(img, radius))

    def test_monotone_under_brightening(self, rng):
        img = rng.random((16, 16, 3)) * 0.7
        brighter = np.clip(img + 0.2, 0.0, 1.0)
        assert (dark_channel(brighter) >= dark_channel(img)).all()

    def test_constant_image(self):
        img = np.full((10, 10, 3), 0.42)
        np.testing.assert_array_equal(dark_channel(img), np.full((10, 10), 0.42))


class TestGlobalAirlight:
    def test_matches_sort_oracle(self, rng):
        img = rng.random((25, 25, 3))
        params = DcpParams(patch_radius=2, bright_fraction=0.01)
        want = global_airlight_ref(img, dark_channel(img, params), params.bright_fraction)
        np.testing.assert_allclose(global_airlight(img, params), want, atol=1e-12)

    def test_picks_the_bright_haze_region(self):
        img = np.full((40, 40, 3), 0.1)
        img[5:25, 5:25] = (0.8, 0.7, 0.6)  # broad bright patch survives erosion
        a = global_airlight(img)
        np.testing.assert_allclose(a, [0.8, 0.7, 0.6], atol=1e-12)

    def test_shape_and_range(self, rgb_image):
        a = global_airlight(rgb_image)
        assert a.shape == (3,)
        assert (a >= 0).all() and (a <= 1).all()


class TestInitialTransmittance:
    def test_lower_bound_pixel_is_fully_transmissive(self):
        bounds = BoundaryParams()
        img = np.full((4, 4, 3), bounds.lower)
        t = initial_transmittance(img, np.array([0.6, 0.6, 0.6]))
        np.testing.assert_allclose(t.values, 1.0, atol=1e-12)

    def test_pixel_at_airlight_has_zero_transmittance(self):
        img = np.full((4, 4, 3), 0.55)
        t = initial_transmittance(img, np.array([0.55, 0.55, 0.55]))
        np.testing.assert_allclose(t.values, 0.0, atol=1e-12)

    def test_hand_computed_pixel(self):
        # A=0.6, I=0.3: low ratio 0.3/(0.6-20/255)=0.57522..., high ratio
        # negative; channel-min picks the same value for a gray pixel.
        img = np.full((1, 1, 3), 0.3)
        t = initial_transmittance(img, np.array([0.6, 0.6, 0.6]))
        want = (0.6 - 0.3) / (0.6 - 20.0 / 255.0)
        assert t.values[0, 0] == pytest.approx(want, abs=1e-12)

    def test_range_and_stage(self, rng):
        img = rng.random((12, 12, 3))
        t = initial_transmittance(img, np.array([0.7, 0.65, 0.6]))
        assert t.stage == STAGE_INITIAL
        assert t.values.min() >= 0.0 and t.values.max() <= 1.0

    def test_airlight_on_bound_is_nudged_with_warning(self):
        img = np.full((3, 3, 3), 0.4)
        with pytest.warns(UserWarning):
            t = initial_transmittance(img, np.array([20.0 / 255.0, 0.6, 0.6]))
        assert np.isfinite(t.values).all()


# The nine hand-enumerated compensation cases: three per branch of the
# piecewise tables, three for the normalization affine map.
BRIGHT_CASES = [(0.2, 0.0), (0.3, 0.3), (0.8, 0.55)]
SOURCE_CASES = [((0.5, 0.5, 0.5), 0.05), ((0.9, 0.9, 0.9), 0.1), ((0.0, 0.0, 0.0), 0.05)]
NORMALIZE_CASES = [(0.1, 0.2), (0.3, 0.525), (0.5, 0.85)]


class TestCompensations:
    @pytest.mark.parametrize("t_in,expected", BRIGHT_CASES)
    def test_bright_region_table(self, t_in, expected):
        tmap = TransmittanceMap(np.full((2, 2), t_in), STAGE_INITIAL)
        out = bright_region_compensation(tmap)
        np.testing.assert_array_equal(out, np.full((2, 2), expected))

    def test_bright_region_stays_positive_with_defaults(self):
        # offset (0.25) < threshold (0.3), so the surviving branch t - offset
        # is bounded below by threshold - offset > 0.
        tmap = TransmittanceMap(np.full((1, 1), 0.31), STAGE_INITIAL)
        assert bright_region_compensation(tmap)[0, 0] == pytest.approx(0.06)
        tmap = TransmittanceMap(np.full((1, 1), 0.30001), STAGE_INITIAL)
        assert bright_region_compensation(tmap)[0, 0] == pytest.approx(0.05001)

    def test_bright_region_is_an_unclipped_intermediate(self):
        # With a custom offset above the threshold the plane goes negative;
        # only the final normalization stage promises a bounded range.
        params = CorrectionParams(bright_threshold=0.3, bright_offset=0.4)
        tmap = TransmittanceMap(np.full((1, 1), 0.35), STAGE_INITIAL)
        assert bright_region_compensation(tmap, params)[0, 0] == pytest.approx(-0.05)

    def test_bright_region_rejects_wrong_stage(self):
        tmap = TransmittanceMap(np.full((2, 2), 0.4), STAGE_NORMALIZED)
        with pytest.raises(ValueError):
            bright_region_compensation(tmap)

    @pytest.mark.parametrize("pixel,expected", SOURCE_CASES)
    def test_light_source_table(self, pixel, expected):
        img = np.broadcast_to(np.array(pixel), (2, 2, 3)).copy()
        out = light_source_compensation(img)
        np.testing.assert_array_equal(out, np.full((2, 2), expected))

    def test_light_source_codomain(self, rng):
        out = light_source_compensation(rng.random((20, 20, 3)))
        cp = CorrectionParams()
        assert set(np.unique(out)) <= {cp.source_low, cp.source_threshold, cp.source_high}

    def test_normalize_three_point_fixture(self):
        plane = np.array([[0.1, 0.3, 0.5]])
        out = normalize_transmittance(plane, np.zeros_like(plane))
        want = [expected for _, expected in NORMALIZE_CASES]
        np.testing.assert_allclose(out.values[0], want, atol=1e-12)
        assert out.stage == STAGE_NORMALIZED

    def test_normalize_endpoints_exact(self, rng):
        plane = rng.standard_normal((15, 15))
        out = normalize_transmittance(plane, np.zeros_like(plane)).values
        assert out.min() == 0.2
        assert out.max() == 0.85

    def test_normalize_degenerate_constant(self):
        plane = np.full((6, 6), 0.4)
        out = normalize_transmittance(plane, np.zeros_like(plane))
        np.testing.assert_array_equal(out.values, np.full((6, 6), 0.525))

    def test_normalize_shape_mismatch(self):
        with pytest.raises(ValueError):
            normalize_transmittance(np.zeros((3, 3)), np.zeros((4, 4)))


class TestFullCorrection:
    def test_chain_output_contract(self, rng):
        img = rng.random((20, 20, 3))
        t0 = initial_transmittance(img, global_airlight(img))
        out = correct_transmittance(img, t0)
        assert out.stage == STAGE_NORMALIZED
        assert np.isfinite(out.values).all()
        assert out.values.min() >= 0.2 and out.values.max() <= 0.85

    def test_chain_attains_both_endpoints(self, night_scene):
        img = night_scene.hazy
        t0 = initial_transmittance(img, global_airlight(img))
        out = correct_transmittance(img, t0).values
        assert out.min() == 0.2 and out.max() == 0.85
