import json
import os

import numpy as np
import pytest

from gramtrack.boxes import BoundingBox
from gramtrack.config import TrackerConfig
from gramtrack.errors import (ConfigError, DegenerateInputError,
                              IngestionError, ParameterError)
from gramtrack.features import ActivationMap, cross_correlate, inner_product
from gramtrack.fts import write_feature_file
from gramtrack.inference import track_step
from gramtrack.matcher import (NccEncoder, PrecomputedEncoder, SearchGeometry,
                               clamp_box, crop_and_resize, locate_peak,
                               track_init)


def checkerboard(h, w, cell=4):
    rows = (np.arange(h) // cell)[:, None]
    cols = (np.arange(w) // cell)[None, :]
    return (((rows + cols) % 2) * 200 + 30).astype(np.uint8)


def textured_image(rng, h=120, w=160):
    base = rng.integers(30, 220, size=(h, w), dtype=np.uint8)
    return np.repeat(base[:, :, None], 3, axis=2)


# -- crop geometry ------------------------------------------------------------

def test_crop_inside_is_pixel_identical(rng):
    img = textured_image(rng)
    box = BoundingBox(40, 30, 20, 20)
    out = crop_and_resize(img, box, 1.0, 20)
    assert np.array_equal(out, img[30:50, 40:60])


def test_crop_hand_geometry(rng):
    # box (40,40,20,20), pad 2 -> source region (30,30,40,40)
    img = textured_image(rng)
    out = crop_and_resize(img, BoundingBox(40, 40, 20, 20), 2.0, 40)
    assert np.array_equal(out, img[30:70, 30:70])


def test_crop_at_corner_fully_populated(rng):
    img = textured_image(rng)
    out = crop_and_resize(img, BoundingBox(-5, -5, 20, 20), 2.0, 32)
    assert out.shape == (32, 32, 3)
    # replicated edges: top-left corner pixel extends outward
    assert np.array_equal(out[0, 0], img[0, 0])


def test_crop_fully_outside_replicates_edge(rng):
    img = textured_image(rng)
    out = crop_and_resize(img, BoundingBox(-100, -100, 10, 10), 1.0, 10)
    assert np.all(out == img[0, 0])


def test_crop_degenerate_box_raises(rng):
    img = textured_image(rng)
    with pytest.raises(ParameterError):
        crop_and_resize(img, BoundingBox(10, 10, 5, 5), 0.5, 10)
    with pytest.raises(ParameterError):
        crop_and_resize(img, BoundingBox(10, 10, 5, 5), 1.0, 0)


def test_clamp_box_keeps_center_inside():
    clamped = clamp_box(BoundingBox(500, -60, 20, 20), (100, 200))
    cx, cy = clamped.center
    assert 0 <= cx <= 199 and 0 <= cy <= 99
    assert clamped.w == 20 and clamped.h == 20


# -- encoder -------------------------------------------------------------------

def test_ncc_encoder_deterministic(rng):
    enc = NccEncoder(TrackerConfig())
    patch = textured_image(rng, 64, 64)
    a, b = enc.encode(patch), enc.encode(patch)
    assert np.array_equal(a, b)


def test_ncc_encoder_zero_mean_single_channel(rng):
    enc = NccEncoder(TrackerConfig())
    out = enc.encode(textured_image(rng, 32, 32))
    assert out.shape == (1, 32, 32)
    assert abs(out.mean()) < 1e-9


def test_ncc_encoder_constant_patch_is_zero():
    enc = NccEncoder(TrackerConfig())
    out = enc.encode(np.full((16, 16, 3), 130, dtype=np.uint8))
    assert np.array_equal(out, np.zeros((1, 16, 16)))


def test_ncc_encoder_luma_weights():
    enc = NccEncoder(TrackerConfig())
    patch = np.zeros((1, 2, 3), dtype=np.uint8)
    patch[0, 0] = [100, 0, 0]
    patch[0, 1] = [0, 100, 0]
    out = enc.encode(patch)[0, 0]
    # zero-mean of [29.9, 58.7]
    assert out[0] == pytest.approx(29.9 - 44.3, abs=1e-9)
    assert out[1] == pytest.approx(58.7 - 44.3, abs=1e-9)


def test_ncc_self_similarity_and_inversion(rng):
    from gramtrack.features import l2_normalize
    enc = NccEncoder(TrackerConfig())
    board = checkerboard(32, 32)
    a = l2_normalize(enc.encode(board))
    b = l2_normalize(enc.encode(board.copy()))
    assert inner_product(a, b) == pytest.approx(1.0, abs=1e-9)
    inverted = (255 - board).astype(np.uint8)
    c = l2_normalize(enc.encode(inverted))
    assert inner_product(a, c) == pytest.approx(-1.0, abs=1e-9)


# -- locate_peak -----------------------------------------------------------------

def _geometry(wi=0.0, ratios=(1.0,), scales=(1.0,)):
    return SearchGeometry(center=(80.0, 60.0), prev_size=(20.0, 20.0),
                          scales=scales, cell_ratios=ratios,
                          window_influence=wi, scale_penalty=0.97)


def test_locate_peak_centered_is_fixed_point():
    scores = np.zeros((9, 9))
    scores[4, 4] = 1.0
    box, score = locate_peak(ActivationMap(scores), _geometry())
    assert box.center == (80.0, 60.0)
    assert (box.w, box.h) == (20.0, 20.0)
    assert score == pytest.approx(1.0)


def test_locate_peak_offset_maps_by_stride():
    scores = np.zeros((9, 9))
    scores[4, 5] = 1.0
    box, _ = locate_peak(ActivationMap(scores), _geometry(ratios=(2.5,)))
    assert box.center == (82.5, 60.0)


def test_locate_peak_flat_map_falls_back_to_center():
    box, score = locate_peak(ActivationMap(np.zeros((9, 9))), _geometry(wi=0.2))
    assert box.center == (80.0, 60.0)
    assert score == 0.0


def test_translation_recovery(rng):
    # textured target pasted into a flat background moves by (dx, dy); the
    # next step must recover the offset within one response cell
    config = TrackerConfig(window_influence=0.0)
    texture = textured_image(rng, 40, 40)
    for dx, dy in [(0, 0), (12, -9), (-15, 5), (20, 18)]:
        img = np.full((240, 320, 3), 120, dtype=np.uint8)
        img[110:150, 150:190] = texture
        state = track_init(img, BoundingBox(150, 110, 40, 40), config)
        img2 = np.full((240, 320, 3), 120, dtype=np.uint8)
        img2[110 + dy:150 + dy, 150 + dx:190 + dx] = texture
        pred = track_step(state, img2)
        cx, cy = pred.box.center
        ratio = 40 * 2.5 / 160
        assert abs(cx - (170 + dx)) <= ratio + 1e-6
        assert abs(cy - (130 + dy)) <= ratio + 1e-6


# -- track_init --------------------------------------------------------------------

def test_track_init_state(rng):
    img = textured_image(rng, 240, 320)
    state = track_init(img, BoundingBox(100, 80, 40, 40), TrackerConfig())
    assert len(state.ltm) == 1
    assert len(state.stm) == 1
    assert state.ltm.current_det == pytest.approx(1.0, abs=1e-9)
    assert state.frame_index == 0
    assert abs(np.linalg.norm(state.ltm.base.feature.ravel()) - 1.0) < 1e-6


def test_track_init_constant_target_degenerate(rng):
    img = np.full((240, 320, 3), 99, dtype=np.uint8)
    with pytest.raises(DegenerateInputError):
        track_init(img, BoundingBox(100, 80, 40, 40), TrackerConfig())


def test_track_init_partially_outside_clamps(rng):
    img = textured_image(rng, 240, 320)
    state = track_init(img, BoundingBox(-10, -10, 40, 40), TrackerConfig())
    cx, cy = state.previous_box.center
    assert 0 <= cx <= 319 and 0 <= cy <= 239


def test_track_init_same_frame_recovers_box(rng):
    img = textured_image(rng, 240, 320)
    box = BoundingBox(100, 80, 40, 40)
    state = track_init(img, box, TrackerConfig())
    pred = track_step(state, img)
    assert abs(pred.box.center[0] - box.center[0]) < 1.0
    assert abs(pred.box.center[1] - box.center[1]) < 1.0


# -- precomputed features -------------------------------------------------------------

@pytest.fixture
def feature_dir(tmp_path, rng):
    d = tmp_path / "features"
    d.mkdir()
    meta = {"stride": 8, "channels": 2, "frame_count": 3}
    (d / "meta.json").write_text(json.dumps(meta))
    for i in range(3):
        fmap = rng.standard_normal((2, 30, 40))
        write_feature_file(fmap, d / f"{i:06d}.fts")
    return d


def test_precomputed_full_frame_round_trip(feature_dir):
    enc = PrecomputedEncoder(str(feature_dir))
    from gramtrack.fts import read_feature_file
    direct = read_feature_file(feature_dir / "000000.fts")
    assert np.array_equal(enc.frame_feature(0), direct)


def test_precomputed_missing_frame(feature_dir):
    enc = PrecomputedEncoder(str(feature_dir))
    with pytest.raises(IngestionError, match="000099"):
        enc.frame_feature(99)


def test_precomputed_stride_arithmetic(feature_dir):
    enc = PrecomputedEncoder(str(feature_dir))
    crop = enc.region_feature(1, BoundingBox(16, 16, 64, 64))
    assert crop.shape == (2, 8, 8)
    full = enc.frame_feature(1)
    assert np.array_equal(crop, full[:, 2:10, 2:10])


def test_precomputed_channel_mismatch(tmp_path, rng):
    d = tmp_path / "bad"
    d.mkdir()
    (d / "meta.json").write_text(json.dumps({"stride": 4, "channels": 3,
                                             "frame_count": 1}))
    write_feature_file(rng.standard_normal((2, 10, 10)), d / "000000.fts")
    enc = PrecomputedEncoder(str(d))
    with pytest.raises(ConfigError):
        enc.frame_feature(0)


def test_precomputed_bad_meta(tmp_path):
    d = tmp_path / "nometa"
    d.mkdir()
    with pytest.raises(IngestionError):
        PrecomputedEncoder(str(d))


def test_config_requires_consistent_context_factor():
    with pytest.raises(ConfigError):
        TrackerConfig(context_factor=3.0)


def test_config_precomputed_requires_single_scale():
    with pytest.raises(ConfigError):
        TrackerConfig(encoder="precomputed", features_dir="x")
    TrackerConfig(encoder="precomputed", features_dir="x", scales=(1.0,))
