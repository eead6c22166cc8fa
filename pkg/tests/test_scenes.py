"""Synthetic blob worlds: sampling, rendering, and the centroid oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from videoloom import (
    Blob,
    CentroidUndefinedError,
    FrameStack,
    SceneSpec,
    ValidationError,
    centroid,
    render_frames,
    render_scene_frame,
    sample_scene,
)
from videoloom.scenes import CONTENT_LABELS, MOTION_LABELS, MOTION_VELOCITIES


def one_blob_scene(center, radius=1.5, intensity=0.8, background=0.1):
    blob = Blob(
        center=center, velocity=(0.0, 0.0), radius=radius, intensity=(intensity,)
    )
    return SceneSpec(
        blobs=(blob,),
        background=(background,),
        content_label="one_blob",
        motion_label="static",
    )


# ---------------------------------------------------------------------------
# sampling


def test_sample_scene_is_deterministic():
    a = sample_scene("two_blobs", "drift_right", 42)
    b = sample_scene("two_blobs", "drift_right", 42)
    assert a == b


def test_sample_scene_varies_with_seed_and_labels():
    base = sample_scene("one_blob", "static", 0)
    assert base != sample_scene("one_blob", "static", 1)
    assert base != sample_scene("two_blobs", "static", 0)
    assert base.blobs[0].center != sample_scene("one_blob", "drift_right", 0).blobs[0].center


@pytest.mark.parametrize(
    "label,count", [("one_blob", 1), ("two_blobs", 2), ("three_blobs", 3), ("big_blob", 1)]
)
def test_content_label_controls_blob_count(label, count):
    for seed in range(5):
        scene = sample_scene(label, "static", seed)
        assert len(scene.blobs) == count


def test_big_blob_family_is_larger():
    for seed in range(10):
        big = sample_scene("big_blob", "static", seed).blobs[0].radius
        small = sample_scene("one_blob", "static", seed).blobs[0].radius
        assert big > small
        assert 6.0 <= big <= 7.0
        assert 2.8 <= small <= 3.4


@pytest.mark.parametrize("label", MOTION_LABELS)
def test_motion_label_controls_velocity_family(label):
    direction = np.asarray(MOTION_VELOCITIES[label], dtype=np.float64)
    for seed in range(10):
        scene = sample_scene("one_blob", label, seed)
        velocity = np.asarray(scene.blobs[0].velocity)
        if label == "static":
            np.testing.assert_array_equal(velocity, [0.0, 0.0])
            continue
        speed = np.linalg.norm(velocity) / np.linalg.norm(direction)
        assert 0.5 <= speed <= 1.5
        np.testing.assert_allclose(velocity, direction * speed, atol=1e-12)


@given(
    label=st.sampled_from(CONTENT_LABELS),
    motion=st.sampled_from(MOTION_LABELS),
    seed=st.integers(min_value=0, max_value=10_000),
)
@settings(max_examples=40, deadline=None)
def test_sampled_scene_invariants(label, motion, seed):
    scene = sample_scene(label, motion, seed)
    for blob in scene.blobs:
        assert blob.radius > 0.0
        assert all(0.0 <= v <= 1.0 for v in blob.intensity)
        assert 0.0 <= blob.center[0] <= 31.0
        assert 0.0 <= blob.center[1] <= 31.0


def test_sample_scene_rejects_unknown_labels():
    with pytest.raises(ValidationError):
        sample_scene("four_blobs", "static", 0)
    with pytest.raises(ValidationError):
        sample_scene("one_blob", "spin", 0)
    with pytest.raises(ValidationError):
        sample_scene("one_blob", "static", 0, background=[0.1, 0.2])


# ---------------------------------------------------------------------------
# rendering


def test_render_values_stay_in_range():
    scene = sample_scene("three_blobs", "drift_diag", 3)
    frame = render_scene_frame(scene, 1, 32, 32)
    assert frame.shape == (3, 32, 32)
    assert frame.min() >= 0.0 and frame.max() <= 1.0


def test_render_background_outside_blob_support():
    """The gaussian profile is truncated at 3 radii, so far pixels hold the
    exact background level."""
    scene = one_blob_scene(center=(8.0, 8.0), radius=1.5, background=0.1)
    frame = render_scene_frame(scene, 1, 32, 32)
    assert frame[0, 31, 31] == 0.1
    assert frame[0, 8, 8] > 0.5


def test_render_empty_scene_is_constant_background():
    scene = SceneSpec(
        blobs=(), background=(0.25,), content_label="one_blob", motion_label="static"
    )
    frame = render_scene_frame(scene, 1, 8, 8)
    np.testing.assert_array_equal(frame, np.full((1, 8, 8), 0.25))


def test_render_frame_index_is_one_based():
    scene = sample_scene("one_blob", "static", 0)
    with pytest.raises(ValidationError):
        render_scene_frame(scene, 0, 32, 32)


def test_static_scene_frames_are_identical():
    scene = sample_scene("two_blobs", "static", 5)
    stack = render_frames(scene, 4, 32, 32)
    assert stack.num_frames == 4
    for i in range(1, 4):
        np.testing.assert_array_equal(stack.frames[i], stack.frames[0])


def test_moving_scene_advances_by_velocity_per_frame():
    blob = Blob(center=(10.0, 12.0), velocity=(1.25, -0.5), radius=1.5, intensity=(0.8,))
    scene = SceneSpec(
        blobs=(blob,), background=(0.1,), content_label="one_blob",
        motion_label="drift_right",
    )
    stack = render_frames(scene, 3, 32, 32)
    c1 = centroid(stack.frames[0], scene.background)
    c3 = centroid(stack.frames[2], scene.background)
    assert c3[0] - c1[0] == pytest.approx(2.5, abs=0.05)
    assert c3[1] - c1[1] == pytest.approx(-1.0, abs=0.05)


def test_render_frames_validates_count():
    scene = sample_scene("one_blob", "static", 0)
    with pytest.raises(ValidationError):
        render_frames(scene, 0, 32, 32)


# ---------------------------------------------------------------------------
# domain types


def test_blob_validation():
    with pytest.raises(ValidationError):
        Blob(center=(1.0, 1.0), velocity=(0.0, 0.0), radius=0.0, intensity=(0.5,))
    with pytest.raises(ValidationError):
        Blob(center=(1.0, 1.0), velocity=(0.0, 0.0), radius=1.0, intensity=(1.5,))
    with pytest.raises(ValidationError):
        Blob(center=(1.0, 1.0), velocity=(0.0, 0.0), radius=1.0, intensity=())


def test_scene_spec_channel_consistency():
    blob = Blob(center=(1.0, 1.0), velocity=(0.0, 0.0), radius=1.0, intensity=(0.5, 0.5))
    with pytest.raises(ValidationError):
        SceneSpec(
            blobs=(blob,), background=(0.1,),
            content_label="one_blob", motion_label="static",
        )


def test_frame_stack_validation():
    with pytest.raises(ValidationError):
        FrameStack(frames=np.zeros((2, 3, 4)))
    with pytest.raises(ValidationError):
        FrameStack(frames=np.zeros((2, 3, 4, 4)), frame_rate=0.0)
    with pytest.raises(ValidationError):
        FrameStack(frames=np.full((1, 1, 2, 2), 2.0))
    stack = FrameStack(frames=np.zeros((2, 3, 4, 4)))
    assert stack.num_frames == 2
    assert stack.frame(1).shape == (3, 4, 4)
    with pytest.raises(ValueError):
        stack.frames[0, 0, 0, 0] = 1.0


# ---------------------------------------------------------------------------
# centroid oracle


def test_centroid_of_single_lit_pixel():
    image = np.full((1, 16, 16), 0.1)
    image[0, 5, 9] = 1.0
    assert centroid(image, (0.1,)) == (9.0, 5.0)


def test_centroid_of_symmetric_blob_is_its_center():
    scene = one_blob_scene(center=(8.0, 11.0), radius=2.0)
    frame = render_scene_frame(scene, 1, 24, 24)
    x, y = centroid(frame, scene.background)
    assert x == pytest.approx(8.0, abs=1e-6)
    assert y == pytest.approx(11.0, abs=1e-6)


def test_centroid_of_rendered_fractional_center():
    scene = one_blob_scene(center=(10.0, 4.0), radius=1.2)
    frame = render_scene_frame(scene, 1, 16, 32)
    x, y = centroid(frame, scene.background)
    assert x == pytest.approx(10.0, abs=0.1)
    assert y == pytest.approx(4.0, abs=0.1)


def test_centroid_undefined_for_flat_image():
    with pytest.raises(CentroidUndefinedError):
        centroid(np.full((1, 8, 8), 0.1), (0.1,))


def test_centroid_validates_background_shape():
    with pytest.raises(ValidationError):
        centroid(np.full((3, 8, 8), 0.5), (0.1,))


@given(
    shift=st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
    cx=st.floats(min_value=12.0, max_value=18.0),
    cy=st.floats(min_value=12.0, max_value=18.0),
)
@settings(max_examples=30, deadline=None)
def test_centroid_translation_equivariance(shift, cx, cy):
    """Integer translation of the blob moves the centroid by the same step,
    as long as the support stays away from the borders."""
    a = one_blob_scene(center=(cx, cy), radius=1.8)
    b = one_blob_scene(center=(cx + shift[0], cy + shift[1]), radius=1.8)
    fa = render_scene_frame(a, 1, 32, 32)
    fb = render_scene_frame(b, 1, 32, 32)
    xa, ya = centroid(fa, a.background)
    xb, yb = centroid(fb, b.background)
    assert xb - xa == pytest.approx(shift[0], abs=0.05)
    assert yb - ya == pytest.approx(shift[1], abs=0.05)
