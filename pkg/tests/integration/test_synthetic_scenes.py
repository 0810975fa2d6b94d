"""Integration tests for the synthetic scene generator."""

from dataclasses import replace

import numpy as np
import pytest

from src.core.exceptions import ArgumentError, ConfigurationError
from src.domain.entities.compensated import CompensatedEvents
from src.domain.services.motion_compensation import MotionCompensator
from src.domain.services.windowing import slice_windows
from src.infrastructure.synth import (
    BackgroundSpec,
    ObjectSpec,
    SceneSpec,
    StandardSuiteCatalog,
    dump_scene_file,
    generate,
    load_scene_file,
    scene_from_mapping,
    standard_suite,
)
from src.infrastructure.synth.generator import SOURCE_BACKGROUND, SOURCE_NOISE, SOURCE_OBJECT

ROTATING = SceneSpec(rotation=(0.1, 0.15, 0.25), seed=3)


def compensate_all(output, dt, translation=False):
    """Compensate every window to its start, keeping every event."""
    spec = output.spec
    compensator = MotionCompensator(spec.geometry, margin=1e9, translation=translation, depth=spec.depth)
    velocity = spec.translation if translation else None
    parts = [
        compensator.compensate_window(window, imu, velocity).events
        for window, imu in slice_windows(output.events, output.imu, dt, start=0.0)
    ]
    return CompensatedEvents(
        np.concatenate([p.x_hat for p in parts]),
        np.concatenate([p.y_hat for p in parts]),
        np.concatenate([p.t for p in parts]),
        np.concatenate([p.p for p in parts]),
    )


class TestGenerate:
    """Tests for generate."""

    def test_deterministic(self):
        """Test that equal specs render identical streams."""
        a = generate(ROTATING)
        b = generate(ROTATING)

        np.testing.assert_array_equal(a.events.t, b.events.t)
        np.testing.assert_array_equal(a.events.x, b.events.x)
        np.testing.assert_array_equal(a.sources.kind, b.sources.kind)
        assert a.ground_truth == b.ground_truth

    def test_seed_changes_stream(self):
        """Test that another seed renders another stream."""
        a = generate(ROTATING)
        b = generate(replace(ROTATING, seed=4))

        assert len(a.events) != len(b.events) or not np.array_equal(a.events.t, b.events.t)

    def test_events_valid(self):
        """Test that events are sorted, on the sensor and signed."""
        output = generate(ROTATING)

        output.events.validate(ROTATING.geometry)
        assert len(output.sources) == len(output.events)

    def test_object_only(self):
        """Test that without background every event comes from the disk."""
        output = generate(replace(ROTATING, background=BackgroundSpec(rate=0.0)))

        assert len(output.events) > 0
        assert np.all(output.sources.kind == SOURCE_OBJECT)
        assert np.all(output.sources.object_id == 0)

    def test_ground_truth_per_window(self):
        """Test one label per object and window, keyed by window start."""
        spec = replace(ROTATING, objects=(ObjectSpec(), ObjectSpec(center=(250.0, 60.0), velocity=(-300.0, 400.0))))

        output = generate(spec, dt=0.02)

        assert len(output.ground_truth) == 10
        assert sorted({b.window_t0 for b in output.ground_truth}) == [0.0, 0.02, 0.04, 0.06, 0.08]
        assert all(b.bbox.within(346, 260) for b in output.ground_truth)

    def test_disk_box(self):
        """Test that the label covers the disk over the whole window."""
        output = generate(SceneSpec(), dt=0.02)
        first = output.ground_truth[0].bbox

        # center moves from (90, 110) to (114, 114) with radius 15
        assert first.as_tuple() == (75, 95, 129, 129)

    def test_background_compensates_to_source(self):
        """Test that compensation puts background events back on their edge pixel."""
        output = generate(ROTATING)
        background = output.sources.kind == SOURCE_BACKGROUND

        compensated = compensate_all(output, 0.02)

        error = np.hypot(
            compensated.x_hat[background] - output.sources.x[background],
            compensated.y_hat[background] - output.sources.y[background],
        )
        assert np.mean(error <= 1.0) >= 0.99

    def test_translation_compensates_to_source(self):
        """Test that a translating camera is undone when the planar shift is compensated."""
        spec = standard_suite()["translation"]
        output = generate(spec)
        background = output.sources.kind == SOURCE_BACKGROUND

        compensated = compensate_all(output, 0.02, translation=True)

        error = np.hypot(
            compensated.x_hat[background] - output.sources.x[background],
            compensated.y_hat[background] - output.sources.y[background],
        )
        assert spec.translation == (0.15, 0.05, 0.0)
        assert np.mean(error <= 1.5) >= 0.9

    def test_static_scene(self):
        """Test that a still camera reports zero rates."""
        output = generate(SceneSpec())

        assert not output.imu.w.any()
        assert not output.imu.a.any()

    def test_imu_rate(self):
        """Test the sample count and the constant rate."""
        output = generate(ROTATING)

        assert len(output.imu) == 101
        np.testing.assert_array_equal(output.imu.w[50], ROTATING.rotation)

    def test_imu_jitter(self):
        """Test that jitter perturbs samples around the true rate."""
        output = generate(replace(ROTATING, imu_jitter=0.01))

        assert not np.array_equal(output.imu.w[0], ROTATING.rotation)
        np.testing.assert_allclose(output.imu.w.mean(axis=0), ROTATING.rotation, atol=0.01)

    def test_noise_rate(self):
        """Test that noise events scale with the configured rate."""
        low = generate(replace(ROTATING, noise_rate=20000.0))
        high = generate(replace(ROTATING, noise_rate=300000.0))

        n_low = np.count_nonzero(low.sources.kind == SOURCE_NOISE)
        n_high = np.count_nonzero(high.sources.kind == SOURCE_NOISE)
        assert n_high >= 10 * n_low > 0

    def test_segments_background(self):
        """Test the random segment background."""
        output = generate(replace(ROTATING, background=BackgroundSpec(kind="segments", segments=10)))

        assert np.count_nonzero(output.sources.kind == SOURCE_BACKGROUND) > 0

    @pytest.mark.parametrize(
        "spec, field",
        [
            (SceneSpec(duration=0.0), "duration"),
            (SceneSpec(noise_rate=-1.0), "noise_rate"),
            (SceneSpec(background=BackgroundSpec(spacing=1)), "background.spacing"),
            (SceneSpec(objects=(ObjectSpec(radius=0.0),)), "objects.0.radius"),
            (SceneSpec(objects=(ObjectSpec(velocity=(5000.0, 0.0)),)), "objects.0"),
        ],
    )
    def test_invalid_spec(self, spec, field):
        """Test that an invalid spec names the offending field."""
        with pytest.raises(ArgumentError, match=field):
            generate(spec)

    def test_invalid_dt(self):
        """Test that the label window must be positive."""
        with pytest.raises(ArgumentError):
            generate(SceneSpec(), dt=0.0)


class TestStandardSuite:
    """Tests for the standard scenes."""

    def test_scenes(self):
        """Test that the suite covers motion, tailing and noise."""
        suite = standard_suite()

        assert list(suite) == [
            "static",
            "rotation",
            "translation",
            "rotation_translation",
            "tailing",
            "noise_low",
            "noise_mid",
            "noise_high",
        ]
        assert suite["static"].rotation == (0.0, 0.0, 0.0)
        assert suite["noise_high"].noise_rate >= 10 * suite["noise_low"].noise_rate

    def test_seed(self):
        """Test that one seed is shared by every scene."""
        assert {s.seed for s in standard_suite(9).values()} == {9}

    def test_catalog(self):
        """Test that the catalog renders labelled recordings by name."""
        catalog = StandardSuiteCatalog(seed=1)

        recording = catalog.recording("static", 0.02)

        assert recording.name == "static"
        assert len(recording.ground_truth) == 5

    def test_unknown_scene(self):
        """Test that unknown names list the choices."""
        with pytest.raises(ArgumentError, match="static"):
            StandardSuiteCatalog().recording("nope", 0.02)


class TestSceneFile:
    """Tests for scene files."""

    def test_round_trip(self, tmp_path):
        """Test that a dumped scene loads back equal."""
        spec = standard_suite(5)["tailing"]
        path = tmp_path / "scene.txt"

        dump_scene_file(spec, path)

        assert load_scene_file(path) == spec

    def test_defaults(self):
        """Test that missing keys take their defaults."""
        spec = scene_from_mapping({"rotation": "[0.1,0.2,0.3]", "geometry.fx": "200.0"})

        assert spec.rotation == (0.1, 0.2, 0.3)
        assert spec.geometry.fx == 200.0
        assert spec.geometry.width == 346
        assert spec.objects == (ObjectSpec(),)

    def test_unknown_key(self):
        """Test that unknown keys are rejected with their section."""
        with pytest.raises(ConfigurationError, match="objects.0"):
            scene_from_mapping({"objects.0.colour": "red"})

    def test_out_of_range(self):
        """Test that range errors surface unchanged."""
        with pytest.raises(ArgumentError, match="depth"):
            scene_from_mapping({"depth": "-1"})
