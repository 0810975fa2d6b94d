"""Integration tests for recording, label and result files."""

import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, EventParseError, EventValidationError
from src.core.settings import PipelineSettings
from src.domain.entities.cloud import CylinderModel, StructureFit
from src.domain.entities.compensated import CompensatedEvents
from src.domain.entities.detection import Detection, DetectionSource, GroundTruthBox, ScoreReport, WindowScore
from src.domain.entities.events import CameraIntrinsics
from src.domain.value_objects.base import BoundingBox
from src.infrastructure.io.config_file import dump_config_file, flatten, load_config_file, nest
from src.infrastructure.io.debug_images import DebugImageWriter, read_netpbm, to_gray
from src.infrastructure.io.npz_loader import NpzRecordingSource, load_evimo_npz
from src.infrastructure.io.text_formats import (
    TextRecordingSource,
    load_events,
    load_ground_truth,
    load_imu,
    load_intrinsics,
    read_key_values,
    write_detections,
    write_events,
    write_ground_truth,
    write_imu,
    write_intrinsics,
    write_score_report,
)

from conftest import constant_imu, make_events


@pytest.fixture
def intrinsics_file(tmp_path, small_geometry):
    path = tmp_path / "intrinsics.txt"
    write_intrinsics(path, small_geometry)
    return path


class TestEventFiles:
    """Tests for the x,y,t,p event format."""

    def test_load(self, tmp_path, small_geometry):
        """Test that comments and blank lines are skipped."""
        path = tmp_path / "events.txt"
        path.write_text("# x,y,t,p\n1,2,0.001,1\n\n3,4,0.002,-1\n")

        events = load_events(path, small_geometry)

        assert len(events) == 2
        assert events[1].x == 3 and events[1].p == -1
        assert events.t.tolist() == [0.001, 0.002]

    def test_round_trip(self, tmp_path, small_geometry):
        """Test that written events read back identical."""
        events = make_events([0, 31, 5], [0, 23, 7], [0.1, 0.1 + 1e-9, 1.0 / 3.0], [1, -1, 1])
        path = tmp_path / "events.txt"

        write_events(path, events)
        loaded = load_events(path, small_geometry)

        np.testing.assert_array_equal(loaded.x, events.x)
        np.testing.assert_array_equal(loaded.t, events.t)
        np.testing.assert_array_equal(loaded.p, events.p)

    def test_empty_file(self, tmp_path, small_geometry):
        """Test that an empty file is an empty recording."""
        path = tmp_path / "events.txt"
        path.write_text("")

        assert len(load_events(path, small_geometry)) == 0

    @pytest.mark.parametrize(
        "content, line",
        [
            ("1,2,0.1,1\n1,2,abc,1\n", 2),
            ("# header\n1,2,0.1,1\n\n1,2,0.2\n", 4),
        ],
    )
    def test_parse_error_names_line(self, tmp_path, small_geometry, content, line):
        """Test that a malformed record reports its file and line."""
        path = tmp_path / "events.txt"
        path.write_text(content)

        with pytest.raises(EventParseError) as exc_info:
            load_events(path, small_geometry)

        assert exc_info.value.line == line
        assert f"events.txt:{line}" in str(exc_info.value)

    def test_missing_file(self, tmp_path, small_geometry):
        """Test that a missing file names its path."""
        with pytest.raises(EventParseError, match="nope.txt"):
            load_events(tmp_path / "nope.txt", small_geometry)

    def test_fractional_pixel(self, tmp_path, small_geometry):
        """Test that pixel coordinates must be integers."""
        path = tmp_path / "events.txt"
        path.write_text("1.5,2,0.1,1\n")

        with pytest.raises(EventParseError, match="x is not an integer"):
            load_events(path, small_geometry)

    def test_fractional_pixel_names_line(self, tmp_path, small_geometry):
        """Test that the reported line counts header, comment and blank lines."""
        path = tmp_path / "events.txt"
        path.write_text("# x,y,t,p\n1,2,0.1,1\n\n# pause\n3,4.5,0.2,1\n")

        with pytest.raises(EventParseError) as exc_info:
            load_events(path, small_geometry)

        assert exc_info.value.line == 5
        assert "events.txt:5" in str(exc_info.value)

    @pytest.mark.parametrize(
        "content, index",
        [
            ("1,2,0.1,1\n32,2,0.2,1\n", 1),
            ("1,2,0.1,0\n", 0),
            ("1,2,0.2,1\n1,2,0.1,1\n", 1),
            ("1,1,0.0,1\n2,2,nan,1\n3,3,0.01,-1\n", 1),
            ("1,1,0.0,1\n2,2,inf,1\n", 1),
        ],
    )
    def test_validation(self, tmp_path, small_geometry, content, index):
        """Test timestamp, bounds, polarity and ordering checks."""
        path = tmp_path / "events.txt"
        path.write_text(content)

        with pytest.raises(EventValidationError) as exc_info:
            load_events(path, small_geometry)

        assert exc_info.value.index == index


class TestImuFiles:
    """Tests for the IMU format."""

    def test_round_trip(self, tmp_path):
        """Test that written samples read back identical."""
        imu = constant_imu((0.1, -0.2, 0.3), rate=100.0)
        path = tmp_path / "imu.txt"

        write_imu(path, imu)
        loaded = load_imu(path)

        np.testing.assert_array_equal(loaded.t, imu.t)
        np.testing.assert_array_equal(loaded.w, imu.w)

    def test_missing_column(self, tmp_path):
        """Test that a short row is a parse error."""
        path = tmp_path / "imu.txt"
        path.write_text("0.0,0,0,0,0,0\n")

        with pytest.raises(EventParseError):
            load_imu(path)

    def test_out_of_order(self, tmp_path):
        """Test that timestamps must not decrease."""
        path = tmp_path / "imu.txt"
        path.write_text("0.2,0,0,0,0,0,0\n0.1,0,0,0,0,0,0\n")

        with pytest.raises(EventValidationError):
            load_imu(path)

    def test_non_finite_sample(self, tmp_path):
        """Test that a NaN rate names its record."""
        path = tmp_path / "imu.txt"
        path.write_text("0.0,0,0,0,0,0,0\n0.01,nan,0,0,0,0,0\n")

        with pytest.raises(EventValidationError) as exc_info:
            load_imu(path)

        assert exc_info.value.index == 1


class TestIntrinsicsFiles:
    """Tests for the intrinsics format."""

    def test_round_trip(self, intrinsics_file, small_geometry):
        """Test that written intrinsics read back equal."""
        assert load_intrinsics(intrinsics_file) == small_geometry

    def test_missing_key(self, tmp_path):
        """Test that every key is required."""
        path = tmp_path / "intrinsics.txt"
        path.write_text("fx=1\nfy=1\ncx=0\ncy=0\nwidth=10\n")

        with pytest.raises(EventParseError, match="height"):
            load_intrinsics(path)

    def test_unknown_key(self, tmp_path, intrinsics_file):
        """Test that extra keys are rejected."""
        intrinsics_file.write_text(intrinsics_file.read_text() + "skew=0\n")

        with pytest.raises(EventParseError, match="skew"):
            load_intrinsics(intrinsics_file)

    def test_duplicate_key(self, tmp_path):
        """Test that a repeated key reports its line."""
        path = tmp_path / "kv.txt"
        path.write_text("a=1\n# note\na=2\n")

        with pytest.raises(EventParseError) as exc_info:
            read_key_values(path)

        assert exc_info.value.line == 3


class TestResultFiles:
    """Tests for labels, detections and score reports."""

    def test_ground_truth_round_trip(self, tmp_path):
        """Test that labels read back equal."""
        boxes = [GroundTruthBox(BoundingBox(1, 2, 3, 4), 0.0), GroundTruthBox(BoundingBox(5, 5, 9, 9), 0.02)]
        path = tmp_path / "gt.txt"

        write_ground_truth(path, boxes)

        assert load_ground_truth(path) == boxes

    def test_ground_truth_empty_box(self, tmp_path):
        """Test that an inverted box is rejected."""
        path = tmp_path / "gt.txt"
        path.write_text("0.0,5,5,4,9\n")

        with pytest.raises(EventParseError, match="empty box"):
            load_ground_truth(path)

    def test_detections(self, tmp_path):
        """Test that one record is written per detection."""
        mask = np.zeros((6, 8), dtype=bool)
        mask[1:3, 2:5] = True
        detections = [
            Detection.from_mask(mask, 0.0, DetectionSource.FUSED),
            Detection.from_mask(mask, 0.02, DetectionSource.SPATIAL),
        ]
        path = tmp_path / "detections.txt"

        count = write_detections(path, detections)

        lines = path.read_text().splitlines()
        assert count == 2
        assert lines[1] == "0.0,2,1,4,2,6,fused"
        assert lines[2] == "0.02,2,1,4,2,6,spatial"

    def test_score_report(self, tmp_path):
        """Test the key=value header and per-window table."""
        report = ScoreReport(
            mean_iou=0.5,
            accuracy=0.5,
            windows=[WindowScore(0.0, 1.0 / 3.0, False), WindowScore(0.02, 2.0 / 3.0, True)],
        )
        path = tmp_path / "metrics.txt"

        write_score_report(path, report, header=[("method", "joint")])

        lines = path.read_text().splitlines()
        assert lines[:4] == ["method=joint", "mean_iou=0.500000", "accuracy=0.500000", "windows=2"]
        assert lines[5] == "0.0,0.333333,0"
        assert lines[6] == "0.02,0.666667,1"


class TestTextRecordingSource:
    """Tests for TextRecordingSource."""

    def test_load(self, tmp_path, intrinsics_file):
        """Test that all files are combined into one recording."""
        write_events(tmp_path / "events.txt", make_events([1, 2], [3, 4], [0.0, 0.01]))
        write_imu(tmp_path / "imu.txt", constant_imu((0.0, 0.0, 0.1)))
        write_ground_truth(tmp_path / "gt.txt", [GroundTruthBox(BoundingBox(0, 0, 4, 4), 0.0)])

        recording = TextRecordingSource(
            tmp_path / "events.txt", tmp_path / "imu.txt", intrinsics_file, tmp_path / "gt.txt"
        ).load()

        assert recording.name == "events"
        assert len(recording.events) == 2
        assert len(recording.ground_truth) == 1
        assert recording.intrinsics.width == 32


class TestNpzLoader:
    """Tests for numpy archive recordings."""

    def write_archive(self, path, **overrides):
        arrays = {
            "events": np.array([[10.5, 1, 2, 0], [10.6, 3, 4, 1]]),
            "imu": np.array([[10.4, 0.0, 0.0, 0.1, 0.0, 0.0, 9.8], [10.7, 0.0, 0.0, 0.1, 0.0, 0.0, 9.8]]),
            "intrinsics": np.array([50.0, 50.0, 16.0, 12.0, 32, 24]),
        }
        arrays.update(overrides)
        np.savez(path, **arrays)
        return path

    def test_load(self, tmp_path):
        """Test that timestamps start at zero and polarity becomes signed."""
        recording = load_evimo_npz(self.write_archive(tmp_path / "seq.npz"))

        assert recording.name == "seq"
        assert recording.imu.t[0] == 0.0
        np.testing.assert_allclose(recording.events.t, [0.1, 0.2])
        assert recording.events.p.tolist() == [-1, 1]
        assert recording.intrinsics == CameraIntrinsics(50.0, 50.0, 16.0, 12.0, 32, 24)

    def test_missing_array(self, tmp_path):
        """Test that every array is required."""
        path = tmp_path / "seq.npz"
        np.savez(path, events=np.zeros((0, 4)), intrinsics=np.zeros(6))

        with pytest.raises(EventParseError, match="imu"):
            load_evimo_npz(path)

    def test_bad_imu_shape(self, tmp_path):
        """Test that IMU rows need seven columns."""
        path = self.write_archive(tmp_path / "seq.npz", imu=np.zeros((3, 4)))

        with pytest.raises(EventParseError, match="7 columns"):
            load_evimo_npz(path)

    def test_with_labels(self, tmp_path):
        """Test that labels are attached from a separate file."""
        write_ground_truth(tmp_path / "gt.txt", [GroundTruthBox(BoundingBox(0, 0, 3, 3), 0.0)])

        recording = NpzRecordingSource(self.write_archive(tmp_path / "seq.npz"), tmp_path / "gt.txt").load()

        assert recording.ground_truth == [GroundTruthBox(BoundingBox(0, 0, 3, 3), 0.0)]


class TestConfigFile:
    """Tests for flat configuration files."""

    def test_round_trip(self, tmp_path):
        """Test that dumped settings load back equal."""
        settings = PipelineSettings(
            method="temporal", window={"dt": 0.01}, compensation={"extrinsic": [[0, -1, 0], [1, 0, 0], [0, 0, 1]]}
        )
        path = tmp_path / "jstr.conf"

        dump_config_file(settings, path)

        assert load_config_file(path) == settings

    def test_values(self, tmp_path):
        """Test that dotted keys reach nested sections."""
        path = tmp_path / "jstr.conf"
        path.write_text("# tuned\nwindow.dt=0.05\nransac.theta=1.5\nspatial.two_sided=true\nmethod=spatial\n")

        settings = load_config_file(path)

        assert settings.window.dt == 0.05
        assert settings.ransac.theta == 1.5
        assert settings.spatial.two_sided is True
        assert settings.method == "spatial"

    def test_unknown_key(self, tmp_path):
        """Test that an unknown key is a configuration error."""
        path = tmp_path / "jstr.conf"
        path.write_text("window.size=3\n")

        with pytest.raises(ConfigurationError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a configuration error."""
        with pytest.raises(ConfigurationError, match="missing.conf"):
            load_config_file(tmp_path / "missing.conf")

    def test_section_conflict(self):
        """Test that a key cannot be both a value and a section."""
        with pytest.raises(ConfigurationError):
            nest({"window": "1", "window.dt": "0.1"})

    def test_flatten_inverts_nest(self):
        """Test that flattening recovers the dotted keys."""
        flat = {"a.b": "1", "a.c": "[1,2]", "d": "text"}

        assert flatten(nest(flat)) == flat


class TestDebugImages:
    """Tests for intermediate image files."""

    def test_gray_scaling(self):
        """Test min-max scaling with NaN as zero."""
        gray = to_gray(np.array([[0.0, 2.0], [4.0, np.nan]]))

        assert gray.tolist() == [[0, 128], [255, 0]]

    def test_offset_image_uses_own_range(self):
        """Test that a time image far from zero still spans the gray scale."""
        gray = to_gray(np.array([[10.0, 12.0], [14.0, np.nan]]))

        assert gray.tolist() == [[0, 128], [255, 0]]

    def test_constant_image(self):
        """Test that a flat image is black."""
        assert not to_gray(np.full((3, 3), 7.0)).any()

    def test_fixed_range_mapping(self):
        """Test a fixed range maps -1, 0 and 1 the same way whatever the image holds."""
        gray = to_gray(np.array([[-1.0, 0.0, 1.0, np.nan]]), value_range=(-1.0, 1.0))
        narrow = to_gray(np.array([[0.0, 0.5]]), value_range=(-1.0, 1.0))

        assert gray.tolist() == [[0, 128, 255, 0]]
        assert narrow.tolist() == [[128, 191]]

    def test_fixed_range_clips(self):
        """Test values outside the range saturate."""
        assert to_gray(np.array([[-3.0, 3.0]]), value_range=(-1.0, 1.0)).tolist() == [[0, 255]]

    def test_compensated_events(self, tmp_path):
        """Test that compensated events keep fractional pixels in the event format."""
        writer = DebugImageWriter(tmp_path)
        events = CompensatedEvents(
            np.array([1.25, 300.5]), np.array([2.75, 0.0]), np.array([0.0, 0.015]), np.array([1, -1])
        )

        writer.write_events(2, events)

        table = np.loadtxt(tmp_path / "00002_events.txt", delimiter=",", ndmin=2)
        np.testing.assert_array_equal(table, [[1.25, 2.75, 0.0, 1.0], [300.5, 0.0, 0.015, -1.0]])

    def test_writer(self, tmp_path):
        """Test that masks become bitmaps and counts become graymaps."""
        writer = DebugImageWriter(tmp_path / "debug")
        mask = np.zeros((5, 11), dtype=bool)
        mask[1, 3] = mask[4, 10] = True
        count = np.arange(55, dtype=np.int64).reshape(5, 11)

        writer.write(3, "spatial", mask)
        writer.write(3, "count", count)

        np.testing.assert_array_equal(read_netpbm(tmp_path / "debug" / "00003_spatial.pbm"), mask)
        gray = read_netpbm(tmp_path / "debug" / "00003_count.pgm")
        assert gray.shape == (5, 11)
        assert gray[0, 0] == 0 and gray[4, 10] == 255

    def test_structures(self, tmp_path):
        """Test that inlier points and model records are written per window."""
        writer = DebugImageWriter(tmp_path)
        cloud = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
        model = CylinderModel(anchor=(1.0, 2.0, 0.0), axis=(0.0, 0.0, 1.0), radius=2.5)

        writer.write_structures(0, cloud, [StructureFit(model, np.array([0, 2]))])

        points = np.loadtxt(tmp_path / "00000_cloud.txt", delimiter=",", ndmin=2)
        np.testing.assert_array_equal(points, cloud[[0, 2]])
        records = (tmp_path / "00000_models.txt").read_text().splitlines()
        assert records[1] == "1.0,2.0,0.0,0.0,0.0,1.0,2.5"
