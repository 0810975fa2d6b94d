"""Test fixtures and utilities."""

import os

import numpy as np
import pytest

from src.core.settings import PipelineSettings
from src.domain.entities.compensated import CompensatedEvents
from src.domain.entities.events import CameraIntrinsics, EventArray, ImuArray


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    """Keep host JSTR_* variables and any .env file out of settings."""
    for name in [k for k in os.environ if k.upper().startswith("JSTR_")]:
        monkeypatch.delenv(name)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def geometry():
    """DAVIS346 sensor."""
    return CameraIntrinsics.davis346()


@pytest.fixture
def small_geometry():
    """Small sensor for hand-checked images."""
    return CameraIntrinsics(fx=50.0, fy=50.0, cx=16.0, cy=12.0, width=32, height=24)


@pytest.fixture
def settings():
    """Default pipeline settings."""
    return PipelineSettings()


def make_events(xs, ys, ts, ps=None) -> EventArray:
    """Event array from plain sequences; polarity defaults to +1."""
    ps = [1] * len(ts) if ps is None else ps
    return EventArray(np.asarray(xs), np.asarray(ys), np.asarray(ts, dtype=np.float64), np.asarray(ps))


def make_compensated(xs, ys, ts) -> CompensatedEvents:
    """Compensated events with positive polarity."""
    return CompensatedEvents(
        np.asarray(xs, dtype=np.float64),
        np.asarray(ys, dtype=np.float64),
        np.asarray(ts, dtype=np.float64),
        np.ones(len(ts)),
    )


def constant_imu(w, t_start=0.0, t_end=0.1, rate=1000.0) -> ImuArray:
    """IMU stream with a constant angular velocity and no acceleration."""
    n = int(round((t_end - t_start) * rate)) + 1
    t = t_start + np.arange(n) / rate
    return ImuArray(t, np.tile(np.asarray(w, dtype=np.float64), (n, 1)), np.zeros((n, 3)))
