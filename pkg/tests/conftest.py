import io

import numpy as np
import pandas as pd
import pytest

from aircast.bench.synthetic import write_synthetic_station
from aircast.dataset import DailyDataset

COLUMNS = ("No", "year", "month", "day", "hour", "PM2.5", "PM10", "SO2", "NO2", "CO", "O3",
           "TEMP", "PRES", "DEWP", "RAIN", "wd", "WSPM", "station")


def hourly_frame(n_hours=48, start="2014-01-01", station="Test", **columns):
    """A complete hourly table; keyword arguments replace whole columns."""
    stamps = pd.date_range(start, periods=n_hours, freq="h")
    frame = pd.DataFrame({
        "No": np.arange(1, n_hours + 1),
        "year": stamps.year, "month": stamps.month, "day": stamps.day, "hour": stamps.hour,
        "PM2.5": 50.0, "PM10": 70.0, "SO2": 10.0, "NO2": 40.0, "CO": 800.0, "O3": 30.0,
        "TEMP": 5.0, "PRES": 1020.0, "DEWP": -5.0, "RAIN": 0.0, "wd": "N", "WSPM": 2.0,
        "station": station,
    })
    for name, values in columns.items():
        frame[name.replace("PM25", "PM2.5")] = values
    return frame


def to_stream(frame):
    return io.BytesIO(frame.to_csv(index=False, na_rep="NA").encode())


def daily(target, features=None, start="2015-01-01", names=None):
    target = np.asarray(target, dtype=float)
    n = len(target)
    feats = np.zeros((n, 0)) if features is None else np.asarray(features, dtype=float).reshape(n, -1)
    names = names or tuple(f"x{i}" for i in range(feats.shape[1]))
    dates = np.datetime64(start, "D") + np.arange(n)
    return DailyDataset(dates=dates, target=target, features=feats, feature_names=tuple(names))


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("stations")
    write_synthetic_station(d, "Synthetic", days=730, seed=1)
    return d


# -- acceptance summary: one line per criterion -------------------------------------------

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.skipped:
            status = "SKIP"
            detail = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
        elif report.failed:
            status = "FAIL"
            detail = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") else ""
        else:
            status = "PASS"
            detail = ""
        _CRITERIA.append((marker.args[0], status, report.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, seconds, detail in _CRITERIA:
        line = f"{status:4s}  {name}  ({seconds:.1f} s)"
        if detail:
            line += f"  {detail.splitlines()[0][:160]}"
        terminalreporter.write_line(line)
