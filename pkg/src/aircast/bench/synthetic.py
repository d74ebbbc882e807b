"""Seeded stand-in for a Beijing station CSV, used when the real files are absent.

The hourly rows follow the station file layout exactly. PM2.5 is a
log-AR(1) daily level with a winter peak; the other pollutants track it
with noise, weather columns follow their own seasonal cycles, and a small
fraction of cells is blanked to ``NA``.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

WIND = ("N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW")


def synthetic_station_frame(station: str = "Synthetic", start: str = "2013-03-01",
                            days: int = 1461, seed: int = 0, missing_rate: float = 0.01) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    hours = pd.date_range(start, periods=days * 24, freq="h")
    n = len(hours)
    doy = hours.dayofyear.to_numpy()
    yearly = np.cos(2 * np.pi * (doy - 15) / 365.25)  # peaks mid-January

    level = np.empty(days)
    level[0] = 0.0
    for d in range(1, days):
        level[d] = 0.6 * level[d - 1] + rng.normal(scale=0.45)
    daily_log = 4.0 + 0.4 * yearly[::24] + level
    hour_of_day = hours.hour.to_numpy()
    diurnal = 0.15 * np.cos(2 * np.pi * (hour_of_day - 22) / 24)
    pm25 = np.exp(np.repeat(daily_log, 24) + diurnal + rng.normal(scale=0.2, size=n))
    pm25 = np.round(pm25, 0) + 3.0

    temp = 13 - 15 * yearly + 5 * np.sin(2 * np.pi * (hour_of_day - 9) / 24) + rng.normal(scale=2, size=n)
    frame = pd.DataFrame({
        "No": np.arange(1, n + 1),
        "year": hours.year,
        "month": hours.month,
        "day": hours.day,
        "hour": hour_of_day,
        "PM2.5": pm25,
        "PM10": np.round(pm25 * 1.3 + rng.gamma(2.0, 10.0, size=n), 0),
        "SO2": np.round(np.maximum(2.0, 0.1 * pm25 + 8 * yearly + rng.normal(scale=3, size=n)), 0),
        "NO2": np.round(np.maximum(2.0, 0.35 * pm25 + 20 + rng.normal(scale=8, size=n)), 0),
        "CO": np.round(np.maximum(100.0, 12 * pm25 + 300 + rng.normal(scale=150, size=n)), 0),
        "O3": np.round(np.maximum(2.0, 60 - 40 * yearly - 0.1 * pm25 + rng.normal(scale=15, size=n)), 0),
        "TEMP": np.round(temp, 1),
        "PRES": np.round(1012 + 10 * yearly + rng.normal(scale=3, size=n), 1),
        "DEWP": np.round(temp - 8 - rng.gamma(2.0, 3.0, size=n), 1),
        "RAIN": np.round(np.where(rng.random(n) < 0.04, rng.gamma(1.0, 2.0, size=n), 0.0), 1),
        "wd": rng.choice(WIND, size=n),
        "WSPM": np.round(rng.gamma(2.0, 0.9, size=n), 1),
        "station": station,
    })
    if missing_rate > 0:
        # leave the first row complete so forward fill has an anchor everywhere
        for col in ("PM2.5", "PM10", "SO2", "NO2", "CO", "O3", "TEMP", "PRES", "DEWP", "RAIN", "WSPM", "wd"):
            holes = rng.random(n) < missing_rate
            holes[0] = False
            frame[col] = frame[col].astype(object).where(~holes, "NA")
    return frame


def write_synthetic_station(directory, station: str = "Synthetic", days: int = 1461,
                            seed: int = 0, start: str = "2013-03-01") -> Path:
    """Write ``PRSA_Data_<station>_<start>-<end>.csv`` into ``directory``."""
    frame = synthetic_station_frame(station, start=start, days=days, seed=seed)
    first = pd.Timestamp(start)
    last = first + pd.Timedelta(days=days - 1)
    name = f"PRSA_Data_{station}_{first:%Y%m%d}-{last:%Y%m%d}.csv"
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
