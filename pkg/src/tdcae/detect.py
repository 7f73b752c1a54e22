"""Reconstruction-error scoring, moving-average smoothing, percentile
thresholding and binary anomaly flagging."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError
from .model import HTdcAutoencoder, reconstruct
from .preprocess import DatasetFrame


@dataclass
class DetectionConfig:
    """window/percentile defaults follow the deployment recipe: a 7-sample
    moving average and the 95th percentile of training errors.

    smoothing is "trailing" (causal, online-friendly) or "centered";
    threshold_source picks whether the percentile is taken over smoothed
    or raw training scores.
    """

    window: int = 7
    percentile: float = 95.0
    threshold_override: float | None = None
    smoothing: str = "trailing"
    threshold_source: str = "smoothed"

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if not 0.0 < self.percentile < 100.0:
            raise ConfigError("percentile must lie strictly between 0 and 100")
        if self.smoothing not in ("trailing", "centered"):
            raise ConfigError(f"unknown smoothing mode {self.smoothing!r}")
        if self.threshold_source not in ("smoothed", "raw"):
            raise ConfigError(f"unknown threshold source {self.threshold_source!r}")


@dataclass
class DetectionResult:
    raw_scores: np.ndarray
    smoothed_scores: np.ndarray
    threshold: float
    flags: np.ndarray

    def __post_init__(self):
        n = len(self.raw_scores)
        if not (len(self.smoothed_scores) == len(self.flags) == n):
            raise DimensionError("score and flag sequences must share one length")


def reconstruction_error(model: HTdcAutoencoder, frame: DatasetFrame) -> np.ndarray:
    """Per-timestep MSE between each row and its reconstruction. Every
    timestep is scored; the frame must already be scaled with the model's
    scaler."""
    if frame.n_features != model.n_features:
        raise DimensionError(
            f"frame has {frame.n_features} features, model expects {model.n_features}"
        )
    xhat = reconstruct(model, frame.values)
    return np.mean((frame.values - xhat) ** 2, axis=1)


def smooth(scores, window: int, mode: str = "trailing") -> np.ndarray:
    """Moving-average filter. Trailing mode averages the min(window, t+1)
    most recent scores; centered mode averages a window of the same size
    centred on t, truncated at both ends. Output length equals input
    length."""
    if window < 1:
        raise ConfigError("window must be >= 1")
    if mode not in ("trailing", "centered"):
        raise ConfigError(f"unknown smoothing mode {mode!r}")
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    if n == 0:
        return scores.copy()
    if window == 1:
        return scores.copy()

    out = np.empty(n, dtype=np.float64)
    if mode == "trailing":
        head = min(window - 1, n)
        for t in range(head):
            out[t] = scores[: t + 1].mean()
        if n >= window:
            windows = np.lib.stride_tricks.sliding_window_view(scores, window)
            out[window - 1 :] = windows.mean(axis=1)
    else:
        half = window // 2
        for t in range(n):
            lo = max(0, t - half)
            hi = min(n, t + window - half)
            out[t] = scores[lo:hi].mean()
    return out


def fit_threshold(
    model: HTdcAutoencoder, train_frame: DatasetFrame, config: DetectionConfig
) -> float:
    """Percentile of the (smoothed) training reconstruction errors, linear
    interpolation between order statistics. An override wins verbatim."""
    if config.threshold_override is not None:
        return float(config.threshold_override)
    if train_frame.n_rows == 0:
        raise ConfigError("cannot fit a threshold on an empty frame")
    scores = reconstruction_error(model, train_frame)
    return threshold_from_scores(scores, config)


def threshold_from_scores(scores, config: DetectionConfig) -> float:
    """Threshold from precomputed raw training scores."""
    if config.threshold_override is not None:
        return float(config.threshold_override)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ConfigError("cannot fit a threshold on empty scores")
    if config.threshold_source == "smoothed":
        scores = smooth(scores, config.window, config.smoothing)
    return float(np.percentile(scores, config.percentile))


def detect(
    model: HTdcAutoencoder,
    frame: DatasetFrame,
    threshold: float,
    config: DetectionConfig,
) -> DetectionResult:
    """Flag timesteps whose smoothed reconstruction error strictly exceeds
    the threshold; scores equal to the threshold stay normal."""
    if not np.isfinite(threshold):
        raise ConfigError("threshold must be finite")
    raw = reconstruction_error(model, frame)
    smoothed = smooth(raw, config.window, config.smoothing)
    flags = smoothed > threshold
    return DetectionResult(raw, smoothed, float(threshold), flags)


def save_detection_csv(result: DetectionResult, frame: DatasetFrame, path) -> None:
    """Columns: timestamp, raw, smoothed, flag."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "raw", "smoothed", "flag"])
        for t in range(len(result.raw_scores)):
            stamp = (
                frame.datetimes[t]
                if frame.datetimes is not None
                else str(int(frame.timestamps[t]))
            )
            writer.writerow(
                [
                    stamp,
                    repr(float(result.raw_scores[t])),
                    repr(float(result.smoothed_scores[t])),
                    int(result.flags[t]),
                ]
            )


def load_detection_flags(path) -> np.ndarray:
    """Read back the flag column of a detection CSV."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:4] != ["timestamp", "raw", "smoothed", "flag"]:
        raise ConfigError(f"{path}: not a detection CSV")
    return np.array([r[3] == "1" for r in rows[1:]], dtype=bool)
