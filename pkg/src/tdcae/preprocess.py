"""Data ingestion, robust scaling, edge-area segmentation and training
triples for hourly SCADA-style sensor matrices."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, IngestionError, NumericError

LABEL_COLUMN = "ATT_FLAG"
DATETIME_COLUMN = "DATETIME"

# Feature subsets belonging to the three edge areas of the C-Town network.
EDGE_FEATURES: dict[int, tuple[str, ...]] = {
    1: (
        "L_T1", "F_PU1", "S_PU1", "F_PU2", "S_PU2", "F_PU3", "S_PU3",
        "P_J280", "P_J269",
    ),
    2: (
        "L_T2", "L_T3", "L_T4", "F_PU4", "S_PU4", "F_PU5", "S_PU5",
        "P_J300", "P_J256", "F_PU6", "S_PU6", "F_PU7", "S_PU7",
        "P_J289", "P_J415", "P_J14", "P_J422", "F_V2", "S_V2",
    ),
    3: (
        "L_T5", "L_T6", "L_T7", "F_PU8", "S_PU8", "F_PU9", "S_PU9",
        "P_J302", "P_J306", "F_PU10", "S_PU10", "F_PU11", "S_PU11",
        "P_J307", "P_J317",
    ),
}


@dataclass
class DatasetFrame:
    """A time-indexed matrix of sensor features with optional attack labels.

    values has shape (T, F); timestamps are integer hour indices, strictly
    increasing with uniform spacing; labels (if present) are 0/1 per row.
    """

    feature_names: list[str]
    values: np.ndarray
    labels: np.ndarray | None = None
    timestamps: np.ndarray | None = None
    datetimes: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionError(f"values must be 2-D, got shape {self.values.shape}")
        if len(self.feature_names) != self.values.shape[1]:
            raise DimensionError(
                f"{len(self.feature_names)} feature names for "
                f"{self.values.shape[1]} columns"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise IngestionError("duplicate feature names")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("values contain non-finite entries")
        if self.timestamps is None:
            self.timestamps = np.arange(self.values.shape[0], dtype=np.int64)
        else:
            self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
            if self.timestamps.shape != (self.values.shape[0],):
                raise DimensionError("timestamps length must equal row count")
            if self.values.shape[0] > 1:
                steps = np.diff(self.timestamps)
                if np.any(steps <= 0) or np.any(steps != steps[0]):
                    raise ConfigError(
                        "timestamps must be strictly increasing with uniform spacing"
                    )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise DimensionError("labels length must equal row count")
        if self.datetimes is not None and len(self.datetimes) != self.values.shape[0]:
            raise DimensionError("datetimes length must equal row count")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def select(self, names: list[str] | tuple[str, ...]) -> "DatasetFrame":
        """Frame restricted to the given columns, in the given order."""
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise IngestionError(f"missing features: {', '.join(missing)}")
        idx = [self.feature_names.index(n) for n in names]
        return DatasetFrame(
            feature_names=list(names),
            values=self.values[:, idx].copy(),
            labels=None if self.labels is None else self.labels.copy(),
            timestamps=self.timestamps.copy(),
            datetimes=None if self.datetimes is None else list(self.datetimes),
        )


@dataclass
class RobustScalerParams:
    """Per-feature median and interquartile range fitted on training data.

    Division uses `divisors`, which replaces a zero IQR by 1.0 so that
    constant features are centred but not rescaled.
    """

    feature_names: list[str]
    median: np.ndarray
    iqr: np.ndarray

    def __post_init__(self):
        self.median = np.asarray(self.median, dtype=np.float64)
        self.iqr = np.asarray(self.iqr, dtype=np.float64)
        n = len(self.feature_names)
        if self.median.shape != (n,) or self.iqr.shape != (n,):
            raise DimensionError("median/iqr must have one entry per feature")
        if np.any(self.iqr < 0):
            raise ConfigError("iqr entries must be >= 0")

    @property
    def divisors(self) -> np.ndarray:
        return np.where(self.iqr > 0.0, self.iqr, 1.0)


@dataclass
class EdgeSegment:
    edge_id: int
    feature_names: tuple[str, ...]


@dataclass
class TripleBatch:
    """Time-aligned (t-1, t, t+1) rows for consistency training.

    Row k of each matrix corresponds to frame rows (k, k+1, k+2), so only
    interior timesteps appear.
    """

    x_prev: np.ndarray
    x_t: np.ndarray
    x_next: np.ndarray
    delta_t: float = 1.0

    def __post_init__(self):
        if not (self.x_prev.shape == self.x_t.shape == self.x_next.shape):
            raise DimensionError("triple matrices must share one shape")
        if self.delta_t <= 0:
            raise ConfigError("delta_t must be > 0")

    @property
    def n_rows(self) -> int:
        return self.x_t.shape[0]


def fit_scaler(train: DatasetFrame) -> RobustScalerParams:
    """Median and IQR per feature, linear interpolation between order
    statistics, fitted on training data only (labels are ignored)."""
    if train.n_rows == 0 or train.n_features == 0:
        raise ConfigError("cannot fit a scaler on an empty dataset")
    if train.n_rows < 4:
        raise ConfigError(f"need >= 4 rows to fit the scaler, got {train.n_rows}")
    median = np.percentile(train.values, 50.0, axis=0)
    p25 = np.percentile(train.values, 25.0, axis=0)
    p75 = np.percentile(train.values, 75.0, axis=0)
    return RobustScalerParams(list(train.feature_names), median, p75 - p25)


def apply_scaler(params: RobustScalerParams, frame: DatasetFrame) -> DatasetFrame:
    """(value - median) / divisor per feature; labels pass through.

    Not idempotent: applying it to an already-scaled frame shifts and
    rescales again. Scale exactly once, with parameters fitted on the
    training slice.
    """
    if list(frame.feature_names) != list(params.feature_names):
        unknown = [n for n in frame.feature_names if n not in params.feature_names]
        raise ConfigError(
            "frame features do not match the fitted scaler"
            + (f" (unknown: {', '.join(unknown)})" if unknown else " (order differs)")
        )
    scaled = (frame.values - params.median) / params.divisors
    return DatasetFrame(
        feature_names=list(frame.feature_names),
        values=scaled,
        labels=None if frame.labels is None else frame.labels.copy(),
        timestamps=frame.timestamps.copy(),
        datetimes=None if frame.datetimes is None else list(frame.datetimes),
    )


def invert_scaler(params: RobustScalerParams, frame: DatasetFrame) -> DatasetFrame:
    """Undo apply_scaler: value * divisor + median."""
    if list(frame.feature_names) != list(params.feature_names):
        raise ConfigError("frame features do not match the fitted scaler")
    raw = frame.values * params.divisors + params.median
    return DatasetFrame(
        feature_names=list(frame.feature_names),
        values=raw,
        labels=None if frame.labels is None else frame.labels.copy(),
        timestamps=frame.timestamps.copy(),
        datetimes=None if frame.datetimes is None else list(frame.datetimes),
    )


def segment_edges(frame: DatasetFrame) -> list[tuple[EdgeSegment, DatasetFrame]]:
    """Split a full-schema frame into the three edge-area frames.

    Column order inside each segment follows the edge feature lists; labels
    and timestamps are replicated to every segment.
    """
    missing = [
        name
        for names in EDGE_FEATURES.values()
        for name in names
        if name not in frame.feature_names
    ]
    if missing:
        raise IngestionError(f"missing features: {', '.join(missing)}")
    out = []
    for edge_id, names in EDGE_FEATURES.items():
        out.append((EdgeSegment(edge_id, names), frame.select(names)))
    return out


def make_triples(frame: DatasetFrame, delta_t: float = 1.0) -> TripleBatch:
    """Stack (t-1, t, t+1) views of the frame; T-2 rows for T timesteps."""
    if frame.n_rows < 3:
        raise ConfigError(f"need >= 3 rows to build triples, got {frame.n_rows}")
    if delta_t <= 0:
        raise ConfigError("delta_t must be > 0")
    v = frame.values
    return TripleBatch(v[:-2], v[1:-1], v[2:], float(delta_t))


def _parse_cell(cell: str, row_number: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise IngestionError(
            f"row {row_number}: cannot parse {column}={cell!r} as a number"
        ) from None
    if not np.isfinite(value):
        raise IngestionError(f"row {row_number}: non-finite value in {column}")
    return value


def load_csv(path) -> DatasetFrame:
    """Read an hourly sensor CSV into a DatasetFrame.

    Expects a header row; a DATETIME column (any case) is kept as strings,
    an ATT_FLAG column (any case) becomes the label vector. Negative label
    sentinels count as 0. Row numbers in error messages are 1-based and
    include the header.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or all(h == "" for h in header):
            raise IngestionError(f"{path}: header row is empty")

        label_idx = next(
            (i for i, h in enumerate(header) if h.upper() == LABEL_COLUMN), None
        )
        time_idx = next(
            (i for i, h in enumerate(header) if h.upper() == DATETIME_COLUMN), None
        )
        feature_idx = [
            i for i in range(len(header)) if i not in (label_idx, time_idx)
        ]
        feature_names = [header[i] for i in feature_idx]

        rows: list[list[float]] = []
        labels: list[int] = []
        datetimes: list[str] = []
        for row_number, row in enumerate(reader, start=2):
            if len(row) == 0 or (len(row) == 1 and row[0].strip() == ""):
                continue  # ignore trailing blank lines
            if len(row) != len(header):
                raise IngestionError(
                    f"row {row_number}: expected {len(header)} cells, got {len(row)}"
                )
            cells = [c.strip() for c in row]
            rows.append(
                [_parse_cell(cells[i], row_number, header[i]) for i in feature_idx]
            )
            if label_idx is not None:
                raw = _parse_cell(cells[label_idx], row_number, header[label_idx])
                labels.append(1 if raw > 0.5 else 0)
            if time_idx is not None:
                datetimes.append(cells[time_idx])

    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return DatasetFrame(
        feature_names=feature_names,
        values=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
        datetimes=datetimes if time_idx is not None else None,
    )


def save_csv(frame: DatasetFrame, path) -> None:
    """Write a frame in the same schema load_csv reads (shortest float
    representation that round-trips, so output is byte-deterministic)."""
    path = Path(path)
    header = []
    if frame.datetimes is not None:
        header.append(DATETIME_COLUMN)
    header.extend(frame.feature_names)
    if frame.labels is not None:
        header.append(LABEL_COLUMN)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(frame.n_rows):
            row: list[str] = []
            if frame.datetimes is not None:
                row.append(frame.datetimes[t])
            row.extend(repr(v) for v in frame.values[t].tolist())
            if frame.labels is not None:
                row.append(str(int(frame.labels[t])))
            writer.writerow(row)


def save_scaler(params: RobustScalerParams, path) -> None:
    doc = {
        name: {"median": m, "iqr": q}
        for name, m, q in zip(
            params.feature_names, params.median.tolist(), params.iqr.tolist()
        )
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def load_scaler(path) -> RobustScalerParams:
    doc = json.loads(Path(path).read_text())
    names = list(doc.keys())
    median = np.array([doc[n]["median"] for n in names], dtype=np.float64)
    iqr = np.array([doc[n]["iqr"] for n in names], dtype=np.float64)
    return RobustScalerParams(names, median, iqr)
