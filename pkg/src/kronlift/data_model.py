"""Core containers for measurement matrices, windows, and indicator curves.

Conventions used throughout the library:
  - data matrices are channels x samples (one column per sampling instant)
  - the public time axis is integer and starts at t0 (default 1)
  - CSV files on disk are row-per-instant with a header of channel ids,
    transposed on load
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, FormatError

DEFAULT_DIM_CAP = 4096
MAX_SEGMENTS = 4


@dataclass(frozen=True)
class SpatioTemporalMatrix:
    """P channels by N samples of real measurements.

    values[i, j] is channel i at time t0 + j.
    """

    values: np.ndarray
    channel_ids: list[str]
    t0: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ConfigError(f"values must be 2-D, got ndim={v.ndim}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ConfigError(f"values must be non-empty, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise ConfigError(
                f"non-finite entry at channel {bad[0]}, column {bad[1]}"
            )
        ids = list(self.channel_ids)
        if len(ids) != v.shape[0]:
            raise ConfigError(
                f"{len(ids)} channel ids for {v.shape[0]} channels"
            )
        if len(set(ids)) != len(ids):
            raise ConfigError("channel ids must be unique")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "channel_ids", ids)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LiftConfig:
    """Factorization P = k * n governing the Kronecker lift.

    k segments of length n per column; lifted dimension is n**k.
    k=1 is the identity factorization used for unlifted comparison runs.
    """

    k: int
    n: int
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if not (1 <= self.k <= MAX_SEGMENTS):
            raise ConfigError(f"k must be in 1..{MAX_SEGMENTS}, got {self.k}")
        if self.n < 2:
            raise ConfigError(f"segment length n must be >= 2, got {self.n}")
        if self.lifted_dim > self.dim_cap:
            raise ConfigError(
                f"lifted dimension {self.n}^{self.k} = {self.lifted_dim} "
                f"exceeds cap {self.dim_cap}"
            )

    @property
    def channels(self) -> int:
        return self.k * self.n

    @property
    def lifted_dim(self) -> int:
        return self.n**self.k


@dataclass(frozen=True)
class WindowSpec:
    """Moving-window geometry: width in samples and evaluation stride."""

    width: int = 200
    stride: int = 1

    def __post_init__(self):
        if self.width < 2:
            raise ConfigError(f"window width must be >= 2, got {self.width}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")


@dataclass(frozen=True)
class IndicatorSeries:
    """A per-time-step indicator curve (LES, MSR, or RMSE).

    start_index is the time of the first value; value j belongs to time
    start_index + j * stride.  normalization records the scale divided out
    by indicator normalization (None while the curve is raw).
    """

    start_index: int
    values: np.ndarray
    kind: str
    stride: int = 1
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ConfigError("indicator values must be 1-D")
        if self.kind not in ("LES", "MSR", "RMSE"):
            raise ConfigError(f"unknown indicator kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    def times(self) -> np.ndarray:
        return self.start_index + self.stride * np.arange(self.values.size)


def residual_matrix(D: SpatioTemporalMatrix) -> SpatioTemporalMatrix:
    """Forward first differences along time: out[:, j] = D[:, j+1] - D[:, j].

    Output has N-1 columns and t0 incremented by one, so the column at
    public time t holds D(t) - D(t-1).
    """
    if D.samples < 2:
        raise DimensionError("residual_matrix needs at least 2 samples")
    diff = D.values[:, 1:] - D.values[:, :-1]
    return SpatioTemporalMatrix(
        values=diff, channel_ids=list(D.channel_ids), t0=D.t0 + 1
    )


def load_matrix(path) -> SpatioTemporalMatrix:
    """Load a CSV measurement matrix.

    Header row holds channel ids; each data row is one sampling instant.
    An optional leading column named "t" carries integer sample indices
    (only its first value is used, as t0; rows must be consecutive).
    """
    path = Path(path)
    if not path.exists():
        raise FormatError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        has_t = bool(header) and header[0] == "t"
        ids = header[1:] if has_t else header
        rows = []
        t_first = None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"{path}: line {lineno} has {len(row)} fields, "
                    f"expected {len(header)}"
                )
            if has_t:
                t_val, row = row[0], row[1:]
                if t_first is None:
                    try:
                        t_first = int(t_val)
                    except ValueError:
                        raise FormatError(
                            f"{path}: line {lineno}: bad time index {t_val!r}"
                        ) from None
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no samples")
    if len(ids) < 2:
        raise DimensionError(
            f"{path}: need at least 2 channels, got {len(ids)}"
        )
    values = np.asarray(rows, dtype=float).T  # columns index time
    return SpatioTemporalMatrix(
        values=values, channel_ids=ids, t0=t_first if t_first is not None else 1
    )


def save_matrix(D: SpatioTemporalMatrix, path) -> None:
    """Write the CSV layout read by load_matrix, with a leading t column.

    Floats are rendered with 17 significant digits so a reload is
    bit-identical.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + list(D.channel_ids))
        for j in range(D.samples):
            writer.writerow(
                [str(D.t0 + j)] + [f"{x:.17g}" for x in D.values[:, j]]
            )
