"""Kronecker dimension lifting.

Each data column of length P = k*n is cut into k contiguous segments of
length n.  Every segment is scaled to unit Euclidean norm and the k unit
segments are Kronecker-multiplied left to right, producing a unit vector
of dimension n**k.  In sqrt-dim mode the result is additionally scaled by
sqrt(n**k) so that windowed covariances with 1/N' weights are comparable
to a unit-variance reference spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import LiftConfig, SpatioTemporalMatrix
from .errors import ConfigError, DimensionError, NormalizationError

SCALE_MODES = ("unit-norm", "sqrt-dim")


@dataclass(frozen=True)
class LiftedMatrix:
    """Lifted data: dim x samples, plus the configuration that produced it."""

    values: np.ndarray
    config: LiftConfig
    scale_mode: str
    t0: int = 1

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def samples(self) -> int:
        return self.values.shape[1]


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two vectors: out[(p)*len(b) + q] = a[p] * b[q]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise DimensionError("kronecker factors must be non-empty")
    return (a[:, None] * b[None, :]).ravel()


def normalize_segment(v: np.ndarray) -> np.ndarray:
    """Scale v to unit Euclidean norm."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise NormalizationError("cannot normalize zero segment")
    return v / nrm


def lift_column(d: np.ndarray, cfg: LiftConfig) -> np.ndarray:
    """Lift one column: segment, normalize, Kronecker-multiply.

    Segment l (1-based) is entries (l-1)*n .. l*n-1.  Output has unit norm.
    """
    d = np.asarray(d, dtype=float)
    if d.shape != (cfg.channels,):
        raise DimensionError(
            f"column length {d.size} does not match k*n = {cfg.channels}"
        )
    segments = d.reshape(cfg.k, cfg.n)
    out = None
    for l in range(cfg.k):
        nrm = np.linalg.norm(segments[l])
        if nrm == 0.0:
            raise NormalizationError(f"zero segment {l + 1}")
        u = segments[l] / nrm
        out = u if out is None else kronecker(out, u)
    return out


def lift_matrix(
    D: SpatioTemporalMatrix,
    cfg: LiftConfig,
    scale_mode: str = "unit-norm",
) -> LiftedMatrix:
    """Lift every column of D.  Vectorized over time.

    Any zero segment aborts with the offending public time index.
    """
    if scale_mode not in SCALE_MODES:
        raise ConfigError(f"scale_mode must be one of {SCALE_MODES}")
    if D.channels != cfg.channels:
        raise DimensionError(
            f"{D.channels} channels do not match k*n = {cfg.channels}"
        )
    N = D.samples
    segs = D.values.reshape(cfg.k, cfg.n, N)
    norms = np.linalg.norm(segs, axis=1)  # (k, N)
    bad = np.argwhere(norms == 0.0)
    if bad.size:
        l, j = bad[0]
        raise NormalizationError(f"zero segment {l + 1} at t={D.t0 + j}")
    unit = segs / norms[:, None, :]
    out = unit[0]
    for l in range(1, cfg.k):
        # batched kronecker across all columns at once
        out = (out[:, None, :] * unit[l][None, :, :]).reshape(-1, N)
    if scale_mode == "sqrt-dim":
        out = out * np.sqrt(cfg.lifted_dim)
    return LiftedMatrix(values=out, config=cfg, scale_mode=scale_mode, t0=D.t0)
