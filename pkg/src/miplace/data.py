"""Dataset loading and synthetic generation.

CSV datasets carry planar sensor coordinates plus a scalar reading per
row under the header ``x,y,value``.  Loading can standardize the values
to zero mean and unit standard deviation; the applied (mean, std) pair
is kept on the dataset so predictions can be mapped back.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DatasetParseError,
    DegenerateDataError,
    InsufficientDataError,
    InvalidInputError,
)
from .kernels import HyperParams, cov_matrix, default_jitter

MIN_ROWS = 3


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable point cloud with one scalar value per point.

    ``standardization`` records the (mean, std) removed from ``values``;
    (0.0, 1.0) means the values are raw.
    """

    points: np.ndarray
    values: np.ndarray
    name: str
    standardization: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] != self.values.shape[0]:
            raise InvalidInputError("points and values must align row for row")
        self.points.flags.writeable = False
        self.values.flags.writeable = False

    @property
    def n(self) -> int:
        return self.points.shape[0]


def load_dataset(path, name: str | None = None, standardize: bool = True) -> Dataset:
    """Read an ``x,y,value`` CSV into a Dataset.

    Raises DatasetParseError (with the 1-based line number) on a bad
    header or unparseable row, InsufficientDataError below 3 rows, and
    DegenerateDataError when every value is identical, which would make
    variance-normalized error metrics meaningless.
    """
    path = str(path)
    pts, vals = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read dataset: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError(f"{path}: empty file", line=1) from None
        if [h.strip().lower() for h in header] != ["x", "y", "value"]:
            raise DatasetParseError(
                f"{path}: expected header 'x,y,value', got {','.join(header)!r}",
                line=1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DatasetParseError(
                    f"{path}: expected 3 fields, got {len(row)}", line=lineno
                )
            try:
                x, y, v = (float(f) for f in row)
            except ValueError:
                raise DatasetParseError(
                    f"{path}: non-numeric field in {row!r}", line=lineno
                ) from None
            if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(v)):
                raise DatasetParseError(
                    f"{path}: non-finite field in {row!r}", line=lineno
                )
            pts.append((x, y))
            vals.append(v)

    if len(pts) < MIN_ROWS:
        raise InsufficientDataError(
            f"{path}: need at least {MIN_ROWS} rows, got {len(pts)}"
        )
    points = np.asarray(pts, dtype=np.float64)
    values = np.asarray(vals, dtype=np.float64)
    if np.ptp(values) == 0.0:
        raise DegenerateDataError(f"{path}: all values identical")

    mean, std = 0.0, 1.0
    if standardize:
        mean = float(values.mean())
        std = float(values.std())
        values = (values - mean) / std
    return Dataset(
        points=points,
        values=values,
        name=name if name is not None else path,
        standardization=(mean, std),
    )


def make_synthetic(seed: int, m: int, params: HyperParams) -> Dataset:
    """Sample m points uniformly on the unit square and draw one joint
    realization of the noisy process over them.

    The draw is L z with L the Cholesky factor of the kernel matrix plus
    noise, so repeated seeds reproduce the dataset exactly.
    """
    if m < MIN_ROWS:
        raise InvalidInputError(f"m must be >= {MIN_ROWS}, got {m}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 1.0, size=(m, 2))
    K = cov_matrix(params, points, add_noise=True, jitter=default_jitter(params))
    L = np.linalg.cholesky(K)
    values = L @ rng.standard_normal(m)
    return Dataset(
        points=points,
        values=values,
        name=f"synthetic-{seed}-{m}",
        standardization=(0.0, 1.0),
    )
