"""Correlation statistics, plain and volatility-constrained.

The central quantity is the constrained correlation F of an ordered
variable pair (x, y) for one entity: the Pearson correlation of the two
rate series restricted to the years where x's rate deviates from its
mean by at least ``h`` standard deviations. Conditioning on x versus
conditioning on y breaks the symmetry of plain correlation; the
difference ``delta_f = F(x, y) - F(y, x)`` is positive when x's volatile
years explain more of the joint co-movement than y's, which is the
per-entity directional signal aggregated by :mod:`vcnet.inference`.

All moments are population moments (divide by the number of points, not
by n - 1), at every level of the pipeline.

Scalar functions accept either a mapping ``year -> rate`` (missing years
absent or None) or a plain sequence (positions used as years, NaN
missing). They are thin wrappers over the batch kernels that power
:func:`vc_pair_batch`, so scalar and vectorized results agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    DegenerateSeriesError,
    DegenerateSubsetError,
    InsufficientDataError,
)
from .panel import MIN_RATE_POINTS

RatesLike = Union[Mapping[int, Optional[float]], Sequence[float], np.ndarray]


# ---------------------------------------------------------------------------
# Result types


@dataclass(frozen=True)
class MomentPair:
    """Population mean and standard deviation over n observed points."""

    mean: float
    sd: float
    n: int


@dataclass(frozen=True)
class VolatilitySubset:
    """Years where the conditioning series is volatile at threshold h.

    A year belongs to the subset when ``|rate - mean| >= h * sd``; the
    boundary is included, so ``h = 0`` selects every observed year.
    ``mean`` and ``sd`` are the conditioning series' own moments.
    """

    h: float
    years: tuple[int, ...]
    mean: float
    sd: float

    @property
    def n(self) -> int:
        return len(self.years)


@dataclass(frozen=True)
class PairFirmStats:
    """One entity's statistics for one ordered pair (x, y).

    ``f_forward`` conditions on x's volatility, ``f_backward`` on y's;
    ``delta_f = f_forward - f_backward``. Fields are None when the
    entity's data cannot support them (too few points, or zero spread
    on a required subset); ``n_points`` is the number of years where
    both rates are observed.
    """

    entity: str
    pair: tuple[str, str]
    n_points: int
    pearson: Optional[float]
    f_forward: Optional[float]
    f_backward: Optional[float]
    delta_f: Optional[float]
    n_forward: int
    n_backward: int

    def reversed(self) -> "PairFirmStats":
        """The same statistics for the pair taken in the other order."""
        return PairFirmStats(
            entity=self.entity,
            pair=(self.pair[1], self.pair[0]),
            n_points=self.n_points,
            pearson=self.pearson,
            f_forward=self.f_backward,
            f_backward=self.f_forward,
            delta_f=None if self.delta_f is None else -self.delta_f,
            n_forward=self.n_backward,
            n_backward=self.n_forward,
        )


@dataclass
class BatchPairStats:
    """Vectorized per-entity statistics for one ordered pair.

    Arrays are aligned with ``entities`` (row order of the source
    panel restricted to eligible entities); NaN marks a statistic an
    entity could not support.
    """

    h: float
    pair: tuple[str, str]
    pearson: np.ndarray
    f_forward: np.ndarray
    f_backward: np.ndarray
    delta_f: np.ndarray
    n_points: np.ndarray
    n_forward: np.ndarray
    n_backward: np.ndarray
    entities: Optional[list[str]] = None

    def __len__(self) -> int:
        return len(self.pearson)

    def entity_stats(self, entities: Optional[Sequence[str]] = None) -> list[PairFirmStats]:
        """Materialize one :class:`PairFirmStats` per row."""
        names = list(entities) if entities is not None else self.entities
        if names is None:
            names = [""] * len(self)
        if len(names) != len(self):
            raise ValueError(f"{len(names)} entity names for {len(self)} rows")

        def opt(v: float) -> Optional[float]:
            return None if math.isnan(v) else float(v)

        return [
            PairFirmStats(
                entity=names[k],
                pair=self.pair,
                n_points=int(self.n_points[k]),
                pearson=opt(self.pearson[k]),
                f_forward=opt(self.f_forward[k]),
                f_backward=opt(self.f_backward[k]),
                delta_f=opt(self.delta_f[k]),
                n_forward=int(self.n_forward[k]),
                n_backward=int(self.n_backward[k]),
            )
            for k in range(len(self))
        ]


# ---------------------------------------------------------------------------
# Masked batch kernels
#
# Every statistic in the package flows through these three functions, so
# the plain correlation is exactly the constrained correlation with the
# full mask, and reversing a pair swaps results without rounding drift.


def _masked_moments(R: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise population mean/sd of R over mask; NaN where the mask is empty."""
    n = mask.sum(axis=1)
    safe = np.maximum(n, 1)
    mean = np.where(mask, R, 0.0).sum(axis=1) / safe
    dev = np.where(mask, R - mean[:, None], 0.0)
    sd = np.sqrt((dev * dev).sum(axis=1) / safe)
    empty = n == 0
    return np.where(empty, np.nan, mean), np.where(empty, np.nan, sd), n


def _masked_corr(
    X: np.ndarray, Y: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise population Pearson correlation of X and Y over mask.

    Returns (corr, n); corr is NaN where fewer than two points remain
    or either series has zero spread on the mask.
    """
    mean_x, sd_x, n = _masked_moments(X, mask)
    mean_y, sd_y, _ = _masked_moments(Y, mask)
    with np.errstate(invalid="ignore", divide="ignore"):
        zx = np.where(mask, (X - mean_x[:, None]) / sd_x[:, None], 0.0)
        zy = np.where(mask, (Y - mean_y[:, None]) / sd_y[:, None], 0.0)
        corr = (zx * zy).sum(axis=1) / np.maximum(n, 1)
    bad = (n < 2) | ~(sd_x > 0.0) | ~(sd_y > 0.0)
    return np.where(bad, np.nan, corr), n


def _omega_mask(R: np.ndarray, valid: np.ndarray, h: float) -> np.ndarray:
    """Row-wise volatile-year mask: valid points with |R - mean| >= h * sd."""
    mean, sd, _ = _masked_moments(R, valid)
    with np.errstate(invalid="ignore"):
        volatile = np.abs(R - mean[:, None]) >= h * sd[:, None]
    return valid & volatile


def _check_h(h: float) -> float:
    h = float(h)
    if not math.isfinite(h) or h < 0.0:
        raise ValueError(f"volatility threshold must be finite and >= 0, got {h}")
    return h


def vc_pair_batch(
    X: np.ndarray,
    Y: np.ndarray,
    h: float,
    *,
    min_points: int = MIN_RATE_POINTS,
    pair: tuple[str, str] = ("x", "y"),
    entities: Optional[Sequence[str]] = None,
) -> BatchPairStats:
    """All per-entity pair statistics for rate matrices X and Y.

    X and Y are (n_entities, n_rate_years) with NaN for missing rates; a
    year counts for an entity only when both rates are present. Rows
    with fewer than ``min_points`` common years get NaN statistics but
    keep their true ``n_points``.
    """
    h = _check_h(h)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape != Y.shape:
        raise ValueError(f"rate matrices differ in shape: {X.shape} vs {Y.shape}")
    observed = np.isfinite(X) & np.isfinite(Y)
    n_points = observed.sum(axis=1)
    eligible = n_points >= max(int(min_points), 2)
    valid = observed & eligible[:, None]

    pearson, _ = _masked_corr(X, Y, valid)
    omega_x = _omega_mask(X, valid, h)
    omega_y = _omega_mask(Y, valid, h)
    f_forward, n_forward = _masked_corr(X, Y, omega_x)
    f_backward, n_backward = _masked_corr(X, Y, omega_y)
    delta_f = f_forward - f_backward

    return BatchPairStats(
        h=h,
        pair=(str(pair[0]), str(pair[1])),
        pearson=pearson,
        f_forward=f_forward,
        f_backward=f_backward,
        delta_f=delta_f,
        n_points=n_points,
        n_forward=n_forward,
        n_backward=n_backward,
        entities=list(entities) if entities is not None else None,
    )


# ---------------------------------------------------------------------------
# Scalar interface


def _year_map(rates: RatesLike) -> dict[int, float]:
    """Normalize to {year: finite rate}, sorted by year."""
    if isinstance(rates, Mapping):
        items = [(int(y), v) for y, v in rates.items()]
    else:
        arr = np.asarray(rates, dtype=float)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-D rate series, got shape {arr.shape}")
        items = list(enumerate(arr.tolist()))
    out: dict[int, float] = {}
    for y, v in sorted(items):
        if v is None:
            continue
        v = float(v)
        if math.isfinite(v):
            out[y] = v
    return out


def _align(x: RatesLike, y: RatesLike) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Common observed years of x and y, sorted, with aligned value rows."""
    positional = not isinstance(x, Mapping) and not isinstance(y, Mapping)
    if positional and len(x) != len(y):
        raise ValueError(f"series lengths differ: {len(x)} vs {len(y)}")
    xm, ym = _year_map(x), _year_map(y)
    years = sorted(xm.keys() & ym.keys())
    xv = np.array([xm[t] for t in years], dtype=float)
    yv = np.array([ym[t] for t in years], dtype=float)
    return years, xv, yv


def moments(rates: RatesLike) -> MomentPair:
    """Population mean and standard deviation of the observed rates."""
    rm = _year_map(rates)
    if not rm:
        raise InsufficientDataError("no observed rate points")
    arr = np.array([list(rm.values())], dtype=float)
    mean, sd, n = _masked_moments(arr, np.ones_like(arr, dtype=bool))
    return MomentPair(float(mean[0]), float(sd[0]), int(n[0]))


def pearson(x: RatesLike, y: RatesLike) -> float:
    """Population Pearson correlation over the common observed years."""
    years, xv, yv = _align(x, y)
    if len(years) < 2:
        raise InsufficientDataError(
            f"need at least 2 common observed years, got {len(years)}"
        )
    corr, _ = _masked_corr(xv[None, :], yv[None, :], np.ones((1, len(years)), dtype=bool))
    if math.isnan(corr[0]):
        raise DegenerateSeriesError("a series has zero spread over the common years")
    return float(corr[0])


def omega(rates: RatesLike, h: float) -> VolatilitySubset:
    """Volatile years of a rate series at threshold h (boundary included)."""
    h = _check_h(h)
    rm = _year_map(rates)
    if not rm:
        raise InsufficientDataError("no observed rate points")
    years = list(rm.keys())
    arr = np.array([list(rm.values())], dtype=float)
    valid = np.ones_like(arr, dtype=bool)
    mask = _omega_mask(arr, valid, h)[0]
    mean, sd, _ = _masked_moments(arr, valid)
    return VolatilitySubset(
        h=h,
        years=tuple(t for t, keep in zip(years, mask) if keep),
        mean=float(mean[0]),
        sd=float(sd[0]),
    )


def constrained_pearson(x: RatesLike, y: RatesLike, subset: VolatilitySubset) -> float:
    """Pearson correlation of x and y restricted to the subset's years."""
    years, xv, yv = _align(x, y)
    keep = np.array([t in set(subset.years) for t in years], dtype=bool)
    if keep.sum() < 2:
        raise DegenerateSubsetError(
            f"volatile subset keeps {int(keep.sum())} common years; need at least 2"
        )
    corr, _ = _masked_corr(xv[None, :], yv[None, :], keep[None, :])
    if math.isnan(corr[0]):
        raise DegenerateSubsetError("a series has zero spread on the volatile subset")
    return float(corr[0])


def vc_pair(
    x: RatesLike,
    y: RatesLike,
    h: float,
    *,
    entity: str = "",
    pair: tuple[str, str] = ("x", "y"),
    min_points: int = MIN_RATE_POINTS,
) -> PairFirmStats:
    """All volatility-constrained statistics of one entity's pair (x, y).

    The soft counterpart of the scalar functions: statistics an entity
    cannot support come back as None instead of raising, so callers can
    aggregate over entities without special-casing.
    """
    years, xv, yv = _align(x, y)
    batch = vc_pair_batch(
        xv[None, :], yv[None, :], h, min_points=min_points, pair=pair
    )
    return batch.entity_stats([entity])[0]
