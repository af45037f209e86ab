"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import math
import numbers
from typing import Mapping, Optional, Sequence, Union

import pandas as pd

from .errors import ConfigurationError
from .panel import CsvSchema, Dataset, dataset_from_frame


def check_dataset(X: Union[Dataset, pd.DataFrame], schema: Optional[CsvSchema] = None) -> Dataset:
    """Coerce estimator input to a Dataset.

    Accepts a Dataset (returned as-is; ``schema`` must then be None) or
    a long-format DataFrame with entity/year/variable columns.
    """
    if isinstance(X, Dataset):
        if schema is not None:
            raise ValueError("schema only applies when X is a DataFrame")
        return X
    if isinstance(X, pd.DataFrame):
        return dataset_from_frame(X, schema=schema, line_offset=1)
    raise TypeError(
        f"X must be a Dataset or a long-format DataFrame, got {type(X).__name__}"
    )


def check_h(h) -> float:
    """Volatility threshold: a finite float >= 0."""
    if isinstance(h, bool) or not isinstance(h, numbers.Real):
        raise TypeError(f"h must be a real number, got {type(h).__name__}")
    h = float(h)
    if not math.isfinite(h) or h < 0.0:
        raise ValueError(f"h must be finite and >= 0, got {h}")
    return h


def check_alpha(alpha) -> float:
    """Significance level: a float strictly between 0 and 1."""
    if isinstance(alpha, bool) or not isinstance(alpha, numbers.Real):
        raise TypeError(f"alpha must be a real number, got {type(alpha).__name__}")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def check_min_rate_points(min_rate_points) -> int:
    """Per-entity rate-point floor: an integer >= 2."""
    if isinstance(min_rate_points, bool) or not isinstance(min_rate_points, numbers.Integral):
        raise TypeError(
            f"min_rate_points must be an integer, got {type(min_rate_points).__name__}"
        )
    min_rate_points = int(min_rate_points)
    if min_rate_points < 2:
        raise ValueError(f"min_rate_points must be >= 2, got {min_rate_points}")
    return min_rate_points


def check_denominators(
    denominators: Optional[Mapping[str, str]], codes: Sequence[str]
) -> Optional[Mapping[str, str]]:
    """Denominator map: every key and value must be a known variable code."""
    if denominators is None:
        return None
    code_set = set(codes)
    for code, denom in denominators.items():
        if code not in code_set:
            raise ConfigurationError(f"denominator map names unknown variable {code!r}")
        if denom not in code_set:
            raise ConfigurationError(
                f"variable {code!r} is normalized by {denom!r}, absent from the dataset"
            )
    return dict(denominators)


def check_pairs(
    pairs: Optional[Sequence[tuple[str, str]]], codes: Sequence[str]
) -> Optional[list[tuple[str, str]]]:
    """Requested pairs: known codes, no self-pairs, no repeated unordered pair."""
    if pairs is None:
        return None
    code_set = set(codes)
    out: list[tuple[str, str]] = []
    seen: set[frozenset] = set()
    for pair in pairs:
        a, b = (str(pair[0]), str(pair[1]))
        for c in (a, b):
            if c not in code_set:
                raise ConfigurationError(f"pair {pair} names unknown variable {c!r}")
        if a == b:
            raise ConfigurationError(f"pair {pair} relates a variable to itself")
        key = frozenset((a, b))
        if key in seen:
            raise ConfigurationError(f"unordered pair {{{a}, {b}}} requested twice")
        seen.add(key)
        out.append((a, b))
    return out
