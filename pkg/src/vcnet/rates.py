"""Relative rate-of-change transforms over a panel.

Each variable's raw level series is turned into a rate series one point
shorter: the rate at year t is the change from t to t+1 divided by a
denominator taken at t. The denominator is the variable's own level by
default, or another variable's level (the income-like codes divide by
revenue so that near-zero income years do not explode the rate).

A rate is missing whenever any ingredient is missing or the denominator
is exactly zero. Negative denominators are used as-is — the rate sign
flips — but are tallied so callers can surface them as a data-quality
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError
from .panel import DEFAULT_DENOMINATORS, Dataset, VariableId, _as_code


def rate_series(
    values: np.ndarray, denominator_values: Optional[np.ndarray] = None
) -> np.ndarray:
    """Rates along the last axis: ``(x[t+1] - x[t]) / d[t]``.

    ``values`` holds levels over n years; the result holds n-1 rates.
    With no ``denominator_values`` the series divides by its own level.
    Missing ingredients and zero denominators yield NaN.
    """
    x = np.asarray(values, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError("need at least two years of levels to form one rate")
    d = x if denominator_values is None else np.asarray(denominator_values, dtype=float)
    if d.shape != x.shape:
        raise ValueError(f"denominator shape {d.shape} does not match values shape {x.shape}")
    base = d[..., :-1]
    diff = x[..., 1:] - x[..., :-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = diff / base
    rates = np.where(base == 0.0, np.nan, rates)
    return np.where(np.isfinite(rates), rates, np.nan)


@dataclass
class RatePanel:
    """Per-variable rate matrices aligned on a shared rate-year axis.

    ``rates[code]`` has shape (n_entities, n_years - 1); the rate in
    column j belongs to year ``year_start + j`` (the change into the
    following year). ``negative_denominators[code]`` counts rate cells
    whose denominator was negative — computed, but worth surfacing.
    """

    entities: list[str]
    variables: list[VariableId]
    year_start: int
    year_end: int
    rates: dict[str, np.ndarray]
    denominators: Mapping[str, str] = field(default_factory=dict)
    negative_denominators: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.entities), self.n_rate_years)
        for code, arr in self.rates.items():
            if arr.shape != shape:
                raise ValueError(f"rate matrix for {code!r} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
        self._entity_rows = {e: k for k, e in enumerate(self.entities)}

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_rate_years(self) -> int:
        return self.year_end - self.year_start

    def rate_years(self) -> range:
        """Years carrying a rate: every window year except the last."""
        return range(self.year_start, self.year_end)

    def codes(self) -> list[str]:
        return [v.code for v in self.variables]

    def entity_row(self, entity: str) -> int:
        if entity not in self._entity_rows:
            raise KeyError(f"unknown entity {entity!r}")
        return self._entity_rows[entity]

    def values(self, variable: Union[str, VariableId]) -> np.ndarray:
        code = _as_code(variable)
        if code not in self.rates:
            raise KeyError(f"unknown variable code {code!r}")
        return self.rates[code]

    def entity_rates(self, entity: str, variable: Union[str, VariableId]) -> np.ndarray:
        return self.values(variable)[self.entity_row(entity)]


def compute_rates(
    dataset: Dataset, denominators: Optional[Mapping[str, str]] = None
) -> RatePanel:
    """Transform every variable of a Dataset into its rate series.

    ``denominators`` maps variable code -> denominator variable code;
    codes not in the map divide by their own level. Referencing a
    denominator variable absent from the dataset raises
    :class:`~vcnet.errors.ConfigurationError`.
    """
    denominators = DEFAULT_DENOMINATORS if denominators is None else denominators
    codes = dataset.codes()
    rates: dict[str, np.ndarray] = {}
    negative: dict[str, int] = {}
    for code in codes:
        denom = denominators.get(code, code)
        if denom not in codes:
            raise ConfigurationError(
                f"variable {code!r} is normalized by {denom!r}, absent from the dataset"
            )
        levels = dataset.values(code)
        denom_levels = None if denom == code else dataset.values(denom)
        rates[code] = rate_series(levels, denom_levels)
        base = (levels if denom_levels is None else denom_levels)[:, :-1]
        used = np.isfinite(rates[code])
        negative[code] = int(np.sum(used & (base < 0.0)))
    return RatePanel(
        entities=list(dataset.entities),
        variables=list(dataset.variables),
        year_start=dataset.year_start,
        year_end=dataset.year_end,
        rates=rates,
        denominators=dict(denominators),
        negative_denominators=negative,
    )
