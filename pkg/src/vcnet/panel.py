"""Entity-variable-year panel containers and CSV ingestion.

A :class:`Dataset` holds one float matrix per variable, shaped
``(n_entities, n_years)``, with NaN marking missing observations. All
variables share one ``[year_start, year_end]`` window; a year with no
observation is explicitly missing, never zero.

The interchange format is a long-format CSV with one row per
(entity, year) and one column per variable code::

    entity,year,r,i,p,o,m
    A,1990,120.5,3.1,5.0,40.2,88.0
    A,1991,,3.4,5.2,41.0,91.5      <- empty cell = missing

Column names are remappable through :class:`CsvSchema`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ConfigurationError, DuplicateRowError, SchemaError

#: Denominator variable per code for rate computation. Codes absent from the
#: map divide by their own previous value. The defaults divide income-like
#: variables by revenue, whose scale is always positive in healthy data.
DEFAULT_DENOMINATORS: Mapping[str, str] = {"i": "r", "p": "r"}

#: Display labels for the default five-variable accounting panel.
DEFAULT_LABELS: Mapping[str, str] = {
    "r": "revenue",
    "i": "net income",
    "p": "operating income",
    "o": "own capital",
    "m": "market capitalization",
}

#: An entity contributes to a pair only if at least this many rate points
#: survive; below this the constrained statistics are meaningless.
MIN_RATE_POINTS = 4


@dataclass(frozen=True)
class VariableId:
    """Symbolic tag plus display name for one panel variable."""

    code: str
    label: str = ""

    def __post_init__(self):
        if not self.code:
            raise ValueError("variable code must be nonempty")
        if not self.label:
            object.__setattr__(self, "label", self.code)

    def display(self) -> str:
        """``label(code)``, or just the code when there is no separate label."""
        if self.label == self.code:
            return self.code
        return f"{self.label}({self.code})"


def default_variables() -> list[VariableId]:
    """The five default accounting variables, in canonical order."""
    return [VariableId(code, label) for code, label in DEFAULT_LABELS.items()]


@dataclass
class PanelSeries:
    """One entity's raw values for one variable over ``[year_start, year_end]``.

    ``values`` carries a key for every year in the window; a missing
    observation is stored as None.
    """

    entity: str
    variable: VariableId
    year_start: int
    year_end: int
    values: dict[int, Optional[float]]

    def __post_init__(self):
        if self.year_start >= self.year_end:
            raise ValueError(
                f"window must span at least two years, got "
                f"[{self.year_start}, {self.year_end}]"
            )
        bad = sorted(y for y in self.values if not self.year_start <= y <= self.year_end)
        if bad:
            raise ValueError(f"years {bad} outside window [{self.year_start}, {self.year_end}]")
        for year in self.years():
            self.values.setdefault(year, None)

    def years(self) -> range:
        return range(self.year_start, self.year_end + 1)

    def to_array(self) -> np.ndarray:
        """Values in year order as a float array, NaN for missing."""
        return np.array(
            [math.nan if self.values[y] is None else float(self.values[y]) for y in self.years()],
            dtype=float,
        )


def _as_code(variable: Union[str, VariableId]) -> str:
    return variable.code if isinstance(variable, VariableId) else variable


class Dataset:
    """Immutable panel of (entity, variable, year) observations.

    Parameters
    ----------
    entities : sequence of str
        Entity identifiers, unique, in presentation order.
    variables : sequence of VariableId
        Panel variables, codes unique, in presentation order.
    year_start, year_end : int
        Shared observation window (inclusive); must span >= 2 years.
    values : mapping code -> array of shape (n_entities, n_years)
        Raw observations; NaN marks a missing value.
    """

    def __init__(
        self,
        entities: Sequence[str],
        variables: Sequence[VariableId],
        year_start: int,
        year_end: int,
        values: Mapping[str, np.ndarray],
    ):
        self.entities = [str(e) for e in entities]
        self.variables = list(variables)
        self.year_start = int(year_start)
        self.year_end = int(year_end)
        if self.year_start >= self.year_end:
            raise ValueError(
                f"window must span at least two years, got "
                f"[{self.year_start}, {self.year_end}]"
            )
        if len(set(self.entities)) != len(self.entities):
            raise ValueError("entity identifiers must be unique")
        codes = [v.code for v in self.variables]
        if len(set(codes)) != len(codes):
            raise ValueError("variable codes must be unique")
        if set(values) != set(codes):
            raise ValueError("values must carry exactly one matrix per variable code")
        shape = (len(self.entities), self.n_years)
        self._values: dict[str, np.ndarray] = {}
        for code in codes:
            arr = np.array(values[code], dtype=float)
            if arr.shape != shape:
                raise ValueError(f"matrix for {code!r} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            self._values[code] = arr
        self._entity_rows = {e: k for k, e in enumerate(self.entities)}
        self._variables_by_code = {v.code: v for v in self.variables}

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_years(self) -> int:
        return self.year_end - self.year_start + 1

    def years(self) -> range:
        return range(self.year_start, self.year_end + 1)

    def codes(self) -> list[str]:
        return [v.code for v in self.variables]

    def variable(self, code: str) -> VariableId:
        if code not in self._variables_by_code:
            raise KeyError(f"unknown variable code {code!r}")
        return self._variables_by_code[code]

    def entity_row(self, entity: str) -> int:
        if entity not in self._entity_rows:
            raise KeyError(f"unknown entity {entity!r}")
        return self._entity_rows[entity]

    def values(self, variable: Union[str, VariableId]) -> np.ndarray:
        """Read-only (n_entities, n_years) matrix for one variable."""
        code = _as_code(variable)
        if code not in self._values:
            raise KeyError(f"unknown variable code {code!r}")
        return self._values[code]

    def series(self, entity: str, variable: Union[str, VariableId]) -> PanelSeries:
        row = self.values(variable)[self.entity_row(entity)]
        values = {y: (None if math.isnan(v) else float(v)) for y, v in zip(self.years(), row)}
        return PanelSeries(
            entity=entity,
            variable=self.variable(_as_code(variable)),
            year_start=self.year_start,
            year_end=self.year_end,
            values=values,
        )

    def equals(self, other: "Dataset") -> bool:
        """Structural equality, treating NaN as equal to NaN."""
        if not isinstance(other, Dataset):
            return False
        if (
            self.entities != other.entities
            or self.variables != other.variables
            or self.year_start != other.year_start
            or self.year_end != other.year_end
        ):
            return False
        return all(
            np.array_equal(self._values[c], other._values[c], equal_nan=True)
            for c in self._values
        )

    @classmethod
    def from_series(cls, series: Iterable[PanelSeries]) -> "Dataset":
        """Assemble a Dataset from per-(entity, variable) series.

        All series must share one window; duplicates are rejected.
        """
        series = list(series)
        if not series:
            raise ValueError("no series given")
        windows = {(s.year_start, s.year_end) for s in series}
        if len(windows) > 1:
            raise ValueError(f"series windows differ: {sorted(windows)}")
        (year_start, year_end), = windows
        entities: list[str] = []
        variables: list[VariableId] = []
        seen_keys = set()
        for s in series:
            key = (s.entity, s.variable.code)
            if key in seen_keys:
                raise ValueError(f"duplicate series for {key}")
            seen_keys.add(key)
            if s.entity not in entities:
                entities.append(s.entity)
            if s.variable not in variables:
                variables.append(s.variable)
        n_years = year_end - year_start + 1
        values = {
            v.code: np.full((len(entities), n_years), np.nan) for v in variables
        }
        rows = {e: k for k, e in enumerate(entities)}
        for s in series:
            values[s.variable.code][rows[s.entity]] = s.to_array()
        return cls(entities, variables, year_start, year_end, values)


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for the long-format panel CSV.

    ``variable_cols`` maps variable code -> column name; when None, every
    column other than the entity and year columns is a variable whose code
    is the column name itself. ``window`` optionally declares the accepted
    [year_start, year_end]; rows outside it are rejected.
    """

    entity_col: str = "entity"
    year_col: str = "year"
    variable_cols: Optional[Mapping[str, str]] = None
    labels: Optional[Mapping[str, str]] = None
    window: Optional[tuple[int, int]] = None

    def variable_id(self, code: str) -> VariableId:
        if self.labels and code in self.labels:
            return VariableId(code, self.labels[code])
        return VariableId(code, DEFAULT_LABELS.get(code, code))


def _parse_value(cell) -> float:
    """Cell -> float; empty, unparseable, or non-finite cells become NaN."""
    if cell is None:
        return math.nan
    if isinstance(cell, str):
        cell = cell.strip()
        if not cell:
            return math.nan
        try:
            v = float(cell)
        except ValueError:
            return math.nan
    else:
        try:
            v = float(cell)
        except (TypeError, ValueError):
            return math.nan
    return v if math.isfinite(v) else math.nan


def _parse_year(cell, line: int) -> int:
    try:
        if isinstance(cell, str):
            return int(cell.strip())
        if float(cell) != int(cell):
            raise ValueError
        return int(cell)
    except (TypeError, ValueError):
        raise SchemaError(f"line {line}: year {cell!r} is not an integer") from None


def dataset_from_frame(df: pd.DataFrame, schema: Optional[CsvSchema] = None,
                       line_offset: int = 2) -> Dataset:
    """Build a Dataset from a long-format DataFrame.

    ``line_offset`` converts a positional row index to the line number used
    in error messages (2 for a CSV file with a header row).
    """
    schema = schema or CsvSchema()
    for col, what in ((schema.entity_col, "entity"), (schema.year_col, "year")):
        if col not in df.columns:
            raise SchemaError(f"missing {what} column {col!r}")
    if schema.variable_cols is not None:
        var_cols = dict(schema.variable_cols)
        missing = [c for c in var_cols.values() if c not in df.columns]
        if missing:
            raise SchemaError(f"missing variable columns {missing}")
    else:
        var_cols = {
            c: c for c in df.columns if c not in (schema.entity_col, schema.year_col)
        }
    if not var_cols:
        raise SchemaError("no variable columns found")
    if len(df) == 0:
        raise SchemaError("no data rows")

    entities_raw = df[schema.entity_col].tolist()
    entities_clean = [str(e).strip() for e in entities_raw]
    for i, e in enumerate(entities_clean):
        if not e:
            raise SchemaError(f"line {i + line_offset}: empty entity identifier")
    years = [
        _parse_year(cell, i + line_offset)
        for i, cell in enumerate(df[schema.year_col].tolist())
    ]

    seen: dict[tuple[str, int], int] = {}
    for i, key in enumerate(zip(entities_clean, years)):
        if key in seen:
            raise DuplicateRowError(
                f"duplicate rows for entity {key[0]!r}, year {key[1]}: "
                f"lines {seen[key] + line_offset} and {i + line_offset}"
            )
        seen[key] = i

    if schema.window is not None:
        year_start, year_end = schema.window
        outside = [
            i + line_offset for i, y in enumerate(years) if not year_start <= y <= year_end
        ]
        if outside:
            raise SchemaError(
                f"years outside declared window [{year_start}, {year_end}] "
                f"on lines {outside}"
            )
    else:
        year_start, year_end = min(years), max(years)
    if year_start >= year_end:
        raise SchemaError("window must span at least two years")

    entity_order: list[str] = []
    for e in entities_clean:
        if e not in entity_order:
            entity_order.append(e)
    rows = {e: k for k, e in enumerate(entity_order)}
    n_years = year_end - year_start + 1

    variables = [schema.variable_id(code) for code in var_cols]
    values = {code: np.full((len(entity_order), n_years), np.nan) for code in var_cols}
    for code, col in var_cols.items():
        cells = df[col].tolist()
        mat = values[code]
        for i, cell in enumerate(cells):
            mat[rows[entities_clean[i]], years[i] - year_start] = _parse_value(cell)
    return Dataset(entity_order, variables, year_start, year_end, values)


def load_csv(path, schema: Optional[CsvSchema] = None) -> Dataset:
    """Load a long-format panel CSV into a Dataset.

    Empty or unparseable value cells become missing; malformed headers,
    non-integer years, and duplicate (entity, year) rows raise.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty file") from None
    except pd.errors.ParserError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return dataset_from_frame(df, schema=schema, line_offset=2)


def save_csv(dataset: Dataset, path, schema: Optional[CsvSchema] = None) -> None:
    """Write a Dataset in the long CSV format; inverse of :func:`load_csv`.

    Values are rendered with shortest round-trip float formatting so a
    reload reproduces the Dataset exactly, missing markers included.
    """
    schema = schema or CsvSchema()
    codes = dataset.codes()
    if schema.variable_cols is not None:
        columns = [schema.variable_cols[c] for c in codes]
    else:
        columns = codes
    matrices = [dataset.values(c) for c in codes]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([schema.entity_col, schema.year_col] + columns)
        for row, entity in enumerate(dataset.entities):
            for j, year in enumerate(dataset.years()):
                cells = [entity, str(year)]
                for mat in matrices:
                    v = mat[row, j]
                    cells.append("" if math.isnan(v) else repr(float(v)))
                writer.writerow(cells)


def _pair_requirements(
    dataset: Dataset,
    pair: tuple[Union[str, VariableId], Union[str, VariableId]],
    denominators: Optional[Mapping[str, str]],
) -> tuple[list[str], dict[str, str]]:
    """Codes a pair's rates touch, and each pair code's denominator code."""
    denominators = DEFAULT_DENOMINATORS if denominators is None else denominators
    pair_codes = [_as_code(v) for v in pair]
    for code in pair_codes:
        dataset.variable(code)
    needed = list(dict.fromkeys(pair_codes))
    denom_of: dict[str, str] = {}
    for code in pair_codes:
        denom = denominators.get(code, code)
        if denom not in dataset.codes():
            raise ConfigurationError(
                f"variable {code!r} is normalized by {denom!r}, absent from the dataset"
            )
        denom_of[code] = denom
        if denom not in needed:
            needed.append(denom)
    return needed, denom_of


def eligible_entities(
    dataset: Dataset,
    pair: tuple[Union[str, VariableId], Union[str, VariableId]],
    *,
    denominators: Optional[Mapping[str, str]] = None,
    min_rate_points: int = MIN_RATE_POINTS,
) -> np.ndarray:
    """Boolean row mask of entities that fully support the pair.

    Vectorized equivalent of calling :func:`complete_window` per entity
    and checking it is not None.
    """
    needed, denom_of = _pair_requirements(dataset, pair, denominators)
    if dataset.n_years - 1 < min_rate_points:
        return np.zeros(dataset.n_entities, dtype=bool)
    ok = np.ones(dataset.n_entities, dtype=bool)
    for code in needed:
        ok &= np.isfinite(dataset.values(code)).all(axis=1)
    for code in dict.fromkeys(denom_of.values()):
        ok &= ~np.any(dataset.values(code)[:, :-1] == 0.0, axis=1)
    return ok


def complete_window(
    dataset: Dataset,
    entity: str,
    pair: tuple[Union[str, VariableId], Union[str, VariableId]],
    *,
    denominators: Optional[Mapping[str, str]] = None,
    min_rate_points: int = MIN_RATE_POINTS,
) -> Optional[list[int]]:
    """Rate years over which this entity fully supports the pair, or None.

    Complete-case rule: the entity contributes to the pair only when every
    series the pair's rate transforms touch (both variables, plus any
    denominator variable) is observed over the whole window and every
    denominator value used is nonzero. Anything less, or fewer than
    ``min_rate_points`` rate points in the window, disqualifies the entity
    for this pair.
    """
    row = dataset.entity_row(entity)
    needed, denom_of = _pair_requirements(dataset, pair, denominators)
    if dataset.n_years - 1 < min_rate_points:
        return None
    for code in needed:
        if not np.isfinite(dataset.values(code)[row]).all():
            return None
    for code in dict.fromkeys(denom_of.values()):
        if np.any(dataset.values(code)[row, :-1] == 0.0):
            return None
    return list(range(dataset.year_start, dataset.year_end))
