"""Synthetic level panels with planted directional influences.

The generator works in rate space and integrates to levels. Every
variable gets an i.i.d. heavy-tailed base signal per entity (Laplace,
chosen over Gaussian because jointly Gaussian rates are exchange-
symmetric: conditioning on either variable's volatile years then yields
the same constrained correlation in expectation, and no direction can
be recovered. Heavy tails break that symmetry, so planted directions
show up in the statistics the analyzer computes). A link
(source, target, strength) mixes the source's rate signal into the
target's:

    rate[target] = strength * rate[source] + sqrt(1 - strength^2) * eps

which preserves the marginal rate scale and plants "source influences
target" with intensity rising in ``strength``; strength 0 plants
nothing.

Levels integrate the rates with exactly the denominator convention the
analyzer inverts: own-denominator variables grow multiplicatively (with
the growth factor floored just above zero so levels stay positive), and
revenue-denominated variables grow additively in proportion to the
denominator level. Entity streams are independent counter-based RNG
streams keyed by (seed, entity index), so entity k's data is the same
no matter how many entities are generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Mapping, Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError
from .panel import DEFAULT_DENOMINATORS, DEFAULT_LABELS, Dataset, VariableId

#: Unit-variance Laplace scale: Var(Laplace(0, b)) = 2 b^2.
LAPLACE_SCALE = 1.0 / math.sqrt(2.0)

#: Multiplicative growth factors are floored here so own-denominator
#: levels can shrink steeply but never reach zero or flip sign.
LEVEL_FLOOR = 0.05

BASE_LEVEL = 100.0


@dataclass(frozen=True)
class Link:
    """One planted influence: source's rate mixed into target's."""

    source: str
    target: str
    strength: float


@dataclass
class SynthSpec:
    """Parameters of one synthetic panel.

    ``noise_sd`` is the standard deviation of every variable's rate
    signal; ``links`` plant directed influences between rate signals.
    ``denominators`` follows the analyzer's convention (codes absent
    from the map integrate multiplicatively against their own level).
    """

    n_entities: int = 2000
    seed: int = 0
    year_start: int = 1990
    n_years: int = 29
    noise_sd: float = 0.1
    base_level: float = BASE_LEVEL
    variables: Sequence[str] = ("r", "i", "p", "o", "m")
    labels: Optional[Mapping[str, str]] = None
    links: Sequence[Link] = ()
    denominators: Optional[Mapping[str, str]] = None

    def __post_init__(self):
        self.links = [
            link if isinstance(link, Link) else Link(*link) for link in self.links
        ]
        for name in ("n_entities", "seed", "year_start", "n_years"):
            value = getattr(self, name)
            try:
                ok = not isinstance(value, bool) and int(value) == value
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
            setattr(self, name, int(value))
        try:
            self.noise_sd = float(self.noise_sd)
            self.base_level = float(self.base_level)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None
        self.variables = [str(c) for c in self.variables]
        self.validate()

    def validate(self) -> None:
        if self.n_entities < 1:
            raise ConfigurationError(f"n_entities must be >= 1, got {self.n_entities}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must fit an unsigned 64-bit int, got {self.seed}")
        if self.n_years < 2:
            raise ConfigurationError(f"n_years must be >= 2, got {self.n_years}")
        if not (math.isfinite(self.noise_sd) and self.noise_sd > 0.0):
            raise ConfigurationError(f"noise_sd must be positive, got {self.noise_sd}")
        if not (math.isfinite(self.base_level) and self.base_level > 0.0):
            raise ConfigurationError(f"base_level must be positive, got {self.base_level}")
        codes = list(self.variables)
        if not codes:
            raise ConfigurationError("variables must be nonempty")
        if len(set(codes)) != len(codes):
            raise ConfigurationError(f"variable codes repeat: {codes}")
        for link in self.links:
            for c in (link.source, link.target):
                if c not in codes:
                    raise ConfigurationError(
                        f"link {link.source}->{link.target} names unknown variable {c!r}"
                    )
            if link.source == link.target:
                raise ConfigurationError(f"link {link.source}->{link.target} is a self-loop")
            if not 0.0 <= link.strength <= 1.0:
                raise ConfigurationError(
                    f"link {link.source}->{link.target} strength must lie in [0, 1], "
                    f"got {link.strength}"
                )
        by_target: dict[str, float] = {}
        for link in self.links:
            by_target[link.target] = by_target.get(link.target, 0.0) + link.strength**2
        for target, total in by_target.items():
            if total > 1.0 + 1e-12:
                raise ConfigurationError(
                    f"links into {target!r} have squared strengths summing to "
                    f"{total:.6g} > 1; the mixture would inflate its rate variance"
                )
        denominators = (
            DEFAULT_DENOMINATORS if self.denominators is None else self.denominators
        )
        for code, denom in denominators.items():
            if code in codes and denom not in codes:
                raise ConfigurationError(
                    f"variable {code!r} is normalized by {denom!r}, "
                    f"absent from the variables"
                )
        self._signal_order = self._toposort(
            [(link.source, link.target) for link in self.links], what="links"
        )
        self._level_order = self._toposort(
            [
                (denom, code)
                for code, denom in denominators.items()
                if code in codes and denom != code
            ],
            what="denominators",
        )

    def _toposort(self, edges: list[tuple[str, str]], what: str) -> list[str]:
        ts: TopologicalSorter = TopologicalSorter()
        for code in self.variables:
            ts.add(code)
        for before, after in edges:
            ts.add(after, before)
        try:
            return list(ts.static_order())
        except CycleError as exc:
            raise ConfigurationError(f"{what} form a cycle: {exc.args[1]}") from None

    def variable_ids(self) -> list[VariableId]:
        labels = self.labels or {}
        return [
            VariableId(c, labels.get(c, DEFAULT_LABELS.get(c, c))) for c in self.variables
        ]

    def resolved_denominators(self) -> dict[str, str]:
        base = DEFAULT_DENOMINATORS if self.denominators is None else self.denominators
        return {c: d for c, d in base.items() if c in self.variables}


def _entity_rng(seed: int, entity_index: int) -> np.random.Generator:
    """Independent stream per entity: Philox keyed by (seed, entity index)."""
    key = np.array([seed, entity_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _entity_rates(spec: SynthSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Planted rate signals for one entity, sd = noise_sd each."""
    n_rates = spec.n_years - 1
    unit = {
        code: rng.laplace(0.0, LAPLACE_SCALE, size=n_rates) for code in spec.variables
    }
    parents: dict[str, list[Link]] = {}
    for link in spec.links:
        parents.setdefault(link.target, []).append(link)
    combined: dict[str, np.ndarray] = {}
    for code in spec._signal_order:
        own = math.sqrt(max(1.0 - sum(l.strength**2 for l in parents.get(code, [])), 0.0))
        signal = own * unit[code]
        for link in parents.get(code, []):
            signal = signal + link.strength * combined[link.source]
        combined[code] = signal
    return {code: spec.noise_sd * combined[code] for code in spec.variables}


def _entity_levels(
    spec: SynthSpec, rates: Mapping[str, np.ndarray]
) -> dict[str, np.ndarray]:
    """Integrate rate signals to levels under the denominator convention."""
    denominators = spec.resolved_denominators()
    levels: dict[str, np.ndarray] = {}
    for code in spec._level_order:
        denom = denominators.get(code, code)
        out = np.empty(spec.n_years, dtype=float)
        out[0] = spec.base_level
        r = rates[code]
        if denom == code:
            out[1:] = spec.base_level * np.cumprod(np.maximum(1.0 + r, LEVEL_FLOOR))
        else:
            out[1:] = spec.base_level + np.cumsum(r * levels[denom][:-1])
        levels[code] = out
    return levels


def generate(spec: SynthSpec) -> Dataset:
    """Generate the complete level panel a SynthSpec describes."""
    spec.validate()
    codes = list(spec.variables)
    n = int(spec.n_entities)
    values = {c: np.empty((n, spec.n_years), dtype=float) for c in codes}
    for k in range(n):
        rng = _entity_rng(int(spec.seed), k)
        levels = _entity_levels(spec, _entity_rates(spec, rng))
        for c in codes:
            values[c][k] = levels[c]
    return Dataset(
        entities=[f"e{k:05d}" for k in range(n)],
        variables=spec.variable_ids(),
        year_start=int(spec.year_start),
        year_end=int(spec.year_start) + int(spec.n_years) - 1,
        values=values,
    )


_SPEC_KEYS = {
    "n_entities",
    "seed",
    "year_start",
    "n_years",
    "noise_sd",
    "base_level",
    "variables",
    "labels",
    "links",
    "denominators",
}


def load_spec(path) -> SynthSpec:
    """Read a SynthSpec from a TOML file.

    Top-level keys mirror the SynthSpec fields; links are declared as::

        [[links]]
        source = "i"
        target = "m"
        strength = 0.8
    """
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    unknown = sorted(set(raw) - _SPEC_KEYS)
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {unknown}")
    links = []
    for i, entry in enumerate(raw.pop("links", [])):
        if not isinstance(entry, dict):
            raise ConfigurationError(f"{path}: links[{i}] must be a table")
        extra = sorted(set(entry) - {"source", "target", "strength"})
        if extra:
            raise ConfigurationError(f"{path}: links[{i}] has unknown keys {extra}")
        try:
            links.append(
                Link(
                    source=str(entry["source"]),
                    target=str(entry["target"]),
                    strength=float(entry["strength"]),
                )
            )
        except KeyError as exc:
            raise ConfigurationError(f"{path}: links[{i}] is missing {exc.args[0]!r}") from None
    try:
        return SynthSpec(links=links, **raw)
    except TypeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
