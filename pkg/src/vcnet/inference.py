"""Cross-entity aggregation, significance, and network assembly.

Per-entity pair statistics (:class:`~vcnet.stats.PairFirmStats`) are
pooled over entities: the mean plain correlation E_C weights the
undirected network, and the mean constrained-correlation difference
E_dF, tested against zero, decides directed edges. The test statistic
is ``z = E_dF * sqrt(N) / sigma_dF`` — the mean over N entities in
units of its standard error — with a two-sided normal p-value. A pair
earns a directed edge only when p falls below alpha; the edge points
from the first variable to the second when E_dF > 0 and the other way
when E_dF < 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DegenerateTestError, InsufficientDataError
from .panel import DEFAULT_LABELS
from .stats import PairFirmStats

#: Two-sided p-values are floored here so that edge weights -log10(p)
#: stay finite even when the normal tail underflows.
MIN_P_VALUE = 1e-300

FORWARD = "forward"
BACKWARD = "backward"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class ZTestResult:
    """Two-sided z-test of a mean against zero."""

    z: float
    p: float


def z_test(e_df: float, sigma_df: float, n: int) -> ZTestResult:
    """Test whether a mean of n values, with population sd sigma_df, is zero.

    ``z = e_df * sqrt(n) / sigma_df``; ``p`` is the two-sided standard
    normal tail probability, floored at :data:`MIN_P_VALUE`.
    """
    n = int(n)
    if n < 2:
        raise DegenerateTestError(f"need at least 2 values to test a mean, got {n}")
    sigma_df = float(sigma_df)
    if not sigma_df > 0.0:
        raise DegenerateTestError(f"spread must be positive to test a mean, got {sigma_df}")
    z = float(e_df) * math.sqrt(n) / sigma_df
    p = max(math.erfc(abs(z) / math.sqrt(2.0)), MIN_P_VALUE)
    return ZTestResult(z=z, p=p)


@dataclass(frozen=True)
class PairAggregate:
    """Cross-entity summary of one ordered pair (x, y).

    ``e_c``/``sigma_c`` are the mean and population sd of the plain
    correlations over the ``n_pearson`` entities supporting them;
    ``e_df``/``sigma_df`` likewise for the constrained-correlation
    differences over ``n_entities`` entities. The z-test runs on the
    differences; ``direction`` is "forward" (x influences y),
    "backward", or "undecided".
    """

    pair: tuple[str, str]
    n_entities: int
    n_pearson: int
    e_c: float
    sigma_c: float
    e_df: float
    sigma_df: float
    z: float
    p: float
    alpha: float
    direction: str

    @property
    def significant(self) -> bool:
        return self.direction != UNDECIDED

    def source_target(self) -> Optional[tuple[str, str]]:
        """Influence direction as (source, target), or None if undecided."""
        if self.direction == FORWARD:
            return self.pair
        if self.direction == BACKWARD:
            return (self.pair[1], self.pair[0])
        return None


def _pooled(values: list[float]) -> tuple[float, float, int]:
    """Population mean/sd of a list (order-independent by prior sorting)."""
    arr = np.array(values, dtype=float)
    mean = float(arr.sum() / arr.size)
    dev = arr - mean
    sd = float(math.sqrt((dev * dev).sum() / arr.size))
    return mean, sd, arr.size


def aggregate_pair(
    stats: Iterable[PairFirmStats],
    *,
    alpha: float = 0.05,
    pair: Optional[tuple[str, str]] = None,
) -> PairAggregate:
    """Pool one pair's per-entity statistics and decide its direction.

    Entities whose pearson (respectively delta_f) is None are skipped
    for that quantity; an aggregate with no usable pearson at all
    raises :class:`~vcnet.errors.InsufficientDataError`. A delta_f
    pool too small or too flat to test yields an undecided aggregate
    with ``z = nan`` and ``p = 1``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    stats = list(stats)
    if pair is None:
        if not stats:
            raise InsufficientDataError("no entity statistics given")
        pair = stats[0].pair
    mismatched = [s.pair for s in stats if s.pair != pair]
    if mismatched:
        raise ValueError(f"statistics for pair {mismatched[0]} mixed into pair {pair}")

    # Sorting by entity id makes the pooled sums independent of the
    # order entities arrived in (e.g. CSV row order).
    stats.sort(key=lambda s: s.entity)

    pearson_values = [s.pearson for s in stats if s.pearson is not None]
    if not pearson_values:
        raise InsufficientDataError(f"no entity supports a correlation for pair {pair}")
    e_c, sigma_c, n_pearson = _pooled(pearson_values)

    delta_values = [s.delta_f for s in stats if s.delta_f is not None]
    if delta_values:
        e_df, sigma_df, n_entities = _pooled(delta_values)
    else:
        e_df, sigma_df, n_entities = math.nan, math.nan, 0

    # A pool of identical deltas has no spread to test against; the
    # max > min check catches this exactly, where the computed sigma
    # can come out as rounding dust instead of zero.
    if n_entities >= 2 and max(delta_values) > min(delta_values):
        try:
            test = z_test(e_df, sigma_df, n_entities)
            z, p = test.z, test.p
        except DegenerateTestError:
            z, p = math.nan, 1.0
    else:
        z, p = math.nan, 1.0

    if p < alpha and e_df > 0.0:
        direction = FORWARD
    elif p < alpha and e_df < 0.0:
        direction = BACKWARD
    else:
        direction = UNDECIDED

    return PairAggregate(
        pair=pair,
        n_entities=n_entities,
        n_pearson=n_pearson,
        e_c=e_c,
        sigma_c=sigma_c,
        e_df=e_df,
        sigma_df=sigma_df,
        z=z,
        p=p,
        alpha=alpha,
        direction=direction,
    )


# ---------------------------------------------------------------------------
# Networks


@dataclass(frozen=True)
class CorrelationEdge:
    """Undirected edge weighted by the mean plain correlation."""

    a: str
    b: str
    weight: float
    sigma: float
    n: int


@dataclass(frozen=True)
class InfluenceEdge:
    """Directed edge from the decided direction of one pair.

    ``weight = -log10(p)``: the edge is heavier the stronger the
    evidence for the direction.
    """

    source: str
    target: str
    weight: float
    e_df: float
    z: float
    p: float
    n: int


@dataclass
class InfluenceNetwork:
    """The undirected correlation network and directed influence network.

    Both graphs share the node set; edges keep the order the
    aggregates were given in.
    """

    nodes: list[str]
    labels: dict[str, str]
    correlation_edges: list[CorrelationEdge]
    influence_edges: list[InfluenceEdge]
    aggregates: list[PairAggregate] = field(default_factory=list)

    def node_label(self, code: str) -> str:
        return self.labels.get(code, code)

    def to_json_dict(self) -> dict:
        """Node-link representation of both graphs, JSON-serializable."""
        return {
            "nodes": [{"id": c, "label": self.node_label(c)} for c in self.nodes],
            "correlation": {
                "directed": False,
                "edges": [
                    {
                        "a": e.a,
                        "b": e.b,
                        "weight": e.weight,
                        "sigma": e.sigma,
                        "n": e.n,
                    }
                    for e in self.correlation_edges
                ],
            },
            "influence": {
                "directed": True,
                "edges": [
                    {
                        "source": e.source,
                        "target": e.target,
                        "weight": e.weight,
                        "e_df": e.e_df,
                        "z": e.z,
                        "p": e.p,
                        "n": e.n,
                    }
                    for e in self.influence_edges
                ],
            },
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=False) + "\n"

    def correlation_dot(self) -> str:
        """Graphviz source for the undirected correlation network.

        Pen width maps |weight| in [0, 1] linearly to [0.5, 4.5]:
        penwidth = 0.5 + 4 * |weight|.
        """
        lines = [
            "graph correlation {",
            "  // edge: mean correlation over entities;"
            " penwidth = 0.5 + 4 * |weight|",
            "  layout=circo;",
        ]
        for code in self.nodes:
            lines.append(f'  "{code}" [label="{self.node_label(code)}"];')
        for e in self.correlation_edges:
            pw = 0.5 + 4.0 * min(abs(e.weight), 1.0)
            lines.append(
                f'  "{e.a}" -- "{e.b}" [label="{e.weight:.3g}", penwidth={pw:.2f}];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def influence_dot(self) -> str:
        """Graphviz source for the directed influence network.

        Pen width maps weight = -log10(p), capped at 16, linearly to
        [0.5, 4.5]: penwidth = 0.5 + 0.25 * min(weight, 16).
        """
        lines = [
            "digraph influence {",
            "  // edge: decided influence direction;"
            " penwidth = 0.5 + 0.25 * min(-log10(p), 16)",
            "  layout=circo;",
        ]
        for code in self.nodes:
            lines.append(f'  "{code}" [label="{self.node_label(code)}"];')
        for e in self.influence_edges:
            pw = 0.5 + 0.25 * min(e.weight, 16.0)
            lines.append(
                f'  "{e.source}" -> "{e.target}" [label="p={e.p:.2e}", penwidth={pw:.2f}];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_networks(
    aggregates: Sequence[PairAggregate],
    *,
    labels: Optional[Mapping[str, str]] = None,
    nodes: Optional[Sequence[str]] = None,
) -> InfluenceNetwork:
    """Assemble both networks from per-pair aggregates.

    Every aggregate contributes one undirected edge; decided aggregates
    contribute one directed edge each. Two aggregates for the same
    unordered pair are rejected. ``nodes`` fixes the node order (it
    must cover every pair); by default nodes appear in first-touch
    order of the aggregates.
    """
    seen: dict[frozenset, tuple[str, str]] = {}
    for agg in aggregates:
        key = frozenset(agg.pair)
        if agg.pair[0] == agg.pair[1]:
            raise ValueError(f"pair {agg.pair} relates a variable to itself")
        if key in seen:
            raise ValueError(
                f"pairs {seen[key]} and {agg.pair} both describe the unordered pair "
                f"{set(agg.pair)}"
            )
        seen[key] = agg.pair

    if nodes is None:
        node_list: list[str] = []
        for agg in aggregates:
            for code in agg.pair:
                if code not in node_list:
                    node_list.append(code)
    else:
        node_list = [str(c) for c in nodes]
        covered = {c for agg in aggregates for c in agg.pair}
        missing = sorted(covered - set(node_list))
        if missing:
            raise ValueError(f"nodes {missing} appear in pairs but not in the node list")

    label_map = dict(DEFAULT_LABELS) if labels is None else dict(labels)

    correlation_edges = [
        CorrelationEdge(
            a=agg.pair[0],
            b=agg.pair[1],
            weight=agg.e_c,
            sigma=agg.sigma_c,
            n=agg.n_pearson,
        )
        for agg in aggregates
    ]
    influence_edges = []
    for agg in aggregates:
        st = agg.source_target()
        if st is None:
            continue
        influence_edges.append(
            InfluenceEdge(
                source=st[0],
                target=st[1],
                weight=-math.log10(agg.p),
                e_df=agg.e_df,
                z=agg.z,
                p=agg.p,
                n=agg.n_entities,
            )
        )
    return InfluenceNetwork(
        nodes=node_list,
        labels=label_map,
        correlation_edges=correlation_edges,
        influence_edges=influence_edges,
        aggregates=list(aggregates),
    )
