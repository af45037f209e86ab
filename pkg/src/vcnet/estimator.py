"""Scikit-learn style estimators wrapping the analysis pipeline."""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Optional, Sequence, Union

import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .inference import PairAggregate, aggregate_pair, build_networks
from .panel import MIN_RATE_POINTS, Dataset, eligible_entities
from .rates import RatePanel, compute_rates
from .stats import vc_pair_batch
from .validation import (
    check_alpha,
    check_dataset,
    check_denominators,
    check_h,
    check_min_rate_points,
    check_pairs,
)

DatasetLike = Union[Dataset, pd.DataFrame]


class RateTransformer(TransformerMixin, BaseEstimator):
    """Turn a level panel into a rate panel.

    Parameters
    ----------
    denominators : mapping code -> code, optional
        Denominator variable per code; codes not in the map divide by
        their own previous level. None uses the package default
        (income-like codes divide by revenue).
    """

    def __init__(self, denominators: Optional[Mapping[str, str]] = None):
        self.denominators = denominators

    def fit(self, X: DatasetLike, y=None) -> "RateTransformer":
        dataset = check_dataset(X)
        check_denominators(self.denominators, dataset.codes())
        self.dataset_ = dataset
        return self

    def transform(self, X: DatasetLike) -> RatePanel:
        dataset = check_dataset(X)
        denominators = check_denominators(self.denominators, dataset.codes())
        return compute_rates(dataset, denominators)


class VCNetworkAnalyzer(BaseEstimator):
    """Infer correlation and influence networks from a level panel.

    ``fit`` runs the whole pipeline: rate transforms, per-entity pair
    statistics restricted to entities with complete data for each pair,
    cross-entity aggregation with a z-test per pair, and assembly of
    the undirected correlation network and the directed influence
    network.

    Parameters
    ----------
    h : float, default 0.2
        Volatility threshold (in standard deviations of the
        conditioning rate series; the boundary year is included).
    alpha : float, default 0.05
        Two-sided significance level for directing an edge.
    min_rate_points : int, default 4
        Minimum rate points an entity must supply for a pair.
    denominators : mapping code -> code, optional
        As in :class:`RateTransformer`.
    pairs : sequence of (code, code), optional
        Pairs to analyze, in order. None analyzes every unordered pair
        of dataset variables in dataset order.

    Attributes
    ----------
    dataset_ : Dataset
        The validated input panel.
    rate_panel_ : RatePanel
        Rate series for every variable.
    eligible_ : dict pair -> list of entity ids
        Entities whose data fully supports each pair.
    pair_stats_ : dict pair -> list of PairFirmStats
        Per-entity statistics for each pair (eligible entities only).
    aggregates_ : dict pair -> PairAggregate
        Cross-entity summary and direction decision per pair.
    network_ : InfluenceNetwork
        Both output graphs.
    """

    def __init__(
        self,
        h: float = 0.2,
        alpha: float = 0.05,
        min_rate_points: int = MIN_RATE_POINTS,
        denominators: Optional[Mapping[str, str]] = None,
        pairs: Optional[Sequence[tuple[str, str]]] = None,
    ):
        self.h = h
        self.alpha = alpha
        self.min_rate_points = min_rate_points
        self.denominators = denominators
        self.pairs = pairs

    def fit(self, X: DatasetLike, y=None) -> "VCNetworkAnalyzer":
        dataset = check_dataset(X)
        h = check_h(self.h)
        alpha = check_alpha(self.alpha)
        min_rate_points = check_min_rate_points(self.min_rate_points)
        denominators = check_denominators(self.denominators, dataset.codes())
        pairs = check_pairs(self.pairs, dataset.codes())
        if pairs is None:
            pairs = list(combinations(dataset.codes(), 2))

        self.dataset_ = dataset
        self.rate_panel_ = compute_rates(dataset, denominators)
        self.eligible_ = {}
        self.pair_stats_ = {}
        self.aggregates_ = {}
        entity_arr = list(dataset.entities)
        for pair in pairs:
            mask = eligible_entities(
                dataset, pair, denominators=denominators, min_rate_points=min_rate_points
            )
            entities = [e for e, keep in zip(entity_arr, mask) if keep]
            batch = vc_pair_batch(
                self.rate_panel_.values(pair[0])[mask],
                self.rate_panel_.values(pair[1])[mask],
                h,
                min_points=min_rate_points,
                pair=pair,
                entities=entities,
            )
            stats = batch.entity_stats()
            self.eligible_[pair] = entities
            self.pair_stats_[pair] = stats
            self.aggregates_[pair] = aggregate_pair(stats, alpha=alpha, pair=pair)

        self.network_ = build_networks(
            list(self.aggregates_.values()),
            labels={v.code: v.label for v in dataset.variables},
            nodes=dataset.codes(),
        )
        return self

    def aggregate(self, pair: tuple[str, str]) -> PairAggregate:
        """The fitted aggregate for one pair, either orientation.

        Asking for (b, a) when (a, b) was analyzed returns the same
        decision seen from the other side (statistics negated/swapped
        accordingly is not needed at aggregate level: the stored
        orientation is returned).
        """
        self._check_fitted()
        if pair in self.aggregates_:
            return self.aggregates_[pair]
        flipped = (pair[1], pair[0])
        if flipped in self.aggregates_:
            return self.aggregates_[flipped]
        raise KeyError(f"pair {pair} was not analyzed")

    def influence_edges(self) -> list:
        """Directed edges of the fitted influence network."""
        self._check_fitted()
        return list(self.network_.influence_edges)

    def _check_fitted(self) -> None:
        if not hasattr(self, "network_"):
            raise RuntimeError("this analyzer is not fitted yet; call fit(X) first")
