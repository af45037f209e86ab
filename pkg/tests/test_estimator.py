"""Estimator API: parameter handling, fitted attributes, sklearn contract."""

import numpy as np
import pandas as pd
import pytest
from sklearn.base import clone

from vcnet import (
    ConfigurationError,
    Dataset,
    RateTransformer,
    SynthSpec,
    VCNetworkAnalyzer,
    VariableId,
    compute_rates,
    generate,
)


@pytest.fixture(scope="module")
def panel():
    spec = SynthSpec(n_entities=120, seed=5, n_years=12, links=[("i", "m", 0.7)])
    return generate(spec)


def test_get_set_params_round_trip():
    analyzer = VCNetworkAnalyzer(h=0.3, alpha=0.01, min_rate_points=5)
    params = analyzer.get_params()
    assert params["h"] == 0.3
    assert params["alpha"] == 0.01
    assert params["min_rate_points"] == 5
    assert params["denominators"] is None and params["pairs"] is None
    analyzer.set_params(h=0.1)
    assert analyzer.h == 0.1
    cloned = clone(analyzer)
    assert cloned.get_params() == analyzer.get_params()


def test_fit_populates_attributes(panel):
    analyzer = VCNetworkAnalyzer().fit(panel)
    assert analyzer.dataset_ is panel
    assert analyzer.rate_panel_.codes() == panel.codes()
    assert set(analyzer.aggregates_) == {
        (a, b)
        for i, a in enumerate(panel.codes())
        for b in panel.codes()[i + 1 :]
    }
    assert len(analyzer.network_.correlation_edges) == 10
    for pair, entities in analyzer.eligible_.items():
        assert len(analyzer.pair_stats_[pair]) == len(entities)
    edges = analyzer.influence_edges()
    assert ("i", "m") in {(e.source, e.target) for e in edges}


def test_fit_accepts_long_dataframe(panel):
    rows = []
    for e in panel.entities:
        for j, year in enumerate(panel.years()):
            row = {"entity": e, "year": year}
            for c in panel.codes():
                row[c] = panel.values(c)[panel.entity_row(e), j]
            rows.append(row)
    df = pd.DataFrame(rows)
    from_df = VCNetworkAnalyzer().fit(df)
    from_ds = VCNetworkAnalyzer().fit(panel)
    assert list(from_df.aggregates_.values()) == list(from_ds.aggregates_.values())


def test_fit_is_deterministic(panel):
    a = VCNetworkAnalyzer().fit(panel)
    b = VCNetworkAnalyzer().fit(panel)
    assert list(a.aggregates_.values()) == list(b.aggregates_.values())


def test_pairs_parameter_restricts_analysis(panel):
    analyzer = VCNetworkAnalyzer(pairs=[("m", "i")]).fit(panel)
    assert list(analyzer.aggregates_) == [("m", "i")]
    # reversed orientation flips the decision but not the edge
    full = VCNetworkAnalyzer().fit(panel)
    flipped = analyzer.aggregates_[("m", "i")]
    original = full.aggregates_[("i", "m")]
    assert flipped.e_df == pytest.approx(-original.e_df, rel=1e-9)
    assert {(e.source, e.target) for e in analyzer.network_.influence_edges} == {
        (e.source, e.target)
        for e in full.network_.influence_edges
        if {e.source, e.target} == {"i", "m"}
    }
    assert analyzer.aggregate(("i", "m")) is flipped
    with pytest.raises(KeyError):
        analyzer.aggregate(("i", "o"))


def test_parameter_validation(panel):
    with pytest.raises(ValueError):
        VCNetworkAnalyzer(h=-0.1).fit(panel)
    with pytest.raises(TypeError):
        VCNetworkAnalyzer(h="0.2").fit(panel)
    with pytest.raises(ValueError):
        VCNetworkAnalyzer(alpha=1.5).fit(panel)
    with pytest.raises(ValueError):
        VCNetworkAnalyzer(min_rate_points=1).fit(panel)
    with pytest.raises(TypeError):
        VCNetworkAnalyzer(min_rate_points=4.5).fit(panel)
    with pytest.raises(ConfigurationError):
        VCNetworkAnalyzer(denominators={"i": "nope"}).fit(panel)
    with pytest.raises(ConfigurationError):
        VCNetworkAnalyzer(pairs=[("i", "i")]).fit(panel)
    with pytest.raises(ConfigurationError):
        VCNetworkAnalyzer(pairs=[("i", "m"), ("m", "i")]).fit(panel)
    with pytest.raises(TypeError):
        VCNetworkAnalyzer().fit([[1, 2], [3, 4]])


def test_unfitted_access_raises():
    with pytest.raises(RuntimeError):
        VCNetworkAnalyzer().influence_edges()
    with pytest.raises(RuntimeError):
        VCNetworkAnalyzer().aggregate(("i", "m"))


def test_eligibility_drops_entities_per_pair(panel):
    values = {c: np.array(panel.values(c)) for c in panel.codes()}
    # entity 0 loses one market-cap year; entity 1 loses one revenue year
    values["m"][0, 3] = np.nan
    values["r"][1, 2] = np.nan
    broken = Dataset(
        panel.entities, panel.variables, panel.year_start, panel.year_end, values
    )
    analyzer = VCNetworkAnalyzer().fit(broken)
    e0, e1 = panel.entities[0], panel.entities[1]
    assert e0 not in analyzer.eligible_[("i", "m")]
    assert e1 not in analyzer.eligible_[("i", "m")]  # i divides by r
    assert e0 in analyzer.eligible_[("r", "i")]
    assert e1 not in analyzer.eligible_[("r", "i")]
    assert e0 not in analyzer.eligible_[("o", "m")]
    assert e1 in analyzer.eligible_[("o", "m")]  # o and m never touch r
    n_full = panel.n_entities
    assert len(analyzer.eligible_[("o", "m")]) == n_full - 1
    assert len(analyzer.eligible_[("i", "m")]) == n_full - 2


def test_rate_transformer(panel):
    transformer = RateTransformer()
    out = transformer.fit_transform(panel)
    expected = compute_rates(panel)
    assert out.codes() == expected.codes()
    for c in out.codes():
        assert np.array_equal(out.values(c), expected.values(c), equal_nan=True)
    own = RateTransformer(denominators={}).fit_transform(panel)
    assert not np.array_equal(
        own.values("i"), expected.values("i"), equal_nan=True
    )
    assert transformer.dataset_ is panel
    with pytest.raises(ConfigurationError):
        RateTransformer(denominators={"i": "zz"}).fit(panel)


def test_rate_transformer_sklearn_contract():
    transformer = RateTransformer(denominators={"i": "r"})
    assert transformer.get_params() == {"denominators": {"i": "r"}}
    cloned = clone(transformer)
    assert cloned.get_params() == transformer.get_params()


def test_h_zero_against_h_default_differ(panel):
    loose = VCNetworkAnalyzer(h=0.0).fit(panel)
    tight = VCNetworkAnalyzer(h=0.6).fit(panel)
    pair = ("i", "m")
    assert loose.aggregates_[pair].e_df == 0.0
    assert tight.aggregates_[pair].e_df != loose.aggregates_[pair].e_df