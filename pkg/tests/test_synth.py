"""Synthetic generator: stream stability, rate round-trips, validation."""

import math

import numpy as np
import pytest

from vcnet import (
    ConfigurationError,
    Link,
    SynthSpec,
    VCNetworkAnalyzer,
    compute_rates,
    generate,
    load_spec,
)
from vcnet.synth import LEVEL_FLOOR, _entity_rates, _entity_rng


def small_spec(**kwargs):
    defaults = dict(n_entities=10, seed=123, n_years=10)
    defaults.update(kwargs)
    return SynthSpec(**defaults)


def test_generate_shape_and_identity():
    ds = generate(small_spec())
    assert ds.n_entities == 10
    assert ds.entities[0] == "e00000" and ds.entities[9] == "e00009"
    assert ds.year_start == 1990 and ds.year_end == 1999
    assert ds.codes() == ["r", "i", "p", "o", "m"]
    assert ds.variable("m").label == "market capitalization"
    for c in ds.codes():
        assert np.isfinite(ds.values(c)).all()
    # own-denominator levels stay strictly positive; base level anchors
    for c in ("r", "o", "m"):
        assert (ds.values(c) > 0.0).all()
    assert (ds.values("r")[:, 0] == 100.0).all()


def test_entity_streams_are_stable_under_growth():
    a = generate(small_spec(n_entities=4))
    b = generate(small_spec(n_entities=9))
    for c in a.codes():
        assert np.array_equal(a.values(c), b.values(c)[:4])


def test_seeds_and_entities_differ():
    ds = generate(small_spec())
    assert not np.array_equal(ds.values("r")[0], ds.values("r")[1])
    other = generate(small_spec(seed=124))
    assert not np.array_equal(ds.values("r"), other.values("r"))


def test_generate_is_reproducible():
    a = generate(small_spec())
    b = generate(small_spec())
    assert a.equals(b)


def test_planted_rates_survive_the_analyzer_transform():
    # The analyzer's rate transform must recover exactly the signals
    # the generator planted (up to the floor on multiplicative growth).
    spec = small_spec(n_entities=8, links=[("i", "m", 0.6), ("o", "r", 0.5)])
    ds = generate(spec)
    panel = compute_rates(ds)
    denominators = spec.resolved_denominators()
    for k in range(spec.n_entities):
        planted = _entity_rates(spec, _entity_rng(spec.seed, k))
        for c in spec.variables:
            expected = np.asarray(planted[c])
            if denominators.get(c, c) == c:
                expected = np.maximum(1.0 + expected, LEVEL_FLOOR) - 1.0
            np.testing.assert_allclose(
                panel.values(c)[k], expected, rtol=1e-9, atol=1e-12
            )


def test_rate_signals_have_requested_scale():
    spec = small_spec(n_entities=300, n_years=20, noise_sd=0.07)
    pooled = np.concatenate(
        [_entity_rates(spec, _entity_rng(spec.seed, k))["m"] for k in range(300)]
    )
    assert pooled.std() == pytest.approx(0.07, rel=0.05)
    assert abs(pooled.mean()) < 0.01


def test_linked_rates_correlate_with_planted_strength():
    spec = small_spec(n_entities=400, n_years=20, links=[("i", "m", 0.8)])
    rows = []
    for k in range(400):
        rates = _entity_rates(spec, _entity_rng(spec.seed, k))
        rows.append(np.corrcoef(rates["i"], rates["m"])[0, 1])
    assert np.mean(rows) == pytest.approx(0.8, abs=0.05)


def test_strength_zero_is_no_link():
    base = small_spec()
    linked = small_spec(links=[("i", "m", 0.0)])
    a, b = generate(base), generate(linked)
    assert a.equals(b)


def test_chain_and_fan_in_links():
    spec = small_spec(links=[("r", "i", 0.5), ("i", "m", 0.5), ("p", "m", 0.5)])
    ds = generate(spec)
    assert np.isfinite(ds.values("m")).all()
    with pytest.raises(ConfigurationError):
        small_spec(links=[("r", "m", 0.9), ("i", "m", 0.9)])  # 0.81+0.81 > 1


def test_link_validation_errors():
    with pytest.raises(ConfigurationError):
        small_spec(links=[("i", "i", 0.5)])
    with pytest.raises(ConfigurationError):
        small_spec(links=[("i", "zz", 0.5)])
    with pytest.raises(ConfigurationError):
        small_spec(links=[("i", "m", 1.5)])
    with pytest.raises(ConfigurationError):
        small_spec(links=[("i", "m", -0.1)])
    with pytest.raises(ConfigurationError):
        small_spec(links=[("i", "m", 0.5), ("m", "o", 0.5), ("o", "i", 0.5)])


def test_spec_validation_errors():
    with pytest.raises(ConfigurationError):
        small_spec(n_entities=0)
    with pytest.raises(ConfigurationError):
        small_spec(n_years=1)
    with pytest.raises(ConfigurationError):
        small_spec(noise_sd=0.0)
    with pytest.raises(ConfigurationError):
        small_spec(base_level=-5.0)
    with pytest.raises(ConfigurationError):
        small_spec(seed=-1)
    with pytest.raises(ConfigurationError):
        small_spec(n_entities=2.5)
    with pytest.raises(ConfigurationError):
        small_spec(variables=["r", "r"])
    with pytest.raises(ConfigurationError):
        small_spec(variables=[])
    with pytest.raises(ConfigurationError):
        small_spec(variables=["a", "b"], denominators={"a": "zz"})
    with pytest.raises(ConfigurationError):
        small_spec(denominators={"i": "p", "p": "i"})  # denominator cycle


def test_custom_variables_and_denominators():
    spec = SynthSpec(
        n_entities=5,
        seed=9,
        n_years=8,
        variables=["a", "b"],
        labels={"a": "alpha"},
        denominators={"b": "a"},
        links=[Link("a", "b", 0.4)],
    )
    ds = generate(spec)
    assert ds.codes() == ["a", "b"]
    assert ds.variable("a").label == "alpha"
    assert ds.variable("b").label == "b"
    panel = compute_rates(ds, denominators={"b": "a"})
    assert np.isfinite(panel.values("b")).all()


def test_direction_recovery_quick():
    spec = SynthSpec(n_entities=500, seed=77, links=[("p", "o", 0.8)])
    analyzer = VCNetworkAnalyzer(pairs=[("p", "o")]).fit(generate(spec))
    agg = analyzer.aggregates_[("p", "o")]
    assert agg.direction == "forward"
    assert agg.z > 4.0


def test_load_spec_round_trip(tmp_path):
    path = tmp_path / "spec.toml"
    path.write_text(
        """
n_entities = 42
seed = 11
year_start = 1985
n_years = 15
noise_sd = 0.12
base_level = 50.0
variables = ["r", "i", "m"]

[labels]
i = "income"

[denominators]
i = "r"

[[links]]
source = "i"
target = "m"
strength = 0.5
""",
        encoding="utf-8",
    )
    spec = load_spec(path)
    assert spec.n_entities == 42
    assert spec.seed == 11
    assert spec.year_start == 1985
    assert spec.n_years == 15
    assert spec.noise_sd == 0.12
    assert spec.base_level == 50.0
    assert list(spec.variables) == ["r", "i", "m"]
    assert spec.links == [Link("i", "m", 0.5)]
    assert spec.labels == {"i": "income"}
    ds = generate(spec)
    assert ds.year_start == 1985 and ds.n_entities == 42


def test_load_spec_defaults(tmp_path):
    path = tmp_path / "minimal.toml"
    path.write_text("seed = 3\n", encoding="utf-8")
    spec = load_spec(path)
    assert spec.n_entities == 2000
    assert spec.n_years == 29
    assert spec.noise_sd == 0.1
    assert list(spec.variables) == ["r", "i", "p", "o", "m"]
    assert spec.links == []


def test_load_spec_errors(tmp_path):
    cases = {
        "unknown_key.toml": "entities = 5\n",
        "bad_link_table.toml": "links = [5]\n",
        "link_extra_key.toml": '[[links]]\nsource = "i"\ntarget = "m"\nstrength = 0.5\nlag = 1\n',
        "link_missing_strength.toml": '[[links]]\nsource = "i"\ntarget = "m"\n',
        "bad_toml.toml": "n_entities = = 5\n",
        "bad_value.toml": 'n_entities = "lots"\n',
        "bad_cycle.toml": (
            '[[links]]\nsource = "i"\ntarget = "m"\nstrength = 0.5\n'
            '[[links]]\nsource = "m"\ntarget = "i"\nstrength = 0.5\n'
        ),
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_spec(path)


def test_laplace_rates_have_heavy_tails():
    # kurtosis of the base signal should sit near the Laplace value (6),
    # clearly above the Gaussian value (3)
    spec = small_spec(n_entities=120, n_years=25)
    pooled = np.concatenate(
        [_entity_rates(spec, _entity_rng(spec.seed, k))["r"] for k in range(120)]
    )
    z = (pooled - pooled.mean()) / pooled.std()
    kurtosis = np.mean(z**4)
    assert kurtosis > 4.5
