import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from volclust.data_pipeline import (
    DEFAULT_FEATURE_ORDER,
    FeatureMatrix,
    PriceSeries,
    ReturnSeries,
    align,
    build_features,
    log_returns,
    parse_price_csv,
    read_feature_csv,
    read_price_csv,
    rolling_volatility,
    standardize,
    write_feature_csv,
)
from volclust.config import load_config
from volclust.errors import ConfigError, DataError

mp.dps = 50


def _dates(n, start="2013-01-01"):
    return np.datetime64(start) + np.arange(n)


def _price(values, name="X"):
    return PriceSeries(name, _dates(len(values)), values)


def oracle_returns(values):
    return [float(mp.log(mpf(b) / mpf(a))) for a, b in zip(values[:-1], values[1:])]


def oracle_vol(returns, window):
    out = []
    for i in range(window - 1, len(returns)):
        w = [mpf(r) for r in returns[i - window + 1:i + 1]]
        mean = sum(w) / window
        out.append(float(mp.sqrt(sum((x - mean) ** 2 for x in w) / (window - 1))))
    return out


# parsing

def test_parse_minimal():
    s = parse_price_csv("date,close\n2013-01-01,100\n2013-01-02,101\n", "X")
    assert len(s) == 2
    assert s.values.tolist() == [100.0, 101.0]


def test_parse_negative_close_names_line():
    with pytest.raises(DataError, match="line 3"):
        parse_price_csv("date,close\n2013-01-01,100\n2013-01-02,-5\n", "X", source="p.csv")


@pytest.mark.parametrize("body,msg", [
    ("", "header"),
    ("date,price\n2013-01-01,1\n", "header"),
    ("date,close\n", "no data"),
    ("date,close\n2013-01-01,abc\n", "line 2"),
    ("date,close\n2013-13-01,1\n", "line 2"),
    ("date,close\n2013-01-01,1\n2013-01-01,2\n", "duplicate"),
    ("date,close\n2013-01-01,1,2\n", "line 2"),
    ("date,close\n2013-01-01,nan\n", "line 2"),
])
def test_parse_rejects(body, msg):
    with pytest.raises(DataError, match=msg):
        parse_price_csv(body, "X", source="f.csv")


def test_parse_sorts_and_ignores_extra_columns():
    s = parse_price_csv("Date,Open,Close\n2013-01-03,1,3\n2013-01-01,1,2\n", "X")
    assert s.dates.tolist() == [np.datetime64("2013-01-01"), np.datetime64("2013-01-03")]
    assert s.values.tolist() == [2.0, 3.0]


def test_fixture_file_length(fixture_path):
    assert len(read_price_csv(fixture_path / "NIFTYSDR.csv")) == 494


def test_missing_file_names_path(tmp_path):
    with pytest.raises(DataError, match="nope.csv"):
        read_price_csv(tmp_path / "nope.csv")


def test_series_is_immutable():
    s = _price([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


# returns

def test_returns_examples():
    assert log_returns(_price([100, 100, 100])).values.tolist() == [0.0, 0.0]
    assert log_returns(_price([100, 200])).values[0] == pytest.approx(0.693147, abs=1e-6)
    r = log_returns(_price([100, 110, 99])).values
    np.testing.assert_allclose(r, [0.0953102, -0.1053605], atol=1e-7)


def test_returns_dated_at_later_observation():
    p = _price([1.0, 2.0, 3.0])
    assert log_returns(p).dates.tolist() == p.dates[1:].tolist()


def test_returns_need_two_prices():
    with pytest.raises(DataError):
        log_returns(_price([1.0]))


def test_returns_and_vol_match_high_precision_oracle():
    r = np.random.default_rng(7)
    worst_r = worst_v = 0.0
    for _ in range(1000):
        n = int(r.integers(12, 40))
        prices = 100 * np.exp(np.cumsum(r.normal(0, 0.02, n)))
        ret = log_returns(_price(prices))
        worst_r = max(worst_r, np.max(np.abs(ret.values - oracle_returns(prices))))
        vol = rolling_volatility(ret, 10)
        worst_v = max(worst_v, np.max(np.abs(vol.values - oracle_vol(ret.values, 10))))
    assert worst_r <= 1e-10
    assert worst_v <= 1e-10


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(0.01, 1e6), min_size=2, max_size=30),
    st.floats(1e-3, 1e3),
)
def test_returns_scale_invariant(values, c):
    a = log_returns(_price(values)).values
    b = log_returns(_price([v * c for v in values])).values
    np.testing.assert_allclose(b, a, rtol=0, atol=1e-12)


# volatility

def test_vol_examples():
    rs = ReturnSeries("R", _dates(5), [0.01] * 5)
    assert np.all(rolling_volatility(rs, 3).values == 0.0)
    v = rolling_volatility(ReturnSeries("R", _dates(2), [0.01, -0.01]), 2)
    assert v.values[0] == pytest.approx(0.0141421, abs=1e-7)
    assert len(rolling_volatility(ReturnSeries("R", _dates(10), np.arange(10.0)), 10)) == 1


def test_vol_length_arithmetic():
    rs = ReturnSeries("R", _dates(504), np.random.default_rng(0).normal(size=504))
    v = rolling_volatility(rs, 10)
    assert len(v) == 495
    assert v.dates[0] == rs.dates[9]


def test_vol_window_errors():
    rs = ReturnSeries("R", _dates(5), np.zeros(5))
    with pytest.raises(ConfigError):
        rolling_volatility(rs, 1)
    with pytest.raises(DataError):
        rolling_volatility(rs, 6)


# alignment

def test_align_identical_dates():
    m = align([_price([1.0, 2.0, 3.0], "A"), _price([4.0, 5.0, 6.0], "B")])
    assert (m.n, m.p) == (3, 2)
    assert m.names == ("A", "B")


def test_align_intersection():
    a = PriceSeries("A", _dates(3), [1.0, 2.0, 3.0])
    b = PriceSeries("B", _dates(3, "2013-01-02"), [4.0, 5.0, 6.0])
    m = align([a, b])
    assert m.dates.tolist() == _dates(2, "2013-01-02").tolist()
    np.testing.assert_array_equal(m.values, [[2.0, 4.0], [3.0, 5.0]])


def test_align_disjoint_fails():
    a = PriceSeries("A", _dates(2), [1.0, 2.0])
    b = PriceSeries("B", _dates(2, "2014-01-01"), [1.0, 2.0])
    with pytest.raises(DataError):
        align([a, b])


def test_fixture_alignment_matches_bruteforce(fixture_path):
    cfg = load_config(fixture_path / "catalog.yaml")
    m = build_features(cfg.catalog)
    date_sets = []
    for entry in cfg.catalog.entries:
        p = read_price_csv(entry.path)
        if entry.kind.value == "level":
            date_sets.append(set(p.dates.tolist()))
        else:
            date_sets.append(set(p.dates[cfg.catalog.window:].tolist()))
    common = set.intersection(*date_sets)
    assert m.n == len(common)
    assert m.p == 9
    assert m.names == DEFAULT_FEATURE_ORDER


# standardization

def test_standardize_simple():
    m = FeatureMatrix(_dates(3), ("a",), [[1.0], [2.0], [3.0]])
    np.testing.assert_allclose(standardize(m).values.ravel(), [-1.0, 0.0, 1.0], atol=1e-15)


def test_standardize_idempotent_and_mixed_scale():
    r = np.random.default_rng(3)
    vals = np.column_stack([20 + 3 * r.normal(size=200), 0.01 + 0.002 * r.normal(size=200)])
    z = standardize(FeatureMatrix(_dates(200), ("vix", "vol"), vals))
    np.testing.assert_allclose(z.values.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(z.values.std(axis=0, ddof=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(standardize(z).values, z.values, atol=1e-12)


def test_standardize_constant_column_named():
    m = FeatureMatrix(_dates(3), ("a", "flat"), [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    with pytest.raises(DataError, match="flat"):
        standardize(m)


def test_feature_csv_round_trip(tmp_path, fixture_path):
    m = standardize(build_features(load_config(fixture_path / "catalog.yaml").catalog))
    write_feature_csv(m, tmp_path / "f.csv")
    back = read_feature_csv(tmp_path / "f.csv")
    assert back.names == m.names
    assert back.standardized
    np.testing.assert_allclose(back.values, m.values, rtol=1e-9, atol=1e-12)
    assert back.dates.tolist() == m.dates.tolist()


def test_select_and_prefix():
    m = FeatureMatrix(_dates(2), ("a", "b", "c"), [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert m.prefix(2).names == ("a", "b")
    np.testing.assert_array_equal(m.select(["c", "a"]).values, [[3.0, 1.0], [6.0, 4.0]])
    with pytest.raises(ConfigError):
        m.select(["z"])
