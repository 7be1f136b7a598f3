import datetime as dt
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from msmscaling import (
    DegenerateInputError,
    DomainError,
    MsmParams,
    ParseError,
    PriceSeries,
    ReturnSeries,
    gmm_estimate,
    load_csv,
    simulate,
    standardize,
    to_returns,
    write_csv,
)


def test_load_date_price(tmp_path):
    f = tmp_path / "dow.csv"
    f.write_text("date,price\n2000-01-03,100.5\n2000-01-04,101.0\n2000-01-05,99.75\n")
    p = load_csv(f, date_column="date")
    np.testing.assert_array_equal(p.values, [100.5, 101.0, 99.75])
    assert p.dates == [dt.date(2000, 1, 3), dt.date(2000, 1, 4), dt.date(2000, 1, 5)]
    assert p.label == "dow" and p.n_skipped == 0


def test_load_blank_row_counted(tmp_path, caplog):
    f = tmp_path / "p.csv"
    f.write_text("date,price\n2000-01-03,1\n\n2000-01-04,2\n2000-01-05,3\n")
    with caplog.at_level(logging.WARNING):
        p = load_csv(f)
    assert p.values.size == 3 and p.n_skipped == 1
    assert "skipped 1 rows" in caplog.text


def test_load_missing_and_non_numeric(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("price\n1\nNA\n\n2\n.\n3\n4\n")
    p = load_csv(f)
    np.testing.assert_array_equal(p.values, [1, 2, 3, 4])
    assert p.n_skipped == 3


def test_load_headerless_with_column(tmp_path):
    f = tmp_path / "raw.txt"
    f.write_text("# rates\n5.0;x\n5.25;y\n5.5;z\n")
    p = load_csv(f, column=0, delimiter=";", header=False)
    np.testing.assert_array_equal(p.values, [5.0, 5.25, 5.5])
    assert p.dates is None


def test_load_sniffs_headerless(tmp_path):
    f = tmp_path / "v.csv"
    f.write_text("1.5\n2.5\n3.5\n")
    assert load_csv(f).values.tolist() == [1.5, 2.5, 3.5]


def test_bad_date_has_line_number(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("date,price\n2000-01-03,1\n03/01/2000,2\n2000-01-05,3\n")
    with pytest.raises(ParseError, match="line 3"):
        load_csv(f, date_column=0)


def test_load_errors(tmp_path):
    with pytest.raises(OSError):
        load_csv(tmp_path / "missing.csv")
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.raises(DegenerateInputError):
        load_csv(empty)
    text = tmp_path / "t.csv"
    text.write_text("price\na\nb\n")
    with pytest.raises(DegenerateInputError):
        load_csv(text)
    with pytest.raises(ParseError):
        load_csv(text, column="close")


def test_price_series_invariants():
    with pytest.raises(DegenerateInputError):
        PriceSeries([1.0, 2.0])
    with pytest.raises(DomainError):
        PriceSeries([1.0, 2.0, 3.0], dates=[dt.date(2000, 1, 2)] * 3)


def test_log_returns_example():
    r = to_returns(PriceSeries([1.0, np.e, np.e]), "log_diff")
    np.testing.assert_allclose(r.values, [1.0, 0.0], atol=1e-15)
    assert r.transform == "log_diff"


def test_diff_returns_example():
    r = to_returns(PriceSeries([5.0, 5.25, 5.5]), "diff")
    np.testing.assert_allclose(r.values, [0.25, 0.25])
    assert r.transform == "diff"


def test_log_returns_need_positive_prices():
    with pytest.raises(DomainError):
        to_returns(PriceSeries([1.0, -1.0, 2.0]), "log_diff")
    with pytest.raises(DomainError):
        to_returns(PriceSeries([1.0, 2.0, 3.0]), "pct")


@settings(max_examples=50)
@given(arrays(float, st.integers(3, 300), elements=st.floats(1e-3, 1e4)))
def test_log_returns_reconstruct_prices(prices):
    r = to_returns(PriceSeries(prices))
    rebuilt = np.exp(np.concatenate([[0.0], np.cumsum(r.values)]))
    np.testing.assert_allclose(rebuilt, prices / prices[0], rtol=1e-12 * prices.size)


def test_standardize_examples():
    z = standardize(ReturnSeries([1.0, -1.0]))
    np.testing.assert_array_equal(z.values, [1.0, -1.0])
    assert z.standardized
    with pytest.raises(DegenerateInputError):
        standardize(ReturnSeries([2.0, 2.0, 2.0]))


@settings(max_examples=50)
@given(arrays(float, st.integers(2, 200), elements=st.floats(-1e3, 1e3)))
def test_standardize_unit_std_and_idempotent(x):
    if np.std(x) < 1e-6:
        return
    z = standardize(ReturnSeries(x))
    assert np.std(z.values) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(standardize(z).values, z.values, rtol=1e-12)


def test_write_csv_round_trip(tmp_path):
    r = ReturnSeries(np.random.default_rng(0).standard_normal(50))
    f = tmp_path / "r.csv"
    write_csv(r, f, comments=["seed: 0"])
    assert f.read_text().startswith("# seed: 0\nreturn\n")
    back = load_csv(f)
    np.testing.assert_array_equal(back.values, r.values)


def test_pipeline_standardization_leaves_m0(tmp_path):
    r = simulate(MsmParams(1.5, 1.0, 8), 6000, seed=4).values * 0.01
    f = tmp_path / "prices.csv"
    f.write_text("price\n" + "\n".join(repr(float(v)) for v in 100 * np.exp(np.concatenate([[0], np.cumsum(r)]))))
    rets = to_returns(load_csv(f))
    a = gmm_estimate(rets, 8)
    b = gmm_estimate(standardize(rets), 8)
    assert b.m0_hat == pytest.approx(a.m0_hat, abs=1e-6)
    assert b.sigma_hat == pytest.approx(1.0, abs=0.05)
