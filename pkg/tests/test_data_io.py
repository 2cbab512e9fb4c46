import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combfit.data_io import danish_fixture_path, load_claims, summarize, write_claims
from combfit.errors import DomainError, ParseError
from combfit.comb_bernoulli import ClaimSeries


def _write(tmp_path, text, name="c.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_with_dates_and_units(tmp_path):
    p = _write(tmp_path, "date,building,contents\n1980-01-01,0,1500000\n1980-01-02,2000000,0\n")
    s = load_claims(p, unit="dkk")
    assert s.labels == ("building", "contents")
    assert s.dates == ("1980-01-01", "1980-01-02")
    np.testing.assert_allclose(s.values, [[0.0, 1.5], [2.0, 0.0]])


def test_load_column_subset(tmp_path):
    p = _write(tmp_path, "x1,x2,x3\n1,2,3\n0,0,1\n")
    s = load_claims(p, columns=["x3", "x1"])
    assert s.labels == ("x3", "x1")
    np.testing.assert_array_equal(s.values, [[3, 1], [1, 0]])
    with pytest.raises(ParseError):
        load_claims(p, columns=["nope"])


@pytest.mark.parametrize(
    "text",
    ["", "x1,x2\n", "x1,x2\n1\n", "x1,x2\n1,\n", "x1,x2\n1,abc\n", "x1,x2\n1,inf\n"],
)
def test_parse_errors(tmp_path, text):
    with pytest.raises(ParseError):
        load_claims(_write(tmp_path, text))


def test_negative_is_domain_error(tmp_path):
    with pytest.raises(DomainError, match="row 1"):
        load_claims(_write(tmp_path, "x1\n1\n-2\n"))


def test_missing_file_and_unit(tmp_path):
    with pytest.raises(ParseError):
        load_claims(tmp_path / "absent.csv")
    with pytest.raises(ParseError):
        load_claims(_write(tmp_path, "x1\n1\n"), unit="eur")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e6), min_size=3, max_size=3), min_size=1, max_size=20))
def test_write_load_round_trip(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("rt") / "s.csv"
    s = ClaimSeries(np.array(rows), labels=("a", "b", "c"))
    write_claims(p, s)
    back = load_claims(p)
    np.testing.assert_array_equal(back.values, s.values)
    assert back.labels == s.labels


def test_summarize_counts():
    X = np.array([[0, 0, 0], [1, 2, 0], [1, 0, 3], [1, 1, 1], [0, 5, 0]], dtype=float)
    s = summarize(ClaimSeries(X))
    assert s.n_days == 5
    assert [c.n_positive for c in s.columns] == [3, 3, 2]
    assert s.cojumps[0, 1] == 2 and s.cojumps[0, 2] == 2 and s.cojumps[1, 2] == 1
    assert s.nojumps[0, 1] == 1 and s.nojumps[1, 2] == 1
    assert s.all_cojumps == 1 and s.all_nojumps == 1
    assert sum(s.exact_counts.values()) == 5
    assert s.exact_counts[(1,)] == 1
    doc = s.to_dict()
    assert doc["pairs"]["x1,x2"] == {"cojumps": 2, "nojumps": 1}
    assert doc["exact_counts"]["{1,2,3}"] == 1
    assert s.columns[1].mean == pytest.approx(8 / 3)


def test_fixture_path_env(tmp_path, monkeypatch):
    p = _write(tmp_path, "date,building,contents,profits\n")
    monkeypatch.setenv("COMBFIT_DANISH", str(p))
    assert danish_fixture_path() == p
