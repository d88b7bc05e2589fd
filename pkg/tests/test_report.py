import json
from fractions import Fraction

from avpoly import EmpiricalPointSet, exact_bm, nbm
from avpoly.report import format_fraction, format_poly, from_json, result_to_dict, text_report, to_json

from conftest import THREE_PTS, FIVE_PTS


def test_json_key_order(three_pts):
    data = result_to_dict(nbm(three_pts))
    assert list(data) == ["order_ideal", "polynomials", "steps", "diagnostics", "ordering"]
    assert list(data["polynomials"][0]) == ["leading_term", "support", "coefficients", "residual_norm", "score"]
    assert data["order_ideal"] == [[0, 0], [0, 1], [0, 2]]


def test_json_round_trip_numeric(five_pts):
    r = nbm(five_pts)
    assert from_json(to_json(r)) == r
    text = to_json(r)
    assert to_json(from_json(text)) == text


def test_json_round_trip_exact():
    r = exact_bm([["1", "1"], ["3", "2"], ["5.1", "3"]])
    text = to_json(r)
    assert '"-901/10"' in text
    back = from_json(text)
    assert back == r
    assert isinstance(back.polys[2].coefficients[1], Fraction)


def test_json_without_steps(three_pts):
    data = json.loads(to_json(nbm(three_pts), steps=False))
    assert data["steps"] == []


def test_format_fraction():
    assert format_fraction(Fraction(901, 10)) == "90.1"
    assert format_fraction(Fraction(20)) == "20"
    assert format_fraction(Fraction(1, 3)) == "1/3"
    assert format_fraction(Fraction(1, 1024)) == "0.0009765625"


def test_text_report(three_pts):
    r = nbm(three_pts)
    text = text_report(r, digits=5, step_log=True)
    assert "O = {1, y, y^2}" in text
    assert "g1 = x - 2.05000 y + 1.06667" in text
    assert "score 0.016213" in text
    assert "leading_term" in text
    assert "ordering: deglex:x,y" in text


def test_text_and_json_agree(five_pts):
    from avpoly.monomials import PowerProduct, format_term

    r = nbm(five_pts)
    data = result_to_dict(r)
    text = text_report(r)
    O = ", ".join(format_term(PowerProduct(tuple(e))) for e in data["order_ideal"])
    assert f"O = {{{O}}}" in text
    for i, p in enumerate(data["polynomials"], 1):
        assert f"g{i} = {format_term(PowerProduct(tuple(p['leading_term'])))} " in text


def test_exact_text():
    r = exact_bm([["1", "1"], ["3", "2"], ["5.1", "3"]])
    text = text_report(r)
    assert "x^2 - 90.1 x + 172.2 y - 83.1" in text
    assert format_poly(r.polys[0]) == "y^2 - 20 x + 37 y - 18"
