import numpy as np
import pytest

from avpoly import EmpiricalPointSet, nbm, perturb
from avpoly.buchberger import IN_ORDER_IDEAL
from avpoly.monomials import OrderIdeal
from avpoly.verify import (
    check_p1,
    check_p2_on_zero_set,
    check_p3_border,
    check_scaling_invariance,
    check_translation_invariance,
    decision_margins,
    dependence_oracle,
    first_order_convergence,
    invariance_report,
    monte_carlo_stability,
    random_power_of_two_scaling,
    random_translation,
    sample_admissible,
    scale_points,
)

from conftest import THREE_PTS, FIVE_PTS, SQUARE_PTS, T, circle_points, terms

SQUARE_ZEROS = [[1.099, 1.099], [0.899, -1.100], [-0.899, 0.901], [-1.099, -0.898]]
ALIGNED_ZEROS = [[59 / 60, 1], [3 + 1 / 30, 2], [5 + 1 / 12, 3]]


# ---------------------------------------------------------------------------
# invariance


def test_scaling_examples(three_pts, square_pts):
    assert check_scaling_invariance(three_pts, [1, 1])
    assert check_scaling_invariance(three_pts, [2, 4])
    assert scale_points(three_pts, [2, 4]).tolerance.tolist() == [0.3, 0.0]
    assert check_scaling_invariance(square_pts, [0.5, 0.5])
    assert check_scaling_invariance(square_pts, [-0.25, 8])


def test_scaling_argument_checks(three_pts):
    with pytest.raises(ValueError):
        check_scaling_invariance(three_pts, [0, 1])
    with pytest.raises(ValueError):
        check_scaling_invariance(three_pts, [3, 1])
    assert check_scaling_invariance(three_pts, [3, 1], fuzzy=True)


def test_translation_examples(three_pts, five_pts):
    assert check_translation_invariance(three_pts, [0, 0])
    assert check_translation_invariance(three_pts, [-3, -2])
    assert check_translation_invariance(five_pts, [1, 1])


def test_invariance_report(three_pts):
    rep = invariance_report(three_pts, scale_points(three_pts, [1.5, 1.0]))
    assert rep["equal"]
    assert all(m > 0 for m in rep["min_margin"])


def test_random_transform_generators():
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = random_power_of_two_scaling(3, rng)
        e = np.log2(np.abs(d))
        assert np.all(e == np.round(e)) and np.all(np.abs(e) <= 3)
        v = random_translation(3, rng)
        assert np.all(v * 4 == np.round(v * 4))


# ---------------------------------------------------------------------------
# stability


def test_stability_zero_tolerance(three_pts):
    O = nbm(three_pts).order_ideal
    rep = monte_carlo_stability(three_pts.with_tolerance(0), O, 20, 0)
    assert rep.rank_failures == 0
    assert rep.min_smallest_singular_value == rep.unperturbed_smallest_singular_value
    bad = EmpiricalPointSet([[1, 1], [1, 1], [2, 3]], 0)
    assert monte_carlo_stability(bad, OrderIdeal(tuple(terms("1", "y", "x"))), 5, 0).rank_failures == 5


def test_stability_three_points(three_pts):
    r = nbm(three_pts)
    rep = monte_carlo_stability(three_pts, r.order_ideal, 10_000, 7, r)
    assert rep.rank_failures == 0
    assert rep.trials == 10_000
    assert rep.margin_histogram["count"] == 4


def test_stability_sees_near_singular_basis(three_pts):
    # moving 5.1 towards 5 aligns the points, where {1, y, x} loses rank
    rep = monte_carlo_stability(three_pts, OrderIdeal(tuple(terms("1", "y", "x"))), 10_000, 0)
    assert rep.min_smallest_singular_value < 1e-3 * rep.unperturbed_smallest_singular_value
    assert 0 <= rep.rank_failures <= rep.trials


def test_stability_is_deterministic_and_prefix_stable(five_pts):
    O = nbm(five_pts).order_ideal
    a = monte_carlo_stability(five_pts, O, 200, 3)
    b = monte_carlo_stability(five_pts, O, 200, 3)
    c = monte_carlo_stability(five_pts, O, 400, 3)
    assert a == b
    assert c.min_smallest_singular_value <= a.min_smallest_singular_value
    with pytest.raises(ValueError):
        monte_carlo_stability(five_pts, O, 0, 3)


def test_decision_margins_signs(five_pts):
    r = nbm(five_pts)
    m = decision_margins(r)
    # y^4 is forced once #O = s and is left out
    kept = [s for s in r.steps if s.term != T("y^4")]
    assert len(m) == len(kept)
    for margin, st in zip(m, kept):
        assert (margin > 0) == (st.decision == IN_ORDER_IDEAL)


# ---------------------------------------------------------------------------
# polynomial-set checks


def test_p1_skipped_outside_unit_box(square_pts):
    res = check_p1(nbm(square_pts), square_pts)
    assert res.passed is None and res.skipped
    assert "skipped" in res.notice


def test_p1_on_rescaled_square():
    X = EmpiricalPointSet(np.array(SQUARE_PTS) / 2, 0.06)
    r = nbm(X)
    assert r.order_ideal.terms == tuple(terms("1", "y", "x", "x y"))
    res = check_p1(r, X, [perturb(X, sample_admissible(X, i)) for i in range(20)])
    assert res.passed
    assert len(res.details) == 2


def test_p1_on_circle():
    X = EmpiricalPointSet(circle_points(), 1e-4)
    assert check_p1(nbm(X), X).passed


def test_p2_aligned_zeros(three_pts):
    res = check_p2_on_zero_set(nbm(three_pts).polys, EmpiricalPointSet(ALIGNED_ZEROS, [0.15, 0]), three_pts)
    assert res.passed


def test_p2_square_zeros_at_printed_precision(square_pts):
    polys = nbm(square_pts).polys
    assert check_p2_on_zero_set(polys, np.array(SQUARE_ZEROS), square_pts, rtol=1e-2).passed
    assert not check_p2_on_zero_set(polys, np.array(SQUARE_ZEROS), square_pts).passed


def test_p2_failures(three_pts):
    polys = nbm(three_pts).polys
    assert not check_p2_on_zero_set(polys, three_pts.coordinates, three_pts).passed
    far = np.array(ALIGNED_ZEROS) + [[0.5, 0], [0, 0], [0, 0]]
    res = check_p2_on_zero_set(polys, far, three_pts, rtol=1e9)
    assert not res.passed and "admissible" in res.notice
    with pytest.raises(ValueError):
        check_p2_on_zero_set(polys, np.zeros((2, 2)), three_pts)


def test_p3_examples(three_pts, square_pts):
    r = check_p3_border(nbm(three_pts), three_pts)
    assert r.passed
    # g1 against the interpolant of x on {1, y, y^2}; value frozen from an independent solve
    assert r.details[0]["distance"] == pytest.approx(0.1052821796, rel=1e-8)
    assert r.details[1]["distance"] < 1e-12
    assert check_p3_border(nbm(square_pts), square_pts).passed


def test_p3_exact_run():
    X = EmpiricalPointSet([[0.5, 1], [1.5, -0.5], [-1, 0.25], [2, 2]], 0)
    res = check_p3_border(nbm(X), X)
    assert res.passed
    assert max(d["distance"] for d in res.details) < 1e-12


def test_p3_skipped_when_order_ideal_short():
    X = EmpiricalPointSet([[0, 0], [0.001, 0.001], [1, 1]], 0.1)
    r = nbm(X, well_separated="ignore")
    assert len(r.order_ideal) < X.s
    assert check_p3_border(r, X).passed is None


# ---------------------------------------------------------------------------
# dependence oracle


def test_oracle_exact_dependence_at_start(three_pts):
    X = EmpiricalPointSet([[1, 1], [3, 2], [5, 3]], [0.15, 0])
    res = dependence_oracle(X, terms("1", "y"), T("x"), 5)
    assert res.minimum < 1e-14
    assert res.evaluations == 1


def test_oracle_three_points(three_pts):
    res = dependence_oracle(three_pts, terms("1", "y"), T("x"), 5)
    assert res.minimum < 1e-10
    assert np.all(np.abs(res.offsets[:, 0]) < 0.15) and np.all(res.offsets[:, 1] == 0)
    # y cannot move, so y against constants keeps the residual (-1, 0, 1)
    assert dependence_oracle(three_pts, terms("1"), T("y"), 5).minimum == pytest.approx(np.sqrt(2))


def test_oracle_agrees_with_classification(three_pts):
    r = nbm(three_pts)
    processed = []
    for st in r.steps:
        basis = [t for t in r.order_ideal.terms if r.ordering.key(t) < r.ordering.key(st.term)]
        m = dependence_oracle(three_pts, basis, st.term, 5).minimum
        if st.decision == IN_ORDER_IDEAL:
            assert m > 0.5
        else:
            assert m < 1e-10
        processed.append(st.term)
    assert len(processed) == 5


def test_oracle_dimension_cap(five_pts):
    with pytest.raises(ValueError):
        dependence_oracle(five_pts, terms("1"), T("y"), 3)


# ---------------------------------------------------------------------------
# first-order convergence


@pytest.mark.parametrize("seed", range(5))
def test_convergence_ratios_near_four(seed):
    X = EmpiricalPointSet(THREE_PTS, [0.15, 0.15])
    rep = first_order_convergence(X, terms("1", "y"), T("x"), seed)
    assert not rep.exact and rep.passed
    assert all(3.5 < r < 4.5 for r in rep.ratios)


def test_convergence_exact_cases(three_pts):
    rep = first_order_convergence(three_pts, terms("1", "y"), T("x"), 0)
    assert rep.exact and rep.passed
    rep = first_order_convergence(three_pts.with_tolerance(0), terms("1", "y"), T("x"), 0)
    assert rep.exact and rep.errors == [0.0, 0.0, 0.0]


def test_convergence_linear_term_on_constants():
    X = EmpiricalPointSet(FIVE_PTS, 0.018)
    rep = first_order_convergence(X, terms("1"), T("y"), 1)
    assert rep.passed
