"""Numerical Buchberger-Moller algorithm and its exact rational counterpart.

The numeric loop walks candidate power products in increasing term order,
exactly as the classical Buchberger-Moller algorithm does. A candidate joins
the order ideal when the residual of its least-squares fit against the
current ideal strictly exceeds the first-order perturbation bound in some
component. Otherwise it becomes the leading term of an almost vanishing
polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .monomials import DEGLEX, OrderIdeal, PowerProduct, TermOrdering, next_candidate
from .numerics import EPS, dependence_bound, least_squares, projector_complement
from .points import EmpiricalPointSet, eval_matrix, eval_vector

IN_ORDER_IDEAL = "order_ideal"
LEADING_TERM = "leading_term"


class NumericalFault(RuntimeError):
    """Raised when the loop meets a rank-deficient basis or non-finite values."""


@dataclass(frozen=True)
class AlmostVanishingPoly:
    """``g = t - sum(alpha_i t_i)`` with support listed in decreasing term order."""

    leading_term: PowerProduct
    support: tuple[PowerProduct, ...]
    coefficients: tuple
    residual_norm: float
    score: float

    def __post_init__(self):
        if not self.support or self.support[0] != self.leading_term:
            raise ValueError("support must start with the leading term")
        if len(self.support) != len(self.coefficients):
            raise ValueError("support and coefficients differ in length")
        if self.coefficients[0] != 1:
            raise ValueError("polynomial must be monic in its leading term")

    @property
    def degree(self) -> int:
        return max(t.degree for t in self.support)

    @property
    def coefficient_norm(self) -> float:
        return math.hypot(*(float(c) for c in self.coefficients))

    def coefficient_of(self, t: PowerProduct):
        for u, c in zip(self.support, self.coefficients):
            if u == t:
                return c
        return 0

    def evaluate(self, X: EmpiricalPointSet | np.ndarray) -> np.ndarray:
        M = np.asarray(eval_matrix(self.support, X))
        return M @ np.array([float(c) for c in self.coefficients])


@dataclass(frozen=True)
class Step:
    """One processed candidate: its residual, the bound it was held against, the outcome."""

    term: PowerProduct
    residual: tuple
    bound: tuple
    decision: str
    noise_floor: float = 0.0

    def margins(self) -> np.ndarray:
        """``|rho_i| - bound_i`` per component."""
        r = np.abs(np.array(self.residual, dtype=float))
        return r - np.array(self.bound, dtype=float)


@dataclass(frozen=True)
class Diagnostics:
    unit_box: bool
    well_separated: bool
    quotient_basis: bool
    exact: bool = False


@dataclass(frozen=True)
class NbmResult:
    order_ideal: OrderIdeal
    polys: tuple[AlmostVanishingPoly, ...]
    steps: tuple[Step, ...] = field(default=(), compare=True)
    diagnostics: Diagnostics | None = None

    @property
    def ordering(self) -> TermOrdering:
        return self.order_ideal.ordering

    @property
    def leading_terms(self) -> list[PowerProduct]:
        return [g.leading_term for g in self.polys]


def is_numerically_dependent(
    residual, bound, noise_floor: float | None = None, rule: str = "any"
) -> bool:
    """Decide whether a candidate's residual is explained by the data tolerance.

    ``rule="any"`` (default): the candidate is independent as soon as one
    component satisfies ``|residual_i| > bound_i``; dependent means
    ``|residual| <= bound`` holds in every component.

    ``rule="all"``: independent only if ``|residual_i| > bound_i`` in every
    component.

    With ``noise_floor`` given, a residual whose norm is at or below it is
    dependent. Under "any" a component must also exceed the floor to count;
    under "all" components where both sides sit at or below the floor are
    left out.
    """
    r = np.abs(np.asarray(residual, dtype=float))
    b = np.asarray(bound, dtype=float)
    if r.shape != b.shape:
        raise ValueError(f"residual {r.shape} and bound {b.shape} differ in shape")
    if rule not in ("any", "all"):
        raise ValueError(f"unknown rule {rule!r}")
    if noise_floor is not None and np.linalg.norm(r) <= noise_floor:
        return True
    nf = 0.0 if noise_floor is None else noise_floor
    if rule == "any":
        return not bool(np.any(r > np.maximum(b, nf)))
    if noise_floor is None:
        return not bool(np.all(r > b))
    active = ~((r <= nf) & (b <= nf))
    return not bool(np.all(r[active] > b[active]))


def noise_floor(X: EmpiricalPointSet, b: np.ndarray) -> float:
    return X.s * EPS * float(np.linalg.norm(b))


def nbm(
    X: EmpiricalPointSet,
    ordering: TermOrdering = DEGLEX,
    well_separated: str = "warn",
    rule: str = "any",
) -> NbmResult:
    """Compute the order ideal and almost vanishing polynomials of ``X``.

    ``rule`` selects the componentwise test, see :func:`is_numerically_dependent`.
    """
    ws = X.check_well_separated(well_separated)
    O: list[PowerProduct] = []
    polys: list[AlmostVanishingPoly] = []
    steps: list[Step] = []
    processed: set[PowerProduct] = set()
    while (t := next_candidate(O, [g.leading_term for g in polys], processed, ordering, X.n)) is not None:
        processed.add(t)
        M = np.asarray(eval_matrix(O, X))
        b = eval_vector(t, X)
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
            raise NumericalFault(f"non-finite evaluation at candidate {t}")
        sol = least_squares(M, b)
        if not sol.rank_ok:
            raise NumericalFault(
                f"evaluation matrix of the order ideal lost rank at candidate {t} "
                f"(smallest singular value {sol.smallest_singular_value:.3e})"
            )
        P = projector_complement(M)
        bound = dependence_bound(X, O, t, sol.alpha, P).bound
        if not (np.all(np.isfinite(sol.residual)) and np.all(np.isfinite(bound))):
            raise NumericalFault(f"non-finite residual or bound at candidate {t}")
        eta = noise_floor(X, b)
        if not np.isfinite(eta):
            raise NumericalFault(f"evaluation norm overflows at candidate {t}")
        # with #O = s the columns span R^s and the residual is zero in exact arithmetic
        dependent = len(O) >= X.s or is_numerically_dependent(sol.residual, bound, eta, rule)
        steps.append(
            Step(
                t,
                tuple(float(v) for v in sol.residual),
                tuple(float(v) for v in bound),
                LEADING_TERM if dependent else IN_ORDER_IDEAL,
                eta,
            )
        )
        if dependent:
            polys.append(_make_poly(t, O, sol.alpha, float(np.linalg.norm(sol.residual))))
        else:
            O.append(t)
    return NbmResult(
        OrderIdeal(tuple(O), ordering),
        tuple(polys),
        tuple(steps),
        Diagnostics(X.in_unit_box(), ws, len(O) == X.s),
    )


def _make_poly(t, O, alpha, residual_norm) -> AlmostVanishingPoly:
    support = (t,) + tuple(reversed(O))
    coeffs = (1.0,) + tuple(-float(a) for a in reversed(list(alpha)))
    cnorm = math.hypot(*(float(c) for c in coeffs))
    return AlmostVanishingPoly(t, support, coeffs, residual_norm, residual_norm / cnorm)


def score(g: AlmostVanishingPoly, X: EmpiricalPointSet | np.ndarray) -> float:
    """``||g(X)||_2 / ||c||_2`` where ``c`` is the coefficient vector of ``g``."""
    cnorm = g.coefficient_norm
    if cnorm == 0:
        raise ValueError("zero coefficient vector")
    return float(np.linalg.norm(g.evaluate(X))) / cnorm


# ---------------------------------------------------------------------------
# exact rational Buchberger-Moller


def to_fraction(v) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (its binary value)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    return Fraction(v)


def _exact_eval(t: PowerProduct, pts) -> list[Fraction]:
    out = []
    for p in pts:
        v = Fraction(1)
        for c, e in zip(p, t.exponents):
            if e:
                v *= c**e
        out.append(v)
    return out


def solve_rational(A: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve a nonsingular square system by Gauss-Jordan elimination over the rationals."""
    k = len(A)
    aug = [list(row) + [r] for row, r in zip(A, rhs)]
    for col in range(k):
        piv = next((i for i in range(col, k) if aug[i][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for i in range(k):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * c for a, c in zip(aug[i], aug[col])]
    return [aug[i][k] for i in range(k)]


def exact_least_squares(columns: list[list[Fraction]], b: list[Fraction]):
    """Exact least-squares fit of ``b`` on linearly independent ``columns``.

    Returns ``(alpha, residual)``; the residual is zero iff ``b`` lies in the span.
    """
    k = len(columns)
    if k == 0:
        return [], list(b)
    gram = [[sum(ci * cj for ci, cj in zip(columns[i], columns[j])) for j in range(k)] for i in range(k)]
    rhs = [sum(ci * bi for ci, bi in zip(columns[i], b)) for i in range(k)]
    alpha = solve_rational(gram, rhs)
    residual = [bi - sum(a * col[r] for a, col in zip(alpha, columns)) for r, bi in enumerate(b)]
    return alpha, residual


def exact_bm(points: Sequence[Sequence], ordering: TermOrdering = DEGLEX) -> NbmResult:
    """Classical Buchberger-Moller over the rationals.

    Returns the reduced Groebner basis of the vanishing ideal of ``points``
    (as monic polynomials with ``Fraction`` coefficients) and its quotient basis.
    """
    pts = [tuple(to_fraction(c) for c in p) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points have different dimensions")
    s = len(pts)
    fpts = np.array([[float(c) for c in p] for p in pts])
    O: list[PowerProduct] = []
    cols: list[list[Fraction]] = []
    polys: list[AlmostVanishingPoly] = []
    steps: list[Step] = []
    processed: set[PowerProduct] = set()
    while (t := next_candidate(O, [g.leading_term for g in polys], processed, ordering, n)) is not None:
        processed.add(t)
        b = _exact_eval(t, pts)
        alpha, residual = exact_least_squares(cols, b)
        dependent = all(r == 0 for r in residual)
        steps.append(
            Step(t, tuple(residual), (Fraction(0),) * s, LEADING_TERM if dependent else IN_ORDER_IDEAL)
        )
        if dependent:
            support = (t,) + tuple(reversed(O))
            coeffs = (Fraction(1),) + tuple(-a for a in reversed(alpha))
            g = AlmostVanishingPoly(t, support, coeffs, 0.0, 0.0)
            res = float(np.linalg.norm(g.evaluate(fpts)))
            polys.append(AlmostVanishingPoly(t, support, coeffs, res, res / g.coefficient_norm))
        else:
            O.append(t)
            cols.append(b)
    distinct = len(set(pts)) == s
    return NbmResult(
        OrderIdeal(tuple(O), ordering),
        tuple(polys),
        tuple(steps),
        Diagnostics(bool(np.all(np.abs(fpts) <= 1)), distinct, len(O) == s, exact=True),
    )
