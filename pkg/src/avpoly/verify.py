"""Checks of the computed order ideal and polynomials against their guarantees.

Invariance of the order ideal under scaling and translation, Monte-Carlo
stability of the evaluation matrix, the almost-vanishing bounds, zero-set and
border-basis comparisons, a brute-force dependence search and the quadratic
decay test of the first-order predictors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .buchberger import IN_ORDER_IDEAL, AlmostVanishingPoly, NbmResult, nbm, score
from .monomials import DEGLEX, OrderIdeal, PowerProduct, TermOrdering
from .numerics import EPS, first_order_deltas, has_full_column_rank, least_squares
from .points import (
    EmpiricalPointSet,
    eval_matrix,
    eval_vector,
    is_admissible_offset,
    perturb,
    sample_admissible,
)


@dataclass
class CheckResult:
    """Outcome of one check; ``passed`` is None when the check was skipped."""

    name: str
    passed: bool | None
    notice: str = ""
    details: list = field(default_factory=list)

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "notice": self.notice, "details": self.details}


# ---------------------------------------------------------------------------
# invariance


def _is_power_of_two(v: float) -> bool:
    m, _ = math.frexp(abs(v))
    return v != 0 and m == 0.5


def scale_points(X: EmpiricalPointSet, d) -> EmpiricalPointSet:
    d = np.asarray(d, dtype=float)
    if d.shape != (X.n,) or np.any(d == 0):
        raise ValueError("need n nonzero scale factors")
    return EmpiricalPointSet(X.coordinates * d, np.abs(d) * X.tolerance)


def translate_points(X: EmpiricalPointSet, v) -> EmpiricalPointSet:
    v = np.asarray(v, dtype=float)
    if v.shape != (X.n,):
        raise ValueError("need n translation components")
    return EmpiricalPointSet(X.coordinates + v, X.tolerance)


def _same_order_ideal(X, Y, ord, rule) -> bool:
    a = nbm(X, ord, well_separated="ignore", rule=rule)
    b = nbm(Y, ord, well_separated="ignore", rule=rule)
    return set(a.order_ideal.terms) == set(b.order_ideal.terms)


def check_scaling_invariance(
    X: EmpiricalPointSet, d, ord: TermOrdering = DEGLEX, fuzzy: bool = False, rule: str = "any"
) -> bool:
    """Same order ideal for ``X`` and for ``X`` scaled by ``d`` with tolerance ``|d| eps``.

    Factors must be powers of two unless ``fuzzy`` is set, so that the scaled
    data are exact in floating point.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d == 0):
        raise ValueError("zero scale factor")
    if not fuzzy and not all(_is_power_of_two(v) for v in d):
        raise ValueError("scale factors must be powers of two (pass fuzzy=True to allow any)")
    return _same_order_ideal(X, scale_points(X, d), ord, rule)


def check_translation_invariance(
    X: EmpiricalPointSet, v, ord: TermOrdering = DEGLEX, rule: str = "any"
) -> bool:
    """Same order ideal for ``X`` and for ``X + v`` with unchanged tolerance."""
    return _same_order_ideal(X, translate_points(X, v), ord, rule)


def invariance_report(X: EmpiricalPointSet, Y: EmpiricalPointSet, ord: TermOrdering = DEGLEX) -> dict:
    """Compare two runs and report, for each, the decision closest to flipping.

    ``min_margin`` is the smallest ``|max_i(|rho_i| - bound_i)|`` over the logged decisions.
    """
    a = nbm(X, ord, well_separated="ignore")
    b = nbm(Y, ord, well_separated="ignore")
    return {
        "equal": set(a.order_ideal.terms) == set(b.order_ideal.terms),
        "min_margin": [float(np.abs(decision_margins(r)).min(initial=np.inf)) for r in (a, b)],
    }


def random_power_of_two_scaling(n: int, rng: np.random.Generator, low: int = -3, high: int = 3) -> np.ndarray:
    exps = rng.integers(low, high + 1, size=n)
    signs = rng.choice([-1.0, 1.0], size=n)
    return signs * np.ldexp(1.0, exps)


def random_translation(n: int, rng: np.random.Generator, quarters: int = 32) -> np.ndarray:
    """Multiples of 1/4, exactly representable."""
    return rng.integers(-quarters, quarters + 1, size=n) / 4.0


# ---------------------------------------------------------------------------
# stability


def decision_margins(result: NbmResult) -> np.ndarray:
    """Distance of each decision from flipping: ``max_i(|rho_i| - bound_i)`` per step.

    Positive for order-ideal members, non-positive for leading terms. Forced
    decisions (a full order ideal, a residual under the noise floor) are left out.
    """
    out = []
    full = 0
    for st in result.steps:
        if st.decision == IN_ORDER_IDEAL:
            full += 1
        elif full >= len(st.residual) or np.linalg.norm(st.residual) <= st.noise_floor:
            continue
        out.append(float(np.max(st.margins())))
    return np.array(out)


@dataclass
class StabilityReport:
    trials: int
    rank_failures: int
    min_smallest_singular_value: float
    unperturbed_smallest_singular_value: float
    margin_histogram: dict

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "rank_failures": self.rank_failures,
            "min_smallest_singular_value": self.min_smallest_singular_value,
            "unperturbed_smallest_singular_value": self.unperturbed_smallest_singular_value,
            "margin_histogram": self.margin_histogram,
        }


_MARGIN_BINS = [-16, -12, -8, -6, -4, -3, -2, -1, 0, 1, 2, 4]


def margin_summary(margins: np.ndarray) -> dict:
    if margins.size == 0:
        return {"count": 0}
    logs = np.log10(np.maximum(np.abs(margins), 1e-300))
    counts, _ = np.histogram(np.clip(logs, _MARGIN_BINS[0], _MARGIN_BINS[-1]), bins=_MARGIN_BINS)
    return {
        "count": int(margins.size),
        "min": float(margins.min()),
        "median": float(np.median(margins)),
        "max": float(margins.max()),
        "log10_abs_bins": _MARGIN_BINS,
        "log10_abs_counts": counts.tolist(),
    }


def monte_carlo_stability(
    X: EmpiricalPointSet,
    O,
    trials: int = 1000,
    seed: int = 0,
    result: NbmResult | None = None,
) -> StabilityReport:
    """Sample admissible perturbations and track the rank of the evaluation matrix of ``O``.

    Trial ``i`` uses the ``i``-th block of one seeded stream, so a longer run
    extends a shorter one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    terms = list(O)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=(trials,) + X.coordinates.shape)
    while np.any(u <= -1.0):
        bad = u <= -1.0
        u[bad] = rng.uniform(-1.0, 1.0, size=int(bad.sum()))
    coords = X.coordinates[None] + u * X.tolerance
    exps = np.array([t.exponents for t in terms], dtype=float)  # k x n
    M = np.prod(coords[:, :, None, :] ** exps[None, None], axis=3)  # trials x s x k
    sv = np.linalg.svd(M, compute_uv=False)
    smin, smax = sv[:, -1], sv[:, 0]
    failures = int(np.sum(~(smin > X.s * EPS * smax)))
    base = np.linalg.svd(np.asarray(eval_matrix(terms, X)), compute_uv=False)
    margins = decision_margins(result) if result is not None else np.zeros(0)
    return StabilityReport(trials, failures, float(smin.min()), float(base[-1]), margin_summary(margins))


# ---------------------------------------------------------------------------
# properties of the polynomial set


def check_p1(
    result: NbmResult,
    X: EmpiricalPointSet,
    perturbed: list[EmpiricalPointSet] | None = None,
) -> CheckResult:
    """``score(g, X) < s deg(g) sum(eps)`` for every ``g``, on unit-box data.

    For each admissible perturbation in ``perturbed`` also checks
    ``score(g, X~) < 2 s deg(g) sum(eps) + s deg(g)^2 sum(eps)^2``.
    """
    if not X.in_unit_box():
        return CheckResult("p1", None, "skipped: coordinates are not all in [-1, 1]")
    s, tol = X.s, float(X.tolerance.sum())
    ok = True
    details = []
    for g in result.polys:
        bound = s * g.degree * tol
        sc = score(g, X)
        row = {"leading_term": str(g.leading_term), "score": sc, "bound": bound}
        ok &= sc < bound
        if perturbed:
            slack = s * g.degree**2 * tol**2
            worst = max(score(g, Y) for Y in perturbed)
            row["perturbed_score"] = worst
            row["perturbed_bound"] = 2 * bound + slack
            ok &= worst < 2 * bound + slack
        details.append(row)
    return CheckResult("p1", bool(ok), details=details)


def check_p2_on_zero_set(
    polys, claimed_zero_set: EmpiricalPointSet | np.ndarray, X: EmpiricalPointSet, rtol: float = 1e-10
) -> CheckResult:
    """The claimed points are an admissible perturbation of ``X`` and every ``g`` vanishes there.

    Vanishing means ``|g(p)| <= rtol * ||c||`` at each claimed point.
    """
    Z = np.asarray(
        claimed_zero_set.coordinates if isinstance(claimed_zero_set, EmpiricalPointSet) else claimed_zero_set,
        dtype=float,
    )
    if Z.shape != X.coordinates.shape:
        raise ValueError(f"claimed zero set has shape {Z.shape}, expected {X.coordinates.shape}")
    admissible = is_admissible_offset(Z - X.coordinates, X.tolerance)
    details = []
    vanish = True
    for g in polys:
        worst = float(np.max(np.abs(g.evaluate(Z))))
        limit = rtol * g.coefficient_norm
        vanish &= worst <= limit
        details.append({"leading_term": str(g.leading_term), "max_abs_value": worst, "limit": limit})
    notice = "" if admissible else "claimed zero set is not an admissible perturbation"
    return CheckResult("p2", bool(admissible and vanish), notice, details)


def border_coefficients(g: AlmostVanishingPoly, O: OrderIdeal, X: EmpiricalPointSet) -> dict:
    """Coefficients of the border-basis polynomial with the leading term of ``g``."""
    M = np.asarray(eval_matrix(O.terms, X))
    beta = np.linalg.solve(M, eval_vector(g.leading_term, X))
    out = {g.leading_term: 1.0}
    out.update({t: -b for t, b in zip(O.terms, beta)})
    return out


def check_p3_border(result: NbmResult, X: EmpiricalPointSet) -> CheckResult:
    """Distance of each ``g`` from its border-basis partner, against ``deg(g) cond(M_O) sum(eps)``.

    The bound carries an extra ``s cond(M_O) eps_mach`` for the rounding of the solves.
    """
    O = result.order_ideal
    if len(O) != X.s:
        return CheckResult("p3", None, f"skipped: #O = {len(O)} differs from s = {X.s}")
    M = np.asarray(eval_matrix(O.terms, X))
    if not has_full_column_rank(np.linalg.svd(M, compute_uv=False), X.s):
        raise np.linalg.LinAlgError("evaluation matrix of the order ideal is singular")
    kappa = float(np.linalg.cond(M))
    tol = float(X.tolerance.sum())
    ok = True
    details = []
    for g in result.polys:
        cb = border_coefficients(g, O, X)
        terms = [g.leading_term] + list(O.terms)
        diff = np.array([cb[t] - float(g.coefficient_of(t)) for t in terms])
        dist = float(np.linalg.norm(diff)) / g.coefficient_norm
        # roundoff allowance so that exact data (zero tolerance) can pass
        bound = g.degree * kappa * tol + X.s * kappa * EPS
        ok &= dist <= bound
        details.append({"leading_term": str(g.leading_term), "distance": dist, "bound": bound})
    return CheckResult("p3", bool(ok), details=details)


# ---------------------------------------------------------------------------
# brute-force dependence search


@dataclass
class OracleResult:
    minimum: float
    offsets: np.ndarray
    evaluations: int


def _batch_residual_norms(coords: np.ndarray, O: list[PowerProduct], t: PowerProduct) -> np.ndarray:
    """Least-squares residual norms for a batch of point sets ``coords`` (B x s x n)."""
    b = np.prod(coords ** np.array(t.exponents, dtype=float), axis=2)
    if not O:
        return np.linalg.norm(b, axis=1)
    exps = np.array([r.exponents for r in O], dtype=float)
    M = np.prod(coords[:, :, None, :] ** exps[None, None], axis=3)
    Q, _ = np.linalg.qr(M)
    proj = np.einsum("bij,bj->bi", Q, np.einsum("bji,bj->bi", Q, b))
    return np.linalg.norm(b - proj, axis=1)


def dependence_oracle(
    X: EmpiricalPointSet,
    O,
    t: PowerProduct,
    grid_density: int = 5,
    refine: bool = True,
    max_dims: int = 8,
) -> OracleResult:
    """Smallest ``||rho(X~)||`` found over admissible perturbations ``X~``.

    Evaluates the unperturbed set first, then a grid of ``grid_density`` nodes
    per perturbed coordinate inside the open box, then polishes the best grid
    point with coordinate-wise parabolic steps on ``||rho||^2``.
    """
    O = list(O)
    dims = [(i, k) for i in range(X.s) for k in range(X.n) if X.tolerance[k] > 0]
    if len(dims) > max_dims:
        raise ValueError(f"{len(dims)} perturbation dimensions exceed the cap of {max_dims}")
    base = X.coordinates
    tol = np.array([X.tolerance[k] for _, k in dims])
    rows = np.array([i for i, _ in dims], dtype=int)
    cols = np.array([k for _, k in dims], dtype=int)

    def evaluate(E: np.ndarray) -> np.ndarray:
        coords = np.repeat(base[None], E.shape[0], axis=0)
        coords[:, rows, cols] += E
        return _batch_residual_norms(coords, O, t)

    zero = np.zeros((1, len(dims)))
    best_val = float(evaluate(zero)[0])
    best = zero[0]
    count = 1
    if best_val <= X.s * EPS * np.linalg.norm(eval_vector(t, X)) or not dims:
        return OracleResult(best_val, _full_offsets(X, dims, best), count)

    nodes = np.linspace(-1.0, 1.0, grid_density + 2)[1:-1]
    grid = itertools.product(nodes, repeat=len(dims))
    while True:
        chunk = np.array(list(itertools.islice(grid, 50_000)))
        if chunk.size == 0:
            break
        E = chunk * tol
        vals = evaluate(E)
        count += len(E)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best = float(vals[j]), E[j]

    if refine:
        best, best_val, extra = _parabolic_polish(evaluate, best, best_val, tol)
        count += extra
    return OracleResult(best_val, _full_offsets(X, dims, best), count)


def _full_offsets(X, dims, e) -> np.ndarray:
    out = np.zeros_like(X.coordinates)
    for (i, k), v in zip(dims, e):
        out[i, k] = v
    return out


def _parabolic_polish(evaluate, x, fx, tol, sweeps: int = 60):
    """Coordinate-wise minimisation of f^2 by three-point parabolas, kept inside the open box."""
    lim = tol * (1 - 1e-9)
    step = tol / 4
    count = 0
    for _ in range(sweeps):
        improved = False
        for d in range(len(x)):
            h = step[d]
            trial = np.repeat(x[None], 2, axis=0)
            trial[0, d] = np.clip(x[d] - h, -lim[d], lim[d])
            trial[1, d] = np.clip(x[d] + h, -lim[d], lim[d])
            fm, fp = evaluate(trial)
            count += 2
            cands = [trial[0], trial[1]]
            a, c = trial[0, d] - x[d], trial[1, d] - x[d]
            q0, qm, qp = fx**2, fm**2, fp**2
            if a != 0 and c != 0 and a != c:
                # vertex of the parabola through (a, qm), (0, q0), (c, qp)
                num = qm * c**2 - qp * a**2 - q0 * (c**2 - a**2)
                den = qm * c - qp * a - q0 * (c - a)
                if den != 0:
                    v = x.copy()
                    v[d] = np.clip(x[d] + 0.5 * num / den, -lim[d], lim[d])
                    cands.append(v)
            vals = evaluate(np.array(cands)) if len(cands) > 2 else np.array([fm, fp])
            if len(cands) > 2:
                count += 1
                vals[:2] = fm, fp
            j = int(np.argmin(vals))
            if vals[j] < fx:
                x, fx, improved = cands[j], float(vals[j]), True
        if not improved:
            step = step / 2
        if np.all(step < tol * 1e-12) or fx == 0.0:
            break
    return x, fx, count


# ---------------------------------------------------------------------------
# first-order predictor convergence


@dataclass
class ConvergenceReport:
    scales: list
    errors: list
    ratios: list
    exact: bool
    passed: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("scales", "errors", "ratios", "exact", "passed")}


def first_order_convergence(
    X: EmpiricalPointSet,
    O,
    t: PowerProduct,
    seed: int = 0,
    h: float = 1.0,
    levels: int = 3,
    ratio_range: tuple[float, float] = (3.0, 5.0),
) -> ConvergenceReport:
    """Halve one admissible perturbation and watch the predictor error fall by ~4 each time.

    The error at scale ``h`` is ``max(||drho_actual - drho_pred||, ||dalpha_actual - dalpha_pred||)``.
    When every error is at roundoff level (the map is linear in the perturbed
    coordinates, or nothing is perturbed) the report is flagged ``exact``.
    """
    O = list(O)
    M = eval_matrix(O, X)
    b = eval_vector(t, X)
    sol = least_squares(M, b)
    E = sample_admissible(X, seed)
    scales = [h / 2**j for j in range(levels)]
    errors = []
    for sc in scales:
        Eh = E.scaled(sc)
        Xp = perturb(X, Eh)
        solp = least_squares(eval_matrix(O, Xp), eval_vector(t, Xp))
        pred = first_order_deltas(X, O, t, Eh)
        err = max(
            float(np.linalg.norm(solp.residual - sol.residual - pred.delta_rho)),
            float(np.linalg.norm(solp.alpha - sol.alpha - pred.delta_alpha)),
        )
        errors.append(err)
    floor = 100 * EPS * max(1.0, float(np.linalg.norm(b)), float(np.linalg.norm(sol.alpha)))
    exact = bool(max(errors) <= floor)
    ratios = [] if exact else [errors[j] / errors[j + 1] for j in range(levels - 1)]
    lo, hi = ratio_range
    passed = bool(exact or all(lo <= r <= hi for r in ratios))
    return ConvergenceReport(scales, errors, ratios, exact, passed)
