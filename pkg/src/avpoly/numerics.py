"""Least squares, projector complements and first-order residual sensitivity.

Everything here works on the evaluation matrix ``M`` of an order ideal at a
point set and the evaluation vector ``b`` of a candidate term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .monomials import PowerProduct, formal_partial
from .points import EmpiricalPointSet, PerturbationSample, eval_matrix, eval_vector

EPS = np.finfo(float).eps


class RankDeficientError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class LeastSquaresSolution:
    alpha: np.ndarray
    residual: np.ndarray
    rank_ok: bool
    smallest_singular_value: float
    largest_singular_value: float = 0.0


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape[1] == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def has_full_column_rank(sv: np.ndarray, s: int) -> bool:
    """Numerical rank test: sigma_min > s * eps * sigma_max."""
    if sv.size == 0:
        return True
    return bool(sv[-1] > s * EPS * sv[0])


def _qr(M: np.ndarray):
    # complete QR with column pivoting: Q[:, :k] spans range(M), Q[:, k:] its complement
    return scipy.linalg.qr(M, mode="full", pivoting=True)


def least_squares(M, b) -> LeastSquaresSolution:
    """Minimise ``||b - M alpha||_2`` with a pivoted Householder QR.

    The residual is formed as the projection of ``b`` onto the orthogonal
    complement of ``range(M)``, which stays accurate when ``b`` is (nearly) in
    the column space.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    s, k = M.shape
    if b.shape != (s,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({s},)")
    if k > s:
        raise ValueError(f"more columns ({k}) than rows ({s})")
    if k == 0:
        return LeastSquaresSolution(np.zeros(0), b.copy(), True, np.inf, 0.0)
    sv = singular_values(M)
    rank_ok = has_full_column_rank(sv, s)
    Q, R, perm = _qr(M)
    qtb = Q.T @ b
    alpha = np.zeros(k)
    if rank_ok:
        alpha[perm] = scipy.linalg.solve_triangular(R[:k, :k], qtb[:k])
    else:
        alpha[perm] = np.linalg.lstsq(R[:k, :k], qtb[:k], rcond=None)[0]
    Q2 = Q[:, k:]
    residual = Q2 @ (Q2.T @ b)
    return LeastSquaresSolution(alpha, residual, rank_ok, float(sv[-1]), float(sv[0]))


def projector_complement(M) -> np.ndarray:
    """``I - M M^+`` as an explicit s x s matrix."""
    M = np.asarray(M, dtype=float)
    s, k = M.shape
    if k == 0:
        return np.eye(s)
    if not has_full_column_rank(singular_values(M), s):
        raise RankDeficientError("evaluation matrix is numerically rank deficient")
    Q, _, _ = _qr(M)
    Q2 = Q[:, k:]
    return Q2 @ Q2.T


def pseudo_inverse(M) -> np.ndarray:
    """``M^+ = (M^T M)^{-1} M^T`` for full column rank ``M``, via QR."""
    M = np.asarray(M, dtype=float)
    s, k = M.shape
    if k == 0:
        return np.zeros((0, s))
    if not has_full_column_rank(singular_values(M), s):
        raise RankDeficientError("evaluation matrix is numerically rank deficient")
    Q, R, perm = scipy.linalg.qr(M, mode="economic", pivoting=True)
    out = np.zeros((k, s))
    out[perm] = scipy.linalg.solve_triangular(R, Q.T)
    return out


# ---------------------------------------------------------------------------
# derivative evaluations


def partial_vector(t: PowerProduct, k: int, X: EmpiricalPointSet | np.ndarray) -> np.ndarray:
    """Evaluation of the formal derivative of ``t`` by variable ``k``."""
    coef, term = formal_partial(t, k)
    return coef * eval_vector(term, X)


def partial_matrix(terms, k: int, X: EmpiricalPointSet | np.ndarray) -> np.ndarray:
    """Evaluation matrix of the derivatives of ``terms`` by variable ``k``."""
    coords = X.coordinates if isinstance(X, EmpiricalPointSet) else np.atleast_2d(X)
    terms = list(terms)
    if not terms:
        return np.zeros((coords.shape[0], 0))
    return np.column_stack([partial_vector(t, k, coords) for t in terms])


def derivative_residuals(X: EmpiricalPointSet, O, t: PowerProduct, alpha) -> list[np.ndarray]:
    """For each variable k, ``d_k t(X) - M_{d_k O}(X) alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    return [partial_vector(t, k, X) - partial_matrix(O, k, X) @ alpha for k in range(X.n)]


@dataclass(frozen=True, eq=False)
class DependenceBound:
    bound: np.ndarray
    per_variable_terms: tuple[np.ndarray, ...]


def dependence_bound(
    X: EmpiricalPointSet,
    O,
    t: PowerProduct,
    alpha,
    projector: np.ndarray | None = None,
) -> DependenceBound:
    """First-order componentwise bound on ``|rho(X)|`` when ``t`` numerically depends on ``O``.

    ``|I - M M^+| * sum_k eps_k |d_k t(X) - M_{d_k O}(X) alpha|``
    """
    O = list(O)
    if projector is None:
        projector = projector_complement(eval_matrix(O, X))
    terms = tuple(
        eps_k * np.abs(d) for eps_k, d in zip(X.tolerance, derivative_residuals(X, O, t, alpha))
    )
    total = np.sum(terms, axis=0) if terms else np.zeros(X.s)
    return DependenceBound(np.abs(projector) @ total, terms)


@dataclass(frozen=True, eq=False)
class FirstOrderDeltas:
    delta_rho: np.ndarray
    delta_alpha: np.ndarray


def first_order_deltas(
    X: EmpiricalPointSet, O, t: PowerProduct, sample: PerturbationSample
) -> FirstOrderDeltas:
    """Linearised change of the least-squares residual and coefficients under ``sample``."""
    O = list(O)
    M = np.asarray(eval_matrix(O, X))
    b = eval_vector(t, X)
    sol = least_squares(M, b)
    if not sol.rank_ok:
        raise RankDeficientError("evaluation matrix is numerically rank deficient")
    Mp = pseudo_inverse(M)
    P = projector_complement(M)
    E = sample.offsets
    drive = np.zeros(X.s)
    dMt_rho = np.zeros(len(O))
    for k, d in enumerate(derivative_residuals(X, O, t, sol.alpha)):
        drive += E[:, k] * d
        dMt_rho += partial_matrix(O, k, X).T @ (E[:, k] * sol.residual)
    # (M^T M)^{-1} = M^+ (M^+)^T
    gram_inv = Mp @ Mp.T
    delta_rho = P @ drive - Mp.T @ dMt_rho
    delta_alpha = Mp @ drive + gram_inv @ dMt_rho
    return FirstOrderDeltas(delta_rho, delta_alpha)
