"""Empirical point sets, admissible perturbations and term evaluation."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .monomials import PowerProduct, ZeroTerm


class NotWellSeparatedWarning(UserWarning):
    pass


class InadmissiblePerturbation(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EmpiricalPointSet:
    """``s`` points in R^n sharing the componentwise tolerance ``tolerance``."""

    coordinates: np.ndarray
    tolerance: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coordinates, dtype=float, ndmin=2)
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ValueError(f"need an s x n array of points, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        tol = np.atleast_1d(np.array(self.tolerance, dtype=float))
        if tol.size == 1:
            tol = np.full(coords.shape[1], tol[0])
        if tol.shape != (coords.shape[1],):
            raise ValueError(f"tolerance has {tol.size} entries, points have {coords.shape[1]}")
        if np.any(tol < 0) or not np.all(np.isfinite(tol)):
            raise ValueError("tolerance must be finite and non-negative")
        coords.setflags(write=False)
        tol.setflags(write=False)
        object.__setattr__(self, "coordinates", coords)
        object.__setattr__(self, "tolerance", tol)

    @property
    def s(self) -> int:
        return self.coordinates.shape[0]

    @property
    def n(self) -> int:
        return self.coordinates.shape[1]

    @property
    def eps_max(self) -> float:
        return float(self.tolerance.max())

    def in_unit_box(self) -> bool:
        return bool(np.all(np.abs(self.coordinates) <= 1.0))

    def close_pairs(self) -> list[tuple[int, int]]:
        """Pairs of points closer than twice the tolerance in every coordinate."""
        c = self.coordinates
        diff = np.abs(c[:, None, :] - c[None, :, :])
        close = np.all(diff < 2 * self.tolerance, axis=2)
        i, j = np.nonzero(np.triu(close, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def is_well_separated(self) -> bool:
        return not self.close_pairs()

    def check_well_separated(self, policy: str = "warn") -> bool:
        pairs = self.close_pairs()
        if not pairs:
            return True
        msg = f"points not well separated w.r.t. the tolerance: pairs {pairs}"
        if policy == "error":
            raise ValueError(msg)
        if policy == "warn":
            warnings.warn(msg, NotWellSeparatedWarning, stacklevel=2)
        return False

    def with_tolerance(self, tolerance) -> EmpiricalPointSet:
        return EmpiricalPointSet(self.coordinates, tolerance)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmpiricalPointSet):
            return NotImplemented
        return np.array_equal(self.coordinates, other.coordinates) and np.array_equal(
            self.tolerance, other.tolerance
        )

    def __repr__(self) -> str:
        return f"EmpiricalPointSet(s={self.s}, n={self.n}, tolerance={self.tolerance.tolist()})"


@dataclass(frozen=True, eq=False)
class PerturbationSample:
    """Offsets ``e[i, k]`` added to coordinate ``k`` of point ``i``.

    Column ``k`` holds the diagonal of the matrix E_k used by the first-order
    perturbation formulas.
    """

    offsets: np.ndarray

    def __post_init__(self):
        off = np.array(self.offsets, dtype=float, ndmin=2)
        off.setflags(write=False)
        object.__setattr__(self, "offsets", off)

    def diagonal(self, k: int) -> np.ndarray:
        return self.offsets[:, k]

    def scaled(self, h: float) -> PerturbationSample:
        return PerturbationSample(h * self.offsets)

    def __neg__(self) -> PerturbationSample:
        return PerturbationSample(-self.offsets)

    def is_admissible(self, X: EmpiricalPointSet) -> bool:
        return is_admissible_offset(self.offsets, X.tolerance)


def is_admissible_offset(offsets: np.ndarray, tolerance: np.ndarray) -> bool:
    # a zero tolerance admits only a zero offset
    off = np.abs(np.asarray(offsets, dtype=float))
    tol = np.broadcast_to(tolerance, off.shape)
    return bool(np.all((off < tol) | ((tol == 0) & (off == 0))))


def perturb(X: EmpiricalPointSet, sample: PerturbationSample, check: bool = True) -> EmpiricalPointSet:
    if sample.offsets.shape != X.coordinates.shape:
        raise ValueError(f"offset shape {sample.offsets.shape} != point shape {X.coordinates.shape}")
    if check and not sample.is_admissible(X):
        raise InadmissiblePerturbation("offsets must satisfy |e[i,k]| < tolerance[k]")
    return EmpiricalPointSet(X.coordinates + sample.offsets, X.tolerance)


def sample_admissible(X: EmpiricalPointSet, seed) -> PerturbationSample:
    """Offsets drawn uniformly from the open box (-tol_k, tol_k), deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    tol = X.tolerance
    off = rng.uniform(-1.0, 1.0, size=X.coordinates.shape)
    # uniform() is half-open; the closed end -1 has probability ~2^-53 but must be excluded
    while np.any(off <= -1.0):
        bad = off <= -1.0
        off[bad] = rng.uniform(-1.0, 1.0, size=int(bad.sum()))
    return PerturbationSample(off * tol)


# ---------------------------------------------------------------------------
# evaluation


def eval_vector(t: PowerProduct | ZeroTerm, X: EmpiricalPointSet | np.ndarray) -> np.ndarray:
    coords = _coords(X)
    if isinstance(t, ZeroTerm):
        return np.zeros(coords.shape[0])
    if t.n != coords.shape[1]:
        raise ValueError(f"term has {t.n} variables, points have {coords.shape[1]}")
    return np.prod(coords ** np.array(t.exponents), axis=1)


def _coords(X) -> np.ndarray:
    if isinstance(X, EmpiricalPointSet):
        return X.coordinates
    return np.atleast_2d(np.asarray(X, dtype=float))


@dataclass(frozen=True, eq=False)
class EvaluationMatrix:
    """Entry ``(i, j)`` is ``column_terms[j]`` evaluated at point ``i``."""

    entries: np.ndarray
    column_terms: tuple[PowerProduct, ...]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def shape(self):
        return self.entries.shape


def eval_matrix(terms: Sequence[PowerProduct], X: EmpiricalPointSet | np.ndarray) -> EvaluationMatrix:
    coords = _coords(X)
    terms = tuple(terms)
    if not terms:
        return EvaluationMatrix(np.zeros((coords.shape[0], 0)), terms)
    cols = [eval_vector(t, coords) for t in terms]
    return EvaluationMatrix(np.column_stack(cols), terms)


# ---------------------------------------------------------------------------
# ingestion


def load_points(path: str | Path, tolerance=None) -> EmpiricalPointSet:
    """Read a CSV (one point per row, optional header) or JSON point file.

    A ``tolerance`` argument overrides one stored in a JSON file.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        coords, tol = parse_json_points(text)
    else:
        coords, tol = parse_csv_points(text), None
    if tolerance is not None:
        tol = tolerance
    if tol is None:
        raise ValueError(f"no tolerance given for {path}")
    return EmpiricalPointSet(np.array([[float(v) for v in row] for row in coords]), tol)


def parse_csv_points(text: str) -> list[list[str]]:
    """Rows of numeric strings; a non-numeric first row is treated as a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    rows = [[c.strip() for c in r] for r in rows]
    if rows and not _is_numeric_row(rows[0]):
        rows = rows[1:]
    for r in rows:
        if not _is_numeric_row(r):
            raise ValueError(f"non-numeric row {r}")
    if not rows:
        raise ValueError("no points found")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("rows have different lengths")
    return rows


def parse_json_points(text: str) -> tuple[list[list[str]], list | None]:
    # keep the decimal text so exact mode can read it as a rational
    data = json.loads(text, parse_float=str, parse_int=str)
    pts = [[str(v) for v in row] for row in data["points"]]
    tol = data.get("tolerance")
    if tol is not None:
        tol = [float(v) for v in np.atleast_1d(tol)]
    return pts, tol


def _is_numeric_row(row) -> bool:
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True
