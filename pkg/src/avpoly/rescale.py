"""Moving data into the unit box and mapping the polynomials back.

The new coordinates are ``u = d * (x + v)`` with ``d`` a power of two and
``v`` a dyadic shift, so the order ideal is unchanged while every coordinate
lands in [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .buchberger import AlmostVanishingPoly, NbmResult, score
from .monomials import PowerProduct
from .points import EmpiricalPointSet


@dataclass(frozen=True)
class UnitBoxMap:
    scale: tuple[float, ...]
    shift: tuple[float, ...]

    def apply(self, X: EmpiricalPointSet) -> EmpiricalPointSet:
        d = np.array(self.scale)
        return EmpiricalPointSet(d * (X.coordinates + np.array(self.shift)), np.abs(d) * X.tolerance)

    def to_dict(self) -> dict:
        return {"scale": list(self.scale), "shift": list(self.shift)}


def unit_box_map(X: EmpiricalPointSet, shift_resolution: int = 4) -> UnitBoxMap:
    """Shift each coordinate's range to be centred near 0, then halve until it fits."""
    c = X.coordinates
    mid = (c.max(axis=0) + c.min(axis=0)) / 2
    shift = -np.round(mid * shift_resolution) / shift_resolution
    half = np.max(np.abs(c + shift), axis=0)
    exps = [max(0, math.ceil(math.log2(h))) if h > 0 else 0 for h in half]
    scale = [math.ldexp(1.0, -e) for e in exps]
    return UnitBoxMap(tuple(scale), tuple(float(v) + 0.0 for v in shift))


def _expand(t: PowerProduct, m: UnitBoxMap) -> dict[PowerProduct, float]:
    """``prod_k (d_k (x_k + v_k))^{e_k}`` as a dict of terms in ``x``."""
    out: dict[PowerProduct, float] = {}
    ranges = [range(e + 1) for e in t.exponents]
    for js in product(*ranges):
        c = 1.0
        for e, j, d, v in zip(t.exponents, js, m.scale, m.shift):
            c *= d**e * math.comb(e, j) * v ** (e - j)
        out[PowerProduct(js)] = out.get(PowerProduct(js), 0.0) + c
    return out


def map_back(g: AlmostVanishingPoly, m: UnitBoxMap, X: EmpiricalPointSet) -> AlmostVanishingPoly:
    """Rewrite ``g(u)`` as a monic polynomial in the original coordinates.

    Divisors of the support stay inside it because the order ideal is
    factor-closed, so the support is reused as is.
    """
    acc = {t: 0.0 for t in g.support}
    for t, c in zip(g.support, g.coefficients):
        for u, w in _expand(t, m).items():
            acc[u] += float(c) * w
    lead = acc[g.leading_term]
    coeffs = (1.0,) + tuple(acc[t] / lead for t in g.support[1:])
    h = AlmostVanishingPoly(g.leading_term, g.support, coeffs, 0.0, 0.0)
    res = float(np.linalg.norm(h.evaluate(X)))
    return AlmostVanishingPoly(g.leading_term, g.support, coeffs, res, score(h, X))


def map_result_back(result: NbmResult, m: UnitBoxMap, X: EmpiricalPointSet) -> NbmResult:
    return NbmResult(
        result.order_ideal,
        tuple(map_back(g, m, X) for g in result.polys),
        result.steps,
        result.diagnostics,
    )
