"""Almost vanishing polynomials for point sets known to limited precision."""

from .monomials import (
    DEGLEX,
    ZERO_TERM,
    OrderIdeal,
    PowerProduct,
    TermOrdering,
    compare,
    corner_set,
    formal_partial,
    next_candidate,
)
from .buchberger import AlmostVanishingPoly, NbmResult, exact_bm, is_numerically_dependent, nbm, score
from .points import EmpiricalPointSet, PerturbationSample, eval_matrix, eval_vector, perturb

__version__ = "0.1.0"
