"""Power products, term orderings, order ideals and corner sets."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

ALIASES = ("x", "y", "z")


@dataclass(frozen=True, order=False)
class PowerProduct:
    """A power product x[1]^e1 ... x[n]^en stored as its exponent vector."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if not exps:
            raise ValueError("power product needs at least one variable")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def one(cls, n: int) -> PowerProduct:
        return cls((0,) * n)

    @classmethod
    def var(cls, k: int, n: int) -> PowerProduct:
        """The variable x[k+1] (``k`` is 0-based)."""
        exps = [0] * n
        exps[k] = 1
        return cls(tuple(exps))

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def is_one(self) -> bool:
        return self.degree == 0

    def __mul__(self, other: PowerProduct) -> PowerProduct:
        _check_dims(self, other)
        return PowerProduct(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def divides(self, other: PowerProduct) -> bool:
        _check_dims(self, other)
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def times_var(self, k: int) -> PowerProduct:
        exps = list(self.exponents)
        exps[k] += 1
        return PowerProduct(tuple(exps))

    def div_var(self, k: int) -> PowerProduct | None:
        """t / x[k+1], or None when the variable does not divide t."""
        if self.exponents[k] == 0:
            return None
        exps = list(self.exponents)
        exps[k] -= 1
        return PowerProduct(tuple(exps))

    def divisors_by_var(self) -> list[PowerProduct]:
        return [d for k in range(self.n) if (d := self.div_var(k)) is not None]

    def __str__(self) -> str:
        return format_term(self)


class ZeroTerm:
    """Result of differentiating a power product by an absent variable.

    Evaluates to the zero vector at any point set.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO_TERM"

    def __str__(self) -> str:
        return "0"


ZERO_TERM = ZeroTerm()


def _check_dims(a: PowerProduct, b: PowerProduct) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


def formal_partial(t: PowerProduct, k: int) -> tuple[int, PowerProduct | ZeroTerm]:
    """Formal derivative of ``t`` with respect to x[k+1] (0-based ``k``).

    Returns ``(exponent, t / x_k)``, or ``(0, ZERO_TERM)`` when x_k is absent.
    """
    if not 0 <= k < t.n:
        raise IndexError(f"variable index {k} out of range for n={t.n}")
    beta = t.exponents[k]
    if beta == 0:
        return 0, ZERO_TERM
    return beta, t.div_var(k)


# ---------------------------------------------------------------------------
# term orderings


@dataclass(frozen=True)
class TermOrdering:
    """DegLex or Lex ordering with a chosen variable priority.

    ``priority`` lists 0-based variable indices from greatest to smallest, so
    ``(0, 1)`` means x > y.
    """

    scheme: str = "deglex"
    priority: tuple[int, ...] | None = None

    def __post_init__(self):
        scheme = self.scheme.lower()
        if scheme not in ("deglex", "lex"):
            raise ValueError(f"unknown ordering scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        if self.priority is not None:
            prio = tuple(int(k) for k in self.priority)
            if sorted(prio) != list(range(len(prio))):
                raise ValueError(f"priority {prio} is not a permutation")
            object.__setattr__(self, "priority", prio)

    def _priority(self, n: int) -> tuple[int, ...]:
        if self.priority is None:
            return tuple(range(n))
        if len(self.priority) != n:
            raise ValueError(f"ordering has {len(self.priority)} variables, term has {n}")
        return self.priority

    def key(self, t: PowerProduct) -> tuple:
        lex = tuple(t.exponents[k] for k in self._priority(t.n))
        if self.scheme == "deglex":
            return (t.degree,) + lex
        return lex

    def sorted(self, terms: Iterable[PowerProduct], reverse: bool = False) -> list[PowerProduct]:
        return sorted(terms, key=self.key, reverse=reverse)

    def spec_string(self, n: int) -> str:
        names = variable_names(n)
        return f"{self.scheme}:" + ",".join(names[k] for k in self._priority(n))

    @classmethod
    def parse(cls, text: str, n: int) -> TermOrdering:
        """Parse ``"deglex:x,y"`` or ``"lex:x[2],x[1]"`` (greatest variable first)."""
        scheme, _, rest = text.strip().partition(":")
        if not rest:
            return cls(scheme, None)
        names = [v.strip() for v in rest.split(",") if v.strip()]
        if len(names) != n:
            raise ValueError(f"ordering {text!r} lists {len(names)} variables, data has {n}")
        prio = tuple(_variable_index(name, n) for name in names)
        return cls(scheme, prio)


DEGLEX = TermOrdering("deglex")


def compare(t1: PowerProduct, t2: PowerProduct, ord: TermOrdering = DEGLEX) -> int:
    """Three-way comparison: -1, 0 or 1."""
    _check_dims(t1, t2)
    k1, k2 = ord.key(t1), ord.key(t2)
    return (k1 > k2) - (k1 < k2)


# ---------------------------------------------------------------------------
# order ideals


def is_factor_closed(terms: Iterable[PowerProduct]) -> bool:
    terms = set(terms)
    return all(d in terms for t in terms for d in t.divisors_by_var())


@dataclass(frozen=True)
class OrderIdeal:
    """A factor-closed set of power products, kept sorted ascending by ``ordering``."""

    terms: tuple[PowerProduct, ...]
    ordering: TermOrdering = DEGLEX

    def __post_init__(self):
        terms = tuple(self.ordering.sorted(set(self.terms)))
        if len(terms) != len(self.terms):
            raise ValueError("duplicate terms in order ideal")
        if not is_factor_closed(terms):
            raise ValueError("terms are not factor-closed")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, t) -> bool:
        return t in set(self.terms)

    def below(self, t: PowerProduct) -> OrderIdeal:
        """Members strictly smaller than ``t``."""
        kt = self.ordering.key(t)
        return OrderIdeal(tuple(r for r in self.terms if self.ordering.key(r) < kt), self.ordering)


def corner_set(O: Iterable[PowerProduct], n: int | None = None) -> frozenset[PowerProduct]:
    """Minimal power products outside ``O`` whose variable-quotients all lie in ``O``.

    ``n`` is only needed when ``O`` is empty, in which case the answer is ``{1}``.
    """
    O = set(O)
    if not O:
        if n is None:
            raise ValueError("dimension required for an empty order ideal")
        return frozenset({PowerProduct.one(n)})
    if not is_factor_closed(O):
        raise ValueError("corner set requires a factor-closed set")
    nvars = next(iter(O)).n
    out = set()
    for t in O:
        for k in range(nvars):
            u = t.times_var(k)
            if u not in O and all(d in O for d in u.divisors_by_var()):
                out.add(u)
    return frozenset(out)


def next_candidate(
    O: Iterable[PowerProduct],
    leading_terms: Iterable[PowerProduct],
    processed: Iterable[PowerProduct],
    ord: TermOrdering = DEGLEX,
    n: int | None = None,
) -> PowerProduct | None:
    """The smallest corner of ``O`` that is neither processed nor a multiple of a leading term."""
    leading_terms = list(leading_terms)
    processed = set(processed)
    pool = [
        u
        for u in corner_set(O, n)
        if u not in processed and not any(lt.divides(u) for lt in leading_terms)
    ]
    if not pool:
        return None
    return min(pool, key=ord.key)


# ---------------------------------------------------------------------------
# rendering and parsing


def variable_names(n: int) -> list[str]:
    if n <= len(ALIASES):
        return list(ALIASES[:n])
    return [f"x[{k + 1}]" for k in range(n)]


def _variable_index(name: str, n: int) -> int:
    m = re.fullmatch(r"x\[(\d+)\]", name)
    if m:
        k = int(m.group(1)) - 1
    elif name in ALIASES[:n] and n <= len(ALIASES):
        k = ALIASES.index(name)
    else:
        raise ValueError(f"unknown variable {name!r} for n={n}")
    if not 0 <= k < n:
        raise ValueError(f"variable {name!r} out of range for n={n}")
    return k


def format_term(t: PowerProduct, aliases: bool = True) -> str:
    """Render e.g. ``x^2 y`` (aliases, n <= 3) or ``x[1]^2 x[2]``."""
    if t.is_one():
        return "1"
    names = variable_names(t.n) if aliases else [f"x[{k + 1}]" for k in range(t.n)]
    parts = []
    for name, e in zip(names, t.exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return " ".join(parts)


_FACTOR = re.compile(r"(x\[\d+\]|[xyz])(?:\^(\d+))?")


def parse_term(text: str, n: int) -> PowerProduct:
    """Inverse of :func:`format_term`; also accepts ``*`` separators and ``xy``."""
    s = text.strip()
    exps = [0] * n
    if s == "1":
        return PowerProduct(tuple(exps))
    pos = 0
    while pos < len(s):
        if s[pos] in " *":
            pos += 1
            continue
        m = _FACTOR.match(s, pos)
        if not m:
            raise ValueError(f"cannot parse term {text!r}")
        exps[_variable_index(m.group(1), n)] += int(m.group(2) or 1)
        pos = m.end()
    return PowerProduct(tuple(exps))


def format_polynomial(
    terms: Sequence[PowerProduct], coefficients: Sequence[float], digits: int = 5
) -> str:
    out = []
    for t, c in zip(terms, coefficients):
        c = float(c)
        mag = abs(c)
        if t.is_one():
            body = f"{mag:.{digits}f}"
        elif mag == 1.0:
            body = format_term(t)
        else:
            body = f"{mag:.{digits}f} {format_term(t)}"
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out) if out else "0"
