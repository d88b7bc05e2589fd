"""JSON serialization and plain-text rendering of results."""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction

from .buchberger import AlmostVanishingPoly, Diagnostics, NbmResult, Step
from .monomials import OrderIdeal, PowerProduct, TermOrdering, format_term


def _num(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def _parse_num(v, exact: bool):
    if exact:
        return Fraction(v)
    return float(v)


def result_to_dict(result: NbmResult, steps: bool = True) -> dict:
    """Plain data with a fixed key order; ``Fraction`` values become ``"p/q"`` strings."""
    out = {
        "order_ideal": [list(t.exponents) for t in result.order_ideal],
        "polynomials": [
            {
                "leading_term": list(g.leading_term.exponents),
                "support": [list(t.exponents) for t in g.support],
                "coefficients": [_num(c) for c in g.coefficients],
                "residual_norm": float(g.residual_norm),
                "score": float(g.score),
            }
            for g in result.polys
        ],
        "steps": [
            {
                "term": list(st.term.exponents),
                "residual": [_num(v) for v in st.residual],
                "bound": [_num(v) for v in st.bound],
                "decision": st.decision,
                "noise_floor": float(st.noise_floor),
            }
            for st in result.steps
        ]
        if steps
        else [],
        "diagnostics": None,
        "ordering": {"scheme": result.ordering.scheme, "priority": _priority(result.ordering)},
    }
    d = result.diagnostics
    if d is not None:
        out["diagnostics"] = {
            "unit_box": d.unit_box,
            "well_separated": d.well_separated,
            "quotient_basis": d.quotient_basis,
            "exact": d.exact,
        }
    return out


def _priority(ordering: TermOrdering):
    return None if ordering.priority is None else list(ordering.priority)


def result_from_dict(data: dict) -> NbmResult:
    ordering = TermOrdering(data["ordering"]["scheme"], data["ordering"]["priority"])
    diag = data.get("diagnostics")
    exact = bool(diag and diag.get("exact"))
    polys = tuple(
        AlmostVanishingPoly(
            PowerProduct(tuple(p["leading_term"])),
            tuple(PowerProduct(tuple(e)) for e in p["support"]),
            tuple(_parse_num(c, exact) for c in p["coefficients"]),
            float(p["residual_norm"]),
            float(p["score"]),
        )
        for p in data["polynomials"]
    )
    steps = tuple(
        Step(
            PowerProduct(tuple(st["term"])),
            tuple(_parse_num(v, exact) for v in st["residual"]),
            tuple(_parse_num(v, exact) for v in st["bound"]),
            st["decision"],
            float(st["noise_floor"]),
        )
        for st in data["steps"]
    )
    return NbmResult(
        OrderIdeal(tuple(PowerProduct(tuple(e)) for e in data["order_ideal"]), ordering),
        polys,
        steps,
        Diagnostics(**diag) if diag else None,
    )


def to_json(result: NbmResult, steps: bool = True, extra: dict | None = None, indent: int | None = 2) -> str:
    data = result_to_dict(result, steps)
    if extra:
        data.update(extra)
    return json.dumps(data, indent=indent)


def from_json(text: str) -> NbmResult:
    return result_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# text


def format_fraction(q: Fraction) -> str:
    """Terminating decimals as decimals (``90.1``), anything else as ``p/q``."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return str(q)
    with localcontext() as ctx:
        ctx.prec = len(str(abs(q.numerator))) + max(twos, fives) + 2
        d = Decimal(q.numerator) / Decimal(q.denominator)
    text = format(d.normalize(), "f")
    return text


def format_poly(g: AlmostVanishingPoly, digits: int = 5) -> str:
    """Render the polynomial, skipping zero coefficients; exact coefficients stay exact."""
    parts = []
    for t, c in zip(g.support, g.coefficients):
        if c == 0:
            continue
        neg = c < 0
        if isinstance(c, Fraction):
            mag = format_fraction(abs(c))
        else:
            mag = f"{abs(float(c)):.{digits}f}"
        if t.is_one():
            body = mag
        elif abs(c) == 1:
            body = format_term(t)
        else:
            body = f"{mag} {format_term(t)}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"


def format_order_ideal(O) -> str:
    return "{" + ", ".join(format_term(t) for t in O) + "}"


def text_report(result: NbmResult, digits: int = 5, step_log: bool = False, header: list[str] | None = None) -> str:
    lines = list(header or [])
    n = result.order_ideal.terms[0].n if len(result.order_ideal) else result.polys[0].leading_term.n
    lines.append(f"ordering: {result.ordering.spec_string(n)}")
    lines.append(f"O = {format_order_ideal(result.order_ideal)}")
    lines.append(f"G ({len(result.polys)} polynomials):")
    for i, g in enumerate(result.polys, 1):
        lines.append(f"  g{i} = {format_poly(g, digits)}")
        lines.append(f"       score {g.score:.{digits}g}")
    d = result.diagnostics
    if d is not None:
        yn = {True: "yes", False: "no"}
        lines.append(
            f"diagnostics: unit box {yn[d.unit_box]}, well separated {yn[d.well_separated]}, "
            f"#O = s {yn[d.quotient_basis]}, exact {yn[d.exact]}"
        )
    if step_log:
        lines.append("steps:")
        for st in result.steps:
            if result.diagnostics is not None and result.diagnostics.exact:
                lines.append(f"  {format_term(st.term):<10} {st.decision}")
                continue
            margin = max(st.margins()) if st.residual else float("nan")
            lines.append(
                f"  {format_term(st.term):<10} {st.decision:<12} "
                f"|rho| {float(sum(float(v) ** 2 for v in st.residual)) ** 0.5:.3e}  "
                f"max margin {margin:+.3e}  floor {st.noise_floor:.1e}"
            )
    return "\n".join(lines) + "\n"
