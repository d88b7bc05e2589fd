"""Command-line front end: ``avpoly {compute,exact,verify,stability,oracle} FILE``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .buchberger import NumericalFault, exact_bm, nbm
from .monomials import OrderIdeal, TermOrdering, format_term, parse_term
from .points import EmpiricalPointSet, load_points, parse_csv_points, parse_json_points
from .report import format_order_ideal, text_report, to_json
from .rescale import map_result_back, unit_box_map
from .verify import (
    CheckResult,
    check_p1,
    check_p2_on_zero_set,
    check_p3_border,
    check_scaling_invariance,
    check_translation_invariance,
    dependence_oracle,
    monte_carlo_stability,
    random_power_of_two_scaling,
    random_translation,
)

MODES = ("compute", "exact", "verify", "stability", "oracle")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    input_path: str
    tolerance: list[float] | None = None
    ordering: str = "deglex"
    mode: str = "compute"
    output_format: str = "text"
    digits: int = 5
    unit_box_rescale: bool = False
    well_separated_policy: str = "warn"
    seed: int = 0
    trials: int = 1000
    step_log: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.output_format not in ("json", "text"):
            raise UsageError(f"unknown format {self.output_format!r}")
        if not 1 <= self.digits <= 17:
            raise UsageError("--digits must be between 1 and 17")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.well_separated_policy not in ("warn", "error"):
            raise UsageError("--well-separated must be warn or error")


def parse_tolerance(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse tolerance {text!r}") from None
    if not vals:
        raise UsageError("empty tolerance")
    return vals


def load(config: RunConfig) -> EmpiricalPointSet:
    X = load_points(config.input_path, config.tolerance)
    if config.tolerance is not None and len(config.tolerance) not in (1, X.n):
        raise UsageError(f"tolerance needs 1 or {X.n} values, got {len(config.tolerance)}")
    return X


def ordering_of(config: RunConfig, n: int) -> TermOrdering:
    return TermOrdering.parse(config.ordering, n)


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_compute(config: RunConfig) -> int:
    X = load(config)
    ordering = ordering_of(config, X.n)
    extra = {}
    if config.unit_box_rescale:
        m = unit_box_map(X)
        result = nbm(m.apply(X), ordering, config.well_separated_policy)
        result = map_result_back(result, m, X)
        extra["rescale"] = m.to_dict()
    else:
        result = nbm(X, ordering, config.well_separated_policy)
    if config.output_format == "json":
        _emit(to_json(result, steps=config.step_log, extra=extra))
    else:
        header = []
        if extra:
            header.append(f"rescaled by {list(m.scale)} after shift {list(m.shift)}; polynomials in original coordinates")
        _emit(text_report(result, config.digits, config.step_log, header))
    return 0


def _exact_points(path: str) -> list[list[str]]:
    with open(path) as fh:
        text = fh.read()
    if path.lower().endswith(".json"):
        return parse_json_points(text)[0]
    return parse_csv_points(text)


def cmd_exact(config: RunConfig) -> int:
    pts = _exact_points(config.input_path)
    ordering = ordering_of(config, len(pts[0]))
    result = exact_bm(pts, ordering)
    if config.output_format == "json":
        _emit(to_json(result, steps=config.step_log))
    else:
        _emit(text_report(result, config.digits, config.step_log))
    return 0


def verify_checks(
    X: EmpiricalPointSet,
    ordering: TermOrdering,
    which: set[str],
    seed: int = 0,
    draws: int = 20,
    zero_set=None,
    zero_rtol: float = 1e-10,
) -> list[CheckResult]:
    result = nbm(X, ordering, well_separated="ignore")
    rng = np.random.default_rng(seed)
    out = []
    if "scaling" in which:
        bad = [d.tolist() for d in (random_power_of_two_scaling(X.n, rng) for _ in range(draws))
               if not check_scaling_invariance(X, d, ordering)]
        out.append(CheckResult("scaling", not bad, f"{draws} power-of-two scalings", bad))
    if "translation" in which:
        bad = [v.tolist() for v in (random_translation(X.n, rng) for _ in range(draws))
               if not check_translation_invariance(X, v, ordering)]
        out.append(CheckResult("translation", not bad, f"{draws} dyadic translations", bad))
    if "p1" in which:
        out.append(check_p1(result, X))
    if "p2" in which:
        out.append(check_p2_on_zero_set(result.polys, zero_set, X, zero_rtol))
    if "p3" in which:
        out.append(check_p3_border(result, X))
    return out


def cmd_verify(config: RunConfig, which: set[str], zero_set_path: str | None = None, zero_rtol: float = 1e-10) -> int:
    X = load(config)
    ordering = ordering_of(config, X.n)
    zero_set = None
    if zero_set_path is not None:
        zero_set = load_points(zero_set_path, X.tolerance)
        which = which | {"p2"}
    if not which:
        raise UsageError("no checks selected (use --all or individual check flags)")
    checks = verify_checks(X, ordering, which, config.seed, config.trials, zero_set, zero_rtol)
    failed = any(c.passed is False for c in checks)
    if config.output_format == "json":
        _emit(json.dumps({"passed": not failed, "checks": [c.to_dict() for c in checks]}, indent=2))
    else:
        for c in checks:
            status = "SKIP" if c.passed is None else ("PASS" if c.passed else "FAIL")
            line = f"{status} {c.name}"
            if c.notice:
                line += f"  ({c.notice})"
            _emit(line)
            for row in c.details:
                if isinstance(row, dict):
                    _emit("     " + ", ".join(f"{k}={_short(v, config.digits)}" for k, v in row.items()))
    return 1 if failed else 0


def _short(v, digits):
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def cmd_stability(config: RunConfig) -> int:
    X = load(config)
    result = nbm(X, ordering_of(config, X.n), config.well_separated_policy)
    rep = monte_carlo_stability(X, result.order_ideal, config.trials, config.seed, result)
    if config.output_format == "json":
        data = {"order_ideal": [list(t.exponents) for t in result.order_ideal], **rep.to_dict()}
        _emit(json.dumps(data, indent=2))
    else:
        _emit(
            f"O = {format_order_ideal(result.order_ideal)}\n"
            f"trials {rep.trials}, rank failures {rep.rank_failures}\n"
            f"smallest singular value: unperturbed {rep.unperturbed_smallest_singular_value:.{config.digits}g}, "
            f"min over trials {rep.min_smallest_singular_value:.{config.digits}g}\n"
            f"decision margins: {json.dumps(rep.margin_histogram)}"
        )
    return 0


def cmd_oracle(config: RunConfig, term: str, grid: int, basis: str | None = None) -> int:
    X = load(config)
    ordering = ordering_of(config, X.n)
    t = parse_term(term, X.n)
    if basis is not None:
        O = OrderIdeal(tuple(parse_term(b, X.n) for b in basis.split(",")), ordering)
    else:
        O = nbm(X, ordering, well_separated="ignore").order_ideal.below(t)
    res = dependence_oracle(X, O, t, grid)
    if config.output_format == "json":
        data = {
            "term": list(t.exponents),
            "basis": [list(u.exponents) for u in O],
            "minimum": res.minimum,
            "offsets": res.offsets.tolist(),
            "evaluations": res.evaluations,
        }
        _emit(json.dumps(data, indent=2))
    else:
        _emit(
            f"term {format_term(t)} against {format_order_ideal(O)}\n"
            f"minimum residual norm {res.minimum:.{config.digits}g} after {res.evaluations} evaluations"
        )
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="CSV or JSON point file")
    common.add_argument("--tol", help="tolerance: one value or a comma-separated list per coordinate")
    common.add_argument("--order", default="deglex", help='term ordering, e.g. "deglex:x,y" or "lex:y,x"')
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--digits", type=int, default=5, help="digits shown in text reports")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--well-separated", choices=("warn", "error"), default="warn")

    p = argparse.ArgumentParser(
        prog="avpoly",
        description="Almost vanishing polynomials and stable order ideals for points with known tolerance.",
    )
    sub = p.add_subparsers(dest="mode", required=True)

    c = sub.add_parser("compute", parents=[common], help="run the numerical algorithm")
    c.add_argument("--step-log", action="store_true", help="include every candidate decision")
    c.add_argument("--unit-box-rescale", action="store_true",
                   help="compute on data moved into [-1,1]^n, report in original coordinates")

    e = sub.add_parser("exact", parents=[common], help="exact rational Groebner basis")
    e.add_argument("--step-log", action="store_true")

    v = sub.add_parser("verify", parents=[common], help="run property checks; exit 1 on failure")
    v.add_argument("--all", action="store_true", help="scaling, translation, p1, p3")
    for name in ("scaling", "translation", "p1", "p3"):
        v.add_argument(f"--{name}", action="store_true")
    v.add_argument("--p2", metavar="FILE", help="claimed common zeros, one per input point")
    v.add_argument("--p2-rtol", type=float, default=1e-10)
    v.add_argument("--trials", type=int, default=20, help="random scalings/translations to try")

    s = sub.add_parser("stability", parents=[common], help="Monte-Carlo rank check of the order ideal")
    s.add_argument("--trials", type=int, default=1000)

    o = sub.add_parser("oracle", parents=[common], help="brute-force search for a vanishing perturbation")
    o.add_argument("--term", required=True)
    o.add_argument("--grid", type=int, default=5)
    o.add_argument("--basis", help="comma-separated terms; default: order ideal members below --term")
    return p


def config_from_args(args) -> RunConfig:
    return RunConfig(
        input_path=args.input,
        tolerance=parse_tolerance(args.tol) if args.tol is not None else None,
        ordering=args.order,
        mode=args.mode,
        output_format=args.format,
        digits=args.digits,
        unit_box_rescale=getattr(args, "unit_box_rescale", False),
        well_separated_policy=args.well_separated,
        seed=args.seed,
        trials=getattr(args, "trials", 1000),
        step_log=getattr(args, "step_log", False),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if config.mode == "compute":
            return cmd_compute(config)
        if config.mode == "exact":
            return cmd_exact(config)
        if config.mode == "verify":
            which = {"scaling", "translation", "p1", "p3"} if args.all else {
                k for k in ("scaling", "translation", "p1", "p3") if getattr(args, k)
            }
            return cmd_verify(config, which, args.p2, args.p2_rtol)
        if config.mode == "stability":
            return cmd_stability(config)
        return cmd_oracle(config, args.term, args.grid, args.basis)
    except (OSError, ValueError, KeyError, NumericalFault, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
