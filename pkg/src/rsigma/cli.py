"""Command-line entry point: ``rsigma <command> [flags]``.

Every run writes its resolved configuration to stderr as one JSON line and its
artifact (JSON or CSV) to stdout or ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import asymptotics as asy
from . import mc, oracle
from .errors import DomainError, NonConvergenceError
from .gf import component_series, enumerate_kernels, exact_by_excess, exact_count, exact_count_log, kernel_series
from .gf.components import resolve_field
from .spectral import (
    VARIANTS,
    WeightMatrix,
    bipartite_matrix,
    chi_exact,
    coloring_matrix,
    ham_distinct,
    ham_power,
    hamming_matrix,
    qxor_matrix,
    qxor_multiset,
    spectral_summary,
    to_fraction,
    validate_vertex_transitive,
    with_constant,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NONCONV = 0, 2, 3, 4
FAMILIES = ("ham", "ham-power", "ham-distinct", "with-constant", "bipartite", "single", "coloring", "qxor", "matrix")
PROBLEMS = ("bipartite", "qxor", "coloring")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Flag helpers


def _fraction(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _parse_matrix(text: str) -> WeightMatrix:
    """Rows separated by ``;``, entries by ``,``; entries may be ``p/q``."""
    rows = [[to_fraction(v.strip()) for v in row.split(",")] for row in text.split(";") if row.strip()]
    return WeightMatrix.from_exact(rows, "cli")


def build_matrix(args) -> WeightMatrix:
    fam = args.family
    if fam == "ham":
        return hamming_matrix(_need(args, "beta"))
    if fam == "ham-power":
        return ham_power(_need(args, "beta"), _need(args, "alpha"))
    if fam == "ham-distinct":
        return ham_distinct(_need(args, "alpha"), _need(args, "beta"))
    if fam == "with-constant":
        return with_constant(hamming_matrix(_need(args, "beta")))
    if fam == "bipartite":
        return bipartite_matrix()
    if fam == "single":
        return WeightMatrix.from_exact([[1]], "single")
    if fam == "coloring":
        return coloring_matrix(_need(args, "q"))
    if fam == "qxor":
        return qxor_matrix(_need(args, "alpha"), _need(args, "beta"), args.variant)
    if fam == "matrix":
        if not args.matrix:
            raise UsageError("--family matrix needs --matrix")
        return _parse_matrix(args.matrix)
    raise UsageError(f"unknown family {fam!r}")


def _need(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise UsageError(f"--{name} is required for family {args.family}")
    return value


def default_sigma(args, summary) -> Fraction:
    if args.sigma is not None:
        return args.sigma
    if args.family == "bipartite":
        return Fraction(1, 2)
    if args.family == "qxor":
        return Fraction(1, summary.q)
    return Fraction(1)


def parse_grid(spec: str) -> tuple[str, list[float]]:
    """``axis:start:stop:step`` with inclusive endpoints; axis is mu, ratio or m."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] not in ("mu", "ratio", "m"):
        raise UsageError(f"bad grid {spec!r}; expected mu|ratio|m:start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts[1:])
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}: {exc}") from exc
    if step <= 0 or stop < start:
        raise UsageError("grid needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return parts[0], [round(start + i * step, 12) for i in range(count)]


def _fmt(x) -> str | float | int:
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


# ---------------------------------------------------------------------------
# Commands


def cmd_spectrum(args):
    R = build_matrix(args)
    summary = spectral_summary(R)
    out = summary.to_json()
    out["transitivity"] = validate_vertex_transitive(R).to_json()
    return out


def cmd_chi(args):
    R = build_matrix(args)
    summary = spectral_summary(R)
    out = {"q": summary.q, "delta": summary.delta, "c": summary.c, "chi": list(summary.chi),
           "chi_at_one": summary.chi_at_one}
    if R.is_exact:
        out["chi_exact"] = [_fmt(v) for v in chi_exact(R, summary.c)]
    return out


def cmd_series(args):
    R = build_matrix(args)
    summary = spectral_summary(R)
    if args.kind == "K":
        s = kernel_series(summary, default_sigma(args, summary), args.k, args.order, args.field)
        return {"kind": "K", "k": args.k, "series": s.to_json()}
    cs = component_series(summary, args.order, args.field)
    if args.kind == "P":
        return {"kind": "P", "i": args.i, "j": args.j, "series": cs.P[args.i][args.j].to_json()}
    return {"kind": args.kind, "series": getattr(cs, args.kind).to_json()}


def cmd_kernels(args):
    kernels = enumerate_kernels(args.k, max_vertices=args.max_vertices)
    return {"k": args.k, "count": len(kernels), "kernels": [K.to_json() for K in kernels]}


def cmd_exact(args):
    R = build_matrix(args)
    summary = spectral_summary(R)
    sigma = default_sigma(args, summary)
    out = {"n": args.n, "m": args.m, "sigma": _fmt(sigma), "field": args.field}
    if args.k is not None:
        if resolve_field(summary, sigma, args.field):
            g = exact_count(summary, sigma, args.n, args.m, args.k, args.field)
            out.update(k=args.k, g=_fmt(g))
        out.update(k=args.k, log_g=exact_count_log(summary, sigma, args.n, args.m, args.k, args.field))
        return out
    parts = exact_by_excess(summary, sigma, args.n, args.m, args.field)
    out["by_excess"] = {str(k): _fmt(v) for k, v in parts.items()}
    out["g"] = _fmt(sum(parts.values()))
    return out


def cmd_oracle(args):
    R = build_matrix(args)
    if not R.is_exact:
        raise DomainError("the oracle needs exact matrix entries")
    summary = spectral_summary(R)
    sigma = default_sigma(args, summary)
    parts = oracle.g_by_excess(R, sigma, args.n, args.m)
    g = sum((wc.value for wc in parts.values()), Fraction(0))
    total = oracle.total_count(args.n, args.m)
    delta = Fraction(sum(R.exact[0]))
    p = g / (total * delta ** args.m)
    if args.format == "csv":
        return [("n", "m", "k", "g_exact")] + oracle.to_csv_rows(R, sigma, args.n, args.m)
    return {
        "n": args.n, "m": args.m, "sigma": _fmt(sigma), "g": _fmt(g), "total": _fmt(total), "p": _fmt(p),
        "by_excess": {str(k): _fmt(parts[k].value) for k in sorted(parts)},
    }


def _prediction(args, n: int, m_or_mu, regime: str):
    if args.problem == "bipartite":
        return asy.prob_bipartite(n, m_or_mu, regime, chi1_factor=not args.no_chi1_factor,
                                  enforce_window=not args.no_window)
    if args.problem == "qxor":
        return asy.prob_qxor(args.alpha or 1, args.beta or 1, args.variant, n, m_or_mu, regime,
                             enforce_window=not args.no_window)
    if regime != asy.SUBCRITICAL:
        raise DomainError("q-coloring predictions are subcritical only")
    return asy.prob_coloring(args.q or 3, n, int(m_or_mu))


def cmd_predict(args):
    axis, values = parse_grid(args.grid)
    rows = [("n", "m", "mu", "regime", "prediction", "truncation_k")]
    for v in values:
        if axis == "mu":
            pred = _prediction(args, args.n, v, asy.CRITICAL)
        else:
            m = int(round(v * args.n)) if axis == "ratio" else int(v)
            pred = _prediction(args, args.n, m, asy.SUBCRITICAL)
        mu = pred.mu if pred.mu is not None else asy.realized_mu(args.n, pred.m)
        rows.append((args.n, pred.m, mu, pred.regime, pred.prob, pred.truncation_k))
    return rows


def cmd_prob(args):
    if (args.m is None) == (args.mu is None):
        raise UsageError("give exactly one of --m or --mu")
    if args.mu is not None:
        return _prediction(args, args.n, args.mu, asy.CRITICAL).to_json()
    return _prediction(args, args.n, args.m, asy.SUBCRITICAL).to_json()


def _sample_config(args, m: int) -> mc.SampleConfig:
    return mc.SampleConfig(
        n=args.n, m=m, samples=args.samples, seed=args.seed, problem=args.problem,
        alpha=args.alpha or 1, beta=args.beta or 1, variant=args.variant, q=args.q or 3,
        simple=args.simple, shards=args.shards,
    )


def cmd_simulate(args):
    if args.grid:
        axis, values = parse_grid(args.grid)
        rows = [("n", "m", "mu", "p_hat", "ci_low", "ci_high", "samples", "seed")]
        for v in values:
            if axis == "mu":
                m = asy.critical_m(args.n, v)
            elif axis == "ratio":
                m = int(round(v * args.n))
            else:
                m = int(v)
            e = mc.estimate(_sample_config(args, m), workers=args.workers)
            rows.append((args.n, m, asy.realized_mu(args.n, m), e.p_hat, e.ci_low, e.ci_high, e.samples, e.seed))
        return rows
    if args.m is None:
        raise UsageError("--m or --grid is required")
    return mc.estimate(_sample_config(args, args.m), workers=args.workers).to_json()


def _rel(a, b):
    if a is None or b is None:
        return None
    return abs(float(a) - float(b)) / abs(float(b)) if b else (0.0 if a == b else math.inf)


def cmd_calibrate(args):
    n, m = args.n, args.m
    out = {"problem": args.problem, "n": n, "m": m}
    try:
        out["prediction"] = _prediction(args, n, m, asy.SUBCRITICAL).prob
    except DomainError as exc:
        out["prediction"] = None
        out["prediction_note"] = str(exc)
    est = mc.estimate(_sample_config(args, m), workers=args.workers)
    out["mc"] = est.to_json()
    in_guard = n <= args.oracle_max_n and m <= args.oracle_max_m
    if in_guard:
        if args.problem == "bipartite":
            R, sigma = bipartite_matrix(), Fraction(1, 2)
            p_oracle = oracle.checker_count_exact(mc.is_bipartite, n, m).value / oracle.total_count(n, m)
        elif args.problem == "coloring":
            q = args.q or 3
            R, sigma = coloring_matrix(q), Fraction(1)
            p_oracle = oracle.coloring_prob_exact(q, n, m)
        else:
            alpha, beta = args.alpha or 1, args.beta or 1
            R = qxor_matrix(alpha, beta, args.variant)
            sigma = Fraction(1, R.q)
            p_oracle = oracle.qxor_prob_exact(qxor_multiset(alpha, beta, args.variant), beta, n, m)
        summary = spectral_summary(R)
        delta = Fraction(sum(R.exact[0]))
        g = sum(exact_by_excess(summary, sigma, n, m, "rational").values())
        divisor = oracle.total_count(n, m) * delta ** m
        if args.problem == "coloring":
            divisor *= Fraction(summary.q) ** n
        p_gf = g / divisor
        out.update(oracle=_fmt(p_oracle), gf_exact=_fmt(p_gf), rel_err_gf_vs_oracle=_rel(p_gf, p_oracle),
                   rel_err_mc_vs_oracle=_rel(est.p_hat, p_oracle))
    out["rel_err_mc_vs_prediction"] = _rel(est.p_hat, out["prediction"])
    if in_guard:
        out["rel_err_prediction_vs_oracle"] = _rel(out["prediction"], Fraction(out["oracle"]) if isinstance(
            out["oracle"], str) else out["oracle"])
    return out


# ---------------------------------------------------------------------------
# Parser


def _family_flags(p, default="ham"):
    p.add_argument("--family", choices=FAMILIES, default=default)
    p.add_argument("--beta", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--variant", choices=VARIANTS, default="plain")
    p.add_argument("--matrix", help="rows split by ';', entries by ',', e.g. '0,1;1,0'")


def _problem_flags(p):
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--variant", choices=VARIANTS, default="plain")


def _mc_flags(p):
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--simple", action="store_true", help="condition on simple graphs by rejection")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsigma", description="Weighted multigraph counts and phase-transition probabilities.")
    parser.add_argument("--out", help="write the artifact here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="spectral summary of a weight matrix")
    _family_flags(p)
    p.set_defaults(func=cmd_spectrum, format="json")

    p = sub.add_parser("chi", help="the characteristic factor chi(X)")
    _family_flags(p)
    p.set_defaults(func=cmd_chi, format="json")

    p = sub.add_parser("series", help="truncated component generating functions")
    _family_flags(p, "single")
    p.add_argument("--kind", choices=("T", "U", "V", "P", "K"), default="T")
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--sigma", type=_fraction)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--field", choices=("auto", "rational", "binary64"), default="auto")
    p.set_defaults(func=cmd_series, format="json")

    p = sub.add_parser("kernels", help="enumerate kernels of a given excess")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-vertices", type=int)
    p.set_defaults(func=cmd_kernels, format="json")

    p = sub.add_parser("exact", help="exact weighted count by coefficient extraction")
    _family_flags(p, "single")
    p.add_argument("--sigma", type=_fraction)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--field", choices=("auto", "rational", "binary64"), default="auto")
    p.set_defaults(func=cmd_exact, format="json")

    p = sub.add_parser("oracle", help="brute-force weighted count over all small multigraphs")
    _family_flags(p, "single")
    p.add_argument("--sigma", type=_fraction)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("predict", help="asymptotic curve over a grid")
    _problem_flags(p)
    p.add_argument("--grid", required=True, help="mu|ratio|m:start:stop:step (inclusive)")
    p.add_argument("--no-chi1-factor", action="store_true")
    p.add_argument("--no-window", action="store_true", help="allow |mu| beyond n^(1/12)")
    p.set_defaults(func=cmd_predict, format="csv")

    p = sub.add_parser("prob", help="asymptotic probability at one point")
    _problem_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--no-chi1-factor", action="store_true")
    p.add_argument("--no-window", action="store_true")
    p.set_defaults(func=cmd_prob, format="json")

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    _problem_flags(p)
    p.add_argument("--m", type=int)
    p.add_argument("--grid", help="mu|ratio|m:start:stop:step; emits CSV")
    _mc_flags(p)
    p.set_defaults(func=cmd_simulate, format="json")

    p = sub.add_parser("calibrate", help="prediction vs Monte Carlo vs exact counts")
    _problem_flags(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--oracle-max-n", type=int, default=4)
    p.add_argument("--oracle-max-m", type=int, default=4)
    p.add_argument("--no-chi1-factor", action="store_true")
    p.add_argument("--no-window", action="store_true")
    _mc_flags(p)
    p.set_defaults(func=cmd_calibrate, format="json")
    return parser


def _resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        out[k] = _fmt(v) if isinstance(v, Fraction) else v
    out["phi_tol"] = asy.default_phi_tol()
    out["phi_k_cap"] = asy.default_phi_k_cap()
    return out


def _render(result) -> str:
    if isinstance(result, list):
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(result)
        return buf.getvalue()
    return json.dumps(result, indent=2, default=_fmt) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        print(json.dumps({"config": _resolved(args)}), file=sys.stderr)
        text = _render(args.func(args))
    except UsageError as exc:
        print(f"rsigma: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"rsigma: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (DomainError, ValueError, ArithmeticError) as exc:
        print(f"rsigma: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
