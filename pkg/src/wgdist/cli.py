"""Command-line interface: ``wgdist <command> [options]``.

Structured results are written to stdout as a single JSON document and a
short human-readable summary goes to stderr. Exit status is 0 on success,
1 for usage or input errors and 2 for numerical failures (EM not
converged, singular information matrix).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .distribution import WGParams, cdf, hazard, pdf, quantile, sample_compound, sample_inverse, survival
from .entropy import (power_integral_quadrature, renyi_entropy, shannon_entropy,
                      shannon_paper_formula)
from .errors import ConvergenceError, DomainError, UnsupportedError
from .fit import EMConfig, Sample, fit_em, score
from .inference import NullModel, confidence_intervals, lr_test, observed_info
from .moments import figure3_curves, moment_report
from .numerics import make_rng
from .orderstats import (OrderStatSpec, orderstat_moment_expr10, orderstat_moment_expr11,
                         orderstat_moment_quadrature)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

DATASETS = {
    "air-conditioning": "air_conditioning.txt",
    "carbon-fibre": "carbon_fibre.txt",
}


class ParseError(ValueError):
    pass


class UsageError(Exception):
    pass


# --- data files -------------------------------------------------------------

def parse_data(text: str, source: str = "<input>") -> Sample:
    """One positive number per line; blank lines and '#' lines are skipped."""
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(f"{source}:{lineno}: not a number: {line!r}") from None
        if not math.isfinite(v) or v <= 0:
            raise ParseError(f"{source}:{lineno}: observations must be finite and > 0, got {line!r}")
        values.append(v)
    if len(values) < 3:
        raise ParseError(f"{source}: need at least 3 observations, found {len(values)}")
    return Sample(np.array(values))


def read_data_file(path) -> Sample:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_data(text, str(path))


def bundled_dataset(name: str) -> Sample:
    try:
        fname = DATASETS[name]
    except KeyError:
        raise UsageError(f"unknown dataset {name!r}; choose from {sorted(DATASETS)}") from None
    text = resources.files("wgdist").joinpath("data", fname).read_text(encoding="utf-8")
    return parse_data(text, f"dataset:{name}")


# --- reports ----------------------------------------------------------------

def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _clean({
            "command": self.command,
            "version": __version__,
            "inputs": self.inputs,
            "results": self.results,
            "diagnostics": self.diagnostics,
        })

    def to_json(self) -> str:
        # float repr is the shortest string that round-trips exactly
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(d["command"], d.get("inputs", {}), d.get("results", {}), d.get("diagnostics", {}))


def _params_dict(theta: WGParams) -> dict:
    return {"p": theta.p, "beta": theta.beta, "alpha": theta.alpha}


# --- argument helpers ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_params(text: str) -> WGParams:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,beta,alpha, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    try:
        return WGParams(*parts)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_sample(args) -> tuple[Sample, str]:
    if args.input and args.dataset:
        raise UsageError("give either --input or --dataset, not both")
    if args.input:
        return read_data_file(args.input), str(args.input)
    if args.dataset:
        return bundled_dataset(args.dataset), f"dataset:{args.dataset}"
    raise UsageError("one of --input or --dataset is required")


def _add_data_args(p):
    p.add_argument("--input", help="data file, one positive value per line")
    p.add_argument("--dataset", choices=sorted(DATASETS), help="bundled dataset")


def _emit(report: Report, summary: str | None = None) -> None:
    sys.stdout.write(report.to_json() + "\n")
    if summary:
        sys.stderr.write(summary.rstrip("\n") + "\n")


# --- commands -----------------------------------------------------------------

def _fit_report(sample: Sample, source: str, args) -> tuple[Report, int]:
    config = EMConfig(tol=args.tol, max_iter=args.max_iter, init=args.init,
                      accelerate=not args.no_accel)
    fit = fit_em(sample, config)
    theta = fit.estimates
    status = EXIT_OK
    diagnostics = {
        "converged": fit.converged,
        "iterations": fit.iterations,
        "em_evaluations": fit.em_evaluations,
        "stop_reason": fit.message,
        "score": score(theta, sample),
        "accelerated": config.accelerate,
    }
    results = {"estimates": _params_dict(theta), "loglik": fit.loglik, "n": sample.n}
    if not fit.converged:
        status = EXIT_NUMERIC
    info = observed_info(theta, sample)
    diagnostics["information_eigenvalues"] = info.eigenvalues
    if info.invertible:
        results["standard_errors"] = dict(zip(("p", "beta", "alpha"), info.standard_errors()))
        results["covariance"] = info.inverse
    else:
        diagnostics["information"] = info.message
        status = EXIT_NUMERIC
    try:
        cis = confidence_intervals(info, theta, args.level)
        results["confidence_intervals"] = [c.as_dict() for c in cis]
    except UnsupportedError as exc:
        diagnostics["confidence_intervals"] = str(exc)
    tests = []
    if fit.converged:
        for null in (NullModel.EG, NullModel.WEIBULL, NullModel.EXPONENTIAL):
            try:
                tests.append(lr_test(sample, null, fit).as_dict())
            except ConvergenceError as exc:
                diagnostics.setdefault("lr_tests", []).append(str(exc))
                status = EXIT_NUMERIC
    results["lr_tests"] = tests
    inputs = {"source": source, "n": sample.n, "tol": args.tol, "max_iter": args.max_iter,
              "init": _params_dict(args.init) if args.init else None, "level": args.level}
    return Report("fit", inputs, results, diagnostics), status


def cmd_fit(args) -> int:
    sample, source = _load_sample(args)
    report, status = _fit_report(sample, source, args)
    est = report.results["estimates"]
    summary = (f"WG fit to {source} (n={sample.n}): p={est['p']:.4f} beta={est['beta']:.6g} "
               f"alpha={est['alpha']:.4f} loglik={report.results['loglik']:.4f} "
               f"converged={report.diagnostics['converged']} "
               f"iterations={report.diagnostics['iterations']}")
    _emit(report, summary)
    return status


_EVAL_FUNCS = {"pdf": pdf, "cdf": cdf, "survival": survival, "hazard": hazard}


def cmd_eval(args) -> int:
    if args.grid:
        lo, hi, num = args.grid
        points = np.linspace(float(lo), float(hi), int(num))
    elif args.points:
        points = np.array(args.points, dtype=float)
    else:
        raise UsageError("give evaluation points or --grid LO HI NUM")
    values = _EVAL_FUNCS[args.fn](args.params, points)
    out = sys.stdout
    out.write(f"x\t{args.fn}\n")
    for x, v in zip(np.atleast_1d(points), np.atleast_1d(values)):
        out.write(f"{float(x)!r}\t{float(v)!r}\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("-n must be >= 1")
    rng = make_rng(args.seed)
    draw = sample_inverse if args.method == "inverse" else sample_compound
    xs = draw(args.params, args.n, rng)
    sys.stdout.write("".join(f"{float(x)!r}\n" for x in xs))
    return EXIT_OK


def cmd_order_stat(args) -> int:
    try:
        spec = OrderStatSpec(args.i, args.n, args.r)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    methods = ["expr10", "expr11", "quadrature"] if args.method == "all" else [args.method]
    results = {}
    for m in methods:
        if m == "quadrature":
            results[m] = {"value": orderstat_moment_quadrature(args.params, spec)}
        else:
            fn = orderstat_moment_expr10 if m == "expr10" else orderstat_moment_expr11
            res = fn(args.params, spec, args.j_max)
            results[m] = {"value": res.value, "terms_used": res.terms_used,
                          "truncation_bound": res.truncation_bound}
    inputs = {"params": _params_dict(args.params), "i": spec.i, "n": spec.n, "r": spec.r,
              "j_max": args.j_max}
    report = Report("order-stat", inputs, results)
    summary = "; ".join(f"{m}={v['value']:.6g}" for m, v in results.items())
    _emit(report, f"E(X_{{{spec.i}:{spec.n}}}^{spec.r}): {summary}")
    return EXIT_OK


def plot_data(sample: Sample, theta: WGParams, bins: int = 20, curve_points: int = 200):
    """Histogram densities, fitted-pdf curve and QQ pairs for a sample."""
    xs = np.sort(sample.xs)
    n = xs.size
    counts, edges = np.histogram(xs, bins=bins, density=True)
    mids = 0.5 * (edges[:-1] + edges[1:])
    hi = max(float(xs[-1]), float(quantile(theta, 0.999)))
    grid = np.linspace(hi / curve_points, hi, curve_points)
    curve = np.asarray(pdf(theta, grid))
    expected = np.asarray(quantile(theta, (np.arange(1, n + 1) - 0.5) / n))
    return (mids, counts), (grid, curve), (xs, expected)


def cmd_plot_data(args) -> int:
    sample, source = _load_sample(args)
    theta = args.params
    diagnostics = {}
    if theta is None:
        fit = fit_em(sample, EMConfig(tol=args.tol, max_iter=args.max_iter))
        theta = fit.estimates
        diagnostics = {"fitted": True, "converged": fit.converged, "iterations": fit.iterations}
        if not fit.converged:
            return _numeric_failure("EM did not converge; pass --params to plot anyway")
    (mids, dens), (grid, curve), (obs, expected) = plot_data(sample, theta, args.bins)
    prefix = Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    density_path = prefix.with_name(prefix.name + "_density.tsv")
    qq_path = prefix.with_name(prefix.name + "_qq.tsv")
    with density_path.open("w", encoding="utf-8") as fh:
        fh.write("kind\tx\tdensity\n")
        for x, d in zip(mids, dens):
            fh.write(f"histogram\t{float(x)!r}\t{float(d)!r}\n")
        for x, d in zip(grid, curve):
            fh.write(f"fitted_pdf\t{float(x)!r}\t{float(d)!r}\n")
    with qq_path.open("w", encoding="utf-8") as fh:
        fh.write("rank\tobserved\texpected\n")
        for k, (o, e) in enumerate(zip(obs, expected), start=1):
            fh.write(f"{k}\t{float(o)!r}\t{float(e)!r}\n")
    report = Report("plot-data", {"source": source, "params": _params_dict(theta), "bins": args.bins},
                    {"density_file": str(density_path), "qq_file": str(qq_path),
                     "qq_rows": int(obs.size), "plotting_positions": "(rank - 0.5)/n"},
                    diagnostics)
    _emit(report, f"wrote {density_path} and {qq_path}")
    return EXIT_OK


def cmd_moments(args) -> int:
    rep = moment_report(args.params)
    results = {"moments": rep.as_dict()}
    if args.figure3:
        results["figure3"] = {str(a): rows for a, rows in
                              figure3_curves(args.alphas, args.params.beta).items()}
    report = Report("moments", {"params": _params_dict(args.params)}, results)
    _emit(report, f"mean={rep.mean:.6g} variance={rep.variance:.6g} "
                  f"skewness={rep.skewness:.6g} kurtosis={rep.kurtosis:.6g}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    theta = args.params
    results = {"renyi": [], "shannon": shannon_entropy(theta).as_dict()}
    diagnostics = {}
    for g in args.gamma:
        res = renyi_entropy(theta, g)
        entry = {"gamma": g, **res.as_dict()}
        check = math.log(power_integral_quadrature(theta, g)) / (1.0 - g)
        entry["quadrature_check"] = check
        entry["agrees_with_quadrature"] = abs(res.value - check) <= 1e-6 * max(1.0, abs(check))
        results["renyi"].append(entry)
    paper = shannon_paper_formula(theta)
    results["shannon_paper_formula"] = paper.as_dict()
    diagnostics["note"] = ("the published closed form for Shannon entropy is reported for "
                           "comparison only; quadrature is authoritative")
    report = Report("entropy", {"params": _params_dict(theta), "gamma": list(args.gamma)},
                    results, diagnostics)
    _emit(report, f"shannon={results['shannon']['value']:.6g}")
    return EXIT_OK


def _numeric_failure(message: str) -> int:
    sys.stderr.write(f"wgdist: {message}\n")
    return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wgdist", description="Weibull-geometric distribution toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="EM fit with standard errors, intervals and LR tests")
    _add_data_args(p)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--init", type=_parse_params, help="starting values p,beta,alpha")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--no-accel", action="store_true", help="plain EM without extrapolation")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate pdf/cdf/survival/hazard")
    p.add_argument("--params", type=_parse_params, required=True)
    p.add_argument("--fn", choices=sorted(_EVAL_FUNCS), default="pdf")
    p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "NUM"))
    p.add_argument("points", nargs="*", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="draw random variates")
    p.add_argument("--params", type=_parse_params, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--method", choices=["inverse", "compound"], default="inverse")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("order-stat", help="moments of order statistics")
    p.add_argument("--params", type=_parse_params, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--method", choices=["expr10", "expr11", "quadrature", "all"], default="all")
    p.add_argument("--j-max", type=int, default=100)
    p.set_defaults(func=cmd_order_stat)

    p = sub.add_parser("plot-data", help="histogram/pdf and QQ tables for plotting")
    _add_data_args(p)
    p.add_argument("--params", type=_parse_params, help="skip fitting and use these values")
    p.add_argument("--prefix", default="wg_plot")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=500)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("moments", help="moments, skewness and kurtosis")
    p.add_argument("--params", type=_parse_params, required=True)
    p.add_argument("--figure3", action="store_true", help="also tabulate skewness/kurtosis against p")
    p.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0])
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("entropy", help="Rényi and Shannon entropies")
    p.add_argument("--params", type=_parse_params, required=True)
    p.add_argument("--gamma", type=float, nargs="+", default=[2.0])
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UsageError) as exc:
        sys.stderr.write(f"wgdist: {exc}\n")
        return EXIT_USAGE
    except (DomainError, UnsupportedError) as exc:
        sys.stderr.write(f"wgdist: {exc}\n")
        return EXIT_USAGE
    except ConvergenceError as exc:
        return _numeric_failure(str(exc))


if __name__ == "__main__":
    sys.exit(main())
