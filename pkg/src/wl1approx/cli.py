"""Command-line front end.

Every experiment flag mirrors a field of :class:`ExperimentConfig`; a value is
taken from the flag if given, else from ``--config``, else the default.

Exit codes: 0 success, 1 usage/config/I-O error, 2 solver or numeric failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .basis import assemble, sample_measure
from .harness import ExperimentConfig, load_config, run_m_sweep, run_parameter_sweep
from .harness.config import ConfigError, DEFAULT_GRIDS
from .harness.functions import NotUnderdampedError
from .harness.noise import apply_noise
from .harness.stats import gnuplot_blocks
from .harness.sweeps import _streams, _target, build_reference, sweep_m_value
from .indexsets import (
    MAX_ENUM_D,
    MAX_ENUM_S,
    BasisKind,
    hyperbolic_cross,
    intrinsic_lower_sparsity,
    intrinsic_weights,
)
from .metrics import RankDeficientError, l2_error, linf_surrogate, tail_Q
from .solvers import DECODERS, DecoderKind, InfeasibleError, solve
from .tuning import CvSpec, cross_validate, parse_grid, recommend, recommended_m

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _csv_ints(text):
    return tuple(int(t) for t in text.replace(",", " ").split())


def _grid(text):
    parse_grid(text)
    return text


def _experiment_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("experiment (flag > config file > default)")
    g.add_argument("--config", help="INI config file with [function] [sampling] [noise] [decoders] [output]")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--function", choices=("synthetic", "oscillator", "sparse"), help="target function")
    g.add_argument("--d", type=int, help="dimension")
    g.add_argument("--sparsity", type=int, help="support size of the random sparse target")
    g.add_argument("--perturbation", type=float, help="uniform perturbation added to target samples")
    g.add_argument("--k-scale", type=float, help="oscillator stiffness coefficient")
    g.add_argument("--basis", choices=[k.value for k in BasisKind], help="orthonormal basis")
    g.add_argument("--s", type=int, help="hyperbolic cross order")
    g.add_argument("--m", type=int, help="number of samples (default ceil(s^gamma ln n))")
    g.add_argument("--m-factors", type=_csv_floats, help="C values for m = ceil(C s^gamma) in sweep-m")
    g.add_argument("--trials", type=int, help="number of trials")
    g.add_argument("--oversampling", type=int, help="least-squares reference oversampling factor")
    g.add_argument("--reference", help="stored least-squares reference to measure errors against")
    g.add_argument("--noise", choices=("none", "uniform", "gaussian", "sparse"), help="noise model")
    g.add_argument("--levels", type=_csv_floats, help="noise levels (beta, or amplitude for sparse)")
    g.add_argument("--fraction", type=float, help="fraction of corrupted samples")
    g.add_argument("--amplitude", type=float, help="corruption amplitude")
    for name in DECODERS:
        g.add_argument(f"--{name}", type=_grid, metavar="GRID", help=f"{name} grid, e.g. {DEFAULT_GRIDS[name]}")
    g.add_argument("--combinations", type=_csv_ints, help="sweep-m combinations (1..10)")
    g.add_argument("--cv-folds", type=int, help="cross-validation folds")
    g.add_argument("--cv-repetitions", type=int, help="cross-validation repetitions")
    g.add_argument("--cv-metric", choices=("l2sq", "l1"), help="validation error metric")
    g.add_argument("--cv-grid", type=_grid, help="cross-validation grid (relative to the recipe value in sweep-m)")
    g.add_argument("--csv", help="CSV output path")
    g.add_argument("--json", help="JSON summary output path")
    g.add_argument("--timing", action="store_true", default=None, help="record wall-clock seconds")
    g.add_argument("--full-scale", action="store_true", default=None, help="use the large full-size instances")
    g.add_argument("--max-iterations", type=int, help="solver iteration cap")
    g.add_argument("--tol", type=float, help="solver relative-change tolerance")
    return p


_GRID_FLAGS = tuple(f"--{name}" for name in DECODERS) + ("--cv-grid",)


def _join_grid_values(argv: Sequence[str]) -> list[str]:
    """Glue grid flags to their value so ``--wqcbp -7:0.5:1`` is not read as two options."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _GRID_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _experiment_flags()
    parser = _Parser(prog="wl1approx", description="Weighted l1 sparse polynomial approximation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("approximate", parents=[common], help="solve one decoder on one sample set")
    a.add_argument("--decoder", choices=DECODERS, default="wqcbp", help="decoder to run")
    a.add_argument("--param", type=float, help="eta or lambda (default: recipe value)")
    a.add_argument("--output", help="write recovered coefficients here")

    sp = sub.add_parser("sweep-param", parents=[common], help="error against tuning parameter")
    sp.add_argument("--gnuplot", help="write gnuplot data blocks here")
    sm = sub.add_parser("sweep-m", parents=[common], help="error against number of samples")
    sm.add_argument("--gnuplot", help="write gnuplot data blocks here")

    cv = sub.add_parser("cross-validate", parents=[common], help="K-fold cross validation on one sample set")
    cv.add_argument("--decoder", choices=DECODERS, default="wsrlasso", help="decoder to tune")

    sub.add_parser("diag", parents=[common], help="index set size, sparsity surrogates, recommended m, Q")

    r = sub.add_parser("reference", parents=[common], help="build and store a least-squares reference")
    r.add_argument("--output", required=True, help="reference output path")
    return parser


_FIELDS = (
    "seed", "function", "d", "sparsity", "perturbation", "k_scale", "basis", "s", "m", "m_factors", "trials",
    "oversampling", "reference", "noise", "levels", "fraction", "amplitude", "combinations", "cv_folds",
    "cv_repetitions", "cv_metric", "cv_grid", "csv", "json", "timing", "full_scale", "max_iterations", "tol",
)


def config_from_args(args) -> ExperimentConfig:
    base = ExperimentConfig()
    if args.full_scale:
        base = base.at_full_scale("m" if args.command == "sweep-m" else "param")
    if args.config:
        base = load_config(args.config, base)
    changes = {f: getattr(args, f) for f in _FIELDS}
    grids = [(name, getattr(args, name)) for name in DECODERS if getattr(args, name) is not None]
    if grids:
        changes["decoders"] = tuple(grids)
    try:
        return base.override(**changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _sample(config: ExperimentConfig):
    index_set = hyperbolic_cross(config.d, config.s)
    m = sweep_m_value(config, len(index_set))
    reference = build_reference(config, index_set)
    r_pts, r_noise, r_truth, r_cv, r_pert = _streams(config.seed, (0,))
    f, x_ref = _target(config, index_set, reference, r_truth, r_pert)
    pts = sample_measure(config.basis, config.d, m, r_pts)
    problem = assemble(config.basis, index_set, pts, f(pts))
    model = config.noise_model.at_level(config.levels[0])
    y, e = apply_noise(problem.y, model, r_noise)
    return problem.with_data(y), x_ref, e, r_cv


def _recipe(name: str, config: ExperimentConfig, problem, e) -> float:
    noise = float(np.linalg.norm(e))
    k = config.noise_model.at_level(config.levels[0]).corrupted_count(problem.m) or problem.m
    if name == "wlasso" and noise == 0:
        raise UsageError("wlasso recipe needs nonzero noise; pass --param")
    return recommend(name, config.s, config.basis, noise_estimate=noise, k=k, m=problem.m, n=problem.n)


def _write_coefficients(path, index_set, x):
    with open(path, "w") as fh:
        for i, c in zip(index_set, x):
            fh.write(" ".join(map(str, i)) + f"\t{c:.17e}\n")


def cmd_approximate(args, config, out):
    problem, x_ref, e, _ = _sample(config)
    param = args.param if args.param is not None else _recipe(args.decoder, config, problem, e)
    try:
        kind = DecoderKind(args.decoder, param)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sol = solve(problem, kind, config.solver_options)
    print(f"decoder {kind} n={problem.n} m={problem.m} iterations={sol.iterations} "
          f"converged={sol.converged} objective={sol.objective:.6e}", file=out)
    if x_ref is not None:
        print(f"l2_error {l2_error(sol.x, x_ref):.6e}", file=out)
        print(f"linf_surrogate {linf_surrogate(sol.x, x_ref, problem.weights):.6e}", file=out)
    if args.output:
        _write_coefficients(args.output, problem.index_set, sol.x)
    return EXIT_OK


def _sweep(args, config, out, runner, x_key):
    result = runner(config)
    result.write(config.csv, config.json)
    cells = result.cells()
    if args.gnuplot:
        with open(args.gnuplot, "w") as fh:
            fh.write(gnuplot_blocks(cells, x_key=x_key))
    print(f"{len(result.rows)} rows", file=out)
    for c in cells:
        print(f"{c['decoder']:>14} beta={c['beta']:<8g} {x_key}={c[x_key]:<12.6g} "
              f"median={c['median']:.3e} mean={c['mean']:.3e} failures={c['failures']}", file=out)
    if not config.csv:
        out.write(result.csv_text())
    return EXIT_OK


def cmd_cross_validate(args, config, out):
    problem, _, _, rng = _sample(config)
    spec = CvSpec(config.cv_folds, config.cv_repetitions, tuple(parse_grid(config.cv_grid)), args.decoder,
                  config.cv_metric)
    res = cross_validate(problem, spec, rng, opts=config.solver_options)
    print(f"chosen {args.decoder} parameter {res.parameter:.17g}", file=out)
    print("t g " + " ".join(f"{p:.6g}" for p in spec.grid), file=out)
    T, G, _ = res.errors.shape
    for t in range(T):
        for g in range(G):
            print(f"{t} {g} " + " ".join(f"{v:.17g}" for v in res.errors[t, g]), file=out)
    print("mean " + " ".join(f"{v:.17g}" for v in res.mean_errors), file=out)
    return EXIT_OK


def cmd_diag(args, config, out):
    index_set = hyperbolic_cross(config.d, config.s)
    n = len(index_set)
    u = intrinsic_weights(config.basis, index_set)
    m = sweep_m_value(config, n)
    print(f"n {n}", file=out)
    print(f"weighted_cardinality {float(u @ u):.17g}", file=out)
    print(f"K_surrogate {intrinsic_lower_sparsity(config.basis, config.s, config.d):.17g}", file=out)
    if config.s <= MAX_ENUM_S and config.d <= MAX_ENUM_D:
        exact = intrinsic_lower_sparsity(config.basis, config.s, config.d, mode="exact")
        print(f"K_exact {exact:.17g}", file=out)
    else:
        print("K_exact skipped (enumeration limited to s <= 12, d <= 6)", file=out)
    print(f"recommended_m {recommended_m(config.s, config.basis, n)}", file=out)
    r_pts = _streams(config.seed, (0,))[0]
    pts = sample_measure(config.basis, config.d, m, r_pts)
    problem = assemble(config.basis, index_set, pts, np.zeros(m))
    Q, deficient = tail_Q(problem)
    print(f"Q {Q:.17g} (m={m}{', rank deficient' if deficient else ''})", file=out)
    return EXIT_OK


def cmd_reference(args, config, out):
    if config.function == "sparse":
        raise UsageError("the sparse target has exact coefficients; no reference needed")
    index_set = hyperbolic_cross(config.d, config.s)
    ref = build_reference(replace(config, reference=None), index_set)
    ref.save(args.output)
    print(f"reference n={len(index_set)} oversampling={ref.oversampling} "
          f"residual_norm={ref.residual_norm:.6e} -> {args.output}", file=out)
    return EXIT_OK


_COMMANDS = {
    "approximate": cmd_approximate,
    "sweep-param": lambda a, c, o: _sweep(a, c, o, run_parameter_sweep, "param"),
    "sweep-m": lambda a, c, o: _sweep(a, c, o, run_m_sweep, "m"),
    "cross-validate": cmd_cross_validate,
    "diag": cmd_diag,
    "reference": cmd_reference,
}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        argv = sys.argv[1:] if argv is None else argv
        args = build_parser().parse_args(_join_grid_values(argv))
        config = config_from_args(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, config, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_USAGE
    except (InfeasibleError, RankDeficientError, NotUnderdampedError, np.linalg.LinAlgError,
            FloatingPointError, ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=err)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
