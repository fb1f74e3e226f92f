"""Command-line entry point: ``prasym <subcommand> ...``.

Exit codes: 0 success, 1 bad parameters, 2 numerical non-convergence, 3 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .asymptotics import approx_mixture, approx_sbm_general
from .errors import ConvergenceError, ParameterError, PrasymError
from .experiment import (
    PRESET_PLOTS,
    PRESETS,
    ExperimentConfig,
    build_instance,
    build_preference,
    emit_csv,
    preset,
    run_experiment,
    sbm_params,
)
from .io import read_edge_list, read_vector, write_edge_list, write_vector
from .pagerank import PageRankConfig, pagerank_dense, pagerank_power
from .plotting import emit_loglog_plot
from .spectral import DENSE_LIMIT, second_eigenvalue_magnitude, second_magnitude_dense
from .suite import format_table, run_suite, write_checks_csv

log = logging.getLogger("prasym")

EXIT_OK, EXIT_PARAM, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3


def _master_seed(args, default=None):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PRASYM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"PRASYM_SEED must be an integer, got {env!r}") from None
    return default


def _sizes(text):
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def _load_config(args) -> ExperimentConfig:
    """Preset or JSON config, then command-line overrides on top."""
    if bool(args.preset) == bool(args.config):
        raise ParameterError("give exactly one of --preset or --config")
    cfg = preset(args.preset) if args.preset else ExperimentConfig.from_json(args.config)
    overrides = {
        "sizes": args.sizes,
        "seeds_per_size": args.seeds,
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "output_dir": args.output_dir,
        "threads": args.threads,
        "preference": args.preference,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "dump_vectors", False):
        cfg.dump_vectors = True
    if getattr(args, "timings", False):
        cfg.record_timings = True
    seed = _master_seed(args)
    if seed is not None:
        cfg.master_seed = seed
    cfg.validate()
    return cfg


def _model_params(args) -> dict:
    if args.preset:
        return dict(PRESETS[args.preset]["model_params"])
    params = {}
    for key in ("p", "q", "m", "w", "beta"):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    if args.model == "chung_lu":
        params.setdefault("weights", "constant" if "w" in params else "geometric_clipped")
        if params["weights"] == "geometric_clipped":
            params.update(mean_coefficient=10.0, mean_exponent=1 / 3, ratio=7.0)
    if args.model == "power_law":
        params.setdefault("beta", 4.0)
        params.update(avg_degree_exponent=1 / 6, max_degree_exponent=1 / 3, i0_form="standard")
    if args.model == "er" and "p" not in params:
        params.update(PRESETS["fig1_er"]["model_params"])
    if args.model == "sbm":
        params.setdefault("p", 0.1)
        params.setdefault("q", 0.01)
        if "m" not in params:
            params["m_fraction"] = 0.5
    return params


def _model(args) -> str:
    model = PRESETS[args.preset]["model"] if args.preset else args.model
    if model is None:
        raise ParameterError("give --model or --preset")
    return model


def _out_path(args, default_name: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(args.output_dir or ".") / default_name


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    model = _model(args)
    seed = _master_seed(args, default=0)
    inst = build_instance(model, args.n, _model_params(args), seed, args.threads or 1)
    path = _out_path(args, f"{model}_n{args.n}_seed{seed}.edges")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(inst.graph, path)
    print(f"wrote {path}: n={inst.graph.n} edges={inst.graph.num_edges}")
    return EXIT_OK


def _preference(args, n: int, sbm=None) -> np.ndarray:
    if args.preference_file:
        return read_vector(args.preference_file)
    return build_preference(args.preference or "uniform", n, sbm)


def cmd_pagerank(args) -> int:
    g = read_edge_list(args.graph)
    v = _preference(args, g.n)
    alpha = 0.85 if args.alpha is None else args.alpha
    if args.method == "dense":
        res = pagerank_dense(g, v, alpha)
    else:
        cfg = PageRankConfig(alpha, args.tol or 1e-12, args.max_iter or 10_000)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = pagerank_power(g, v, cfg)
    path = _out_path(args, "pagerank.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_vector(res.pi, path)
    print(f"wrote {path}: method={res.method} iterations={res.iterations} residual={res.residual:.3g}")
    if not res.connected:
        print("warning: graph is disconnected", file=sys.stderr)
    if not res.converged:
        print("error: power iteration did not converge", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_approx(args) -> int:
    alpha = 0.85 if args.alpha is None else args.alpha
    if args.graph:
        g = read_edge_list(args.graph)
        pibar = approx_mixture(g, _preference(args, g.n), alpha)
    elif args.model == "sbm":
        if args.n is None:
            raise ParameterError("the block-model approximation needs --n")
        params = sbm_params(args.n, _model_params(args))
        pibar = approx_sbm_general(params, _preference(args, args.n, params), alpha)
    else:
        raise ParameterError("give --graph, or --model sbm with --n/--p/--q")
    path = _out_path(args, "approx.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_vector(pibar, path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = read_edge_list(args.graph)
    est = second_eigenvalue_magnitude(
        g, tol=args.tol or 1e-8, max_iter=args.max_iter or 10_000, seed=_master_seed(args, 0), method=args.method
    )
    out = {
        "n": g.n,
        "edges": g.num_edges,
        "lambda_star": est.value,
        "residual": est.residual,
        "iterations": est.iterations,
        "method": est.method,
        "converged": est.converged,
        "spectral_gap": 1.0 - est.value,
    }
    if g.n <= DENSE_LIMIT and args.dense_check:
        out["lambda_star_dense"] = second_magnitude_dense(g)
    print(json.dumps(out, indent=2))
    if not est.converged:
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    result = run_suite(cfg)
    print(format_table(result))
    out_dir = Path(cfg.output_dir)
    path = write_checks_csv(result.checks, out_dir / f"{cfg.name or cfg.model}_verify.csv")
    print(f"wrote {path}")
    print("suite: " + ("PASS" if result.passed else "FAIL"))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    stem = cfg.name or cfg.model
    records, summary = run_experiment(cfg)
    out_dir = Path(cfg.output_dir)
    csv_path = emit_csv(records, out_dir / f"{stem}.csv")
    print(f"wrote {csv_path}")
    for field_ in PRESET_PLOTS.get(cfg.name, ("tv_error", "max_relative_error")):
        if not any(getattr(r, field_) > 0 for r in records if not r.excluded):
            continue
        plot = emit_loglog_plot(records, "n", field_, out_dir / f"{stem}_{field_}.svg", title=f"{stem}: {field_}")
        print(f"wrote {plot.path}")
    (out_dir / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    for model, entry in summary.items():
        for row in entry["per_n"]:
            print(
                f"{model} n={row['n']}: median tv={row['median_tv_error']:.4g} "
                f"max_rel={row['median_max_relative_error']:.4g} excluded={row['excluded']}"
            )
        print(f"{model} slopes: tv={entry['slope_tv_error']:.3f} max_rel={entry['slope_max_relative_error']:.3f}")
    return EXIT_OK


def _json_default(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    raise TypeError(type(x))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 means non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default: $PRASYM_SEED, then the config value)")
    common.add_argument("--alpha", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--output-dir")
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=["er", "chung_lu", "sbm", "power_law"])
    model.add_argument("--n", type=int)
    model.add_argument("--p", type=float)
    model.add_argument("--q", type=float)
    model.add_argument("--m", type=int, help="size of the first community")
    model.add_argument("--w", type=float, help="constant Chung-Lu weight")
    model.add_argument("--beta", type=float, help="power-law exponent")

    pref = argparse.ArgumentParser(add_help=False)
    pref.add_argument("--preference", help="uniform | point_mass(k) | community_indicator(1|2)")
    pref.add_argument("--preference-file", help="vector file, one value per line")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--preset", choices=sorted(PRESETS))
    sweep.add_argument("--config", help="JSON ExperimentConfig")
    sweep.add_argument("--sizes", type=_sizes, help="comma-separated sizes")
    sweep.add_argument("--seeds", type=int, help="seeds per size")

    parser = _Parser(prog="prasym", description="PageRank asymptotics on random graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common, model], help="sample a graph to an edge list")
    p.add_argument("--preset", choices=sorted(PRESETS), help="take model and parameters from a preset")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pagerank", parents=[common, pref], help="personalized PageRank of an edge list")
    p.add_argument("graph")
    p.add_argument("--method", choices=["power", "dense"], default="power")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_pagerank)

    p = sub.add_parser("approx", parents=[common, model, pref], help="asymptotic approximation vector")
    p.add_argument("--graph", help="edge list (mixture approximation)")
    p.add_argument("--preset", help=argparse.SUPPRESS)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("spectrum", parents=[common], help="second eigenvalue magnitude of Q")
    p.add_argument("graph")
    p.add_argument("--method", choices=["power", "lanczos"], default="power")
    p.add_argument("--dense-check", action="store_true", help="also compute it densely (n <= 2048)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", parents=[common, sweep, pref], help="lemma suite over a preset sweep")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", parents=[common, sweep, pref], help="run a sweep: CSV, SVG, summary")
    p.add_argument("--dump-vectors", action="store_true", help="write pi and pibar per cell")
    p.add_argument("--timings", action="store_true", help="fill wall_time_ms (breaks byte-identical output)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "generate" and args.n is None:
        parser.error("generate needs --n")
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PrasymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
