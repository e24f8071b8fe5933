"""Command-line entry point: ``abclab <subcommand> [options]``.

Experiment subcommands (grf, poisgeom, normal, limits, ma) write
``<out>/<experiment>/data.csv``, ``plot.svg`` and ``manifest``. Every config
field is a ``--flag``; a flat ``key = value`` file given with ``--config``
supplies the same keys, and explicit flags override it.

Exit status: 0 success, 2 configuration or usage error, 3 truncated ABC run.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from abclab import __version__, oracle
from abclab.artifacts import read_columns, write_columns, write_manifest
from abclab.errors import ConfigurationError, EstimationError
from abclab.estimators import estimate_bayes_factor, estimate_posterior_probs
from abclab.experiments import CONFIGS, RUNNERS
from abclab.models import (
    MaSpec,
    chain_spec,
    cross_model_summarizer,
    cross_model_summary,
    geometric_model,
    grf_model,
    ma_model,
    normal_pair,
    poisson_model,
)
from abclab.streams import RandomStream
from abclab.svg import plot_experiment
from abclab.table import ReferenceTable, build_reference_table, tolerance_sweep

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATED = 0, 2, 3
PAIRS = ("poisgeom", "normal", "grf", "ma")

log = logging.getLogger("abclab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _convert(default, text: str, key: str):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(text)
            return low in ("1", "true", "yes")
        if isinstance(default, int):
            v = float(text)
            if v != int(v):
                raise ValueError(text)
            return int(v)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            proto = default[0] if default else 0.0
            return tuple(_convert(proto, part, key) for part in text.split(",") if part.strip())
        return text
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {text!r}") from None


def _read_config_file(path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string("[config]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    return dict(parser["config"])


def build_config(name: str, file_values: dict[str, str], flag_values: dict[str, str]):
    """Config dataclass from defaults, then the file, then explicit flags."""
    cls = CONFIGS[name]
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    values = {}
    for source in (file_values, flag_values):
        for key, text in source.items():
            if key not in defaults:
                raise ConfigurationError(f"unknown key {key!r} for {name}; known: {', '.join(defaults)}")
            values[key] = _convert(defaults[key], text, key)
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None


def _add_experiment(sub, name: str):
    cls = CONFIGS[name]
    doc = (cls.__doc__ or "").strip().splitlines()
    p = sub.add_parser(name, help=f"run the {name} experiment", description=doc[0] if doc else None)
    p.add_argument("--seed", type=int, required=True, help="root seed (mandatory)")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--workers", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--config", help="flat key = value file with any of the keys below")
    group = p.add_argument_group("config keys (also valid in --config files)")
    for f in dataclasses.fields(cls):
        d = f.default
        shown = ",".join(map(str, d)) if isinstance(d, tuple) else d
        group.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cfg_{f.name}", metavar="VALUE",
                           help=f"default: {shown}")
    p.set_defaults(handler=_run_experiment, experiment=name)


def _run_experiment(args) -> int:
    name = args.experiment
    if args.workers < 1:
        raise ConfigurationError("--workers must be at least 1")
    file_values = _read_config_file(args.config) if args.config else {}
    flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    cfg = build_config(name, file_values, flags)
    if hasattr(cfg, "scaled"):
        cfg = cfg.scaled()
    out = Path(args.out) / name
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out}: {exc}") from None

    result = RUNNERS[name](cfg, args.seed, args.workers)
    csv_path = out / "data.csv"
    write_columns(csv_path, result.columns)
    for fname, cols in result.extra_tables.items():
        write_columns(out / fname, cols)
    (out / "plot.svg").write_text(plot_experiment(name, read_columns(csv_path)))
    manifest = {"experiment": name, "version": __version__, "seed": args.seed}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        manifest[f.name] = ",".join(map(str, v)) if isinstance(v, tuple) else v
    manifest["truncated"] = result.truncated
    manifest.update({f"result.{k}": v for k, v in result.diagnostics.items()})
    write_manifest(out / "manifest", manifest)
    for k, v in result.diagnostics.items():
        print(f"{k}: {v}")
    print(f"wrote {csv_path}")
    if result.truncated:
        print("ABC run truncated before reaching the acceptance target", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


def _pair_models(args):
    if args.pair == "poisgeom":
        return [poisson_model(), geometric_model()]
    if args.pair == "normal":
        return list(normal_pair(args.sigma1, args.sigma2, args.a))
    if args.pair == "grf":
        return [grf_model(chain_spec(args.n, 1)), grf_model(chain_spec(args.n, 2))]
    return [ma_model(MaSpec(2)), ma_model(MaSpec(1))]


def _cross_pair(pair: str) -> str:
    mapping = {"poisgeom": "poisson-geometric", "normal": "normal-pair"}
    if pair not in mapping:
        raise ConfigurationError(f"no cross-model summary for pair {pair!r}")
    return mapping[pair]


def _parse_list(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigurationError(f"bad {what}: {text!r}") from None


def _run_table(args) -> int:
    if args.T < 1 or args.n < 1:
        raise ConfigurationError("--T and --n must be positive")
    models = _pair_models(args)
    summary = cross_model_summarizer(_cross_pair(args.pair)) if args.summary == "cross" else None
    table = build_reference_table(models, None, args.n, args.T, RandomStream(args.seed),
                                  summary=summary, workers=args.workers)
    distances = None
    if args.observed:
        y = _parse_list(args.observed, "observed data")
        if y.size != args.n:
            raise ConfigurationError(f"observed data has {y.size} values, --n is {args.n}")
        if all(m.integer_data for m in models):
            y = y.astype(np.int64)
        if args.summary == "cross":
            obs = cross_model_summary(_cross_pair(args.pair), y)
        else:
            from abclab.models import concat_summary

            obs = concat_summary(models)(y[None, :])[0]
        distances = table.distances(obs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, distances)
    print(f"wrote {len(table)} rows to {out}")
    return EXIT_OK


def _run_sweep(args) -> int:
    try:
        table, stored = ReferenceTable.from_csv(args.table)
    except OSError as exc:
        raise ConfigurationError(f"cannot read table {args.table}: {exc}") from None
    quantiles = _parse_list(args.quantiles, "quantiles")
    if args.observed_summary:
        obs = _parse_list(args.observed_summary, "observed summary")
        rows = tolerance_sweep(table, obs, quantiles)
    elif not np.all(np.isnan(stored)):
        rows = tolerance_sweep(table, None, quantiles, distances=stored)
    else:
        raise ConfigurationError("table has no distance column; pass --observed-summary")
    m = table.n_models
    cols = {"quantile": [], "epsilon": []}
    for k in range(m):
        cols[f"accepts_{k + 1}"] = []
    cols["log_bf_12"], cols["mc_se"] = [], []
    for r in rows:
        cols["quantile"].append(r.quantile)
        cols["epsilon"].append(r.epsilon)
        for k in range(m):
            cols[f"accepts_{k + 1}"].append(int(r.accept_counts[k]))
        try:
            est = estimate_bayes_factor(r, 0, 1)
            cols["log_bf_12"].append(est.log_bf)
            cols["mc_se"].append(est.mc_standard_error)
        except EstimationError:
            cols["log_bf_12"].append(float("nan"))
            cols["mc_se"].append(float("nan"))
        probs = estimate_posterior_probs(r)
        print(f"q={r.quantile:g} eps={r.epsilon:.6g} accepts={r.accept_counts.tolist()} "
              f"P(M)={np.round(probs.probs, 4).tolist()} log B12={cols['log_bf_12'][-1]:.4f} "
              f"se={cols['mc_se'][-1]:.4f}")
    if args.out:
        write_columns(args.out, cols)
        print(f"wrote {args.out}")
    return EXIT_OK


def factorisation_suite(seed: int = 0) -> dict[str, float]:
    """Max ``|log B12 - log g1/g2 - log B12^eta|`` for each pair with exact hooks."""
    st = RandomStream(seed)
    out = {}
    y = st.child(0).generator.poisson(1.0, size=(100, 50))
    out["poisson-geometric"] = oracle.check_factorisation(poisson_model(), geometric_model(), y).max_abs_residual
    m1, m2 = normal_pair(0.1, 10.0, 1.0)
    y = st.child(1).generator.normal(0.0, 1.0, size=(100, 15))
    out["normal-pair"] = oracle.check_factorisation(m1, m2, y).max_abs_residual
    g1, g2 = grf_model(chain_spec(10, 1)), grf_model(chain_spec(10, 2))
    y = st.child(2).generator.integers(0, 2, size=(100, 10))
    out["grf-chains"] = oracle.check_factorisation(g1, g2, y).max_abs_residual
    return out


def _run_check(args) -> int:
    residuals = factorisation_suite(args.seed)
    for name, r in residuals.items():
        print(f"{name}: max residual {r:.3e}")
    worst = max(residuals.values())
    print(f"max residual {worst:.3e}")
    return EXIT_OK if worst < 1e-8 else 1


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abclab", description="ABC model choice versus exact Bayes factors.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in RUNNERS:
        _add_experiment(sub, name)

    t = sub.add_parser("table", help="simulate a reference table and write it as CSV")
    t.add_argument("--pair", choices=PAIRS, required=True)
    t.add_argument("--n", type=int, required=True, help="dataset size (sites for grf)")
    t.add_argument("--T", type=int, default=10**5, help="number of rows")
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--summary", choices=("concat", "cross"), default="concat")
    t.add_argument("--observed", help="comma-separated observed data; fills the distance column")
    t.add_argument("--sigma1", type=float, default=0.1)
    t.add_argument("--sigma2", type=float, default=10.0)
    t.add_argument("--a", type=float, default=1.0)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", required=True, help="CSV path")
    t.set_defaults(handler=_run_table)

    s = sub.add_parser("sweep", help="accept counts and Bayes factors over tolerance quantiles")
    s.add_argument("--table", required=True, help="CSV written by the table subcommand")
    s.add_argument("--observed-summary", help="comma-separated summary; default uses the stored distances")
    s.add_argument("--quantiles", default="0.1,0.01,0.001")
    s.add_argument("--out", help="optional CSV path for the sweep rows")
    s.set_defaults(handler=_run_sweep)

    c = sub.add_parser("check", help="factorisation identity suite; exit 0 iff max residual < 1e-8")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(handler=_run_check)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"abclab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
