"""Command-line driver: generate instances, solve them, run seeded experiments."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import networkx as nx

from . import io as instance_io
from .complete import SearchSpaceTooLarge, brute_force_optimal
from .generators import PRESETS, Params, generate, preset_params
from .metrics import RunReport
from .model import AdcopInstance, Dcop
from .runner import ALGORITHMS, LOCAL, AlgoParams, UnknownAlgorithmError, run_algorithm
from .simnet import ProtocolError
from .transforms import aggregate_symmetric, peav_size, to_peav

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_RUNTIME = 4

COLUMNS = (
    "algorithm",
    "preset",
    "seed",
    "n",
    "k",
    "p1",
    "p2",
    "cost",
    "optimal_cost",
    "nclo",
    "messages",
    "avg_privacy_loss",
    "max_privacy_gain",
    "cycles_to_converge",
    "status",
)

ORACLE_CAP = 10**6


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        if x.is_integer():
            return str(int(x))
        return f"{x:.6f}".rstrip("0").rstrip(".")
    return str(x)


def instance_stats(instance: AdcopInstance) -> dict:
    n = instance.n_agents
    graph = nx.Graph()
    graph.add_nodes_from(instance.agents)
    graph.add_edges_from(instance.edges)
    pairs = n * (n - 1) / 2
    return {
        "n": n,
        "k": max(instance.domain_sizes, default=0),
        "edges": graph.number_of_edges(),
        "density": graph.number_of_edges() / pairs if pairs else 0.0,
        "connected": n > 0 and nx.is_connected(graph),
    }


def oracle_cost(instance: AdcopInstance, cap: int = ORACLE_CAP):
    if instance.search_space_size() > cap:
        return None
    return brute_force_optimal(instance, cap)[1]


def make_row(report: RunReport, instance: AdcopInstance, seed, preset: str = "", gen: Optional[Params] = None, status: str = "ok") -> dict:
    p1 = getattr(gen, "p1", None)
    p2 = getattr(gen, "p2", None)
    cycles = report.cycles_to_converge if report.algorithm in LOCAL else None
    return {
        "algorithm": report.algorithm,
        "preset": preset,
        "seed": seed,
        "n": instance.n_agents,
        "k": max(instance.domain_sizes, default=0),
        "p1": p1,
        "p2": p2,
        "cost": report.cost,
        "optimal_cost": report.optimal_cost,
        "nclo": report.nclo,
        "messages": report.total_messages,
        "avg_privacy_loss": report.avg_privacy_loss,
        "max_privacy_gain": report.max_privacy_gain,
        "cycles_to_converge": cycles,
        "status": status if not report.halted else "halted",
    }


def failure_row(algorithm: str, instance: AdcopInstance, seed, preset: str, gen: Optional[Params], status: str) -> dict:
    row = {c: None for c in COLUMNS}
    row.update(
        algorithm=algorithm,
        preset=preset,
        seed=seed,
        n=instance.n_agents,
        k=max(instance.domain_sizes, default=0),
        p1=getattr(gen, "p1", None),
        p2=getattr(gen, "p2", None),
        status=status,
    )
    return row


def write_rows(rows: Sequence[dict], out) -> None:
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _fmt(row.get(c)) for c in COLUMNS})


# -- experiment configuration ----------------------------------------------------


@dataclass
class ExperimentConfig:
    preset: str
    algorithms: list[str]
    seeds: int = 1
    base_seed: int = 0
    out: Optional[str] = None
    overrides: dict = field(default_factory=dict)
    algo_params: dict[str, AlgoParams] = field(default_factory=dict)
    oracle: bool = True
    jobs: int = 1

    def validate(self) -> None:
        if not self.algorithms:
            raise ConfigError("experiment needs at least one algorithm")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms: {', '.join(unknown)}")
        if self.seeds < 1:
            raise ConfigError("instance count (seeds) must be at least 1")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        try:
            preset_params(self.preset, self.base_seed, **self.overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad generator parameters: {exc}") from None


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


_ALGO_KEYS = {f.name for f in fields(AlgoParams)} - {"extra"}


def _algo_params(section, base: AlgoParams) -> AlgoParams:
    values = {}
    for key, raw in section.items():
        key = key.replace("-", "_")
        if key == "c":
            key = "coord_c"
        if key not in _ALGO_KEYS:
            raise ConfigError(f"unknown algorithm parameter {key!r}")
        values[key] = raw if key == "policy" else _number(raw)
    return replace(base, **values)


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if "experiment" not in parser:
        raise ConfigError("config needs an [experiment] section")
    exp = parser["experiment"]
    algorithms = [a.strip() for a in exp.get("algorithms", "").split(",") if a.strip()]
    try:
        cfg = ExperimentConfig(
            preset=exp.get("preset", ""),
            algorithms=algorithms,
            seeds=exp.getint("seeds", 1),
            base_seed=exp.getint("base_seed", 0),
            out=exp.get("out"),
            oracle=exp.getboolean("oracle", True),
            jobs=exp.getint("jobs", 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "generator" in parser:
        cfg.overrides = {k: _number(v) for k, v in parser["generator"].items()}
    defaults = _algo_params(parser["algorithms"], AlgoParams()) if "algorithms" in parser else AlgoParams()
    for name in algorithms:
        cfg.algo_params[name] = _algo_params(parser[name], defaults) if name in parser else defaults
    return cfg


# -- experiment execution --------------------------------------------------------


def _run_seed(cfg: ExperimentConfig, seed: int) -> list[dict]:
    gen = preset_params(cfg.preset, seed, **cfg.overrides)
    instance = generate(gen)
    optimum = None
    if cfg.oracle:
        optimum = oracle_cost(instance)
    rows = []
    for name in cfg.algorithms:
        try:
            report = run_algorithm(name, instance, seed, cfg.algo_params.get(name))
            report.optimal_cost = optimum
            rows.append(make_row(report, instance, seed, cfg.preset, gen))
        except (ProtocolError, SearchSpaceTooLarge, ValueError, MemoryError) as exc:
            log.warning("%s failed on seed %d: %s", name, seed, exc)
            rows.append(failure_row(name, instance, seed, cfg.preset, gen, f"error:{type(exc).__name__}"))
    return rows


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    cfg.validate()
    seeds = [cfg.base_seed + i for i in range(cfg.seeds)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_seed, [cfg] * len(seeds), seeds))
    else:
        chunks = [_run_seed(cfg, s) for s in seeds]
    # seed-major order regardless of completion order
    return [row for chunk in chunks for row in chunk]


def summarise(rows: Sequence[dict]) -> str:
    keys = ("cost", "nclo", "messages", "avg_privacy_loss", "max_privacy_gain")
    order: list[str] = []
    groups: dict[str, list[dict]] = {}
    for row in rows:
        if row["algorithm"] not in groups:
            order.append(row["algorithm"])
        groups.setdefault(row["algorithm"], []).append(row)
    lines = [f"{'algorithm':<12} {'runs':>5} " + " ".join(f"{k:>16}" for k in keys)]
    for name in order:
        ok = [r for r in groups[name] if r["status"] in ("ok", "halted") and r["cost"] is not None]
        means = []
        for k in keys:
            vals = [float(r[k]) for r in ok if r[k] is not None]
            means.append(f"{sum(vals) / len(vals):16.3f}" if vals else f"{'':>16}")
        lines.append(f"{name:<12} {len(ok):>5} " + " ".join(means))
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------------


def _gen_overrides(pairs: Sequence[str]) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = _number(value.strip())
    return out


def cmd_gen(args) -> int:
    try:
        params = preset_params(args.preset, args.seed, **_gen_overrides(args.set))
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad generator parameters: {exc}") from None
    instance = generate(params)
    text = instance_io.dumps(instance)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    stats = instance_stats(instance)
    print(
        f"n={stats['n']} k={stats['k']} edges={stats['edges']} density={stats['density']:.4f} connected={stats['connected']}",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return EXIT_OK


def _algo_params_from_args(args) -> AlgoParams:
    params = AlgoParams()
    if args.cycles is not None:
        params.cycles = args.cycles
    if args.p is not None:
        params.p = args.p
    if args.coord_c is not None:
        params.coord_c = args.coord_c
    if getattr(args, "threshold", None) is not None:
        params.threshold = args.threshold
    if args.policy:
        params.policy = args.policy
    return params


def cmd_solve(args) -> int:
    instance = instance_io.load(args.instance)
    if isinstance(instance, Dcop):
        raise ConfigError("solve expects an adcop instance")
    report = run_algorithm(args.algo, instance, args.seed, _algo_params_from_args(args))
    report.optimal_cost = oracle_cost(instance)
    row = make_row(report, instance, args.seed)
    buf = io.StringIO()
    write_rows([row], buf)
    _emit(buf.getvalue(), args.out)
    if args.trace and report.cost_trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cycle", "cost"])
            for cycle, cost in enumerate(report.cost_trace):
                w.writerow([cycle, _fmt(cost)])
    print(
        f"{report.algorithm}: cost={_fmt(report.cost)} optimal={_fmt(report.optimal_cost)} nclo={report.nclo} "
        f"messages={report.total_messages} loss={report.avg_privacy_loss:.2f}% gain={report.max_privacy_gain:.2f}%",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig(preset=args.preset or "", algorithms=[])
    if args.preset:
        cfg.preset = args.preset
    if args.algo:
        cfg.algorithms = [a.strip() for a in args.algo.split(",") if a.strip()]
        for name in cfg.algorithms:
            cfg.algo_params.setdefault(name, AlgoParams())
    if args.seeds is not None:
        cfg.seeds = args.seeds
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.out:
        cfg.out = args.out
    if args.jobs is not None:
        cfg.jobs = args.jobs
    cfg.overrides.update(_gen_overrides(args.set))
    cli_params = _algo_params_from_args(args)
    for name in cfg.algorithms:
        base = cfg.algo_params.get(name, AlgoParams())
        cfg.algo_params[name] = replace(
            base,
            cycles=cli_params.cycles if args.cycles is not None else base.cycles,
            p=cli_params.p if args.p is not None else base.p,
            coord_c=cli_params.coord_c if args.coord_c is not None else base.coord_c,
            threshold=cli_params.threshold if args.threshold is not None else base.threshold,
            policy=args.policy or base.policy,
        )
    rows = run_experiment(cfg)
    buf = io.StringIO()
    write_rows(rows, buf)
    _emit(buf.getvalue(), cfg.out)
    print(summarise(rows), file=sys.stderr if not cfg.out else sys.stdout)
    return EXIT_OK


def cmd_transform(args) -> int:
    instance = instance_io.load(args.instance)
    if isinstance(instance, Dcop):
        raise ConfigError("transform expects an adcop instance")
    if args.to == "peav":
        report = peav_size(instance)
        out = to_peav(instance).dcop
        note = f"peav: variables={report.variable_count} constraints={report.constraint_count} density={report.density:.4f}"
    else:
        out = aggregate_symmetric(instance)
        note = f"aggregate: variables={out.n_vars} constraints={len(out.constraints)}"
    text = instance_io.dumps(out)
    if args.out:
        Path(args.out).write_text(text)
        print(note)
    else:
        sys.stdout.write(text)
        print(note, file=sys.stderr)
    return EXIT_OK


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adcop", description="Asymmetric DCOP solvers and experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p, with_threshold=True):
        p.add_argument("--cycles", type=int, help="local-search cycle budget (default 200)")
        p.add_argument("--p", type=float, help="move probability for dsa and acls")
        p.add_argument("--coord-c", dest="coord_c", type=float, help="acls coordination constant C")
        if with_threshold:
            p.add_argument("--threshold", type=float, help="stop syncabb/atwb once some agent's gain exceeds this percentage")
        p.add_argument("--policy", choices=("fifo", "shuffle"), help="message order for asynchronous runs")

    g = sub.add_parser("gen", help="generate an instance from a preset")
    g.add_argument("--preset", required=True, choices=sorted(PRESETS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a generator parameter")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("instance")
    s.add_argument("--algo", required=True, choices=ALGORITHMS)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--trace", help="write the per-cycle cost trace of a local search as CSV")
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run algorithms over seeded instances")
    e.add_argument("config", nargs="?")
    e.add_argument("--preset")
    e.add_argument("--algo", help="comma-separated algorithm list")
    e.add_argument("--seeds", type=int, help="number of instances")
    e.add_argument("--seed", type=int, help="base seed")
    e.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a generator parameter")
    e.add_argument("--jobs", type=int)
    e.add_argument("--out")
    solver_flags(e)
    e.set_defaults(func=cmd_experiment)

    t = sub.add_parser("transform", help="write the symmetric reformulation of an instance")
    t.add_argument("instance")
    form = t.add_mutually_exclusive_group()
    form.add_argument("--peav", dest="to", action="store_const", const="peav", help="mirror-variable reformulation (default)")
    form.add_argument("--aggregate", dest="to", action="store_const", const="aggregate", help="sum both sides of every constraint")
    t.set_defaults(to="peav")
    t.add_argument("--out")
    t.set_defaults(func=cmd_transform)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnknownAlgorithmError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except instance_io.InstanceFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ProtocolError, SearchSpaceTooLarge, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
