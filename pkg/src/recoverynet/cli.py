"""Command-line pipeline.

Commands: gen, stats, simulate, calibrate, optimize, analyze, version.
Every command writes its outputs atomically into one run directory (given via
--out, or runs/<timestamp>-<confighash> by default), refuses to overwrite
existing files unless --force is set, and always emits run_manifest.json with
the resolved configuration, input digests, output digests, and stage timings.
Exit codes: 0 success, 1 input/validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone

import numpy as np

import recoverynet
from recoverynet import analysis, calibration, diffusion, ingest, multiplier, network, synth
from recoverynet import fileio
from recoverynet.errors import ConfigError, DatasetError, InputError
from recoverynet.kernels import BACKEND

METRIC_NOTES = {
    "density": "directed: size / (order * (order - 1))",
    "transitivity": "undirected simple projection: 3 * triangles / connected triples",
    "avg_degree": "mean over nodes of in_degree + out_degree",
    "avg_strength": "mean over nodes of in_strength + out_strength",
    "budget_rule": "k = round(gamma * order), round-half-even at exact .5 ties",
    "ga_iteration": "one iteration = one full generation; fitness budget ~ M * N",
    "zero_in_degree": "nodes without incoming edges only recover when seeded",
}


class RunWriter:
    """Collects outputs for one command run: atomic writes, digests, timings."""

    def __init__(self, out_dir: str, force: bool):
        self.out_dir = out_dir
        self.force = force
        self.outputs: dict[str, str] = {}
        self.timings: dict[str, float] = {}
        self.inputs: dict[str, str] = {}
        os.makedirs(out_dir, exist_ok=True)

    def register_input(self, path):
        self.inputs[str(path)] = fileio.sha256_file(path)

    def write_text(self, name: str, text: str):
        path = os.path.join(self.out_dir, name)
        if os.path.exists(path) and not self.force:
            raise InputError(
                f"cli: refusing to overwrite {path} (use --force to allow)"
            )
        fileio.atomic_write_text(path, text)
        self.outputs[name] = fileio.sha256_text(text)

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start

    def finish(self, command: str, parameters: dict):
        manifest = {
            "tool_version": recoverynet.__version__,
            "kernel_backend": BACKEND,
            "command": command,
            "parameters": parameters,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings_seconds": {k: round(v, 6) for k, v in self.timings.items()},
            "notes": METRIC_NOTES,
        }
        self.write_text("run_manifest.json", fileio.json_text(manifest))


def _default_threads() -> int:
    env = os.environ.get("RECOVERY_NET_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"cli: RECOVERY_NET_THREADS={env!r} is not an integer")
    return os.cpu_count() or 1


def _resolve_out(args, config_digest: str) -> str:
    if args.out:
        return args.out
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return os.path.join("runs", f"{stamp}-{config_digest[:8]}")


def _config_from_args(args) -> ingest.StudyConfig:
    overrides = {
        "epsilon": args.epsilon,
        "ga_population": args.ga_population,
        "ga_iterations": args.ga_iterations,
        "horizon": args.horizon,
        "gamma_list": tuple(args.gammas) if args.gammas else None,
        "rng_seed": args.rng_seed,
        "baseline_samples": getattr(args, "baseline_samples", None),
    }
    return ingest.load_config(args.config, overrides)


def _load_network(writer: RunWriter, data_dir: str, epsilon: float,
                  panel_horizon: int | None = None):
    """Load data-dir CSVs, cross-validate, build, and filter the network."""
    pois_path = os.path.join(data_dir, "pois.csv")
    flows_path = os.path.join(data_dir, "flows.csv")
    pois = ingest.load_pois(pois_path)
    flows = ingest.load_flows(flows_path)
    writer.register_input(pois_path)
    writer.register_input(flows_path)
    panel = None
    if panel_horizon is not None:
        recovery_path = os.path.join(data_dir, "recovery.csv")
        panel = ingest.load_recovery(recovery_path, panel_horizon)
        writer.register_input(recovery_path)
    report = ingest.validate_dataset(pois, flows, panel)
    if not report.ok:
        raise DatasetError(f"ingest: inconsistent dataset: {report}")
    net = network.filter_subnetwork(network.build_network(pois, flows), epsilon)
    if net.order == 0:
        raise DatasetError(
            f"network: epsilon {epsilon} filters out every edge and node"
        )
    return pois, flows, panel, net


def _aligned_theta(writer: RunWriter, theta_path: str, net) -> np.ndarray:
    """Thresholds from file, reordered to network node order; sets must match."""
    writer.register_input(theta_path)
    ids, values = ingest.load_thresholds(theta_path)
    by_id = dict(zip(ids, values))
    missing = [p for p in net.poi_ids if p not in by_id]
    extra = [p for p in ids if p not in net.index]
    if missing or extra:
        raise DatasetError(
            f"cli: theta file does not match the filtered network "
            f"({len(missing)} missing, {len(extra)} extra poi_ids; "
            f"e.g. missing {missing[:3]}, extra {extra[:3]})"
        )
    return np.array([by_id[p] for p in net.poi_ids], dtype=np.float64)


def _fmt_opt(value) -> str:
    return "" if value is None else fileio.fmt_float(value)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if args.params:
        params = synth.load_params(args.params)
    else:
        params = synth.SynthParams()
    if args.set:
        kv = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"cli: --set expects KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            kv[key.strip()] = value.strip()
        params = synth.apply_param_overrides(params, kv)

    resolved = synth.params_to_dict(params)
    writer = RunWriter(_resolve_out(args, fileio.sha256_text(fileio.json_text(resolved))), args.force)
    if args.params:
        writer.register_input(args.params)
    with writer.stage("generate"):
        scenario = synth.generate_scenario(params)
    with writer.stage("write"):
        for name, text in synth.scenario_file_texts(scenario).items():
            writer.write_text(name, text)
    writer.finish("gen", {"params": resolved})
    print(writer.out_dir)
    return 0


def cmd_stats(args) -> int:
    config = _config_from_args(args)
    writer = RunWriter(_resolve_out(args, _config_digest(config)), args.force)
    with writer.stage("load"):
        pois, flows, _, net = _load_network(writer, args.data_dir, config.epsilon)
    with writer.stage("compute"):
        summary = network.graph_summary(net)
        profile = network.degree_profile(net, bins=args.bins)
    with writer.stage("write"):
        writer.write_text("summary.json", fileio.json_text(summary.as_dict()))
        rows = []
        for i, poi_id in enumerate(profile.poi_ids):
            avg_in = profile.avg_in_neighbor_in_degree[i]
            avg_out = profile.avg_out_neighbor_out_degree[i]
            rows.append(
                (
                    poi_id,
                    int(profile.in_degree[i]),
                    int(profile.out_degree[i]),
                    fileio.fmt_float(profile.in_strength[i]),
                    fileio.fmt_float(profile.out_strength[i]),
                    "" if np.isnan(avg_in) else fileio.fmt_float(avg_in),
                    "" if np.isnan(avg_out) else fileio.fmt_float(avg_out),
                )
            )
        writer.write_text(
            "degree_profile.csv",
            fileio.csv_text(
                [
                    "poi_id",
                    "in_degree",
                    "out_degree",
                    "in_strength",
                    "out_strength",
                    "avg_in_neighbor_in_degree",
                    "avg_out_neighbor_out_degree",
                ],
                rows,
            ),
        )
        hist_rows = [
            (quantity, fileio.fmt_float(low), fileio.fmt_float(high), count)
            for quantity, bins in profile.histograms.items()
            for low, high, count in bins
        ]
        writer.write_text(
            "degree_hist.csv",
            fileio.csv_text(["quantity", "bin_low", "bin_high", "count"], hist_rows),
        )
        if args.export_filtered:
            writer.write_text("pois.csv", ingest.pois_csv_text(ingest.PoiTable(net.pois)))
            writer.write_text(
                "flows.csv",
                ingest.flows_csv_text(
                    [ingest.FlowRecord(s, d, w) for s, d, w in net.edge_triples()]
                ),
            )
    writer.finish(
        "stats",
        {
            "data_dir": args.data_dir,
            "epsilon": config.epsilon,
            "bins": args.bins,
            "export_filtered": bool(args.export_filtered),
        },
    )
    print(writer.out_dir)
    return 0


def cmd_simulate(args) -> int:
    config = _config_from_args(args)
    writer = RunWriter(_resolve_out(args, _config_digest(config)), args.force)
    with writer.stage("load"):
        _, _, _, net = _load_network(writer, args.data_dir, config.epsilon)
        theta = _aligned_theta(writer, args.theta, net)
        writer.register_input(args.seeds)
        seed_ids = ingest.load_seed_ids(args.seeds)
        unknown = [p for p in seed_ids if p not in net.index]
        if unknown:
            raise DatasetError(
                f"cli: {len(unknown)} seed poi_id(s) not in the filtered network, "
                f"e.g. {unknown[:5]}"
            )
        seeds = np.array([net.index[p] for p in seed_ids], dtype=np.int64)
    with writer.stage("simulate"):
        trace = diffusion.simulate(net, seeds, theta, config.horizon)
    with writer.stage("write"):
        rows = (
            (net.poi_ids[i], week, int(trace.states[week, i]))
            for i in range(net.order)
            for week in range(trace.horizon + 1)
        )
        writer.write_text("trace.csv", fileio.csv_text(["poi_id", "week", "state"], rows))
        summary = {
            "final_count": diffusion.final_active_count(trace),
            "fixed_point_week": trace.fixed_point_week,
        }
        writer.write_text("summary.json", fileio.json_text(summary))
    writer.finish(
        "simulate",
        {
            "data_dir": args.data_dir,
            "theta": args.theta,
            "seeds": args.seeds,
            "epsilon": config.epsilon,
            "horizon": config.horizon,
        },
    )
    print(writer.out_dir)
    return 0


def cmd_calibrate(args) -> int:
    config = _config_from_args(args)
    threads = args.threads or _default_threads()
    writer = RunWriter(_resolve_out(args, _config_digest(config)), args.force)
    with writer.stage("load"):
        _, _, panel, net = _load_network(
            writer, args.data_dir, config.epsilon, panel_horizon=config.horizon
        )
    with writer.stage("calibrate"):
        result = calibration.calibrate_thresholds(net, panel, config, threads=threads)
    with writer.stage("write"):
        writer.write_text(
            "thresholds.csv", ingest.thresholds_csv_text(net.poi_ids, result.theta_star)
        )
        writer.write_text(
            "calibration.json",
            fileio.json_text(
                {
                    "mae_star": result.mae_star,
                    "baseline_mae": result.baseline_mae,
                    "M": config.ga_population,
                    "N": config.ga_iterations,
                    "epsilon": config.epsilon,
                    "rng_seed": config.rng_seed,
                }
            ),
        )
        writer.write_text(
            "history.csv",
            fileio.csv_text(
                ["generation", "best_fitness", "mean_fitness"],
                (
                    (g, fileio.fmt_float(b), fileio.fmt_float(m))
                    for g, b, m in result.history.rows()
                ),
            ),
        )
        report = calibration.threshold_report(result.theta_star)
        hist_rows = [("0.0", "0.0", report.zero_count)] + [
            (fileio.fmt_float(low), fileio.fmt_float(high), count)
            for low, high, count in report.bins
        ]
        writer.write_text(
            "threshold_hist.csv",
            fileio.csv_text(["bin_low", "bin_high", "count"], hist_rows),
        )
    writer.finish(
        "calibrate",
        {"data_dir": args.data_dir, "config": ingest.config_as_dict(config), "threads": threads},
    )
    print(writer.out_dir)
    return 0


def cmd_optimize(args) -> int:
    config = _config_from_args(args)
    threads = args.threads or _default_threads()
    writer = RunWriter(_resolve_out(args, _config_digest(config)), args.force)
    with writer.stage("load"):
        _, _, _, net = _load_network(writer, args.data_dir, config.epsilon)
        theta = _aligned_theta(writer, args.theta, net)
    for gamma in config.gamma_list:
        try:
            multiplier.budget_size(gamma, net.order)
        except ValueError as exc:
            raise InputError(f"cli: {exc}")
    scenarios = []
    with writer.stage("optimize"):
        for i, gamma in enumerate(config.gamma_list):
            seed = int(
                np.random.SeedSequence(
                    entropy=config.rng_seed, spawn_key=(1000 + i,)
                ).generate_state(1, dtype=np.uint64)[0]
            )
            scenarios.append(
                multiplier.optimize_multipliers(
                    net, theta, gamma, config, rng_seed=seed, threads=threads
                )
            )
    with writer.stage("write"):
        writer.write_text(
            "multipliers.json",
            fileio.json_text(
                [
                    {
                        "gamma": s.gamma,
                        "k": s.k,
                        "omega": list(s.omega_poi_ids),
                        "objective_value": s.objective_value,
                    }
                    for s in scenarios
                ]
            ),
        )
        for s in scenarios:
            writer.write_text(
                f"history_gamma_{s.gamma:g}.csv",
                fileio.csv_text(
                    ["generation", "best_fitness", "mean_fitness"],
                    (
                        (g, fileio.fmt_float(b), fileio.fmt_float(m))
                        for g, b, m in s.history.rows()
                    ),
                ),
            )
        if len(scenarios) >= 2:
            report = multiplier.overlap(scenarios)
            writer.write_text(
                "overlap.json",
                fileio.json_text(
                    {
                        "intersection": list(report.intersection),
                        "pairwise": {
                            f"{a:g}&{b:g}": size
                            for (a, b), size in report.pairwise.items()
                        },
                    }
                ),
            )
    writer.finish(
        "optimize",
        {
            "data_dir": args.data_dir,
            "theta": args.theta,
            "config": ingest.config_as_dict(config),
            "threads": threads,
        },
    )
    print(writer.out_dir)
    return 0


def cmd_analyze(args) -> int:
    config = _config_from_args(args)
    writer = RunWriter(_resolve_out(args, _config_digest(config)), args.force)
    with writer.stage("load"):
        pois_path = os.path.join(args.data_dir, "pois.csv")
        pois = ingest.load_pois(pois_path)
        writer.register_input(pois_path)
        if len(pois) == 0:
            raise DatasetError("ingest: POI table is empty")
        writer.register_input(args.theta)
        theta_ids, theta = ingest.load_thresholds(args.theta)
        unknown = [p for p in theta_ids if p not in pois.index]
        if unknown:
            raise DatasetError(
                f"cli: {len(unknown)} theta poi_id(s) not in the POI table, "
                f"e.g. {unknown[:5]}"
            )
        subset = ingest.PoiTable([pois[p] for p in theta_ids])

        writer.register_input(args.multipliers)
        scenarios = _load_multiplier_scenarios(args.multipliers, pois)
    with writer.stage("analyze"):
        sector_stats = analysis.threshold_by_sector(theta, subset)
        split = analysis.income_analysis(theta, subset)
        composition = analysis.multiplier_composition(scenarios, pois)
        by_income = analysis.multiplier_by_income(scenarios, pois)
    with writer.stage("write"):
        writer.write_text(
            "sector_stats.csv",
            fileio.csv_text(
                ["sector", "count", "mean", "median", "q1", "q3", "min", "max"],
                (
                    (
                        r.sector,
                        r.count,
                        fileio.fmt_float(r.mean),
                        fileio.fmt_float(r.median),
                        fileio.fmt_float(r.q1),
                        fileio.fmt_float(r.q3),
                        fileio.fmt_float(r.min),
                        fileio.fmt_float(r.max),
                    )
                    for r in sector_stats.per_sector
                ),
            ),
        )
        writer.write_text(
            "income_split.csv",
            fileio.csv_text(
                [
                    "sector",
                    "slope",
                    "low_cutoff",
                    "high_cutoff",
                    "high_count",
                    "high_mean",
                    "high_median",
                    "low_count",
                    "low_mean",
                    "low_median",
                ],
                (
                    (
                        r.sector,
                        _fmt_opt(r.slope),
                        fileio.fmt_float(split.low_cutoff),
                        fileio.fmt_float(split.high_cutoff),
                        r.high.count,
                        _fmt_opt(r.high.mean),
                        _fmt_opt(r.high.median),
                        r.low.count,
                        _fmt_opt(r.low.mean),
                        _fmt_opt(r.low.median),
                    )
                    for r in split.per_sector
                ),
            ),
        )
        comp_rows = [
            ("baseline", sector, fileio.fmt_share(composition.baseline_shares[sector]), "")
            for sector in composition.sectors
        ]
        for gamma in sorted(composition.scenario_shares):
            for sector in composition.sectors:
                comp_rows.append(
                    (
                        f"{gamma:g}",
                        sector,
                        fileio.fmt_share(composition.scenario_shares[gamma][sector]),
                        fileio.fmt_share(composition.share_deltas[gamma][sector]),
                    )
                )
        writer.write_text(
            "composition.csv",
            fileio.csv_text(["scenario", "sector", "share", "delta"], comp_rows),
        )
        income_rows = []
        for gamma in sorted(by_income):
            for band in ("high", "low"):
                for sector in ingest.SECTORS:
                    count = by_income[gamma][band].get(sector)
                    if count:
                        income_rows.append((f"{gamma:g}", band, sector, count))
        writer.write_text(
            "income_composition.csv",
            fileio.csv_text(["gamma", "band", "sector", "count"], income_rows),
        )
    writer.finish(
        "analyze",
        {
            "data_dir": args.data_dir,
            "theta": args.theta,
            "multipliers": args.multipliers,
            "config": ingest.config_as_dict(config),
        },
    )
    print(writer.out_dir)
    return 0


def _load_multiplier_scenarios(path, pois: ingest.PoiTable):
    import json

    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputError(f"cli: {path} is not valid JSON: {exc}")
    if not isinstance(data, list):
        raise InputError(f"cli: {path} must hold a JSON list of scenarios")
    scenarios = []
    for entry in data:
        try:
            gamma = float(entry["gamma"])
            omega_ids = list(entry["omega"])
            k = int(entry["k"])
            value = int(entry["objective_value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"cli: malformed scenario entry in {path}: {exc}")
        unknown = [p for p in omega_ids if p not in pois.index]
        if unknown:
            raise DatasetError(
                f"cli: multiplier poi_id(s) not in the POI table, e.g. {unknown[:5]}"
            )
        scenarios.append(
            multiplier.MultiplierScenario(
                gamma=gamma,
                k=k,
                omega=np.array(sorted(pois.index[p] for p in omega_ids), dtype=np.int64),
                omega_poi_ids=tuple(omega_ids),
                objective_value=value,
                history=None,
                universe_digest=None,
            )
        )
    if not scenarios:
        raise InputError(f"cli: {path} holds no scenarios")
    return scenarios


def cmd_version(args) -> int:
    print(f"recoverynet {recoverynet.__version__} (kernel backend: {BACKEND}, numpy {np.__version__})")
    return 0


def _config_digest(config: ingest.StudyConfig) -> str:
    return fileio.sha256_text(fileio.json_text(ingest.config_as_dict(config)))


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub, with_threads=False, with_baseline=False):
    sub.add_argument("--out", help="run directory (default: runs/<stamp>-<confighash>)")
    sub.add_argument("--force", action="store_true", help="allow overwriting outputs")
    sub.add_argument("--config", help="flat key = value study config file")
    sub.add_argument("--epsilon", type=float, help="flow cutoff; edges must exceed it strictly")
    sub.add_argument("--ga-population", type=int, dest="ga_population")
    sub.add_argument("--ga-iterations", type=int, dest="ga_iterations")
    sub.add_argument("--horizon", type=int, help="study window in weeks")
    sub.add_argument(
        "--gammas",
        type=lambda text: [float(part) for part in text.split(",") if part],
        help="comma-separated budget fractions, e.g. 0.03,0.05,0.1",
    )
    sub.add_argument("--rng-seed", type=int, dest="rng_seed")
    if with_baseline:
        sub.add_argument("--baseline-samples", type=int, dest="baseline_samples")
    if with_threads:
        sub.add_argument(
            "--threads",
            type=int,
            help="fitness evaluation workers (default: RECOVERY_NET_THREADS or all cores)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recoverynet",
        description="Dependency-network recovery pipeline: generate, inspect, "
        "simulate, calibrate, optimize, analyze.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a synthetic scenario directory")
    gen.add_argument("--params", help="flat key = value generator parameter file")
    gen.add_argument("--set", action="append", help="override a parameter: KEY=VALUE")
    gen.add_argument("--out")
    gen.add_argument("--force", action="store_true")
    gen.set_defaults(func=cmd_gen)

    stats = commands.add_parser("stats", help="graph summary and degree profile")
    stats.add_argument("data_dir")
    stats.add_argument("--bins", type=int, default=30, help="log-histogram bin count")
    stats.add_argument(
        "--export-filtered",
        action="store_true",
        help="also write the filtered pois.csv/flows.csv",
    )
    _add_common(stats)
    stats.set_defaults(func=cmd_stats)

    sim = commands.add_parser("simulate", help="run one cascade from a seed file")
    sim.add_argument("data_dir")
    sim.add_argument("--theta", required=True, help="thresholds.csv (poi_id,theta)")
    sim.add_argument("--seeds", required=True, help="seed file (header: poi_id)")
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    cal = commands.add_parser("calibrate", help="fit per-node thresholds to a recovery panel")
    cal.add_argument("data_dir")
    _add_common(cal, with_threads=True, with_baseline=True)
    cal.set_defaults(func=cmd_calibrate)

    opt = commands.add_parser("optimize", help="select budgeted recovery-multiplier seed sets")
    opt.add_argument("data_dir")
    opt.add_argument("--theta", required=True, help="thresholds.csv from calibrate")
    _add_common(opt, with_threads=True)
    opt.set_defaults(func=cmd_optimize)

    ana = commands.add_parser("analyze", help="sector and income analyses of fit results")
    ana.add_argument("data_dir")
    ana.add_argument("--theta", required=True, help="thresholds.csv from calibrate")
    ana.add_argument("--multipliers", required=True, help="multipliers.json from optimize")
    _add_common(ana)
    ana.set_defaults(func=cmd_analyze)

    ver = commands.add_parser("version", help="print version and kernel backend")
    ver.set_defaults(func=cmd_version)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
