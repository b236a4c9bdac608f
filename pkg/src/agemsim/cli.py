"""Command-line entry point.

    agemsim run      --config F [--seed N] [--protocol P] [--set k=v ...] --out DIR
    agemsim compare  --config F --seeds 1..20 --protocol agem --protocol gpsr --out DIR
    agemsim topo     --config F [--seed N] --out FILE
    agemsim analyze  TRACE [--out DIR]

Exit status: 0 success, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .engine import Trace, run
from .metrics import MetricsReport, compare_runs, compute_metrics, write_rows
from .scenario import ConfigError, ScenarioConfig, generate_topology, load_config, seed_streams, write_topology

log = logging.getLogger("agemsim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(pair, "override must look like key=value")
        out[key.strip()] = value.strip()
    return out


def parse_seed_range(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            return [int(text)]
        seeds = list(range(int(lo), int(hi) + 1))
    except ValueError:
        raise ConfigError("--seeds", f"expected A..B, got {text!r}") from None
    if not seeds:
        raise ConfigError("--seeds", f"empty range {text!r}")
    return seeds


def _metadata(cfg: ScenarioConfig, seed, overrides: dict) -> dict:
    flat = cfg.to_json()
    return {
        "artifact": f"agemsim {__version__}",
        "digest": cfg.digest(),
        "seed": seed,
        "protocol": cfg.protocol,
        "overrides": json.dumps({k: flat[k] for k in overrides if k in flat}, sort_keys=True),
    }


def _build_config(args, extra: dict | None = None) -> tuple[ScenarioConfig, dict]:
    overrides = parse_overrides(args.set)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    overrides.update(extra or {})
    return load_config(args.config, overrides), overrides


def report_json(report: MetricsReport, meta: dict) -> dict:
    body = report.to_dict()
    body["delay_mean"] = report.delay_mean
    body["delay_p50"] = report.delay_percentile(50)
    body["delay_p95"] = report.delay_percentile(95)
    body["lost_total"] = report.total_lost
    return {"meta": meta, "report": body}


def _strict(obj):
    """Replace NaN with None so the document stays valid JSON."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _strict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_strict(v) for v in obj]
    return obj


def _dump_json(obj, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(_strict(obj), indent=2, allow_nan=False), encoding="utf-8")
    tmp.replace(path)


def cmd_run(args) -> int:
    protocol = {"protocol": args.protocol} if args.protocol else {}
    cfg, overrides = _build_config(args, protocol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run(cfg)
    report = compute_metrics(trace)
    meta = _metadata(cfg, cfg.seed, overrides)
    stem = f"{cfg.protocol}-s{cfg.seed}"
    trace.write(out / f"trace-{stem}.jsonl")
    write_rows([report.row()], out / f"metrics-{stem}.csv", meta)
    _dump_json(report_json(report, meta), out / f"metrics-{stem}.json")
    print(f"{cfg.protocol} seed {cfg.seed}: delivered {report.delivered}/{report.generated}, "
          f"lost {report.total_lost}, mean delay {report.delay_mean:.4f} s, "
          f"mean energy {report.mean_remaining_energy:.4f} J, variance {report.remaining_energy_variance:.4f}")
    return EXIT_OK


def _one_run(cfg: ScenarioConfig) -> dict:
    return compute_metrics(run(cfg)).row()


def cmd_compare(args) -> int:
    cfg, overrides = _build_config(args)
    seeds = parse_seed_range(args.seeds)
    protocols = []
    for item in args.protocol or ["agem", "gpsr"]:
        protocols.extend(p for p in item.split(",") if p)
    configs = [cfg.replace(protocol=p, seed=s) for s in seeds for p in protocols]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_one_run, configs))
    else:
        rows = [_one_run(c) for c in configs]
    meta = _metadata(cfg, args.seeds, overrides)
    meta["protocols"] = ",".join(protocols)
    meta["runs"] = len(rows)
    write_rows(rows, out / "runs.csv", meta)
    challenger, baseline = (protocols + ["gpsr"])[:2] if len(protocols) >= 2 else (protocols[0], "gpsr")
    summary = compare_runs([(r["protocol"], r["seed"], r) for r in rows], challenger, baseline)
    _dump_json({"meta": meta, "summary": summary}, out / "summary.json")
    table = [{"protocol": p, "runs": len(summary["seeds"][p]), **stats} for p, stats in summary["protocols"].items()]
    write_rows(table, out / "summary.csv", meta)
    if summary["win_rates"]:
        wins = [{"metric": label, "challenger": challenger, "baseline": baseline,
                 "paired_seeds": summary["paired_seeds"], "win_rate": rate}
                for label, rate in summary["win_rates"].items()]
        write_rows(wins, out / "win_rates.csv", meta)
    print(f"{len(rows)} runs over seeds {seeds[0]}..{seeds[-1]}")
    for p, stats in summary["protocols"].items():
        print(f"  {p:12s} " + "  ".join(f"{k}={v:.4g}" for k, v in stats.items()))
    for label, rate in summary["win_rates"].items():
        print(f"  win rate {challenger} vs {baseline} on {label}: {rate:.2f}")
    return EXIT_OK


def cmd_topo(args) -> int:
    cfg, overrides = _build_config(args)
    topo = generate_topology(cfg, seed_streams(cfg.seed)[0])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_topology(topo, out, _metadata(cfg, cfg.seed, overrides))
    print(f"{len(topo)} nodes written to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    path = Path(args.trace)
    if not path.is_file():
        raise ConfigError("trace", f"no such file: {path}")
    trace = Trace.read(path)
    report = compute_metrics(trace)
    h = trace.header
    meta = {"artifact": f"agemsim {__version__}", "digest": h.get("digest"), "seed": h.get("seed"),
            "protocol": report.protocol, "source_trace": str(path)}
    out = Path(args.out) if args.out else path.parent
    out.mkdir(parents=True, exist_ok=True)
    stem = path.stem.removeprefix("trace-")
    write_rows([report.row()], out / f"analysis-{stem}.csv", meta)
    _dump_json(report_json(report, meta), out / f"analysis-{stem}.json")
    print(f"{report.protocol} seed {report.seed}: delivered {report.delivered}/{report.generated}, "
          f"lost {report.total_lost}, mean delay {report.delay_mean:.4f} s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agemsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"agemsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, seed=True):
        p.add_argument("--config", help="INI scenario file (defaults reproduce the reference setup)")
        if seed:
            p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")

    p = sub.add_parser("run", help="simulate one scenario")
    scenario_args(p)
    p.add_argument("--protocol")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="seed sweep across protocols")
    scenario_args(p, seed=False)
    p.add_argument("--seeds", default="1..20")
    p.add_argument("--protocol", action="append", help="protocol name (repeatable or comma separated)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("topo", help="write the topology a seed produces")
    scenario_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("analyze", help="recompute metrics from a trace file")
    p.add_argument("trace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"agemsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - map any crash to the runtime exit code
        log.debug("run failed", exc_info=True)
        print(f"agemsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
