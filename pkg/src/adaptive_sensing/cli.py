"""Command-line front end.

Examples::

    adaptive-sensing --preset exp1 --behavior gradient --scale 0.1 --replications 20 --seed 7 --out-dir out/
    adaptive-sensing --preset exp3 --behavior all --scale 0.1 --replications 20 --out-dir out/
    adaptive-sensing --dump-config exp2 --out-dir configs/
    adaptive-sensing --config configs/exp2.toml --set switch.g_to_r_prob=0.002 --out-dir out/

Replication ``k`` uses seed ``base_seed + k``; inside a replication that seed
is split into independent event, sensing, placement and per-agent streams, so
results do not depend on ``--parallel``.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import tomli

from . import config
from .config import ConfigError, SimParams
from .engine import aggregate, run_many
from .output import write_aggregate, write_run
from .scenario import BEHAVIORS, PRESET_NAMES, preset

log = logging.getLogger("adaptive_sensing")

METRIC_LABELS = {"global": "Global fraction of events (%)", "local": "Average local fraction of events (%)"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptive-sensing", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESET_NAMES, help="built-in experiment")
    src.add_argument("--config", type=Path, help="scenario file (TOML)")
    src.add_argument("--dump-config", choices=PRESET_NAMES, metavar="NAME",
                     help="write the preset's editable scenario file and exit")
    p.add_argument("--behavior", choices=BEHAVIORS + ("all", "custom"),
                   help="switch-parameter column (default: mixed for presets, custom for --config)")
    p.add_argument("--scale", type=float, default=1.0, help="time/event scale in (0, 1] (presets only)")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--out-dir", type=Path, help="output directory")
    p.add_argument("--snapshot-interval", type=int, default=0, help="ticks between position snapshots (0 = off)")
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter, e.g. switch.g_to_r_prob=0.002 (custom behavior)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def apply_overrides(params: SimParams, assignments: list[str]) -> SimParams:
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            value = tomli.loads(f"v = {raw}")["v"]
        except tomli.TOMLDecodeError:
            value = raw
        head, _, tail = key.partition(".")
        try:
            if tail:
                sub = getattr(params, head)
                if not dataclasses.is_dataclass(sub):
                    raise AttributeError(head)
                params = dataclasses.replace(params, **{head: dataclasses.replace(sub, **{tail: value})})
            else:
                params = dataclasses.replace(params, **{key: value})
        except (AttributeError, TypeError) as exc:
            raise ConfigError(f"unknown parameter {key!r}") from exc
    return params


def resolve(args) -> list[tuple[str, object, SimParams]]:
    """``[(behavior label, spec, params), ...]`` for the requested runs."""
    if args.config:
        if args.behavior not in (None, "custom"):
            raise ConfigError("--config runs use the file's parameters; use --behavior custom (or omit it)")
        spec, params = config.load(args.config)
        return [("custom", spec, apply_overrides(params, args.set))]
    if not args.preset:
        raise ConfigError("one of --preset, --config or --dump-config is required")
    behavior = args.behavior or "mixed"
    if behavior == "custom":
        spec, params = preset(args.preset, args.scale, "mixed")
        return [("custom", spec, apply_overrides(params, args.set))]
    if args.set:
        raise ConfigError("--set only applies to --behavior custom")
    names = BEHAVIORS if behavior == "all" else (behavior,)
    return [(b, *preset(args.preset, args.scale, b)) for b in names]


def print_table(rows) -> None:
    header = f"{'Metric':<40}" + "".join(f"{b:>18}" for b, _ in rows)
    print(header)
    for metric, label in METRIC_LABELS.items():
        cells = "".join(f"{agg.metrics[metric][0]:>10.1f} ± {agg.metrics[metric][1]:<5.1f}" for _, agg in rows)
        print(f"{label:<40}{cells}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.replications < 1:
            raise ConfigError("--replications must be at least 1")
        if args.parallel < 1 or args.snapshot_interval < 0:
            raise ConfigError("--parallel must be >= 1 and --snapshot-interval >= 0")
        if args.dump_config:
            spec, params = preset(args.dump_config, args.scale, args.behavior if args.behavior in BEHAVIORS else "mixed")
            text = config.dumps(spec, params)
            if args.out_dir:
                args.out_dir.mkdir(parents=True, exist_ok=True)
                target = args.out_dir / f"{args.dump_config}.toml"
                target.write_text(text)
                print(target)
            else:
                sys.stdout.write(text)
            return 0
        plan = resolve(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out = args.out_dir
    try:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            probe = out / ".write-test"
            probe.write_text("")
            probe.unlink()
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return 1

    seeds = [args.seed + k for k in range(args.replications)]
    aggregates = []
    for behavior, spec, params in plan:
        log.info("running %s x%d", behavior, len(seeds))
        results = run_many(params, spec, seeds, parallel=args.parallel,
                           snapshot_interval=args.snapshot_interval)
        if out is not None:
            (out / behavior).mkdir(parents=True, exist_ok=True)
            config.dump(out / behavior / "config.toml", spec, params)
            for k, res in enumerate(results):
                write_run(out / behavior / f"run_{k:03d}", behavior, res)
        for res in results:
            log.info("%s seed %d: global %.2f%% local %.2f%%", behavior, res.seed,
                     res.global_fraction, res.avg_local_fraction)
        if len(results) >= 2:
            aggregates.append((behavior, aggregate(results)))
        else:
            r = results[0]
            print(f"{behavior}: global {r.global_fraction:.2f}%  local {r.avg_local_fraction:.2f}%")
    if aggregates:
        print_table(aggregates)
        if out is not None:
            write_aggregate(out, aggregates)
    return 0


if __name__ == "__main__":
    sys.exit(main())
