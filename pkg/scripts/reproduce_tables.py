"""Run every behavior of one or all presets and print the comparison tables.

    python scripts/reproduce_tables.py --scale 0.1 --replications 20 --out-dir results/desk
    python scripts/reproduce_tables.py --preset exp1 --scale 1 --replications 200 --parallel 8

Each preset is written to ``<out-dir>/<preset>/`` in the CLI's layout.
"""
import argparse
import sys
from pathlib import Path

from adaptive_sensing.cli import main as cli_main
from adaptive_sensing.scenario import PRESET_NAMES


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--preset", choices=PRESET_NAMES, action="append")
    ap.add_argument("--scale", type=float, default=0.1)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1000)
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args(argv)
    for name in args.preset or PRESET_NAMES:
        print(f"\n== {name} (scale {args.scale}, {args.replications} replications) ==")
        rc = cli_main(["--preset", name, "--behavior", "all", "--scale", str(args.scale),
                       "--replications", str(args.replications), "--seed", str(args.seed),
                       "--parallel", str(args.parallel), "--out-dir", str(args.out_dir / name)])
        if rc:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
