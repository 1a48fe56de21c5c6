"""Trace where agents sit relative to each patch over one run.

Prints, every ``--every`` ticks, how many agents are inside each active
patch (expanded by the sensing radius), how many are in gradient mode, and
the running global fraction. Useful for seeing whether agents get captured
by an early patch and miss later ones.

    python scripts/patch_occupancy.py --preset exp3 --behavior gradient --scale 0.1
"""
import argparse

import numpy as np

from adaptive_sensing import preset
from adaptive_sensing.agent import ExecutionMode
from adaptive_sensing.engine import World, global_fraction
from adaptive_sensing.scenario import BEHAVIORS, PRESET_NAMES


def occupancy(world, t, reach):
    counts = []
    for patch in world.spec.patches:
        rect = patch.clipped_rect_at(t, world.spec.region) if patch.active(t) else None
        if rect is None:
            counts.append("-")
            continue
        x0, y0, x1, y1 = rect
        inside = ((world.pos[:, 0] >= x0 - reach) & (world.pos[:, 0] <= x1 + reach)
                  & (world.pos[:, 1] >= y0 - reach) & (world.pos[:, 1] <= y1 + reach))
        counts.append(str(int(inside.sum())))
    return counts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--preset", choices=PRESET_NAMES, default="exp3")
    ap.add_argument("--behavior", choices=BEHAVIORS, default="gradient")
    ap.add_argument("--scale", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--every", type=int, default=0, help="report interval (default max_t / 20)")
    args = ap.parse_args(argv)
    spec, params = preset(args.preset, args.scale, args.behavior)
    world = World(params, spec, args.seed)
    every = args.every or max(1, spec.max_t // 20)
    print("tick  agents-per-patch  gradient-mode  global%")
    for t in range(spec.max_t):
        world.step(t)
        if (t + 1) % every == 0:
            n_grad = sum(a.mode == ExecutionMode.GRADIENT for a in world.agents)
            hi = world.events.span(0, t)[1]
            g = global_fraction(world.detected[:, :hi]) if hi else float("nan")
            print(f"{t:6d}  {' '.join(occupancy(world, t, params.sensing.r_s)):>16}  {n_grad:13d}  {g:7.1f}")
    print(f"final global {global_fraction(world.detected):.1f}%")


if __name__ == "__main__":
    main()
