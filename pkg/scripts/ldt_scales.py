#!/usr/bin/env python3
"""Deviation-set measure across convergent scales for each preset, with cluster spacing constants."""
import argparse

from monoloc import ldt
from monoloc.cocycle import gamma_n
from monoloc.config import PRESETS, preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=100_000)
    ap.add_argument("--delta", type=float, default=0.3)
    a = ap.parse_args()
    for name in sorted(PRESETS):
        cfg = preset(name)
        sp = cfg.operator(x=0.0)
        g = gamma_n(sp, cfg.lyap_n, cfg.E)
        print(f"{name}: E={cfg.E:g} gamma={g:.4f} C1_ref={ldt.reference_C1(sp):.3f}")
        for q in cfg.scales:
            r = ldt.deviation_set(sp, q, cfg.E, a.delta * g, grid=max(a.grid, 100 * q), gamma=g)
            c = ldt.cluster_split(sp, q, 0.3, cfg.E)
            print(f"  q={q:4d} measure={r.measure:.3e} intervals={r.intervals:3d} "
                  f"C1_fit={c.C1:.3f}")


if __name__ == "__main__":
    main()
