#!/usr/bin/env python3
"""gamma_n at mid-spectrum against the coupling, next to max{0, ln(lam gamma_minus (1 - rho) / 2e)}.

    python scripts/lyapunov_vs_coupling.py --freq golden --potential sawtooth --out out/lam_scan
"""
import argparse
import os

import numpy as np

from monoloc.cocycle import Sampling, lyapunov_finite
from monoloc.emit import write_json
from monoloc.potential import OperatorSpec
from monoloc.verify import lyapunov_bound, mid_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--freq", default="golden")
    ap.add_argument("--potential", default="sawtooth")
    ap.add_argument("--lams", default="1,2,4,6,8,10,15,20,30")
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--out", default="out/lam_scan")
    a = ap.parse_args()

    rows = []
    print(f"{'lambda':>7} {'min gamma':>10} {'bound':>8}")
    for lam in (float(s) for s in a.lams.split(",")):
        sp = OperatorSpec.parse(a.freq, lam, a.potential)
        g = lyapunov_finite(sp, a.n, mid_grid(lam, 25), Sampling("birkhoff", 32)).gamma
        b = lyapunov_bound(sp)
        rows.append({"lambda": lam, "min_gamma": float(g.min()), "mean_gamma": float(g.mean()), "bound": b})
        print(f"{lam:7.2f} {g.min():10.4f} {b:8.4f}")
    os.makedirs(a.out, exist_ok=True)
    write_json(os.path.join(a.out, "lam_scan.json"), {"freq": a.freq, "potential": a.potential, "rows": rows})


if __name__ == "__main__":
    main()
