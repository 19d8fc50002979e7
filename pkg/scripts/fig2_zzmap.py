#!/usr/bin/env python3
"""Ramsey map of the refocused Z2Z3 interaction on Device A and the
non-adiabatic threshold it reveals.

Writes zzmap.csv (p_up and residual photons over width and detuning) and
threshold.csv (threshold width per detuning with the log-log fit).
"""

import argparse
import os
from pathlib import Path

import numpy as np

from ripsim import build_schedule, compute_couplings, load_device
from ripsim.cli import write_csv
from ripsim.experiments import threshold_scaling, zz_map
from ripsim.pulses import adiabatic_drive
from ripsim.units import mhz


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/fig2")
    p.add_argument("--amp-mhz", type=float, default=315.0)
    p.add_argument("--step-ns", type=float, default=10.0, help="width grid spacing")
    p.add_argument("--workers", type=int, default=int(os.environ.get("RIPSIM_WORKERS", 1)))
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model = compute_couplings(load_device("device_a"))
    sched = build_schedule(4, "Z2Z3", adiabatic_drive(mhz(args.amp_mhz), 100e-9, mhz(40)))
    detunings = np.arange(20.0, 101.0, 10.0)
    widths = np.arange(args.step_ns, 400.0 + 0.5 * args.step_ns, args.step_ns)

    zmap = zz_map(model, 1, sched, mhz(detunings), widths * 1e-9, workers=args.workers)
    rows = [
        (w, d, zmap.p_up[a, b], zmap.n_resid[a, b])
        for a, d in enumerate(detunings)
        for b, w in enumerate(widths)
    ]
    write_csv(out / "zzmap.csv", ["t_ns", "detuning_mhz", "p_up", "n_resid"], rows)

    th_det = np.array([20.0, 30.0, 40.0, 60.0, 80.0, 100.0])
    fit = threshold_scaling(
        model, sched, mhz(th_det), np.arange(10, 400, 5) * 1e-9, resolution=1e-9, workers=args.workers
    )
    write_csv(out / "threshold.csv", ["detuning_mhz", "threshold_ns"], zip(th_det, fit.thresholds * 1e9))
    print(f"threshold slope {fit.slope:.3f}")
    for d, t in zip(th_det, fit.thresholds):
        print(f"  {d:5.0f} MHz  {t * 1e9:6.1f} ns")


if __name__ == "__main__":
    main()
