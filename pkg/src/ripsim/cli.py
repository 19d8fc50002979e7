"""Command-line driver: sweeps to CSV plus a JSON run summary.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical
failure (e.g. a tune-up that cannot reach its phase). Errors are reported
as one JSON record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import pauli
from .config import load_device, load_pulse
from .device import compute_couplings
from .dynamics import dephasing_rate, steady_state_rates
from .errors import ConfigError, RipSimError, StepTooLarge, Unreachable
from .experiments import (
    dephasing_sweep,
    ghz_sequence,
    ramsey,
    tune_up_cz,
    zz_map,
)
from .metrics import coherence_limited_fidelity, f_g_from_alpha, load_table2
from .pulses import DriveSpec, PulseEnvelope
from .sequences import build_schedule, cancellation_report, export_schedule
from .units import mhz, to_mhz

COMMANDS = ("rates", "ramsey", "zzmap", "tuneup", "dephasing", "ghz", "fidelity", "schedule")
NUMERICAL = (Unreachable, StepTooLarge)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message, None)
        sys.exit(1)


def _emit_error(kind, message, key):
    sys.stderr.write(json.dumps({"error": kind, "key": key, "message": message}, sort_keys=True) + "\n")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def parse_range(text: str | None, key: str) -> np.ndarray | None:
    """'a:b:step' (inclusive of b) or a single value."""
    if text is None:
        return None
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a:b:step", key=key) from None
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise ConfigError(f"range {text!r} needs a <= b and step > 0", key=key)
    a, b, step = parts
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


def parse_pair(text: str | None, n: int) -> tuple[int, int]:
    if text is None:
        raise ConfigError("--pair is required", key="pair")
    try:
        i, j = (int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse pair {text!r}", key="pair") from None
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise ConfigError(f"pair {text!r} must name two qubits in 1..{n}", key="pair")
    return i - 1, j - 1


def write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    x = float(obj)
    return float(fmt(x)) if math.isfinite(x) else str(x)


def write_summary(out: Path, command: str, inputs: dict, results: dict):
    payload = {"command": command, "inputs": _clean(inputs), "results": _clean(results)}
    (out / f"{command}_summary.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("RIPSIM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"RIPSIM_WORKERS={env!r} is not an integer", key="RIPSIM_WORKERS") from None
    return 1


def _drive(args, default_amp, default_width, default_detuning, detuning_mhz=None, device_pulse=None):
    base = device_pulse
    amp = args.amp_mhz if args.amp_mhz is not None else (to_mhz(base.envelope.amplitude.real) if base else default_amp)
    width = args.width_ns if args.width_ns is not None else (base.duration * 1e9 if base else default_width)
    if detuning_mhz is None:
        detuning_mhz = to_mhz(base.detuning) if base else default_detuning
    kind = base.envelope.kind if base else "adiabatic_cosine"
    return DriveSpec(mhz(detuning_mhz), PulseEnvelope(kind, complex(mhz(amp)), width * 1e-9))


def _single_detuning(args, default):
    values = parse_range(args.detuning_mhz, "detuning_mhz")
    if values is None:
        return default
    if values.size != 1:
        raise ConfigError("this command takes a single detuning", key="detuning_mhz")
    return float(values[0])


# --- commands -----------------------------------------------------------------


def cmd_rates(args, cfg, out):
    model = compute_couplings(cfg)
    detunings = parse_range(args.detuning_mhz or "20:100:10", "detuning_mhz")
    eps = mhz(args.amp_mhz if args.amp_mhz is not None else 315.0)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for d in detunings:
            r = steady_state_rates(model, eps, mhz(d))
            rows.append((d, to_mhz(r["rate_zz"]), to_mhz(r["rate_zzz"]), to_mhz(r["rate_zzzz"]), to_mhz(dephasing_rate(model, eps, mhz(d)))))
    write_csv(out / "rates.csv", ["detuning_mhz", "rate_zz_mhz", "rate_zzz_mhz", "rate_zzzz_mhz", "dephasing_mhz"], rows)
    chi = -model.chi
    return {"amp_mhz": to_mhz(eps), "detuning_mhz": detunings}, {
        "rows": len(rows),
        "mean_chi_mhz": to_mhz(float(np.mean(chi))),
        "chi_spread": float(np.ptp(chi) / abs(np.mean(chi))),
    }


def _target_drive(args, model, drive):
    if args.target is None:
        return drive, None
    sched = build_schedule(model.n_qubits, args.target, drive)
    return sched, sched.target_label


def cmd_ramsey(args, cfg, out):
    model = compute_couplings(cfg)
    qubit = (args.qubit or 1) - 1
    det = _single_detuning(args, 40.0)
    drive = _drive(args, 315.0, 266.7, det, det, load_pulse(args.device))
    drive, target = _target_drive(args, model, drive)
    widths = parse_range(args.time_ns, "time_ns")
    curve = ramsey(model, qubit, drive, decoherence=args.noise == "full", widths=None if widths is None else widths * 1e-9)
    rows = zip(curve.times * 1e9, curve.p_up, curve.n_resid, np.real(curve.mu), np.imag(curve.mu))
    write_csv(out / "ramsey.csv", ["t_ns", "p_up", "n_resid", "mu_re_rad", "mu_im_rad"], rows)
    return {"qubit": qubit + 1, "detuning_mhz": det, "target": target, "time_ns": widths, "noise": args.noise}, {
        "points": int(curve.times.size),
        "final_p_up": float(curve.p_up[-1]),
    }


def cmd_zzmap(args, cfg, out):
    model = compute_couplings(cfg)
    i, j = parse_pair(args.pair or "2,3", model.n_qubits)
    qubit = (args.qubit - 1) if args.qubit else i
    detunings = parse_range(args.detuning_mhz or "20:100:10", "detuning_mhz")
    widths = parse_range(args.time_ns or "20:400:20", "time_ns")
    drive = _drive(args, 315.0, 100.0, float(detunings[0]), float(detunings[0]))
    target = args.target or pauli.string_label((1 << i) | (1 << j))
    sched = build_schedule(model.n_qubits, target, drive)
    zmap = zz_map(model, qubit, sched, mhz(detunings), widths * 1e-9, decoherence=args.noise == "full", workers=_workers(args))
    rows = []
    for a, d in enumerate(detunings):
        for b, w in enumerate(widths):
            rows.append((w, d, zmap.p_up[a, b], zmap.n_resid[a, b]))
    write_csv(out / "zzmap.csv", ["t_ns", "detuning_mhz", "p_up", "n_resid"], rows)
    return {"qubit": qubit + 1, "target": sched.target_label, "detuning_mhz": detunings, "time_ns": widths}, {
        "points": len(rows)
    }


def cmd_tuneup(args, cfg, out):
    model = compute_couplings(cfg)
    i, j = parse_pair(args.pair, model.n_qubits)
    sub = model.subset([i, j])
    det = _single_detuning(args, 40.0)
    drive = _drive(args, 30.0, 266.7, det, det)
    res = tune_up_cz(sub, (0, 1), drive, mode=args.mode)
    summary = {
        "amp_mhz": to_mhz(res.amplitude.real),
        "width_ns": res.width * 1e9,
        "gate_time_ns": res.gate_time * 1e9,
        "mu_target_rad": res.mu_target.real,
        "residual_photons": res.residual_photons,
    }
    write_csv(out / "tuneup.csv", list(summary), [tuple(summary.values())])
    return {"pair": [i + 1, j + 1], "detuning_mhz": det, "mode": args.mode}, summary


def cmd_dephasing(args, cfg, out):
    model = compute_couplings(cfg)
    i, j = parse_pair(args.pair or "2,3", model.n_qubits)
    sub = model.subset([i, j])
    detunings = parse_range(args.detuning_mhz or "12:40:4", "detuning_mhz")
    total = (args.total_ns if args.total_ns is not None else 533.4) * 1e-9
    guess = mhz(args.amp_mhz if args.amp_mhz is not None else 30.0)
    pts = dephasing_sweep(sub, (0, 1), mhz(detunings), total, guess, workers=_workers(args))
    rows = [
        (
            to_mhz(p.detuning),
            to_mhz(p.amplitude.real),
            p.t2_induced[0] * 1e6,
            p.t2_induced[1] * 1e6,
            p.f_intrinsic,
            p.f_limit,
            p.induced_error,
            p.residual_photons,
        )
        for p in pts
    ]
    header = ["detuning_mhz", "amp_mhz", "t2_induced_a_us", "t2_induced_b_us", "f_intrinsic", "f_limit", "induced_error", "residual_photons"]
    write_csv(out / "dephasing.csv", header, rows)
    f = [p.f_limit for p in pts]
    return {"pair": [i + 1, j + 1], "detuning_mhz": detunings, "total_pulse_ns": total * 1e9}, {
        "max_induced_error": max(p.induced_error for p in pts),
        "f_limit_spread": (max(f) - min(f)) / max(f),
    }


def cmd_ghz(args, cfg, out):
    model = compute_couplings(cfg)
    if model.n_qubits != 4:
        raise ConfigError("the GHZ sequence needs a 4-qubit device", key="qubit")
    res = ghz_sequence(model, noise=args.noise)
    labels = pauli.sector_labels(model.n_qubits)
    rows = []
    for a in range(res.rho.shape[0]):
        for b in range(res.rho.shape[1]):
            rows.append((labels[a], labels[b], res.rho[a, b].real, res.rho[a, b].imag))
    write_csv(out / "ghz.csv", ["row", "col", "rho_re", "rho_im"], rows)
    return {"noise": args.noise}, {
        "fidelity": res.fidelity,
        "off_ghz_population": res.off_ghz_population,
        "spurious_coherence": res.spurious_coherence,
    }


def cmd_fidelity(args, cfg, out):
    if args.alpha is not None:
        fg = f_g_from_alpha(args.alpha)
        write_csv(out / "fidelity.csv", ["alpha", "f_g"], [(args.alpha, fg)])
        return {"alpha": args.alpha}, {"f_g": fg}
    devices = {"A": load_device("device_a"), "B": load_device("device_b")}
    rows, worst = [], 0.0
    for r in load_table2():
        a, b = r.pair.split("-")
        qa = devices[a[0]].qubits[int(a[1]) - 1]
        qb = devices[b[0]].qubits[int(b[1]) - 1]
        fg = f_g_from_alpha(r.f_c)
        fcoh = coherence_limited_fidelity(r.t_gate_ns * 1e-9, [qa.t1, qb.t1], [qa.t_echo, qb.t_echo])
        worst = max(worst, abs(fg - r.f_g))
        rows.append((r.pair, r.f_c, r.f_g, fg, r.f_coh, fcoh))
    write_csv(out / "fidelity.csv", ["pair", "f_c", "f_g_table", "f_g", "f_coh_table", "f_coh_estimate"], rows)
    return {"table": "shipped"}, {"rows": len(rows), "max_f_g_deviation": worst}


def cmd_schedule(args, cfg, out):
    n = args.qubits or cfg.n_qubits
    det = _single_detuning(args, 40.0)
    drive = _drive(args, 30.0, 266.7, det, det)
    sched = build_schedule(n, args.target or pauli.string_label((1 << n) - 1), drive)
    (out / "schedule.txt").write_text(export_schedule(sched))
    report = cancellation_report(sched)
    write_csv(out / "cancellation.csv", ["string", "coefficient"], sorted(report.items(), key=lambda kv: pauli.parse_zstring(kv[0], n)))
    return {"qubits": n, "target": sched.target_label}, {
        "segments": len(sched.steps),
        "total_time_ns": sched.total_time * 1e9,
        "pi_counts": sched.pi_counts(),
    }


HANDLERS = {
    "rates": cmd_rates,
    "ramsey": cmd_ramsey,
    "zzmap": cmd_zzmap,
    "tuneup": cmd_tuneup,
    "dephasing": cmd_dephasing,
    "ghz": cmd_ghz,
    "fidelity": cmd_fidelity,
    "schedule": cmd_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ripsim", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--device", default="device_a", help="TOML path or fixture name (device_a, device_b)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--detuning-mhz", help="a:b:step or a single value")
    p.add_argument("--time-ns", help="a:b:step segment widths")
    p.add_argument("--pair", help="i,j (1-based qubit indices)")
    p.add_argument("--qubit", type=int, help="Ramsey qubit (1-based)")
    p.add_argument("--target", help="Z string such as Z2Z3")
    p.add_argument("--amp-mhz", type=float)
    p.add_argument("--width-ns", type=float)
    p.add_argument("--total-ns", type=float, help="total pulse time for dephasing")
    p.add_argument("--mode", choices=("amplitude", "time"), default="amplitude")
    p.add_argument("--alpha", type=float, help="single RB decay exponent for fidelity")
    p.add_argument("--qubits", type=int, help="qubit count for schedule")
    p.add_argument("--noise", choices=("none", "static", "full"), default="none")
    p.add_argument("--workers", type=int, help="worker processes (default $RIPSIM_WORKERS or 1)")
    p.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg = load_device(args.device)
        np.random.seed(args.seed)
        inputs, results = HANDLERS[args.command](args, cfg, out)
        inputs.update({"device": str(args.device), "seed": args.seed})
        write_summary(out, args.command, inputs, results)
    except NUMERICAL as exc:
        _emit_error(type(exc).__name__, str(exc), None)
        return 2
    except (RipSimError, ValueError) as exc:
        _emit_error(type(exc).__name__, str(exc), getattr(exc, "key", None))
        return 1
    except OSError as exc:
        _emit_error(type(exc).__name__, str(exc), "out")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
