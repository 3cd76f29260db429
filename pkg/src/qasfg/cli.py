"""Command-line front end: config parsing, subcommand dispatch, and
reproducible CSV/JSON emission.

Subcommands: design | simulate | sweep | optimize. Exit codes: 0 success,
1 internal/numeric failure, 2 user/config error. All outputs embed the
config hash and tool version; reruns with the same config are byte-identical.
"""

import argparse
import copy
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .materials import (DispersionModel, NonlinearConstants, MaterialError,
                        EPS0_CHOICES)
from .propagation import PropagationError, export_trajectory_csv
from .sensitivity import optimize_kappa, export_trace_csv
from .trajectory import TrajectoryError
from . import experiments as xp

DEFAULT_CONFIG = {
    "material": {
        "dispersion_set": "gayer2008_mgo_cln_e",
        "temperature_C": 25.0,
        "d33_pm_per_V": 25.0,
        "chi2_convention": "d33",
        "duty_cycle": 0.5,
        "epsilon0_convention": "paper-value",
    },
    "design": {
        "L_mm": 1.0,
        "target": "deltak",
        "lambda1_um": 3.0,
        "lambda2_um": 1.064,
        "grid_N": 4001,
        "kappa_min_per_cm": None,
        "kappa_max_per_cm": None,
    },
    "simulation": {
        "steps": 20000,
        "depleted": False,
        "signal_pump_ratio": 1.0,
    },
    "sweeps": {
        "bandwidth": {"lambda_min_um": 2.6, "lambda_max_um": 3.6, "samples": 201},
        "period": {"min_pct": -20.0, "max_pct": 20.0, "samples": 81},
        "pump": {"min_pct": -25.0, "max_pct": 25.0, "samples": 81},
        "length": {"min_mm": 0.2, "max_mm": 20.0, "samples": 25},
        "signal": {"ratio_min": 0.01, "ratio_max": 1.0, "samples": 41},
    },
    "output": {"dir": "qasfg_out"},
    "workers": 1,
}

SWEEP_NAMES = ("bandwidth", "period", "pump", "length", "signal", "kappa-trace")


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


USER_ERRORS = (ConfigError, TrajectoryError, MaterialError, PropagationError,
               ValueError, FileNotFoundError)


def _merge_validate(user, default, path=""):
    """Merge user config onto defaults; reject unknown keys and bad types."""
    if not isinstance(user, dict):
        raise ConfigError(f"config block {path or '<root>'} must be an object")
    merged = copy.deepcopy(default)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in default:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(default[key], dict):
            merged[key] = _merge_validate(value, default[key], here)
        else:
            ref = default[key]
            if ref is None or isinstance(ref, bool):
                ok = isinstance(value, bool) if isinstance(ref, bool) \
                    else (value is None or isinstance(value, (int, float)))
            elif isinstance(ref, (int, float)):
                ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            else:
                ok = isinstance(value, str)
            if not ok:
                raise ConfigError(f"bad type for config key {here}: {value!r}")
            merged[key] = value
    return merged


def load_config(path):
    """Read, validate, and merge the config file; return (config, sha256)."""
    if path is None:
        merged = copy.deepcopy(DEFAULT_CONFIG)
    else:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}")
        merged = _merge_validate(user, DEFAULT_CONFIG)
    canonical = json.dumps(merged, sort_keys=True, separators=(",", ":"))
    return merged, hashlib.sha256(canonical.encode()).hexdigest()


def _material_objects(mat):
    model = DispersionModel.from_name(mat["dispersion_set"], mat["temperature_C"])
    d33 = mat["d33_pm_per_V"] * 1e-12
    if mat["chi2_convention"] == "d33":
        chi2 = d33
    elif mat["chi2_convention"] == "2d33":
        chi2 = 2.0 * d33
    else:
        raise ConfigError(
            f"chi2_convention must be 'd33' or '2d33', got {mat['chi2_convention']!r}")
    if mat["epsilon0_convention"] not in EPS0_CHOICES:
        raise ConfigError(
            f"epsilon0_convention must be one of {sorted(EPS0_CHOICES)}")
    eps0 = EPS0_CHOICES[mat["epsilon0_convention"]]
    return model, NonlinearConstants(chi2=chi2, duty_cycle=mat["duty_cycle"]), eps0


def _design_kwargs(cfg):
    model, nl, eps0 = _material_objects(cfg["material"])
    d = cfg["design"]
    if d["target"] not in ("deltak", "kappa"):
        raise ConfigError(f"design target must be 'deltak' or 'kappa', got {d['target']!r}")
    search = None
    if d["kappa_min_per_cm"] is not None or d["kappa_max_per_cm"] is not None:
        if d["kappa_min_per_cm"] is None or d["kappa_max_per_cm"] is None:
            raise ConfigError("set both kappa_min_per_cm and kappa_max_per_cm or neither")
        search = (d["kappa_min_per_cm"] * 100.0, d["kappa_max_per_cm"] * 100.0)
    return dict(length=d["L_mm"] * 1e-3, target=d["target"], model=model,
                nonlinear=nl, lam1=d["lambda1_um"] * 1e-6,
                lam2=d["lambda2_um"] * 1e-6, grid_n=int(d["grid_N"]),
                eps0=eps0), search


def _check_steps_config(cfg):
    steps = int(cfg["simulation"]["steps"])
    if steps <= 0:
        raise ConfigError(f"simulation.steps must be positive, got {steps}")
    return steps


def _resolve_workers(args, cfg):
    if args.workers is not None:
        return args.workers
    env = os.environ.get("QASFG_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"QASFG_WORKERS must be an integer, got {env!r}")
    return int(cfg["workers"])


def _headers(cfg_hash):
    return (f"qasfg v{__version__}", f"config_sha256={cfg_hash}")


def _write_json(path, payload, cfg_hash):
    payload = dict(payload)
    payload["version"] = __version__
    payload["config_sha256"] = cfg_hash
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _design_payload(design):
    return {
        "kappa_per_cm": design.kappa / 100.0,
        "kappa_rad_per_m": design.kappa,
        "L_mm": design.length * 1e3,
        "target": design.target,
        "grid_N": design.provenance["grid_N"],
        "lambda1_um": design.triplet.lam1 * 1e6,
        "lambda2_um": design.triplet.lam2 * 1e6,
        "lambda3_um": design.triplet.lam3 * 1e6,
        "A2_V_per_m": design.pump_amplitude,
        "intensity_W_per_m2": design.pump_intensity,
        "intensity_MW_per_cm2": design.pump_intensity / 1e10,
        "q_value": design.q_value,
        "material": {
            "dispersion_set": design.model.sellmeier.name,
            "temperature_C": design.model.temperature_c,
            "chi2_m_per_V": design.nonlinear.chi2,
            "duty_cycle": design.nonlinear.duty_cycle,
            "eps0_F_per_m": design.eps0,
        },
    }


def _design_from_file(path, grid_n_override=None):
    with open(path) as fh:
        data = json.load(fh)
    required = ("kappa_rad_per_m", "L_mm", "target", "grid_N", "lambda1_um",
                "lambda2_um", "material")
    missing = [k for k in required if k not in data]
    if missing:
        raise ConfigError(f"design file {path} is missing keys: {missing}")
    mat = data["material"]
    model = DispersionModel.from_name(mat["dispersion_set"], mat["temperature_C"])
    nl = NonlinearConstants(chi2=mat["chi2_m_per_V"], duty_cycle=mat["duty_cycle"])
    return xp.assemble_design(
        kappa=data["kappa_rad_per_m"], length=data["L_mm"] * 1e-3,
        target=data["target"], model=model, nonlinear=nl,
        lam1=data["lambda1_um"] * 1e-6, lam2=data["lambda2_um"] * 1e-6,
        grid_n=grid_n_override or int(data["grid_N"]),
        eps0=mat["eps0_F_per_m"], q_value=data.get("q_value", float("nan")))


def _obtain_design(args, cfg):
    if getattr(args, "design", None):
        return _design_from_file(args.design)
    kwargs, search = _design_kwargs(cfg)
    return xp.build_design(search_range=search, **kwargs)


def cmd_design(args):
    cfg, cfg_hash = load_config(args.config)
    outdir = args.out or cfg["output"]["dir"]
    os.makedirs(outdir, exist_ok=True)
    kwargs, search = _design_kwargs(cfg)
    design = xp.build_design(search_range=search, **kwargs)

    with open(os.path.join(outdir, "design.csv"), "w", newline="") as fh:
        for line in _headers(cfg_hash):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["z_m", "deltak_rad_per_m", "Lambda_m"])
        for i in range(len(design.mismatch.z)):
            writer.writerow([repr(float(design.mismatch.z[i])),
                             repr(float(design.mismatch.delta_k[i])),
                             repr(float(design.poling_period_m[i]))])
    _write_json(os.path.join(outdir, "design.json"), _design_payload(design), cfg_hash)
    report = xp.design_boundary_report(design)
    _write_json(os.path.join(outdir, "boundary_check.json"), report, cfg_hash)
    if not report["all_ok"]:
        print("boundary check failed", file=sys.stderr)
        return 1
    print(f"design written to {outdir} (kappa = {design.kappa / 100.0:.4f} /cm)")
    return 0


def cmd_simulate(args):
    cfg, cfg_hash = load_config(args.config)
    outdir = args.out or cfg["output"]["dir"]
    os.makedirs(outdir, exist_ok=True)
    steps = _check_steps_config(cfg)
    design = _obtain_design(args, cfg)
    sim = cfg["simulation"]
    traj = xp.simulate_design(design, steps=steps, depleted=bool(sim["depleted"]),
                              signal_pump_ratio=sim["signal_pump_ratio"])
    export_trajectory_csv(traj, os.path.join(outdir, "trajectory.csv"),
                          header_lines=_headers(cfg_hash))
    _write_json(os.path.join(outdir, "simulate_summary.json"),
                {"eta": traj.efficiency, "steps": steps,
                 "depleted": bool(sim["depleted"]),
                 "signal_pump_ratio": sim["signal_pump_ratio"] if sim["depleted"] else None,
                 "design": design.provenance},
                cfg_hash)
    print(f"eta = {traj.efficiency:.6f}")
    return 0


def cmd_sweep(args):
    cfg, cfg_hash = load_config(args.config)
    if args.name not in SWEEP_NAMES:
        raise ConfigError(
            f"unknown sweep {args.name!r}; valid sweeps: {', '.join(SWEEP_NAMES)}")
    outdir = args.out or cfg["output"]["dir"]
    os.makedirs(outdir, exist_ok=True)
    steps = _check_steps_config(cfg)
    workers = _resolve_workers(args, cfg)
    headers = _headers(cfg_hash)

    if args.name == "kappa-trace":
        kwargs, search = _design_kwargs(cfg)
        result = optimize_kappa(kwargs["length"], target=kwargs["target"],
                                search_range=search, grid_n=kwargs["grid_n"])
        export_trace_csv(result, os.path.join(outdir, "kappa_trace.csv"),
                         header_lines=headers)
        _write_json(os.path.join(outdir, "kappa_trace_summary.json"),
                    {"kappa_per_cm": result.kappa_opt / 100.0,
                     "q_opt": result.q_opt, "target": result.target,
                     "at_boundary": result.at_boundary}, cfg_hash)
        print(f"kappa* = {result.kappa_opt / 100.0:.4f} /cm")
        return 0

    if args.name == "length":
        kwargs, _ = _design_kwargs(cfg)
        block = cfg["sweeps"]["length"]
        lengths = np.geomspace(block["min_mm"] * 1e-3, block["max_mm"] * 1e-3,
                               int(block["samples"]))
        sweeps = xp.efficiency_vs_length(
            target=kwargs["target"], lengths=lengths, model=kwargs["model"],
            nonlinear=kwargs["nonlinear"], lam1=kwargs["lam1"], lam2=kwargs["lam2"],
            grid_n=kwargs["grid_n"], steps=steps, workers=workers)
        with open(os.path.join(outdir, "length.csv"), "w", newline="") as fh:
            for line in headers:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh)
            writer.writerow(["length_m", "eta_designed", "eta_chirp_baseline"])
            for i in range(len(lengths)):
                writer.writerow([repr(float(lengths[i])),
                                 repr(float(sweeps.qa.efficiencies[i])),
                                 repr(float(sweeps.lz.efficiencies[i]))])
        _write_json(os.path.join(outdir, "length_summary.json"),
                    {"designed": sweeps.qa.summary, "chirp_baseline": sweeps.lz.summary},
                    cfg_hash)
        print(f"flatness = {sweeps.qa.summary['flatness_max_minus_min']:.2e}")
        return 0

    design = _obtain_design(args, cfg)
    if args.name == "bandwidth":
        block = cfg["sweeps"]["bandwidth"]
        result = xp.bandwidth_sweep(
            design, lam_min=block["lambda_min_um"] * 1e-6,
            lam_max=block["lambda_max_um"] * 1e-6, samples=int(block["samples"]),
            steps=steps, workers=workers)
        print(f"fwhm = {result.summary['fwhm_nm']:.1f} nm")
    elif args.name == "period":
        block = cfg["sweeps"]["period"]
        result = xp.robustness_period_sweep(
            design, rel_min=block["min_pct"] / 100.0, rel_max=block["max_pct"] / 100.0,
            samples=int(block["samples"]), steps=steps, workers=workers)
        print(f"eta(0) = {result.summary['eta_at_zero']:.6f}")
    elif args.name == "pump":
        block = cfg["sweeps"]["pump"]
        result = xp.robustness_pump_sweep(
            design, rel_min=block["min_pct"] / 100.0, rel_max=block["max_pct"] / 100.0,
            samples=int(block["samples"]), steps=steps, workers=workers)
        print(f"eta(0) = {result.summary['eta_at_zero']:.6f}")
    else:
        block = cfg["sweeps"]["signal"]
        result = xp.signal_intensity_sweep(
            design, ratio_min=block["ratio_min"], ratio_max=block["ratio_max"],
            samples=int(block["samples"]), steps=steps, workers=workers)
        print(f"eta(ratio={block['ratio_max']}) = {result.summary['eta_at_max_ratio']:.4f}")

    stem = args.name
    xp.export_sweep_csv(result, os.path.join(outdir, f"{stem}.csv"), headers)
    xp.export_sweep_json(result, os.path.join(outdir, f"{stem}_summary.json"),
                         provenance=design.provenance,
                         extra={"version": __version__, "config_sha256": cfg_hash})
    return 0


def cmd_optimize(args):
    cfg, cfg_hash = load_config(args.config)
    outdir = args.out or cfg["output"]["dir"]
    os.makedirs(outdir, exist_ok=True)
    kwargs, search = _design_kwargs(cfg)
    result = optimize_kappa(kwargs["length"], target=kwargs["target"],
                            search_range=search, grid_n=kwargs["grid_n"])
    export_trace_csv(result, os.path.join(outdir, "kappa_trace.csv"),
                     header_lines=_headers(cfg_hash))
    _write_json(os.path.join(outdir, "optimize.json"),
                {"kappa_per_cm": result.kappa_opt / 100.0, "q_opt": result.q_opt,
                 "target": result.target, "L_mm": result.length * 1e3,
                 "at_boundary": result.at_boundary}, cfg_hash)
    print(f"kappa* = {result.kappa_opt / 100.0:.4f} /cm (q = {result.q_opt:.4e})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qasfg",
        description="Quasi-adiabatic poled-crystal design tool for complete "
                    "sum-frequency conversion")
    parser.add_argument("--version", action="version", version=f"qasfg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_design=False):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for sweeps (env QASFG_WORKERS as fallback)")
        if with_design:
            p.add_argument("--design", default=None,
                           help="design.json produced by the design command")

    common(sub.add_parser("design", help="optimize and export a crystal design"))
    common(sub.add_parser("simulate", help="propagate a design at its center wavelength"),
           with_design=True)
    p_sweep = sub.add_parser("sweep", help="run a named parameter sweep")
    p_sweep.add_argument("name", help=f"one of: {', '.join(SWEEP_NAMES)}")
    common(p_sweep, with_design=True)
    common(sub.add_parser("optimize", help="coupling-rate optimization trace only"))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"design": cmd_design, "simulate": cmd_simulate,
                "sweep": cmd_sweep, "optimize": cmd_optimize}
    try:
        return handlers[args.command](args)
    except USER_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # numeric/internal failures
        print(f"internal error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
