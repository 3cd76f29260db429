"""Design assembly and sweep drivers: bandwidth, robustness, length scaling,
and signal-depletion experiments, with CSV/JSON export.
"""

import csv
import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .materials import (DispersionModel, NonlinearConstants, WaveTriplet,
                        EPS0_PAPER_VALUE, make_wave_triplet,
                        coupling_coefficient, pump_amplitude_for_kappa,
                        pump_intensity, poling_period)
from .propagation import (FieldState, simulate_undepleted, simulate_depleted,
                          lz_linear_chirp)
from .sensitivity import (eta_from_period_error, first_order_efficiency,
                          optimize_kappa)
from .trajectory import (AngleProfiles, TrajectorySpec, MismatchProfile,
                         angle_profiles, delta_k_profile, boundary_check)

__all__ = [
    "LAB_FRAME_COUPLING", "CrystalDesign", "SweepResult", "LengthSweeps",
    "assemble_design", "build_design", "design_boundary_report",
    "simulate_design", "bandwidth_sweep", "robustness_period_sweep",
    "robustness_pump_sweep", "efficiency_vs_length", "signal_intensity_sweep",
    "fwhm_interval", "tolerance_interval", "export_sweep_csv",
    "export_sweep_json",
]

# The inverse engineering treats kappa as the full two-level coupling (Rabi)
# rate of the rotating-frame matrix; in the lab-frame pair each off-diagonal
# then carries kappa/2. Simulations of a design therefore run at this
# fraction of the design kappa. Complete conversion of the designed profiles
# is exact under this mapping and fails without it.
LAB_FRAME_COUPLING = 0.5


@dataclass(frozen=True)
class CrystalDesign:
    """A fully assembled poled-crystal design: the exportable artifact."""

    kappa: float  # design coupling rate, rad/m
    length: float  # m
    target: str  # "deltak" | "kappa"
    model: DispersionModel
    triplet: WaveTriplet
    nonlinear: NonlinearConstants
    angles: AngleProfiles
    mismatch: MismatchProfile
    poling_period_m: np.ndarray  # signed local period per grid sample
    pump_amplitude: float  # V/m
    pump_intensity: float  # W/m^2
    q_value: float
    eps0: float
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepResult:
    """Ordered (parameter, efficiency) samples with a derived summary.

    Robustness sweeps also carry the first-order perturbative estimates,
    exported alongside the simulated values (the simulation is authoritative;
    the estimate is an overlay that degrades at large errors).
    """

    parameter: str
    unit: str
    values: np.ndarray
    efficiencies: np.ndarray
    summary: dict
    estimates: np.ndarray | None = None

    def __post_init__(self):
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("sweep samples must be strictly increasing")
        if np.any(self.efficiencies < 0) or np.any(self.efficiencies > 1 + 1e-6):
            raise ValueError("efficiency outside [0, 1 + 1e-6]")


@dataclass(frozen=True)
class LengthSweeps:
    """Efficiency vs length for the engineered design and the chirp baseline."""

    qa: SweepResult
    lz: SweepResult


def assemble_design(kappa, length, target, model=DispersionModel(),
                    nonlinear=NonlinearConstants(), lam1=3.0e-6, lam2=1.064e-6,
                    grid_n=4001, eps0=EPS0_PAPER_VALUE, q_value=float("nan"),
                    at_boundary=False):
    """Assemble the design artifact for a given coupling rate: angle
    profiles, dk(z), poling period profile, pump drive. Deterministic."""
    triplet = make_wave_triplet(lam1, lam2, model)
    angles = angle_profiles(TrajectorySpec(kappa, length, grid_n))
    mismatch = delta_k_profile(angles)
    periods = poling_period(mismatch.delta_k, triplet)
    a2 = pump_amplitude_for_kappa(kappa, triplet, nonlinear)
    intensity = pump_intensity(a2, triplet.n2, eps0)
    provenance = {
        "target": target,
        "kappa_per_cm": kappa / 100.0,
        "L_mm": length * 1e3,
        "q_value": q_value,
        "grid_N": grid_n,
        "lambda1_um": lam1 * 1e6,
        "lambda2_um": lam2 * 1e6,
        "dispersion_set": model.sellmeier.name,
        "temperature_C": model.temperature_c,
        "chi2_m_per_V": nonlinear.chi2,
        "duty_cycle": nonlinear.duty_cycle,
        "eps0_F_per_m": eps0,
        "kappa_at_search_boundary": at_boundary,
    }
    return CrystalDesign(
        kappa=kappa, length=length, target=target, model=model,
        triplet=triplet, nonlinear=nonlinear, angles=angles, mismatch=mismatch,
        poling_period_m=periods, pump_amplitude=a2, pump_intensity=intensity,
        q_value=q_value, eps0=eps0, provenance=provenance)


def build_design(length, target="deltak", model=DispersionModel(),
                 nonlinear=NonlinearConstants(), lam1=3.0e-6, lam2=1.064e-6,
                 grid_n=4001, search_range=None, eps0=EPS0_PAPER_VALUE):
    """Optimize the coupling for the chosen error channel, then assemble."""
    opt = optimize_kappa(length, target=target, search_range=search_range,
                         grid_n=grid_n)
    return assemble_design(opt.kappa_opt, length, target, model=model,
                           nonlinear=nonlinear, lam1=lam1, lam2=lam2,
                           grid_n=grid_n, eps0=eps0, q_value=opt.q_opt,
                           at_boundary=opt.at_boundary)


def design_boundary_report(design):
    return boundary_check(design.angles, design.mismatch)


def simulate_design(design, steps=20000, depleted=False, signal_pump_ratio=1.0,
                    record_stride=None):
    """Propagate the design at its center wavelength.

    Undepleted mode launches the unit signal; depleted mode launches
    (signal, pump) flux amplitudes (ratio, 1).
    """
    coupling = LAB_FRAME_COUPLING * design.kappa
    if depleted:
        initial = FieldState(a1=signal_pump_ratio, a3=0.0, a2=1.0)
        return simulate_depleted(design.mismatch, coupling, steps=steps,
                                 initial=initial, record_stride=record_stride)
    return simulate_undepleted(design.mismatch, coupling, steps=steps,
                               record_stride=record_stride)


def _eta_point(task):
    """Worker: simulate one sweep point and return its conversion efficiency."""
    z, dk, phi, length, coupling, steps = task
    profile = MismatchProfile(z=z, delta_k=dk, phi=phi, kappa=np.nan, length=length)
    traj = simulate_undepleted(profile, coupling, steps=steps, record_stride=steps)
    return traj.efficiency


def _eta_point_depleted(task):
    z, dk, phi, length, coupling, steps, ratio = task
    profile = MismatchProfile(z=z, delta_k=dk, phi=phi, kappa=np.nan, length=length)
    traj = simulate_depleted(profile, coupling, steps=steps,
                             initial=FieldState(a1=ratio, a3=0.0, a2=1.0),
                             record_stride=steps)
    return traj.efficiency


def _map_ordered(fn, tasks, workers):
    """Evaluate tasks, preserving input order; optionally on a process pool."""
    if workers and workers > 1:
        ctx = multiprocessing.get_context()
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            return list(pool.map(fn, tasks, chunksize=chunk))
    return [fn(t) for t in tasks]


def bandwidth_sweep(design, lam_min=2.6e-6, lam_max=3.6e-6, samples=201,
                    steps=20000, workers=1):
    """Signal-wavelength acceptance of the fabricated design.

    The poling profile and the pump drive are frozen; each wavelength gets
    its own material mismatch offset and its own coupling rate (same pump
    amplitude, new frequencies and indices).
    """
    z, dk0, phi0 = design.mismatch.z, design.mismatch.delta_k, design.mismatch.phi
    dkm0 = design.triplet.material_mismatch
    lams = np.linspace(lam_min, lam_max, samples)
    tasks = []
    for lam in lams:
        trip = make_wave_triplet(lam, design.triplet.lam2, design.model)
        kap = coupling_coefficient(design.pump_amplitude, trip, design.nonlinear)
        offset = trip.material_mismatch - dkm0
        tasks.append((z, dk0 + offset, phi0 + offset * z, design.length,
                      LAB_FRAME_COUPLING * kap, steps))
    etas = np.array(_map_ordered(_eta_point, tasks, workers))
    lo, hi, width, truncated = fwhm_interval(lams, etas)
    summary = {
        "peak_eta": float(etas.max()),
        "peak_lambda1_um": float(lams[int(np.argmax(etas))] * 1e6),
        "fwhm_nm": float(width * 1e9),
        "half_max_lambda_um": [float(lo * 1e6), float(hi * 1e6)],
        "fwhm_truncated_by_range": truncated,
    }
    return SweepResult("lambda1", "m", lams, etas, summary)


def robustness_period_sweep(design, rel_min=-0.20, rel_max=0.20, samples=81,
                            steps=20000, workers=1, thresholds=(0.99, 0.95, 0.90, 0.80)):
    """Uniformly scale the poling period by (1 + x) and re-simulate.

    The grating wavevector scales as 1/(1 + x) at every sample; the material
    mismatch is untouched.
    """
    if rel_min <= -1.0:
        raise ValueError("relative period error must stay above -100%")
    z, dk0, phi0 = design.mismatch.z, design.mismatch.delta_k, design.mismatch.phi
    dkm = design.triplet.material_mismatch
    xs = np.linspace(rel_min, rel_max, samples)
    tasks = []
    for x in xs:
        scale = 1.0 / (1.0 + x)
        dk_eff = dkm + (dk0 - dkm) * scale
        phi_eff = dkm * z * (1.0 - scale) + phi0 * scale
        tasks.append((z, dk_eff, phi_eff, design.length,
                      LAB_FRAME_COUPLING * design.kappa, steps))
    etas = np.array(_map_ordered(_eta_point, tasks, workers))
    estimates = np.array([first_order_efficiency(
        design.angles, eta_deltak=eta_from_period_error(x, design.poling_period_m))
        for x in xs])
    summary = {"tolerance_intervals": {
        str(t): tolerance_interval(xs, etas, t) for t in thresholds}}
    summary["eta_at_zero"] = float(etas[int(np.argmin(np.abs(xs)))])
    return SweepResult("period_rel_error", "1", xs, etas, summary, estimates)


def robustness_pump_sweep(design, rel_min=-0.25, rel_max=0.25, samples=81,
                          steps=20000, workers=1, thresholds=(0.99, 0.95, 0.90, 0.80)):
    """Scale the pump intensity by (1 + x); the coupling scales as sqrt(1 + x)."""
    if rel_min <= -1.0:
        raise ValueError("relative intensity error must stay above -100%")
    z, dk0, phi0 = design.mismatch.z, design.mismatch.delta_k, design.mismatch.phi
    xs = np.linspace(rel_min, rel_max, samples)
    tasks = [(z, dk0, phi0, design.length,
              LAB_FRAME_COUPLING * design.kappa * np.sqrt(1.0 + x), steps)
             for x in xs]
    etas = np.array(_map_ordered(_eta_point, tasks, workers))
    estimates = np.array([first_order_efficiency(
        design.angles, eta_kappa=np.sqrt(1.0 + x) - 1.0) for x in xs])
    summary = {"tolerance_intervals": {
        str(t): tolerance_interval(xs, etas, t) for t in thresholds}}
    summary["eta_at_zero"] = float(etas[int(np.argmin(np.abs(xs)))])
    return SweepResult("pump_intensity_rel_error", "1", xs, etas, summary, estimates)


def efficiency_vs_length(target="deltak", lengths=None, model=DispersionModel(),
                         nonlinear=NonlinearConstants(), lam1=3.0e-6,
                         lam2=1.064e-6, reference_length=1e-3, grid_n=4001,
                         steps=20000, workers=1, sustain_threshold=0.90):
    """Conversion efficiency vs crystal length.

    The engineered design uses the scaling law kappa*(L) * L = const anchored
    at the reference length. The chirp baseline keeps the reference coupling
    and ramps the mismatch linearly between the reference design's endpoint
    values over each length.
    """
    if lengths is None:
        lengths = np.geomspace(0.2e-3, 20e-3, 25)
    lengths = np.asarray(lengths, dtype=float)

    ref = optimize_kappa(reference_length, target=target, grid_n=grid_n)
    kl_const = ref.kappa_opt * reference_length
    ref_angles = angle_profiles(TrajectorySpec(ref.kappa_opt, reference_length, grid_n))
    ref_mismatch = delta_k_profile(ref_angles)
    dk_extreme = abs(ref_mismatch.delta_k[0])

    qa_tasks = []
    lz_tasks = []
    for L in lengths:
        kap = kl_const / L
        mism = delta_k_profile(angle_profiles(TrajectorySpec(kap, L, grid_n)))
        qa_tasks.append((mism.z, mism.delta_k, mism.phi, L,
                         LAB_FRAME_COUPLING * kap, steps))
        chirp = lz_linear_chirp(-dk_extreme, dk_extreme, L, grid_n)
        lz_tasks.append((chirp.z, chirp.delta_k, chirp.phi, L,
                         LAB_FRAME_COUPLING * ref.kappa_opt, steps))
    qa = np.array(_map_ordered(_eta_point, qa_tasks, workers))
    lz = np.array(_map_ordered(_eta_point, lz_tasks, workers))

    sustained = None
    for i in range(len(lengths)):
        if np.all(lz[i:] >= sustain_threshold):
            sustained = float(lengths[i])
            break
    qa_summary = {"flatness_max_minus_min": float(qa.max() - qa.min()),
                  "min_eta": float(qa.min())}
    lz_summary = {"first_sustained_above_threshold_m": sustained,
                  "sustain_threshold": sustain_threshold,
                  "eta_at_reference": float(np.interp(reference_length, lengths, lz)),
                  "chirp_extreme_rad_per_m": float(dk_extreme),
                  "kappa_per_cm": ref.kappa_opt / 100.0}
    return LengthSweeps(
        qa=SweepResult("length", "m", lengths, qa, qa_summary),
        lz=SweepResult("length", "m", lengths, lz, lz_summary))


def signal_intensity_sweep(design, ratio_min=0.01, ratio_max=1.0, samples=41,
                           steps=20000, workers=1):
    """Depleted-pump efficiency vs signal/pump flux-amplitude ratio."""
    if ratio_min <= 0.0:
        raise ValueError("ratio_min must be positive (zero signal has no efficiency)")
    z, dk0, phi0 = design.mismatch.z, design.mismatch.delta_k, design.mismatch.phi
    ratios = np.linspace(ratio_min, ratio_max, samples)
    tasks = [(z, dk0, phi0, design.length, LAB_FRAME_COUPLING * design.kappa,
              steps, r) for r in ratios]
    etas = np.array(_map_ordered(_eta_point_depleted, tasks, workers))
    flat = ratios[etas >= 0.99]
    summary = {"eta_at_max_ratio": float(etas[-1]),
               "flat_region_max_ratio": float(flat.max()) if flat.size else 0.0}
    return SweepResult("signal_pump_ratio", "1", ratios, etas, summary)


def fwhm_interval(xs, ys):
    """Full width at half maximum via the outermost half-peak crossings,
    linearly interpolated. Returns (x_lo, x_hi, width, truncated)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    half = ys.max() / 2.0
    above = np.where(ys >= half)[0]
    lo_i, hi_i = above[0], above[-1]
    truncated = False
    if lo_i == 0:
        x_lo, truncated = xs[0], True
    else:
        x0, x1, y0, y1 = xs[lo_i - 1], xs[lo_i], ys[lo_i - 1], ys[lo_i]
        x_lo = x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    if hi_i == len(xs) - 1:
        x_hi, truncated = xs[-1], True
    else:
        x0, x1, y0, y1 = xs[hi_i], xs[hi_i + 1], ys[hi_i], ys[hi_i + 1]
        x_hi = x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    return float(x_lo), float(x_hi), float(x_hi - x_lo), truncated


def tolerance_interval(xs, ys, threshold):
    """Closed interval around x = 0 where ys >= threshold, crossings
    linearly interpolated. Returns (lo, hi) or None if eta(0) < threshold."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    i0 = int(np.argmin(np.abs(xs)))
    if ys[i0] < threshold:
        return None
    lo_i = i0
    while lo_i > 0 and ys[lo_i - 1] >= threshold:
        lo_i -= 1
    hi_i = i0
    while hi_i < len(xs) - 1 and ys[hi_i + 1] >= threshold:
        hi_i += 1
    if lo_i == 0:
        lo = xs[0]
    else:
        x0, x1, y0, y1 = xs[lo_i - 1], xs[lo_i], ys[lo_i - 1], ys[lo_i]
        lo = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
    if hi_i == len(xs) - 1:
        hi = xs[-1]
    else:
        x0, x1, y0, y1 = xs[hi_i], xs[hi_i + 1], ys[hi_i], ys[hi_i + 1]
        hi = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
    return (float(lo), float(hi))


def export_sweep_csv(result, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        cols = [f"{result.parameter}_{result.unit}", "eta"]
        if result.estimates is not None:
            cols.append("eta_first_order_estimate")
        writer.writerow(cols)
        for i, (v, e) in enumerate(zip(result.values, result.efficiencies)):
            row = [repr(float(v)), repr(float(e))]
            if result.estimates is not None:
                row.append(repr(float(result.estimates[i])))
            writer.writerow(row)


def export_sweep_json(result, path, provenance=None, extra=None):
    payload = {"parameter": result.parameter, "unit": result.unit,
               "samples": len(result.values), "summary": result.summary}
    if provenance:
        payload["design"] = provenance
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
