"""Invariant-based inverse engineering of the phase-mismatch profile.

Builds the polynomial mixing-angle trajectory theta(z), the auxiliary angle
beta(z), the accumulated invariant phases, and the synthesized mismatch
Delta-k(z) for a constant coupling rate kappa over a crystal of length L.

Conventions (the unique mutually consistent set):
    theta' = -kappa sin(beta)          ->  beta = arcsin(-theta'/kappa)
    cos(beta) = +sqrt(1 - (theta'/kappa)^2) everywhere
    beta' = -kappa cot(theta) cos(beta) - dk(z)
Removable endpoint singularities are replaced by their closed-form limits.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_simpson

__all__ = [
    "TrajectoryError", "TrajectorySpec", "AngleProfiles", "MismatchProfile",
    "theta_profile", "beta_profile", "lr_phase", "angle_profiles",
    "delta_k_profile", "boundary_check", "export_profile_csv",
]


class TrajectoryError(ValueError):
    """Invalid trajectory spec or profile (e.g. kappa*L <= pi)."""


@dataclass(frozen=True)
class TrajectorySpec:
    """Constant coupling rate kappa (rad/m), crystal length L (m), grid size N."""

    kappa: float
    length: float
    grid_n: int = 4001

    def __post_init__(self):
        if self.length <= 0:
            raise TrajectoryError(f"length must be positive, got {self.length}")
        if self.kappa * self.length <= np.pi:
            raise TrajectoryError(
                f"kappa*L must exceed pi for a real profile; got kappa*L = "
                f"{self.kappa * self.length:.6f}")
        if self.grid_n < 1001 or self.grid_n % 2 == 0:
            raise TrajectoryError(
                f"grid size must be odd and >= 1001, got {self.grid_n}")

    @property
    def edge_rate(self):
        """sqrt(60 (kL - pi) / (k L^3)); |dk| at the endpoints is twice this."""
        d = self.kappa * self.length - np.pi
        return np.sqrt(60.0 * d / (self.kappa * self.length ** 3))


@dataclass(frozen=True)
class AngleProfiles:
    """Sampled trajectory angles and accumulated phases on a uniform grid.

    alpha and m = 2*alpha - beta use the term-wise phase-rate grouping
    beta' + (theta' cot beta)/sin(theta), whose endpoint limits are finite;
    these drive the quantitative efficiency-deficit predictions.
    m_select accumulates the single-fraction grouping
    (beta' + theta' cot beta)/sin(theta) and carries no beta term; it is the
    phase under which the tabulated robustness-optimal couplings of the
    reference designs are selected.
    """

    kappa: float
    length: float
    z: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    theta_ddot: np.ndarray
    beta: np.ndarray
    beta_dot: np.ndarray
    alpha: np.ndarray
    m: np.ndarray
    m_select: np.ndarray
    edge_rate: float


@dataclass(frozen=True)
class MismatchProfile:
    """Synthesized mismatch dk(z) and its accumulated phase phi(z)."""

    z: np.ndarray
    delta_k: np.ndarray
    phi: np.ndarray
    kappa: float
    length: float


def theta_profile(spec):
    """Closed-form polynomial trajectory: (z, theta, theta', theta'').

    theta(z) = kappa z - (kappa L - pi)(10 s^3 - 15 s^4 + 6 s^5), s = z/L,
    with derivatives evaluated analytically.
    """
    k, L = spec.kappa, spec.length
    z = np.linspace(0.0, L, spec.grid_n)
    s = z / L
    d = k * L - np.pi
    theta = k * z - d * (10 * s ** 3 - 15 * s ** 4 + 6 * s ** 5)
    theta_dot = k - (30.0 * d / L) * s ** 2 * (1 - s) ** 2
    theta_ddot = -(60.0 * d / L ** 2) * s * (1 - s) * (1 - 2 * s)
    return z, theta, theta_dot, theta_ddot


def beta_profile(kappa, theta_dot):
    """beta = arcsin(-theta'/kappa) on the principal branch (cos beta >= 0)."""
    sin_beta = -np.asarray(theta_dot) / kappa
    excess = np.max(np.abs(sin_beta)) - 1.0
    if excess > 1e-12:
        raise TrajectoryError(
            f"|theta'| exceeds kappa by relative {excess:.3e}; no real beta "
            "(kappa*L <= pi regime)")
    return np.arcsin(np.clip(sin_beta, -1.0, 1.0))


def angle_profiles(spec):
    """Build the full sampled trajectory for a valid spec."""
    k, L = spec.kappa, spec.length
    z, theta, theta_dot, theta_ddot = theta_profile(spec)
    beta = beta_profile(k, theta_dot)
    cos_beta = np.sqrt(np.clip(1.0 - (theta_dot / k) ** 2, 0.0, None))
    d_edge = spec.edge_rate

    sin_theta = np.sin(theta)
    if np.any(sin_theta[1:-1] <= 0.0):
        raise TrajectoryError(
            f"theta leaves (0, pi) on the interior for kappa*L = {k * L:.4f}; "
            "the phase integrand is singular and the profile is invalid")

    # beta' = -theta''/(kappa cos beta); removable 0/0 at the endpoints.
    beta_dot = np.empty_like(z)
    beta_dot[1:-1] = -theta_ddot[1:-1] / (k * cos_beta[1:-1])
    beta_dot[0], beta_dot[-1] = d_edge, -d_edge

    # theta' cot(beta) = -kappa cos(beta) identically (safe where theta'=0).
    term = np.empty_like(z)
    term[1:-1] = -k * cos_beta[1:-1] / sin_theta[1:-1]
    term[0] = term[-1] = -d_edge

    rate = beta_dot + term
    alpha = 0.5 * cumulative_simpson(rate, x=z, initial=0.0)
    m = 2.0 * alpha - beta

    # Single-fraction grouping; its 1/z endpoint divergence is clipped to the
    # neighbouring interior value (the q integrands vanish there, and the
    # accumulated phase is grid-stable; see tests).
    rate_sel = np.empty_like(z)
    rate_sel[1:-1] = (beta_dot[1:-1] + term[1:-1] * sin_theta[1:-1]) / sin_theta[1:-1]
    rate_sel[0], rate_sel[-1] = rate_sel[1], rate_sel[-2]
    m_select = cumulative_simpson(rate_sel, x=z, initial=0.0)

    return AngleProfiles(
        kappa=k, length=L, z=z, theta=theta, theta_dot=theta_dot,
        theta_ddot=theta_ddot, beta=beta, beta_dot=beta_dot, alpha=alpha,
        m=m, m_select=m_select, edge_rate=d_edge)


def lr_phase(angles):
    """Accumulated invariant phase alpha(z) and m(z) = 2*alpha - beta."""
    if not np.all(np.isfinite(angles.alpha)):
        raise TrajectoryError("non-finite invariant phase; invalid profile")
    return angles.alpha, angles.m


def delta_k_profile(angles):
    """Synthesized mismatch dk(z) and accumulated phase phi(z).

    Interior: dk = theta''/(kappa cos beta) - kappa cot(theta) cos(beta).
    Endpoints: the closed-form limits dk(0) = -2*edge_rate, dk(L) = +2*edge_rate.
    """
    k = angles.kappa
    z, theta = angles.z, angles.theta
    cos_beta = np.sqrt(np.clip(1.0 - (angles.theta_dot / k) ** 2, 0.0, None))
    sin_theta = np.sin(theta)

    dk = np.empty_like(z)
    dk[1:-1] = (angles.theta_ddot[1:-1] / (k * cos_beta[1:-1])
                - k * (np.cos(theta[1:-1]) / sin_theta[1:-1]) * cos_beta[1:-1])
    dk[0] = -2.0 * angles.edge_rate
    dk[-1] = 2.0 * angles.edge_rate
    if not np.all(np.isfinite(dk)):
        raise TrajectoryError("non-finite mismatch profile")

    phi = cumulative_simpson(dk, x=z, initial=0.0)
    return MismatchProfile(z=z, delta_k=dk, phi=phi, kappa=k, length=angles.length)


def boundary_check(angles, mismatch, rel_tol=1e-9):
    """Verify the design boundary conditions on the sampled arrays.

    Returns a dict with one entry per condition: {"ok": bool, "value": float,
    "expected": float}, plus "all_ok" and a "near_degenerate" flag raised when
    kappa*L is so close to pi that the endpoint mismatch nearly vanishes.
    """
    k, L = angles.kappa, angles.length
    scale_ddot = max(abs(angles.theta_ddot).max(), 1.0)

    def entry(value, expected, tol):
        return {"ok": bool(abs(value - expected) <= tol),
                "value": float(value), "expected": float(expected)}

    report = {
        "theta_start": entry(angles.theta[0], 0.0, rel_tol * np.pi),
        "theta_end": entry(angles.theta[-1], np.pi, rel_tol * np.pi),
        "theta_dot_start": entry(angles.theta_dot[0], k, rel_tol * k),
        "theta_dot_end": entry(angles.theta_dot[-1], k, rel_tol * k),
        "theta_ddot_start": entry(angles.theta_ddot[0], 0.0, rel_tol * scale_ddot),
        "theta_ddot_end": entry(angles.theta_ddot[-1], 0.0, rel_tol * scale_ddot),
        "delta_k_start": entry(mismatch.delta_k[0], -2 * angles.edge_rate,
                               1e-6 * max(2 * angles.edge_rate, 1.0)),
        "delta_k_end": entry(mismatch.delta_k[-1], 2 * angles.edge_rate,
                             1e-6 * max(2 * angles.edge_rate, 1.0)),
        "delta_k_finite": {"ok": bool(np.all(np.isfinite(mismatch.delta_k))),
                           "value": float(np.max(np.abs(mismatch.delta_k))),
                           "expected": float("nan")},
    }
    report["all_ok"] = all(v["ok"] for v in report.values())
    report["near_degenerate"] = bool(k * L - np.pi < 1e-3)
    return report


def export_profile_csv(angles, mismatch, path, header_lines=()):
    """Write z, theta, beta, alpha, dk, phi columns at full precision."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["z_m", "theta_rad", "beta_rad", "alpha_rad",
                         "deltak_rad_per_m", "phi_rad"])
        for i in range(len(angles.z)):
            writer.writerow([repr(float(v)) for v in (
                angles.z[i], angles.theta[i], angles.beta[i], angles.alpha[i],
                mismatch.delta_k[i], mismatch.phi[i])])


def with_phase_offset(angles, offset):
    """Copy of the profiles with a constant added to both phase accumulators."""
    return replace(angles, m=angles.m + offset, m_select=angles.m_select + offset)
