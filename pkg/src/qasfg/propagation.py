"""Fixed-step RK4 integrators for the coupled-wave equations.

Undepleted pump: the linear pair
    dA1/dz = -i kappa A3 e^{-i phi(z)},   dA3/dz = -i kappa A1 e^{+i phi(z)}
with phi(z) the accumulated mismatch phase, evaluated by interpolating the
profile's phi (never as dk*z, which is wrong for chirped profiles).

Depleted pump: the photon-flux-normalized three-wave system, which conserves
the Manley-Rowe combinations exactly and reduces to the pair above as the
signal/pump ratio vanishes.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .trajectory import MismatchProfile

__all__ = [
    "PropagationError", "FieldState", "FieldTrajectory",
    "simulate_undepleted", "simulate_depleted", "conversion_efficiency",
    "lz_linear_chirp", "constant_mismatch", "export_trajectory_csv",
]


class PropagationError(ValueError):
    """Bad integrator inputs (step count, initial state)."""


@dataclass(frozen=True)
class FieldState:
    """Normalized complex amplitudes; a2 participates only in depleted mode."""

    a1: complex = 1.0 + 0.0j
    a3: complex = 0.0 + 0.0j
    a2: complex | None = None


@dataclass(frozen=True)
class FieldTrajectory:
    z: np.ndarray
    a1: np.ndarray
    a3: np.ndarray
    a2: np.ndarray | None
    efficiency: float


def conversion_efficiency(traj):
    """eta = |A3(L)|^2 / |A1(0)|^2 on the stored normalized amplitudes."""
    if len(traj.z) == 0:
        raise PropagationError("empty trajectory")
    a1_in = abs(traj.a1[0])
    if a1_in == 0.0:
        raise PropagationError("zero input signal; efficiency undefined")
    return float(abs(traj.a3[-1]) ** 2 / a1_in ** 2)


def constant_mismatch(delta_k, length, grid_n=4001):
    """Uniform-mismatch profile with the exact linear accumulated phase."""
    z = np.linspace(0.0, length, grid_n)
    return MismatchProfile(z=z, delta_k=np.full_like(z, float(delta_k)),
                           phi=float(delta_k) * z, kappa=np.nan, length=length)


def lz_linear_chirp(dk_start, dk_end, length, grid_n=4001):
    """Linear mismatch ramp; phi(z) is quadratic and computed in closed form."""
    if length <= 0:
        raise PropagationError(f"length must be positive, got {length}")
    z = np.linspace(0.0, length, grid_n)
    dk = dk_start + (dk_end - dk_start) * z / length
    phi = dk_start * z + (dk_end - dk_start) * z ** 2 / (2.0 * length)
    return MismatchProfile(z=z, delta_k=dk, phi=phi, kappa=np.nan, length=length)


def _check_steps(steps, kappa, mismatch):
    """Reject step counts that under-resolve the fastest phase rotation."""
    cycles = (np.max(np.abs(mismatch.delta_k)) * mismatch.length
              + 2.0 * abs(kappa) * mismatch.length) / (2.0 * np.pi)
    required = int(np.ceil(10.0 * cycles))
    if steps < max(required, 10):
        raise PropagationError(
            f"steps={steps} under-resolves the phase rotation; need at least "
            f"{max(required, 10)} (10 steps per 2*pi)")


def _phase_factors(mismatch, steps):
    """exp(-i phi) on the z_k = k h/2 half grid, k = 0..2*steps."""
    zh = np.linspace(0.0, mismatch.length, 2 * steps + 1)
    phi = np.interp(zh, mismatch.z, mismatch.phi)
    return np.exp(-1j * phi)


def simulate_undepleted(mismatch, kappa, steps=20000, initial=None,
                        record_stride=None):
    """Integrate the undepleted two-wave pair with classical fixed-step RK4.

    kappa is the per-wave coupling rate of the pair as written above.
    """
    if initial is None:
        initial = FieldState()
    _check_steps(steps, kappa, mismatch)
    if record_stride is None:
        record_stride = max(1, steps // 2000)

    length = mismatch.length
    h = length / steps
    e_fac = _phase_factors(mismatch, steps).tolist()
    ck = -1j * kappa

    a1 = complex(initial.a1)
    a3 = complex(initial.a3)
    rec_z = [0.0]
    rec_a1 = [a1]
    rec_a3 = [a3]
    for n in range(steps):
        e0 = e_fac[2 * n]
        em = e_fac[2 * n + 1]
        e1 = e_fac[2 * n + 2]
        k1a = ck * a3 * e0
        k1b = ck * a1 / e0
        t1, t3 = a1 + 0.5 * h * k1a, a3 + 0.5 * h * k1b
        k2a = ck * t3 * em
        k2b = ck * t1 / em
        t1, t3 = a1 + 0.5 * h * k2a, a3 + 0.5 * h * k2b
        k3a = ck * t3 * em
        k3b = ck * t1 / em
        t1, t3 = a1 + h * k3a, a3 + h * k3b
        k4a = ck * t3 * e1
        k4b = ck * t1 / e1
        a1 = a1 + (h / 6.0) * (k1a + 2 * k2a + 2 * k3a + k4a)
        a3 = a3 + (h / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
        if (n + 1) % record_stride == 0 or n == steps - 1:
            rec_z.append((n + 1) * h)
            rec_a1.append(a1)
            rec_a3.append(a3)

    eta = 0.0 if abs(initial.a1) == 0 else abs(a3) ** 2 / abs(initial.a1) ** 2
    return FieldTrajectory(z=np.array(rec_z), a1=np.array(rec_a1),
                           a3=np.array(rec_a3), a2=None, efficiency=float(eta))


def simulate_depleted(mismatch, kappa, steps=20000, initial=None,
                      record_stride=None):
    """Integrate the flux-normalized three-wave system with pump depletion.

        da1/dz = -i kt a2* a3 e^{-i phi}
        da2/dz = -i kt a1* a3 e^{-i phi}
        da3/dz = -i kt a1 a2 e^{+i phi}

    kt is fixed so that the undepleted limit reproduces simulate_undepleted
    with the given kappa at the given pump: kt = kappa / |a2(0)|. Conserves
    |a1|^2 + |a3|^2 and |a2|^2 + |a3|^2 exactly (Manley-Rowe).
    """
    if initial is None or initial.a2 is None:
        raise PropagationError("depleted mode needs an explicit pump amplitude a2")
    if not all(np.isfinite([abs(initial.a1), abs(initial.a2), abs(initial.a3)])):
        raise PropagationError("non-finite initial amplitudes")
    _check_steps(steps, kappa, mismatch)
    if record_stride is None:
        record_stride = max(1, steps // 2000)

    pump0 = abs(initial.a2)
    kt = kappa if pump0 == 0.0 else kappa / pump0
    h = mismatch.length / steps
    e_fac = _phase_factors(mismatch, steps).tolist()
    ck = -1j * kt

    a1 = complex(initial.a1)
    a2 = complex(initial.a2)
    a3 = complex(initial.a3)

    def rhs(x1, x2, x3, e):
        return (ck * x2.conjugate() * x3 * e,
                ck * x1.conjugate() * x3 * e,
                ck * x1 * x2 / e)

    rec_z = [0.0]
    rec = [(a1, a2, a3)]
    for n in range(steps):
        e0 = e_fac[2 * n]
        em = e_fac[2 * n + 1]
        e1 = e_fac[2 * n + 2]
        k1 = rhs(a1, a2, a3, e0)
        k2 = rhs(a1 + 0.5 * h * k1[0], a2 + 0.5 * h * k1[1], a3 + 0.5 * h * k1[2], em)
        k3 = rhs(a1 + 0.5 * h * k2[0], a2 + 0.5 * h * k2[1], a3 + 0.5 * h * k2[2], em)
        k4 = rhs(a1 + h * k3[0], a2 + h * k3[1], a3 + h * k3[2], e1)
        a1 = a1 + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        a2 = a2 + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        a3 = a3 + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if (n + 1) % record_stride == 0 or n == steps - 1:
            rec_z.append((n + 1) * h)
            rec.append((a1, a2, a3))

    r1, r2, r3 = (np.array([r[i] for r in rec]) for i in range(3))
    eta = 0.0 if abs(initial.a1) == 0 else abs(a3) ** 2 / abs(initial.a1) ** 2
    return FieldTrajectory(z=np.array(rec_z), a1=r1, a3=r3, a2=r2,
                           efficiency=float(eta))


def export_trajectory_csv(traj, path, header_lines=()):
    """Field trajectory CSV; pump columns included in depleted mode."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        cols = ["z_m", "re_A1", "im_A1", "re_A3", "im_A3"]
        if traj.a2 is not None:
            cols += ["re_A2", "im_A2"]
        writer.writerow(cols)
        for i in range(len(traj.z)):
            row = [traj.z[i], traj.a1[i].real, traj.a1[i].imag,
                   traj.a3[i].real, traj.a3[i].imag]
            if traj.a2 is not None:
                row += [traj.a2[i].real, traj.a2[i].imag]
            writer.writerow([repr(float(v)) for v in row])
