"""Time evolution of the driven two-level system.

Three propagation routes, all in spin-1/2 units (expectation values in
[-1/2, +1/2], NOT Bloch-vector [-1, 1]):

* `propagate_unitary` -- matrix exponential for a time-independent
  Hamiltonian (image tone off).
* `evolve_lindblad` -- master equation with the lowering operator S_- as
  collapse channel, rate 1/T1.  This fixes T2 = 2*T1 (pure amplitude
  damping); `Environment.model` must say so explicitly.
* `evolve_bloch` -- phenomenological Bloch equations with independent
  (T1, T2), needed because the measured systems have T2 << 2*T1.

`torque_trace` post-processes a dissipation-free run into the drive and
image torque magnitudes |<S> x h|, the diagnostic that distinguishes
spin locking (zero drive torque) from driven nutation (maximum torque).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .drive import DriveConfig, rotating_hamiltonian, rotating_field

__all__ = [
    "DensityState",
    "Environment",
    "TimeSeries",
    "IntegrationError",
    "propagate_unitary",
    "evolve_lindblad",
    "evolve_bloch",
    "torque_trace",
    "default_time_grid",
]

# Energy-lowering jump operator: transfers the excited (-Z) population to the
# +Z ground state.  (In the m = +1/2, -1/2 basis ordering this is the matrix
# usually written S+; the physical content is relaxation toward +Z.)
_JUMP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

MODELS = ("lindblad_T2eq2T1", "bloch_independent")

_AXIS_VECTORS = {
    "+X": (1.0, 0.0, 0.0), "-X": (-1.0, 0.0, 0.0),
    "+Y": (0.0, 1.0, 0.0), "-Y": (0.0, -1.0, 0.0),
    "+Z": (0.0, 0.0, 1.0), "-Z": (0.0, 0.0, -1.0),
}


class IntegrationError(RuntimeError):
    """Adaptive integrator could not meet its error targets."""


@dataclass(frozen=True)
class DensityState:
    """2x2 density matrix, basis ordered (m=+1/2, m=-1/2)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("DensityState is a two-level object; got shape %s" % (m.shape,))
        if abs(np.trace(m).real - 1.0) > 1e-8 or abs(np.trace(m).imag) > 1e-8:
            raise ValueError("density matrix trace must be 1 (got %s)" % np.trace(m))
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < -1e-8:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def ground(cls) -> "DensityState":
        # equilibrium: spin along +Z, <Sz> = +1/2
        return cls(np.diag([1.0, 0.0]).astype(complex))

    @classmethod
    def from_axis(cls, axis) -> "DensityState":
        """Pure state polarized along `axis` ("+X", "-Y", ... or a 3-vector)."""
        if isinstance(axis, str):
            try:
                n = np.array(_AXIS_VECTORS[axis.upper()])
            except KeyError:
                raise ValueError("unknown axis %r" % (axis,)) from None
        else:
            n = np.asarray(axis, dtype=float)
            nrm = np.linalg.norm(n)
            if nrm == 0:
                raise ValueError("axis vector must be nonzero")
            n = n / nrm
        m = 0.5 * (np.eye(2) + n[0] * _PAULI[0] + n[1] * _PAULI[1] + n[2] * _PAULI[2])
        return cls(m)

    @property
    def bloch(self) -> np.ndarray:
        """(<Sx>, <Sy>, <Sz>) -- components in [-1/2, 1/2]."""
        m = self.matrix
        return 0.5 * np.array(
            [np.trace(m @ _PAULI[0]).real, np.trace(m @ _PAULI[1]).real, np.trace(m @ _PAULI[2]).real]
        )

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def _bloch_to_rho(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return 0.5 * np.eye(2) + s[0] * _PAULI[0] + s[1] * _PAULI[1] + s[2] * _PAULI[2]


@dataclass(frozen=True)
class Environment:
    """Relaxation parameters; times in microseconds, infinity allowed."""

    T1: float = math.inf
    T2: float = math.inf
    model: str = "bloch_independent"

    def __post_init__(self):
        if self.T1 <= 0 or self.T2 <= 0:
            raise ValueError("T1 and T2 must be positive")
        if self.model not in MODELS:
            raise ValueError("model must be one of %s" % (MODELS,))
        if math.isfinite(self.T1) and math.isfinite(self.T2) and self.T2 > 2.0 * self.T1 * (1 + 1e-12):
            raise ValueError("unphysical environment: T2 must satisfy T2 <= 2*T1")

    @property
    def gamma1(self) -> float:
        return 0.0 if math.isinf(self.T1) else 1.0 / self.T1

    @property
    def gamma2(self) -> float:
        return 0.0 if math.isinf(self.T2) else 1.0 / self.T2


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled spin expectation values."""

    t: np.ndarray  # us
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        comps = [np.asarray(c, dtype=float) for c in (self.sx, self.sy, self.sz)]
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least two samples")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("time grid must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * max(dt[0], 1.0):
            raise ValueError("time grid must be uniform")
        for c in comps:
            if c.shape != t.shape:
                raise ValueError("component arrays must match the time grid")
        norms = np.sqrt(comps[0] ** 2 + comps[1] ** 2 + comps[2] ** 2)
        if norms.max() > 0.5 + 1e-6:
            raise ValueError("|<S>| exceeds 1/2: not a spin-1/2 expectation trace")
        object.__setattr__(self, "t", t)
        for name, c in zip(("sx", "sy", "sz"), comps):
            object.__setattr__(self, name, c)

    def __len__(self) -> int:
        return self.t.size

    @property
    def vectors(self) -> np.ndarray:
        """(n, 3) array of (<Sx>, <Sy>, <Sz>)."""
        return np.column_stack([self.sx, self.sy, self.sz])


def propagate_unitary(H: np.ndarray, state: DensityState, t: float) -> DensityState:
    """rho(t) = U rho U^dagger with U = exp(-i 2*pi H t), H in MHz, t in us."""
    from .spinops import matrix_exp_unitary

    U = matrix_exp_unitary(H, t)
    return DensityState(U @ state.matrix @ U.conj().T)


def default_time_grid(cfg: DriveConfig, t_end: float) -> np.ndarray:
    """Output grid with >= 40 samples per Rabi period and >= 20 per image period."""
    f_rabi = math.hypot(cfg.delta, cfg.h_d)
    rate = 40.0 * max(f_rabi, 1e-3)
    if cfg.h_i > 0 and cfg.delta != 0:
        rate = max(rate, 20.0 * 2.0 * abs(cfg.delta))
    n = max(int(math.ceil(rate * t_end)), 16)
    return np.linspace(0.0, t_end, n + 1)


def _validate_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid needs at least two points")
    dt = np.diff(t)
    if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * max(dt[0], 1.0):
        raise ValueError("t_grid must be uniform and strictly increasing")
    return t


def _series_from_rho(t, rho_flat) -> TimeSeries:
    rho = rho_flat.reshape(2, 2, -1)
    sx = 0.5 * (rho[0, 1] + rho[1, 0]).real
    sy = 0.5 * (1j * (rho[0, 1] - rho[1, 0])).real
    sz = 0.5 * (rho[0, 0] - rho[1, 1]).real
    return TimeSeries(t, sx, sy, sz)


def evolve_lindblad(cfg: DriveConfig, env: Environment, state0: DensityState, t_grid) -> TimeSeries:
    """Integrate drho/dt = -i 2*pi [H_RF(t), rho] + (1/T1) D[S-](rho).

    The S- dissipator gives amplitude damping toward the +Z ground state
    with T2 = 2*T1; env.model must be "lindblad_T2eq2T1".
    """
    if env.model != "lindblad_T2eq2T1":
        raise ValueError("evolve_lindblad requires model='lindblad_T2eq2T1' (got %r)" % env.model)
    t = _validate_grid(t_grid)
    g1 = env.gamma1
    jdj = _JUMP.conj().T @ _JUMP

    def rhs(tt, y):
        rho = y.reshape(2, 2)
        H = rotating_hamiltonian(cfg, tt)
        d = -1j * 2.0 * math.pi * (H @ rho - rho @ H)
        if g1:
            d = d + g1 * (_JUMP @ rho @ _JUMP.conj().T - 0.5 * (jdj @ rho + rho @ jdj))
        return d.ravel()

    sol = solve_ivp(
        rhs, (t[0], t[-1]), state0.matrix.ravel().astype(complex),
        t_eval=t, method="DOP853", rtol=1e-9, atol=1e-12,
    )
    if not sol.success:
        raise IntegrationError("Lindblad integration failed: %s" % sol.message)
    return _series_from_rho(t, sol.y)


def evolve_bloch(cfg: DriveConfig, env: Environment, state0, t_grid) -> TimeSeries:
    """Bloch equations in the rotating frame with independent (T1, T2).

    ds/dt = 2*pi (h x s) - (sx/T2, sy/T2, (sz - 1/2)/T1), equilibrium
    along +Z; env.model must be "bloch_independent".  state0 may be a
    DensityState or a 3-component (<Sx>, <Sy>, <Sz>).
    """
    if env.model != "bloch_independent":
        raise ValueError("evolve_bloch requires model='bloch_independent' (got %r)" % env.model)
    t = _validate_grid(t_grid)
    s0 = state0.bloch if isinstance(state0, DensityState) else np.asarray(state0, dtype=float)
    if s0.shape != (3,):
        raise ValueError("state0 must be a DensityState or a 3-vector")
    g1, g2 = env.gamma1, env.gamma2

    def rhs(tt, s):
        hx, hy, hz = rotating_field(cfg, tt)
        return [
            2.0 * math.pi * (hy * s[2] - hz * s[1]) - g2 * s[0],
            2.0 * math.pi * (hz * s[0] - hx * s[2]) - g2 * s[1],
            2.0 * math.pi * (hx * s[1] - hy * s[0]) - g1 * (s[2] - 0.5),
        ]

    sol = solve_ivp(rhs, (t[0], t[-1]), s0, t_eval=t, method="DOP853", rtol=1e-9, atol=1e-12)
    if not sol.success:
        raise IntegrationError("Bloch integration failed: %s" % sol.message)
    return TimeSeries(t, sol.y[0], sol.y[1], sol.y[2])


def torque_trace(series: TimeSeries, cfg: DriveConfig):
    """Drive and image torque magnitudes along a dissipation-free trace.

    drive_torque = |<S> x h_delta| with h_delta the static part of the
    rotating-frame field -- the drive vector plus its detuning term
    (h_d sin(phi), -h_d cos(phi), -delta); a spin locked parallel to
    h_delta feels zero drive torque.  image_torque = |<S> x h_i(t)| with
    the instantaneous image field vector.  Both are normalized to the
    resonant maximum (spin orthogonal to the field): 0.5*h_d and 0.5*h_i.
    Returns (drive_torque, image_torque) arrays; image_torque is zero
    when h_i = 0.
    """
    s = series.vectors
    h_delta = np.array([cfg.h_d * math.sin(cfg.phi), -cfg.h_d * math.cos(cfg.phi), -cfg.delta])
    drive = np.linalg.norm(np.cross(s, h_delta), axis=1)
    if cfg.h_d > 0:
        drive = drive / (0.5 * cfg.h_d)
    if cfg.h_i > 0:
        arg = 4.0 * math.pi * cfg.delta * series.t + cfg.phi + cfg.theta
        h_im = np.column_stack([-cfg.h_i * np.sin(arg), -cfg.h_i * np.cos(arg), np.zeros_like(arg)])
        image = np.linalg.norm(np.cross(s, h_im), axis=1) / (0.5 * cfg.h_i)
    else:
        image = np.zeros_like(drive)
    return drive, image
