"""Pulse-sequence engine: prepare / burst / wait / pulse / acquire.

A sequence is a list of segments applied to a deterministic ensemble of
two-level members whose static detuning offsets sample a Gaussian
inhomogeneous line.  Each member carries a Bloch vector in spin-1/2 units;
the ensemble average is what the acquisition segments read out.

Burst dissipation model
-----------------------
During a drive burst the member dephasing time is

* ``2*T1`` when the image tone is on (dissipation-limited: the sustained
  Rabi precession decouples the spin from the quasi-static dephasing
  channel, so only energy relaxation survives -- this is the same model
  used to reproduce the measured protected traces), and
* the measured ``env.T2`` when the image is off.

Static ensemble inhomogeneity (sigma defaulting to 1/(pi*T2)) applies in
both cases.  Waits relax without precession; readout segments are linear
in the pre-readout ensemble average (see `AcquireEcho`).

Propagation uses an affine stroboscopic scheme: with the image tone on,
the rotating-frame generator is periodic with period 1/(2*delta), so one
batched integration of d/dt [M|c] = A(t) [M|c] + [0|b] over a single
period yields exact per-member propagators that are then iterated --
orders of magnitude faster than integrating long bursts directly, and
exact for any number of periods.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import norm

from .drive import DriveConfig
from .dynamics import DensityState, Environment, IntegrationError, TimeSeries, _bloch_to_rho
from .floquet import resonant_drive
from .hamiltonians import EffectiveTLS

__all__ = [
    "Prepare",
    "Burst",
    "Wait",
    "HardPulse",
    "AcquireEcho",
    "AcquireFID",
    "EnsembleSpec",
    "SequenceResult",
    "EchoTrain",
    "SequenceError",
    "run_sequence",
    "protected_drive",
    "hahn_echo_decay",
    "cpmg",
    "inversion_recovery",
]

_PREP_AXES = {
    "+X": np.array([1.0, 0.0, 0.0]),
    "+Y": np.array([0.0, 1.0, 0.0]),
    "+Z": np.array([0.0, 0.0, 1.0]),
}
_PULSE_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "-x": np.array([-1.0, 0.0, 0.0]),
    "-y": np.array([0.0, -1.0, 0.0]),
}
# (phi, theta) pairing per preparation axis: phi puts the drive field in
# quadrature with the prepared spin, theta aligns the beat phase so the
# protected component returns to the preparation axis at the commensurate
# burst end.
PHASE_FOR_AXIS = {
    "+X": (0.0, 1.5 * math.pi),
    "+Y": (0.5 * math.pi, 0.5 * math.pi),
    "+Z": (0.0, 0.0),
}

# ideal hard-pulse lengths, rectangular resonant mode (pi/2 and pi)
_PI_PULSE_US = 0.028


class SequenceError(ValueError):
    """Ill-formed segment list."""


@dataclass(frozen=True)
class Prepare:
    """Reset to the thermal ground state (+Z), then an ideal rotation onto `axis`."""

    axis: str = "+Z"

    def __post_init__(self):
        if self.axis not in _PREP_AXES:
            raise ValueError("Prepare axis must be one of %s" % sorted(_PREP_AXES))


@dataclass(frozen=True)
class Burst:
    """Two-tone drive window of `duration` us; `image_on` gates the weak tone."""

    duration: float
    image_on: bool = True

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("Burst duration must be >= 0")


@dataclass(frozen=True)
class Wait:
    """Free window: relaxation only (fields off, no precession)."""

    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("Wait duration must be >= 0")


@dataclass(frozen=True)
class HardPulse:
    """Rotation by `angle` radians about x, y, -x or -y."""

    angle: float
    axis: str = "y"

    def __post_init__(self):
        if self.axis not in _PULSE_AXES:
            raise ValueError("HardPulse axis must be one of %s" % sorted(_PULSE_AXES))


@dataclass(frozen=True)
class AcquireEcho:
    """Echo readout: defocus tau_free, pi pulse, refocus, detect along `readout`.

    The returned signal equals 2*<S_readout> of the ensemble-averaged
    pre-readout state, normalized so full polarization reads 1.  The
    defocus-pi-refocus chain refocuses the static member offsets exactly
    (ideal pulses), and the member decay accumulated during 2*tau_free is
    common to the full-polarization calibration echo, so both drop out of
    the normalized amplitude; T1 pumping over the sub-us echo window is
    neglected.  This makes the readout an exactly linear functional of the
    pre-readout state (slope 2, intercept 0).
    """

    tau_free: float = 0.3
    readout: str = "+Z"

    def __post_init__(self):
        if self.tau_free < 0:
            raise ValueError("tau_free must be >= 0")
        if self.readout not in _PREP_AXES:
            raise ValueError("readout must be one of %s" % sorted(_PREP_AXES))


@dataclass(frozen=True)
class AcquireFID:
    """FID readout (no echo): signal = 2*<Sz>, the t=0 transverse amplitude
    after an ideal pi/2 pulse, proportional to the integrated FID for a
    fixed lineshape."""


Segment = Union[Prepare, Burst, Wait, HardPulse, AcquireEcho, AcquireFID]


@dataclass(frozen=True)
class EnsembleSpec:
    """Static Gaussian detuning ensemble.

    sigma_mhz: standard deviation of member offsets; None derives
    1/(pi*T2) from the environment (0 if T2 is infinite).
    n_nodes: stratified sampling nodes; None picks 512 when sigma > 0
    else 1.  Nodes are midpoint-CDF Gaussian quantiles with equal
    weights -- deterministic, no RNG.
    """

    sigma_mhz: Optional[float] = None
    n_nodes: Optional[int] = None

    def resolve(self, env: Environment) -> Tuple[np.ndarray, np.ndarray]:
        sigma = self.sigma_mhz
        if sigma is None:
            sigma = 0.0 if math.isinf(env.T2) else 1.0 / (math.pi * env.T2)
        if sigma < 0:
            raise ValueError("sigma_mhz must be >= 0")
        n = self.n_nodes
        if n is None:
            n = 512 if sigma > 0 else 1
        if n < 1:
            raise ValueError("n_nodes must be >= 1")
        if sigma == 0 or n == 1:
            return np.zeros(1), np.ones(1)
        q = (np.arange(n) + 0.5) / n
        return norm.ppf(q) * sigma, np.full(n, 1.0 / n)


@dataclass(frozen=True)
class SequenceResult:
    signal: Optional[float]
    trace: Optional[TimeSeries]
    final_state: DensityState


@dataclass(frozen=True)
class EchoTrain:
    """Echo-peak amplitudes (normalized to full polarization = 1)."""

    t: np.ndarray  # us, echo times
    amplitude: np.ndarray


# --------------------------------------------------------------------------
# batched affine propagation


def _affine_blocks(offs, h_d, h_i, delta, phi, theta, g1, g2, t_end, t_eval):
    """Integrate d/dt [M|c] = A(t)[M|c] + [0|b] for every ensemble member.

    A(t) is the Bloch generator of the rotating-frame field
    (h_d sin(phi) - h_i sin(4 pi delta t + phi + theta),
     -h_d cos(phi) - h_i cos(...), -(delta + off)) with decay rates
    (g2, g2, g1) and pump b = (0, 0, g1/2).  Returns M with shape
    (n, len(t_eval), 3, 3) and c with shape (n, len(t_eval), 3).
    """
    n = len(offs)
    hx0 = h_d * math.sin(phi)
    hy0 = -h_d * math.cos(phi)
    hz = -(delta + np.asarray(offs))
    w = 2.0 * math.pi * 2.0 * delta
    pt = phi + theta
    two_pi = 2.0 * math.pi

    def rhs(t, y):
        Y = y.reshape(n, 12)
        M = Y[:, :9].reshape(n, 3, 3)
        c = Y[:, 9:]
        if h_i:
            arg = w * t + pt
            hx = hx0 - h_i * math.sin(arg)
            hy = hy0 - h_i * math.cos(arg)
        else:
            hx, hy = hx0, hy0
        A = np.zeros((n, 3, 3))
        A[:, 0, 1] = -two_pi * hz
        A[:, 0, 2] = two_pi * hy
        A[:, 1, 0] = two_pi * hz
        A[:, 1, 2] = -two_pi * hx
        A[:, 2, 0] = -two_pi * hy
        A[:, 2, 1] = two_pi * hx
        A[:, 0, 0] = -g2
        A[:, 1, 1] = -g2
        A[:, 2, 2] = -g1
        dM = np.einsum("nij,njk->nik", A, M)
        dc = np.einsum("nij,nj->ni", A, c)
        dc[:, 2] += g1 * 0.5
        return np.concatenate([dM.reshape(n, 9), dc], axis=1).ravel()

    y0 = np.zeros((n, 12))
    y0[:, :9] = np.eye(3).ravel()
    sol = solve_ivp(
        rhs, (0.0, t_end), y0.ravel(), t_eval=t_eval,
        method="DOP853", rtol=1e-10, atol=1e-13,
    )
    if not sol.success:
        raise IntegrationError("burst propagator integration failed: %s" % sol.message)
    out = sol.y.reshape(n, 12, len(t_eval))
    M = out[:, :9, :].reshape(n, 3, 3, len(t_eval)).transpose(0, 3, 1, 2)
    c = out[:, 9:, :].transpose(0, 2, 1)
    return M, c


def _rates(env: Environment, image_on: bool, h_i: float) -> Tuple[float, float]:
    # member decay rates inside a burst; see module docstring
    g1 = env.gamma1
    if image_on and h_i > 0:
        g2 = 0.5 * g1
    else:
        g2 = env.gamma2
    return g1, g2


def _burst_samples_per_period(f_rabi: float, delta: float) -> int:
    # >= 40 samples per Rabi period and >= 20 per image period
    return max(int(math.ceil(40.0 * f_rabi / (2.0 * abs(delta)))), 20)


class _Engine:
    """Member-resolved state with trace recording for one run_sequence call."""

    def __init__(self, cfg, env, scale, offs, wts, record_trace):
        self.cfg = cfg
        self.env = env
        self.scale = scale
        self.offs = offs
        self.wts = wts
        self.y = np.tile(np.array([0.0, 0.0, 0.5]), (len(offs), 1))
        self.record_trace = record_trace
        self.trace_t: Optional[np.ndarray] = None
        self.trace_s: Optional[np.ndarray] = None

    def average(self) -> np.ndarray:
        return self.wts @ self.y

    def prepare(self, axis: str):
        self.y = np.tile(0.5 * _PREP_AXES[axis], (len(self.offs), 1))

    def rotate(self, angle: float, axis_vec: np.ndarray):
        # Rodrigues rotation applied to all members
        k = axis_vec / np.linalg.norm(axis_vec)
        c, s = math.cos(angle), math.sin(angle)
        cross = np.cross(np.tile(k, (len(self.y), 1)), self.y)
        dot = self.y @ k
        self.y = self.y * c + cross * s + np.outer(dot * (1 - c), k)

    def pulse_finite(self, angle: float, axis_vec: np.ndarray):
        dur = _PI_PULSE_US * angle / math.pi
        if dur <= 0:
            return
        amp = angle / (2.0 * math.pi * dur)
        phi = math.atan2(axis_vec[1], axis_vec[0]) + math.pi / 2  # field such that hx,hy = amp*axis
        # rectangular resonant pulse: static field amp*axis plus member offsets
        M, c = _affine_blocks(
            self.offs, amp, 0.0, 0.0, phi, 0.0, self.env.gamma1, self.env.gamma2, dur, [dur],
        )
        self.y = np.einsum("nij,nj->ni", M[:, 0], self.y) + c[:, 0]

    def wait(self, duration: float):
        # relaxation only: transverse e^{-d/T2}, longitudinal toward +1/2
        f2 = math.exp(-duration * self.env.gamma2)
        f1 = math.exp(-duration * self.env.gamma1)
        self.y[:, 0] *= f2
        self.y[:, 1] *= f2
        self.y[:, 2] = 0.5 + (self.y[:, 2] - 0.5) * f1

    def _record(self, t_vals, s_vals):
        if not self.record_trace:
            return
        if self.trace_t is None:
            self.trace_t, self.trace_s = np.asarray(t_vals), np.asarray(s_vals)
            self.record_trace = False  # only the first burst window is recorded

    def burst(self, duration: float, image_on: bool):
        if duration <= 0:
            return
        cfg = self.cfg
        h_d = cfg.h_d * self.scale
        h_i = (cfg.h_i * self.scale) if image_on else 0.0
        g1, g2 = _rates(self.env, image_on, h_i)
        f_rabi = math.hypot(cfg.delta, h_d)
        if h_i > 0 and cfg.delta != 0:
            # time-periodic generator: the block must be one image period
            block = 1.0 / (2.0 * abs(cfg.delta))
            n_sub = _burst_samples_per_period(f_rabi, cfg.delta)
        else:
            # static generator: any block is exact; pick ~one Rabi period
            f_eff = max(f_rabi, 2.0 * abs(cfg.delta), 1.0)
            block = min(1.0 / f_eff, duration)
            n_sub = 40
        n_blk = int(math.floor(duration / block + 1e-9))
        rem = duration - n_blk * block
        if rem < 1e-10 * max(duration, 1.0):
            rem = 0.0
        sub = np.linspace(0.0, block, n_sub + 1)
        M, c = _affine_blocks(
            self.offs, h_d, h_i, cfg.delta, cfg.phi, cfg.theta, g1, g2, block, sub,
        )
        MT, cT = M[:, -1], c[:, -1]
        Ms, cs = M[:, :-1], c[:, :-1]
        ts, tr = [], []
        for k in range(n_blk):
            if self.record_trace:
                pts = np.einsum("nsij,nj->nsi", Ms, self.y) + cs
                tr.append(np.einsum("n,nsi->si", self.wts, pts))
                ts.append(k * block + sub[:-1])
            self.y = np.einsum("nij,nj->ni", MT, self.y) + cT
        if rem:
            Mr, cr = _affine_blocks(
                self.offs, h_d, h_i, cfg.delta, cfg.phi, cfg.theta, g1, g2, rem, [rem],
            )
            self.y = np.einsum("nij,nj->ni", Mr[:, 0], self.y) + cr[:, 0]
        if self.record_trace and n_blk:
            self._record(np.concatenate(ts), np.vstack(tr))


def _validate_segments(segments: Sequence[Segment]):
    for i, seg in enumerate(segments):
        if isinstance(seg, (AcquireEcho, AcquireFID)) and i != len(segments) - 1:
            raise SequenceError("Acquire segments must come last (position %d)" % i)


def run_sequence(
    segments: Sequence[Segment],
    cfg: DriveConfig,
    env: Environment,
    tls: Optional[EffectiveTLS] = None,
    *,
    ensemble: Optional[EnsembleSpec] = None,
    finite_pulses: bool = False,
) -> SequenceResult:
    """Apply `segments` in order to a Gaussian static-detuning ensemble.

    `tls` scales both drive amplitudes by its transition matrix element
    (drive_scale); None leaves them unscaled.  `ensemble` defaults to
    EnsembleSpec() (sigma = 1/(pi*T2), 512 nodes).  `finite_pulses`
    replaces ideal HardPulse rotations by rectangular resonant pulses of
    14/28 ns (pi/2 / pi).  The result carries the readout signal (None
    when no Acquire segment is present), the ensemble-averaged trace of
    the first Burst window (t = 0 at burst start), and the final
    ensemble-averaged state.  Everything is deterministic: the ensemble
    uses fixed quantile nodes, not random draws.
    """
    segments = list(segments)
    _validate_segments(segments)
    offs, wts = (ensemble or EnsembleSpec()).resolve(env)
    scale = tls.drive_scale if tls is not None else 1.0
    eng = _Engine(cfg, env, scale, offs, wts, record_trace=True)

    signal: Optional[float] = None
    for i, seg in enumerate(segments):
        if isinstance(seg, Prepare):
            eng.prepare(seg.axis)
        elif isinstance(seg, Burst):
            eng.burst(seg.duration, seg.image_on)
        elif isinstance(seg, Wait):
            nxt = segments[i + 1] if i + 1 < len(segments) else None
            if (
                isinstance(nxt, (AcquireEcho, AcquireFID))
                and math.isfinite(env.T2)
                and seg.duration < 3.0 * env.T2
            ):
                warnings.warn(
                    "pre-readout wait %.3g us is shorter than 3*T2 = %.3g us; "
                    "transverse remnants will leak into the readout" % (seg.duration, 3 * env.T2),
                    stacklevel=2,
                )
            eng.wait(seg.duration)
        elif isinstance(seg, HardPulse):
            if finite_pulses:
                eng.pulse_finite(seg.angle, _PULSE_AXES[seg.axis])
            else:
                eng.rotate(seg.angle, _PULSE_AXES[seg.axis])
        elif isinstance(seg, AcquireEcho):
            avg = eng.average()
            signal = 2.0 * float(avg @ _PREP_AXES[seg.readout])
        elif isinstance(seg, AcquireFID):
            signal = 2.0 * float(eng.average()[2])
        else:
            raise SequenceError("unknown segment %r" % (seg,))

    avg = eng.average()
    nrm = np.linalg.norm(avg)
    if nrm > 0.5:  # clip integrator round-off so the state stays physical
        avg = avg * (0.5 / nrm)
    trace = None
    if eng.trace_t is not None and len(eng.trace_t) >= 2:
        s = eng.trace_s
        trace = TimeSeries(eng.trace_t, s[:, 0], s[:, 1], s[:, 2])
    return SequenceResult(signal=signal, trace=trace, final_state=DensityState(_bloch_to_rho(avg)))


def protected_drive(
    delta: float,
    t_burst: float,
    axis: str = "+Z",
    n: int = 2,
    h_i_ratio: float = 0.12,
    f0: float = 9600.0,
) -> DriveConfig:
    """Drive configuration for a protected burst returning to `axis`.

    Puts h_d on the n-th crossing (F_R = n*delta), picks the image
    amplitude nearest h_i_ratio*h_d such that the slow beat (frequency
    0.75*h_i at the n=2 crossing) completes an integer number of cycles
    over t_burst, and applies the (phi, theta) pairing for the
    preparation axis.  The Rabi precession itself closes when
    F_R*t_burst is an integer, which the caller controls via t_burst.
    """
    if axis not in PHASE_FOR_AXIS:
        raise ValueError("axis must be one of %s" % sorted(PHASE_FOR_AXIS))
    if t_burst <= 0:
        raise ValueError("t_burst must be positive")
    h_d = resonant_drive(n, delta)
    m = max(int(round(0.75 * h_i_ratio * h_d * t_burst)), 1)
    h_i = m / (0.75 * t_burst)
    phi, theta = PHASE_FOR_AXIS[axis]
    return DriveConfig(f0=f0, delta=delta, h_d=h_d, h_i=h_i, phi=phi, theta=theta)


# --------------------------------------------------------------------------
# calibration protocols


def _gauss_nodes(sigma: float, n: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    # Gauss-Hermite quadrature for a static Gaussian detuning line
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x * sigma, w / w.sum()


def hahn_echo_decay(env: Environment, tau_list, sigma_mhz: float = 1.0):
    """pi/2 - tau - pi - tau echo amplitudes: [(2*tau, amplitude), ...].

    Simulated over a Gaussian inhomogeneous line; the ideal pi pulse
    refocuses the static spread exactly, leaving amplitude e^{-2*tau/T2}.
    """
    offs, wts = _gauss_nodes(sigma_mhz) if sigma_mhz > 0 else (np.zeros(1), np.ones(1))
    out = []
    for tau in tau_list:
        if tau < 0:
            raise ValueError("tau must be >= 0")
        a = np.full(len(offs), 0.5 + 0.0j)  # after pi/2_y: along +X
        a = a * np.exp(1j * 2.0 * math.pi * offs * tau) * math.exp(-tau * env.gamma2)
        a = np.conj(a)  # ideal pi_x: a -> conj(a)
        a = a * np.exp(1j * 2.0 * math.pi * offs * tau) * math.exp(-tau * env.gamma2)
        out.append((2.0 * tau, 2.0 * abs(wts @ a)))
    return out


def cpmg(
    env: Environment,
    n_pulses: int,
    tau: float,
    inhomogeneity: float = 0.0,
    alternate_axes: bool = False,
) -> EchoTrain:
    """Carr-Purcell-Meiboom-Gill echo train.

    pi/2_y then pi pulses at tau, 3*tau, 5*tau, ... with echoes at 2*k*tau;
    `inhomogeneity` is the FWHM (MHz) of the Gaussian static detuning line,
    sampled at 64 quadrature nodes.  With ideal pulses the echo peaks decay
    as e^{-t/T2}.  `alternate_axes` cycles the pi-pulse axis x, y, -x, -y.
    """
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    sigma = inhomogeneity / 2.355  # FWHM -> standard deviation
    offs, wts = _gauss_nodes(sigma) if sigma > 0 else (np.zeros(1), np.ones(1))
    # member transverse amplitude as complex number a = <sx> + i <sy>, |a| <= 1/2
    a = np.full(len(offs), 0.5 + 0.0j)  # after pi/2_y: along +X
    rot = np.exp(1j * 2.0 * math.pi * offs * tau)
    axes_cycle = ("x", "y", "-x", "-y")
    t_echo, amp = [], []
    decay_tau = math.exp(-tau * env.gamma2)
    for k in range(n_pulses):
        a = a * rot * decay_tau
        ax = axes_cycle[k % 4] if alternate_axes else "y"
        # ideal pi about an in-plane axis phi_a: a -> e^{2 i phi_a} conj(a)
        phi_a = {"x": 0.0, "y": math.pi / 2, "-x": math.pi, "-y": -math.pi / 2}[ax]
        a = np.exp(2j * phi_a) * np.conj(a)
        a = a * rot * decay_tau
        t_echo.append(2.0 * (k + 1) * tau)
        amp.append(2.0 * abs(wts @ a))
    return EchoTrain(np.asarray(t_echo), np.asarray(amp))


def inversion_recovery(env: Environment, delay_list):
    """pi pulse then free relaxation: [(delay, <Sz>), ...] with
    <Sz>(d) = 1/2 - e^{-d/T1}."""
    out = []
    for d in delay_list:
        if d < 0:
            raise ValueError("delays must be >= 0")
        out.append((d, 0.5 - math.exp(-d * env.gamma1)))
    return out
