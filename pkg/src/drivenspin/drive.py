"""Two-tone excitation model: mixer imbalance, lab- and rotating-frame Hamiltonians.

A Hartley (IQ) mixer with slightly unbalanced RF ports, fed an IF tone of
amplitude A and phase phi, emits the intended drive tone at f_LO + f_IF
plus a weak "image" tone at f_LO - f_IF.  Port imbalance is parameterized
by an amplitude mismatch deltaA and a phase mismatch deltaPhi; the image
amplitude and its residual phase theta follow from trigonometric
recombination of the two port signals:

    RF(t) =  A cos(dphi) * sin(w+ t + phi)            # drive tone
           + A_i * sin(w- t - phi - theta)            # image tone
           + dA sin(dphi) * cos(w+ t + phi)           # negligible first order

with A_i = sqrt((A sin dphi)^2 + (dA cos dphi)^2) and
theta = atan2(A sin dphi, dA cos dphi).

The spin sees the lab-frame Hamiltonian

    H(t) = f0 Sz + 2 h_d Sx sin(w+ t + phi) + 2 h_i Sx sin(w- t - phi - theta)

with w_± = 2*pi*(f0 ± Delta).  In the frame rotating at w+ (RWA, valid for
f0/Delta ~ 1e3) this becomes

    H_RF(t) = -Delta Sz + h_d (Sx sin phi - Sy cos phi)
              - h_i [Sx sin(4*pi*Delta*t + phi + theta)
                     + Sy cos(4*pi*Delta*t + phi + theta)]

i.e. a static tilted field plus a weak field rotating at 2*Delta -- the
handle that the Floquet analysis and the protection protocol exploit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["MixerInput", "DriveConfig", "mixer_tones", "lab_hamiltonian", "rotating_hamiltonian", "rotating_field"]

# S=1/2 operators, the only ones needed after effective-TLS reduction
_SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
_SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)


@dataclass(frozen=True)
class MixerInput:
    """IF drive and port-imbalance parameters of the IQ mixer.

    Amplitudes share an arbitrary common scale; f_LO and f_IF in MHz
    (f_IF plays the role of the detuning Delta).
    """

    A: float
    deltaA: float
    phi: float
    deltaPhi: float
    f_LO: float
    f_IF: float

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("A must be positive")
        if abs(self.deltaA) >= self.A:
            raise ValueError("|deltaA| must be < A")
        if not (self.f_LO > self.f_IF >= 0):
            raise ValueError("need f_LO > f_IF >= 0")


@dataclass(frozen=True)
class DriveConfig:
    """Two-tone drive parameters for one experiment.

    f0: carrier/Larmor frequency (MHz); delta: detuning Delta (MHz);
    h_d / h_i: drive and image field amplitudes (MHz); phi / theta: drive
    phase and residual image phase (rad, theta defaults to 0).
    """

    f0: float
    delta: float
    h_d: float
    h_i: float = 0.0
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.h_d < 0 or self.h_i < 0:
            raise ValueError("h_d and h_i must be >= 0")
        if self.h_i > self.h_d / 2 and self.h_d > 0:
            warnings.warn(
                f"h_i = {self.h_i:g} exceeds h_d/2 = {self.h_d / 2:g}; "
                "the weak-image model is outside its intended regime",
                stacklevel=2,
            )


def mixer_tones(m: MixerInput):
    """Decompose the unbalanced mixer output into drive and image tones.

    Returns (A_d, A_i, theta) such that, neglecting the first-order-small
    co-rotating correction, RF(t) = A_d sin(w+ t + phi) + A_i sin(w- t - phi - theta).
    The atan2 form is algebraically identical to the printed closed form
    A_i = dA cos(dphi)/cos(theta) whenever cos(theta) != 0, but is robust
    at dphi = +-pi/2.
    """
    A_d = m.A * math.cos(m.deltaPhi)
    x = m.A * math.sin(m.deltaPhi)
    y = m.deltaA * math.cos(m.deltaPhi)
    A_i = math.hypot(x, y)
    theta = math.atan2(x, y) if A_i > 0 else 0.0
    return A_d, A_i, theta


def lab_hamiltonian(cfg: DriveConfig, t: float) -> np.ndarray:
    """H(t) = f0*Sz + 2*h_d*Sx*sin(w+ t + phi) + 2*h_i*Sx*sin(w- t - phi - theta)."""
    w_plus = 2 * math.pi * (cfg.f0 + cfg.delta)
    w_minus = 2 * math.pi * (cfg.f0 - cfg.delta)
    drive = 2 * cfg.h_d * math.sin(w_plus * t + cfg.phi)
    image = 2 * cfg.h_i * math.sin(w_minus * t - cfg.phi - cfg.theta)
    return cfg.f0 * _SZ + (drive + image) * _SX


def rotating_hamiltonian(cfg: DriveConfig, t: float) -> np.ndarray:
    """RWA Hamiltonian in the frame rotating at w+; time-independent when h_i = 0."""
    hx, hy, hz = rotating_field(cfg, t)
    return hx * _SX + hy * _SY + hz * _SZ


def rotating_field(cfg: DriveConfig, t):
    """Cartesian components (hx, hy, hz) of the rotating-frame field (MHz).

    Vectorized over t.  H_RF = hx*Sx + hy*Sy + hz*Sz with
    hx = h_d sin(phi) - h_i sin(4*pi*Delta*t + phi + theta),
    hy = -h_d cos(phi) - h_i cos(4*pi*Delta*t + phi + theta),
    hz = -Delta.
    """
    t = np.asarray(t, dtype=float)
    arg = 4 * math.pi * cfg.delta * t + cfg.phi + cfg.theta
    hx = cfg.h_d * math.sin(cfg.phi) - cfg.h_i * np.sin(arg)
    hy = -cfg.h_d * math.cos(cfg.phi) - cfg.h_i * np.cos(arg)
    hz = -cfg.delta * np.ones_like(t)
    return hx, hy, hz
