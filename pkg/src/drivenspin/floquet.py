"""Quasi-energy analysis of the two-tone rotating-frame Hamiltonian.

With the image tone on, H_RF(t) is periodic with frequency 2*Delta, so its
spectrum is organized by a block-tridiagonal quasi-energy (Shirley-Floquet)
matrix: diagonal blocks H0 - k*(2*Delta)*I and off-diagonal blocks from the
+-1 Fourier components of the image term.  At the resonance condition
F_R = sqrt(Delta^2 + h_d^2) = n*Delta (drive amplitude h_d = Delta*sqrt(n^2-1))
two quasi-energy levels cross; the image coupling turns the n=2 crossing
into an avoided crossing whose gap is what sustains ("protects") the Rabi
oscillation.

Two distinct splitting numbers live here and they are NOT the same thing:

* `quasi_energies(...).splitting_at_resonance` -- the avoided-crossing gap
  of the full 2*Delta-periodic matrix.  It is first order in the image
  amplitude (gap ~ 0.75*h_i at the n=2 crossing) and matches the sideband
  separation observed in time-domain spectra.

* `crossing_block_splitting(...)` -- the gap of the reduced three-block
  (6x6) matrix written in the Delta-spaced zone layout around the crossing.
  This reduced matrix is the one whose second-order perturbation theory
  yields the closed form of `perturbative_splitting` (3*h_i^2/(8*Delta) at
  exact resonance), and the two agree to O(h_i^4).  Enlarging the reduced
  matrix does not converge to the closed form -- zone folding shifts the
  gap at the same h_i^2 order -- so the 6x6 truncation is part of the
  closed form's definition, not a numerical shortcut.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FloquetSpec",
    "FloquetSpectrum",
    "rabi_frequency",
    "resonant_drive",
    "shirley_floquet_matrix",
    "quasi_energies",
    "crossing_block_splitting",
    "perturbative_splitting",
]


@dataclass(frozen=True)
class FloquetSpec:
    """Parameters of one quasi-energy computation.

    n_blocks is the number of retained Fourier blocks; results with
    h_i > 0 need n_blocks >= 3 (covering the 0, +-1 components) to be
    trusted.
    """

    delta: float
    h_d: float
    h_i: float
    phi: float = 0.0
    theta: float = 0.0
    n_blocks: int = 7

    def __post_init__(self):
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be >= 1")
        if self.h_i > 0 and self.n_blocks < 3:
            warnings.warn("n_blocks < 3 with h_i > 0: truncation misses the +-1 coupling", stacklevel=2)


@dataclass(frozen=True)
class FloquetSpectrum:
    quasi_energies: np.ndarray  # ascending, length 2*n_blocks
    splitting_at_resonance: float
    truncation: int


def rabi_frequency(delta: float, h_d: float) -> float:
    """Generalized Rabi frequency F_R = sqrt(Delta^2 + h_d^2) (MHz)."""
    return math.hypot(delta, h_d)


def resonant_drive(n: int, delta: float) -> float:
    """Drive amplitude h_d = Delta*sqrt(n^2 - 1) putting F_R on the n-th crossing."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    return delta * math.sqrt(float(n) ** 2 - 1.0)


def _block_h0(delta: float, h_d: float, phi: float) -> np.ndarray:
    # Within-block basis ordered so the diagonal reads (+Delta/2, -Delta/2),
    # reproducing the printed ladder pattern Delta/2, -Delta/2, Delta/2-2Delta, ...
    od = 0.5 * h_d * np.exp(1j * (phi - math.pi / 2))
    return np.array([[0.5 * delta, od], [np.conj(od), -0.5 * delta]], dtype=complex)


def _block_up(h_i: float, phi: float, theta: float) -> np.ndarray:
    # +1 Fourier component of the image term.  The phase pairing follows the
    # coupling definition H_{-+1} = (h_i/2) S_-+ e^{-+i(phi+pi/2+theta)}; note
    # the printed 6x6 layout in the source literature conjugates this
    # pairing, which breaks both the time-domain sideband check and the
    # closed-form splitting (tested; see package docs).
    chi = phi + math.pi / 2 + theta
    up = np.zeros((2, 2), dtype=complex)
    up[1, 0] = 0.5 * h_i * np.exp(1j * chi)
    return up


def shirley_floquet_matrix(spec: FloquetSpec) -> np.ndarray:
    """Hermitian quasi-energy matrix, dim 2*n_blocks.

    Diagonal 2x2 blocks H0 - k*(2*Delta)*I for k = 0..n_blocks-1 and
    adjacent-block couplings h_i/2 with phase exp(+-i(phi+pi/2+theta)).
    At h_i = 0 the eigenvalues are the ladder {+-F_R/2 - 2k*Delta}.
    """
    n = spec.n_blocks
    h0 = _block_h0(spec.delta, spec.h_d, spec.phi)
    up = _block_up(spec.h_i, spec.phi, spec.theta)
    K = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(n):
        sl = slice(2 * k, 2 * k + 2)
        K[sl, sl] = h0 - k * (2.0 * spec.delta) * np.eye(2)
        if k + 1 < n:
            nxt = slice(2 * k + 2, 2 * k + 4)
            K[sl, nxt] = up
            K[nxt, sl] = up.conj().T
    return K


def _tracked_pair(K: np.ndarray, K0: np.ndarray, targets) -> tuple[float, float]:
    # Identify the two eigenvectors of K living in the subspace spanned by
    # the K0 eigenvectors nearest the two target ladder energies; eigenvalue
    # ordering is useless at a (near-)degeneracy.
    w0, V0 = np.linalg.eigh(K0)
    idx = [int(np.argmin(np.abs(w0 - targets[0])))]
    order = np.argsort(np.abs(w0 - targets[1]))
    idx.append(int(order[0]) if int(order[0]) != idx[0] else int(order[1]))
    P = V0[:, idx]  # (dim, 2)
    w, V = np.linalg.eigh(K)
    weight = np.sum(np.abs(P.conj().T @ V) ** 2, axis=0)
    a, b = np.argsort(weight)[-2:]
    return float(w[a]), float(w[b])


def quasi_energies(spec: FloquetSpec) -> FloquetSpectrum:
    """Diagonalize the quasi-energy matrix and resolve the central crossing gap.

    splitting_at_resonance is the gap between the two levels that are
    degenerate at h_i = 0 for the central n=2 crossing of the ladder,
    tracked across h_i by eigenvector overlap with the h_i = 0 basis.  For
    the full 2*Delta-periodic matrix this gap is first order in h_i
    (~0.75*h_i at the crossing); see the module docstring for its relation
    to the second-order closed form.
    """
    K = shirley_floquet_matrix(spec)
    w = np.linalg.eigh(K)[0]
    if spec.h_i == 0 or spec.n_blocks < 2:
        return FloquetSpectrum(np.sort(w), 0.0, spec.n_blocks)
    F = rabi_frequency(spec.delta, spec.h_d)
    p = (spec.n_blocks - 2) // 2  # central crossing: lower branch of block p, upper of p+1
    targets = (-F / 2 - 2 * p * spec.delta, F / 2 - 2 * (p + 1) * spec.delta)
    K0 = shirley_floquet_matrix(
        FloquetSpec(spec.delta, spec.h_d, 0.0, spec.phi, spec.theta, spec.n_blocks)
    )
    ea, eb = _tracked_pair(K, K0, targets)
    return FloquetSpectrum(np.sort(w), abs(ea - eb), spec.n_blocks)


def crossing_block_splitting(delta: float, h_d: float, h_i: float, phi: float = 0.0, theta: float = 0.0) -> float:
    """Gap of the reduced three-block (6x6) matrix around the n=2 crossing.

    Blocks are laid out in the Delta-spaced zone scheme (shifts -Delta, 0,
    +Delta) with the same image couplings as the full matrix.  The
    second-order perturbation theory of exactly this matrix gives the
    closed form of `perturbative_splitting`; numerically the two agree to
    O(h_i^4).  This is a device for validating the closed form, not the
    physical sideband splitting (see module docstring).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    h0 = _block_h0(delta, h_d, phi)
    up = _block_up(h_i, phi, theta)
    K = np.zeros((6, 6), dtype=complex)
    for i, k in enumerate((-1, 0, 1)):
        sl = slice(2 * i, 2 * i + 2)
        K[sl, sl] = h0 - k * delta * np.eye(2)
        if i < 2:
            nxt = slice(2 * i + 2, 2 * i + 4)
            K[sl, nxt] = up
            K[nxt, sl] = up.conj().T
    F = rabi_frequency(delta, h_d)
    # h_i=0 degenerate pair at the crossing: lower branch of the k=-1 block
    # and upper branch of the k=+1 block, both at (F/2 - Delta) for F=2*Delta
    targets = (-F / 2 + delta, F / 2 - delta)
    K0 = K.copy()
    for i in range(2):
        K0[2 * i : 2 * i + 2, 2 * i + 2 : 2 * i + 4] = 0
        K0[2 * i + 2 : 2 * i + 4, 2 * i : 2 * i + 2] = 0
    ea, eb = _tracked_pair(K, K0, targets)
    return abs(ea - eb)


def perturbative_splitting(delta: float, h_d: float, h_i: float):
    """Closed-form second-order quasi-energies near the n=2 crossing.

    E_+- = -Delta +- (F_R/2 - Delta)
           +- (1/Delta)*(h_i/4)^2 * [3 - 5*sqrt(3)*(h_d - Delta*sqrt(3))/(2*Delta)]

    including the bracketed first-order-in-(h_d - Delta*sqrt(3)) correction;
    trust region |h_d - Delta*sqrt(3)| < 0.2*Delta.  At exact resonance the
    splitting E_+ - E_- reduces to 3*h_i^2/(8*Delta).

    Returns (E_plus, E_minus, splitting).
    """
    if delta == 0:
        raise ZeroDivisionError("delta must be nonzero in the perturbative closed form")
    F = rabi_frequency(delta, h_d)
    zeroth = F / 2 - delta
    bracket = 3.0 - 5.0 * math.sqrt(3.0) * (h_d - delta * math.sqrt(3.0)) / (2.0 * delta)
    second = (h_i / 4.0) ** 2 / delta * bracket
    E_plus = -delta + zeroth + second
    E_minus = -delta - zeroth - second
    return E_plus, E_minus, E_plus - E_minus
