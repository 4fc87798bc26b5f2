"""Spin-operator algebra for arbitrary half-integer or integer spin.

Cartesian and ladder operators, the extended Stevens operators used by the
crystal-field Hamiltonians, Hermitian eigendecomposition, and the unitary
matrix exponential exp(-i 2*pi H t).

Basis convention (global, inherited by every other module): states are
ordered by magnetic quantum number m = +S, S-1, ..., -S, so Sz is
diag(S, S-1, ..., -S) and S+ raises m (populates the superdiagonal).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = ["SpinOperators", "spin_matrices", "stevens_operator", "hermitian_eig", "matrix_exp_unitary"]

# Hermiticity acceptance threshold for inputs assembled from floating-point sums
_HERM_TOL = 1e-10


class SpinOperators(NamedTuple):
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray


def _check_spin(S) -> float:
    S = float(S)
    twoS = 2.0 * S
    if S <= 0 or abs(twoS - round(twoS)) > 1e-12:
        raise ValueError(f"S must be a positive half-integer, got {S}")
    return S


def spin_matrices(S) -> SpinOperators:
    """Spin operators of dimension 2S+1 in the m = +S ... -S basis.

    Sx = (S+ + S-)/2 and Sy = (S+ - S-)/(2i); the ladder elements are
    sqrt(S(S+1) - m(m+1)).

    Parameters
    ----------
    S : half-integer spin quantum number (1/2, 1, 3/2, ...).
    """
    S = _check_spin(S)
    dim = int(round(2 * S + 1))
    m = S - np.arange(dim)  # +S down to -S
    Sz = np.diag(m).astype(complex)
    # S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; row index of m+1 is one above m
    raise_elem = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    Splus = np.zeros((dim, dim), dtype=complex)
    Splus[np.arange(dim - 1), np.arange(1, dim)] = raise_elem
    Sminus = Splus.conj().T
    Sx = (Splus + Sminus) / 2
    Sy = (Splus - Sminus) / 2j
    return SpinOperators(Sx, Sy, Sz, Splus, Sminus)


# Extended Stevens operators (Abragam–Bleaney convention), the five terms
# required by the tetragonal crystal-field Hamiltonians handled here.
_SUPPORTED_KQ = {(2, 0), (4, 0), (4, 4), (6, 0), (6, 4)}


def stevens_operator(k: int, q: int, S) -> np.ndarray:
    """Extended Stevens operator O_k^q for spin S.

    Supported (k, q): (2,0), (4,0), (4,4), (6,0), (6,4).  All outputs are
    Hermitian; k >= 2 operators are traceless.
    """
    if (k, q) not in _SUPPORTED_KQ:
        raise ValueError(f"unsupported Stevens operator (k={k}, q={q}); supported: {sorted(_SUPPORTED_KQ)}")
    S = _check_spin(S)
    if k > 2 * S:
        raise ValueError(f"rank k={k} exceeds 2S={2 * S:g}")
    ops = spin_matrices(S)
    Sz, Sp, Sm = ops.Sz, ops.Splus, ops.Sminus
    dim = Sz.shape[0]
    X = S * (S + 1)
    eye = np.eye(dim)
    Sz2 = Sz @ Sz

    if (k, q) == (2, 0):
        return 3 * Sz2 - X * eye
    if (k, q) == (4, 0):
        Sz4 = Sz2 @ Sz2
        return 35 * Sz4 - (30 * X - 25) * Sz2 + (3 * X**2 - 6 * X) * eye
    if (k, q) == (4, 4):
        P4 = np.linalg.matrix_power(Sp, 4) + np.linalg.matrix_power(Sm, 4)
        return P4 / 2
    if (k, q) == (6, 0):
        Sz4 = Sz2 @ Sz2
        Sz6 = Sz4 @ Sz2
        return (
            231 * Sz6
            - (315 * X - 735) * Sz4
            + (105 * X**2 - 525 * X + 294) * Sz2
            + (-5 * X**3 + 40 * X**2 - 60 * X) * eye
        )
    # (6, 4): symmetrized product so the result is Hermitian
    P4 = np.linalg.matrix_power(Sp, 4) + np.linalg.matrix_power(Sm, 4)
    A = 11 * Sz2 - (X + 38) * eye
    return (A @ P4 + P4 @ A) / 4


def hermitian_eig(M: np.ndarray):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized as (M + M^dagger)/2 before solving to absorb
    floating-point drift from Hamiltonian assembly; inputs further than
    1e-10 from Hermitian are rejected.

    Returns
    -------
    (eigenvalues, eigenvectors) with M @ V = V @ diag(w).
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be a square matrix")
    dev = np.max(np.abs(M - M.conj().T))
    if dev > _HERM_TOL * max(1.0, np.max(np.abs(M))):
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return w, V


def matrix_exp_unitary(H: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-i 2*pi H t) for Hermitian H (MHz), t in microseconds."""
    w, V = hermitian_eig(H)
    phases = np.exp(-2j * np.pi * w * t)
    return (V * phases) @ V.conj().T
