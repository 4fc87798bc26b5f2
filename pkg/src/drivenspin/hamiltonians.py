"""Material spin Hamiltonians, resonance-field search, effective-TLS reduction.

Three materials are built in: the substitutional nitrogen (P1) center in
diamond (S=1/2 coupled to the 14N nuclear spin), Mn2+ in MgO (S=5/2, I=5/2,
isotropic hyperfine plus a cubic crystal-field term), and Gd3+ in CaWO4
(S=7/2 with tetragonal Stevens terms).  All Hamiltonians are in MHz (units
of h); static fields in mT.

The electron Zeeman term is g * (mu_B/h) * B0 * (n . S) with the field
direction n given in the crystal frame; hyperfine and crystal-field terms
are always expressed in the crystal frame, so rotating the field rather
than the crystal covers every orientation used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .spinops import hermitian_eig, spin_matrices, stevens_operator

__all__ = [
    "MU_B_OVER_H_MHZ_PER_MT",
    "SpinSystem",
    "EffectiveTLS",
    "ForbiddenTransitionError",
    "material",
    "material_names",
    "build_hamiltonian",
    "resonance_fields",
    "reduce_to_tls",
]

# Bohr magneton over Planck constant: 13.9962449 GHz/T = 13.9962449 MHz/mT
MU_B_OVER_H_MHZ_PER_MT = 13.9962449


class ForbiddenTransitionError(ValueError):
    """Raised when a requested level pair has (numerically) zero drive matrix element."""


@dataclass(frozen=True)
class SpinSystem:
    """Static spin Hamiltonian description of one material.

    hyperfine: None, an isotropic constant A (MHz), or an axial pair
    (A_perp, A_par) in MHz with symmetry axis along crystal z.
    hyperfine_sign: +1 or -1, the sign in front of the printed hyperfine
    term (conventions differ between materials in the source literature).
    cubic_a: the cubic crystal-field constant `a` (MHz) entering
    (a/6)[Sx^4+Sy^4+Sz^4 - const]; None disables the term.
    stevens: {(k, q): B_kq in MHz}.
    field_orientation: unit vector of B0 in the crystal frame.
    """

    label: str
    S: float
    g: float
    I: float = 0.0
    hyperfine: Union[None, float, Tuple[float, float]] = None
    hyperfine_sign: int = +1
    cubic_a: Optional[float] = None
    stevens: dict = field(default_factory=dict)
    field_orientation: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    linewidth_mT: float = 0.0  # half-linewidth Gamma, informational

    def __post_init__(self):
        if self.S <= 0:
            raise ValueError("S must be positive")
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.I < 0:
            raise ValueError("I must be >= 0")
        if self.hyperfine is not None:
            hf = np.atleast_1d(np.asarray(self.hyperfine, dtype=float))
            if not np.all(np.isfinite(hf)):
                raise ValueError("hyperfine entries must be finite")
        n = np.asarray(self.field_orientation, dtype=float)
        if n.shape != (3,) or not np.isfinite(n).all() or np.linalg.norm(n) < 1e-12:
            raise ValueError("field_orientation must be a nonzero 3-vector")
        object.__setattr__(self, "field_orientation", tuple(n / np.linalg.norm(n)))

    @property
    def dim(self) -> int:
        return int(round(2 * self.S + 1)) * int(round(2 * self.I + 1))


@dataclass(frozen=True)
class EffectiveTLS:
    """A level pair reduced to a driven two-level system.

    drive_scale multiplies the nominal drive amplitudes h_d and h_i: it is
    2*|<upper| S_drive |lower>|, normalized so a bare S=1/2 gives 1.
    linewidth_Gamma is the half-linewidth in mT, informational.
    """

    level_pair: Tuple[int, int]
    f_res: float
    drive_scale: float
    linewidth_Gamma: float = 0.0

    def __post_init__(self):
        if self.f_res <= 0:
            raise ValueError("f_res must be positive")
        if self.drive_scale <= 0:
            raise ValueError("drive_scale must be positive")


# ---------------------------------------------------------------------------
# material presets

def _p1() -> SpinSystem:
    # S=1/2 electron, 14N nucleus; axial hyperfine, symmetry axis along z.
    # The m_I = 0 central line is orientation-independent, so the axis
    # choice is inert for the protocols simulated here.
    return SpinSystem(
        label="P1",
        S=0.5,
        g=2.0024,
        I=1.0,
        hyperfine=(81.0, 114.0),
        hyperfine_sign=+1,
    )


def _mn_mgo(cubic_a: float) -> SpinSystem:
    return SpinSystem(
        label="MnMgO",
        S=2.5,
        g=2.0014,
        I=2.5,
        hyperfine=244.0,
        hyperfine_sign=-1,
        cubic_a=cubic_a,
        linewidth_mT=0.025,  # 2*Gamma = 0.5 G
    )


def _gd_cawo4() -> SpinSystem:
    # Tetragonal Stevens coefficients in MHz; field along the crystal
    # a-axis by default (the c-axis is the quantization axis z).
    return SpinSystem(
        label="GdCaWO4",
        S=3.5,
        g=1.991,
        stevens={(2, 0): -916.0, (4, 0): -1.14, (4, 4): -7.02, (6, 0): -5.94e-4, (6, 4): 4.77},
        field_orientation=(1.0, 0.0, 0.0),
        linewidth_mT=0.3,  # 2*Gamma = 6 G
    )


# Per-material defaults used by sequence protocols (wait times) and docs.
# t1_us is only quoted for Mn (~15 us at 40 K); the P1 and Gd relaxation
# times are much longer than the burst windows studied and are left None.
MATERIAL_INFO = {
    "P1": {"t1_us": None, "t2_us": 0.69, "tau_wait_us": 5.0, "tau_free_us": 0.3},
    "MnMgO": {"t1_us": 15.0, "t2_us": 3.0, "tau_wait_us": 6.0, "tau_free_us": 0.3},
    "GdCaWO4": {"t1_us": None, "t2_us": 4.0, "tau_wait_us": 10.0, "tau_free_us": 0.2},
}


def material_names() -> Sequence[str]:
    return ("P1", "MnMgO", "GdCaWO4")


def material(name: str, *, cubic_a: Optional[float] = None, **overrides) -> SpinSystem:
    """Construct a built-in material preset by name.

    "MnMgO" requires the cubic crystal-field constant `cubic_a` (MHz); it
    has no published default.  Keyword overrides replace any SpinSystem
    field, e.g. field_orientation for misalignment studies.
    """
    if name == "P1":
        sys = _p1()
    elif name == "MnMgO":
        if cubic_a is None:
            raise ValueError("MnMgO requires cubic_a (MHz); it has no default")
        sys = _mn_mgo(cubic_a)
    elif name == "GdCaWO4":
        sys = _gd_cawo4()
    else:
        raise ValueError(f"unknown material {name!r}; known: {', '.join(material_names())}")
    if cubic_a is not None and name != "MnMgO":
        overrides["cubic_a"] = cubic_a
    return replace(sys, **overrides) if overrides else sys


# ---------------------------------------------------------------------------
# Hamiltonian assembly

def _electron_nuclear_ops(sys: SpinSystem):
    e = spin_matrices(sys.S)
    dim_i = int(round(2 * sys.I + 1))
    if sys.I > 0:
        n = spin_matrices(sys.I)
        eyeI = np.eye(dim_i)
        S_ops = [np.kron(op, eyeI) for op in (e.Sx, e.Sy, e.Sz)]
        eyeS = np.eye(int(round(2 * sys.S + 1)))
        I_ops = [np.kron(eyeS, op) for op in (n.Sx, n.Sy, n.Sz)]
    else:
        S_ops = [e.Sx, e.Sy, e.Sz]
        I_ops = None
    return S_ops, I_ops


def build_hamiltonian(sys: SpinSystem, B0: float) -> np.ndarray:
    """Full static Hamiltonian (MHz) at field B0 (mT).

    Zeeman + hyperfine + cubic crystal field + Stevens terms.  The cubic
    term is implemented with its printed constant S(S+1)(3S^2+1)/5, which
    is proportional to the identity and therefore cannot affect any
    transition frequency (the conventional invariant uses 3S^2+3S-1; the
    difference is also identity-proportional).
    """
    if B0 < 0:
        raise ValueError("B0 must be >= 0")
    S_ops, I_ops = _electron_nuclear_ops(sys)
    n = np.asarray(sys.field_orientation)
    H = sys.g * MU_B_OVER_H_MHZ_PER_MT * B0 * (n[0] * S_ops[0] + n[1] * S_ops[1] + n[2] * S_ops[2])

    if sys.hyperfine is not None and sys.I > 0:
        sgn = float(sys.hyperfine_sign)
        if np.isscalar(sys.hyperfine):
            A = float(sys.hyperfine)
            H = H + sgn * A * sum(S_ops[i] @ I_ops[i] for i in range(3))
        else:
            A_perp, A_par = (float(a) for a in sys.hyperfine)
            H = H + sgn * (A_perp * (S_ops[0] @ I_ops[0] + S_ops[1] @ I_ops[1]) + A_par * (S_ops[2] @ I_ops[2]))

    if sys.cubic_a is not None:
        Se = spin_matrices(sys.S)
        Sq = sys.S * (sys.S + 1)
        quartic = sum(np.linalg.matrix_power(op, 4) for op in (Se.Sx, Se.Sy, Se.Sz))
        cubic = (sys.cubic_a / 6.0) * (quartic - Sq * (3 * sys.S**2 + 1) / 5.0 * np.eye(quartic.shape[0]))
        dim_i = int(round(2 * sys.I + 1))
        H = H + (np.kron(cubic, np.eye(dim_i)) if sys.I > 0 else cubic)

    if sys.stevens:
        dim_i = int(round(2 * sys.I + 1))
        for (k, q), Bkq in sys.stevens.items():
            op = stevens_operator(k, q, sys.S)
            H = H + Bkq * (np.kron(op, np.eye(dim_i)) if sys.I > 0 else op)

    return (H + H.conj().T) / 2


def _adjacent_gaps(sys: SpinSystem, B: float) -> np.ndarray:
    w, _ = hermitian_eig(build_hamiltonian(sys, B))
    return np.diff(w)


def resonance_fields(
    sys: SpinSystem,
    f0: float,
    B_range: Tuple[float, float],
    max_roots: int = 32,
    grid_points: int = 2001,
):
    """Fields where an adjacent-level splitting equals f0.

    Each adjacent gap E_{i+1}(B) - E_i(B) - f0 is bracketed by sign changes
    on a uniform B grid and polished by bisection until the relative gap
    error is <= 1e-6.  Returns a list of (B_res, (i, i+1)) sorted by field;
    an empty list when nothing matches (not an error).
    """
    if f0 <= 0:
        raise ValueError("f0 must be positive")
    B_lo, B_hi = float(B_range[0]), float(B_range[1])
    if not (B_hi > B_lo) or B_lo < 0:
        raise ValueError("B_range must be a nonempty range of nonneg fields")

    grid = np.linspace(B_lo, B_hi, grid_points)
    gaps = np.array([_adjacent_gaps(sys, B) for B in grid])  # (nB, dim-1)
    roots = []
    for j in range(gaps.shape[1]):
        gj = gaps[:, j] - f0
        sign_flip = np.nonzero(np.sign(gj[:-1]) * np.sign(gj[1:]) < 0)[0]
        for idx in sign_flip:
            a, b = grid[idx], grid[idx + 1]
            fa = gj[idx]
            for _ in range(80):
                m = (a + b) / 2
                fm = _adjacent_gaps(sys, m)[j] - f0
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
                if abs(fm) / f0 <= 1e-7:
                    break
            B_res = (a + b) / 2
            if abs(_adjacent_gaps(sys, B_res)[j] - f0) / f0 <= 1e-6:
                roots.append((B_res, (j, j + 1)))
    roots.sort(key=lambda r: r[0])
    return roots[:max_roots]


def _drive_axis(sys: SpinSystem) -> np.ndarray:
    # Microwave field is transverse to B0.  For the default z-oriented
    # field this is the crystal x-axis, preserving the bare-S=1/2
    # normalization; otherwise pick a deterministic perpendicular.
    n = np.asarray(sys.field_orientation)
    trial = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(trial, n)) > 1 - 1e-9:
        trial = np.array([0.0, 0.0, 1.0])
    d = trial - np.dot(trial, n) * n
    return d / np.linalg.norm(d)


def reduce_to_tls(sys: SpinSystem, B0: float, level_pair: Tuple[int, int]) -> EffectiveTLS:
    """Reduce an adjacent eigenlevel pair at B0 to an effective TLS.

    f_res is the level splitting; drive_scale = 2*|<u|S_drive|l>| with
    S_drive the electron spin component along the (transverse) microwave
    axis, embedded in the full electron-nuclear space.  A bare S=1/2 gives
    drive_scale = 1; the Mn2+ central transition gives 3.
    """
    lo, hi = sorted(int(i) for i in level_pair)
    if hi != lo + 1:
        raise ValueError("level_pair must be adjacent in energy ordering")
    H = build_hamiltonian(sys, B0)
    if not (0 <= lo and hi < H.shape[0]):
        raise ValueError("level_pair indices out of range")
    w, V = hermitian_eig(H)
    f_res = float(w[hi] - w[lo])

    S_ops, _ = _electron_nuclear_ops(sys)
    d = _drive_axis(sys)
    S_drive = d[0] * S_ops[0] + d[1] * S_ops[1] + d[2] * S_ops[2]
    elem = abs(V[:, hi].conj() @ (S_drive @ V[:, lo]))
    if elem < 1e-9:
        raise ForbiddenTransitionError(
            f"levels {level_pair} have vanishing drive matrix element ({elem:.2e}); transition is forbidden"
        )
    return EffectiveTLS(
        level_pair=(lo, hi),
        f_res=f_res,
        drive_scale=2.0 * float(elem),
        linewidth_Gamma=sys.linewidth_mT / 2.0,
    )
