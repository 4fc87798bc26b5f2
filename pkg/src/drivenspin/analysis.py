"""Post-processing: FFT spectra, decay fitting, peak/splitting measurement,
and parameter-sweep aggregation into contour-ready grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .dynamics import TimeSeries

__all__ = [
    "Spectrum",
    "SweepGrid",
    "FitFailure",
    "fft_spectrum",
    "fit_exp_decay",
    "measure_splitting",
    "sweep",
]

_WINDOWS = {
    "hann": np.hanning,
    "rectangular": np.ones,
}


class FitFailure(RuntimeError):
    """Fit did not converge; `.best` holds the best-so-far (T, params, residual)."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class _RowRunner:
    # Module-level so process pools can pickle it (a closure could not be).
    def __init__(self, scenario: Callable[[float], "TimeSeries"]):
        self.scenario = scenario

    def __call__(self, value: float):
        try:
            return self.scenario(value), None
        except Exception as exc:  # noqa: BLE001 -- per-row capture is the contract
            return None, "%s: %s" % (type(exc).__name__, exc)


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum of a uniformly sampled trace."""

    freq: np.ndarray  # MHz, 0 .. Nyquist
    amplitude: np.ndarray  # >= 0
    window: str
    zero_pad_factor: int
    n_fft: int  # padded length backing the rfft (for energy bookkeeping)

    @property
    def df(self) -> float:
        return float(self.freq[1] - self.freq[0])

    def energy(self) -> float:
        """Parseval energy: equals sum(windowed_signal**2) of the input."""
        a2 = self.amplitude**2
        total = a2[0] + 2.0 * a2[1:].sum()
        if self.n_fft % 2 == 0:
            total -= a2[-1]  # unpaired Nyquist bin
        return float(total / self.n_fft)


@dataclass(frozen=True)
class SweepGrid:
    """Stacked per-value rows over a shared time or frequency axis."""

    param: str
    param_values: np.ndarray
    axis: np.ndarray
    values: np.ndarray  # shape (len(param_values), len(axis)); NaN rows = failed runs
    row_errors: Tuple[Tuple[int, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.values.shape != (len(self.param_values), len(self.axis)):
            raise ValueError("grid shape inconsistent with its axes")


def fft_spectrum(
    series: TimeSeries,
    component: str = "sz",
    window: str = "hann",
    zero_pad_factor: int = 4,
) -> Spectrum:
    """Mean-subtracted, windowed, zero-padded magnitude spectrum.

    `component` selects sx, sy or sz.  Hann window by default; "rectangular"
    is available for comparison.  The TimeSeries type already guarantees a
    uniform grid; at least 16 samples are required here.
    """
    if component not in ("sx", "sy", "sz"):
        raise ValueError("component must be sx, sy or sz")
    if window not in _WINDOWS:
        raise ValueError("window must be one of %s" % sorted(_WINDOWS))
    if zero_pad_factor < 1:
        raise ValueError("zero_pad_factor must be >= 1")
    y = getattr(series, component)
    n = y.size
    if n < 16:
        raise ValueError("need at least 16 samples for a spectrum (got %d)" % n)
    dt = float(series.t[1] - series.t[0])
    yw = (y - y.mean()) * _WINDOWS[window](n)
    n_fft = n * zero_pad_factor
    amp = np.abs(np.fft.rfft(yw, n_fft))
    freq = np.fft.rfftfreq(n_fft, dt)
    return Spectrum(freq=freq, amplitude=amp, window=window, zero_pad_factor=zero_pad_factor, n_fft=n_fft)


def _envelope_T_init(t: np.ndarray, y: np.ndarray) -> float:
    # log-linear regression through local maxima of |y|; scale-invariant
    mags = np.abs(y)
    idx = [i for i in range(1, len(y) - 1) if mags[i] >= mags[i - 1] and mags[i] >= mags[i + 1]]
    idx = [i for i in idx if mags[i] > 1e-12 * mags.max()]
    if len(idx) >= 3:
        slope = np.polyfit(t[idx], np.log(mags[idx]), 1)[0]
        if slope < -1e-12:
            return float(-1.0 / slope)
    return float(t[-1] - t[0])


def fit_exp_decay(t, y, model: str = "plain_exp", max_nfev: Optional[int] = None):
    """Least-squares decay fit; returns (T_decay, params, residual_norm).

    model="plain_exp":  A e^{-t/T} + c        params (A, T, c)
    model="damped_cos": A e^{-t/T} cos(2 pi F t + psi) + c
                                              params (A, T, F, psi, c)

    Initialization is deterministic: T from a log-linear regression of the
    envelope maxima, F from the FFT peak (and the fitted F is constrained
    to +-20% of it, which keeps the oscillation from collapsing onto a
    slow baseline drift).  Non-convergence within max_nfev evaluations
    raises FitFailure carrying the best parameters found.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-d arrays of equal length")
    if t.size < 8:
        raise ValueError("need at least 8 points to fit")
    if np.ptp(y) == 0:
        raise ValueError("y is constant; nothing to fit")
    scale = np.ptp(y)
    span = t[-1] - t[0]

    if model == "plain_exp":
        c0 = float(y[-1])
        A0 = float(y[0] - c0) or scale
        T0 = _envelope_T_init(t, y - c0)
        p0 = np.array([A0, T0, c0])
        lo = [-10 * scale + min(0.0, A0), 1e-3 * span, y.min() - scale]
        hi = [10 * scale + max(0.0, A0), 1e4 * span, y.max() + scale]

        def resid(p):
            return p[0] * np.exp(-t / p[1]) + p[2] - y

        names = ("A", "T", "c")
    elif model == "damped_cos":
        c0 = float(y.mean())
        yc = y - c0
        n4 = 4 * t.size
        freqs = np.fft.rfftfreq(n4, t[1] - t[0])
        amps = np.abs(np.fft.rfft(yc * np.hanning(t.size), n4))
        F0 = float(freqs[np.argmax(amps[1:]) + 1])
        if F0 <= 0:
            raise ValueError("no oscillation found to initialize damped_cos")
        zrot = np.exp(-2j * math.pi * F0 * t)
        psi0 = float(np.angle(np.sum(yc * zrot)))
        T0 = _envelope_T_init(t, yc)
        A0 = float(np.abs(yc).max())
        p0 = np.array([A0, T0, F0, psi0, c0])
        lo = [0.0, 1e-3 * span, 0.8 * F0, -2 * math.pi, y.min() - scale]
        hi = [10 * scale, 1e4 * span, 1.2 * F0, 2 * math.pi, y.max() + scale]

        def resid(p):
            return p[0] * np.exp(-t / p[1]) * np.cos(2 * math.pi * p[2] * t + p[3]) + p[4] - y

        names = ("A", "T", "F", "psi", "c")
    else:
        raise ValueError("model must be 'plain_exp' or 'damped_cos'")

    p0 = np.clip(p0, lo, hi)
    if max_nfev is None:
        max_nfev = 2000 * len(p0)
    sol = least_squares(resid, p0, bounds=(lo, hi), max_nfev=max_nfev, method="trf")
    params: Dict[str, float] = dict(zip(names, (float(v) for v in sol.x)))
    T = params["T"]
    residual = float(np.linalg.norm(sol.fun))
    if not sol.success or not np.isfinite(sol.x).all():
        raise FitFailure(
            "decay fit did not converge (status %d: %s)" % (sol.status, sol.message),
            best=(T, params, residual),
        )
    return T, params, residual


def measure_splitting(
    spec: Spectrum,
    around: float,
    prominence: float = 0.05,
    band_halfwidth: Optional[float] = None,
):
    """Count spectral peaks near `around` and measure their splitting.

    Local maxima within |f - around| <= band_halfwidth (default
    0.25*around) whose topographic prominence exceeds
    `prominence`*max(amplitude) are counted.  Returns (peak_count,
    splitting, intensities): splitting is the frequency separation of the
    two most intense peaks (0.0 for fewer than two), intensities are the
    peak amplitudes in ascending frequency order.
    """
    if spec.amplitude.size == 0:
        raise ValueError("empty spectrum")
    if band_halfwidth is None:
        band_halfwidth = 0.25 * abs(around)
    if band_halfwidth <= 0:
        raise ValueError("band_halfwidth must be positive")
    sel = np.abs(spec.freq - around) <= band_halfwidth
    if not np.any(sel):
        return 0, 0.0, np.array([])
    f = spec.freq[sel]
    a = spec.amplitude[sel]
    idx, props = find_peaks(a, prominence=prominence * spec.amplitude.max())
    if idx.size == 0:
        return 0, 0.0, np.array([])
    order = np.argsort(a[idx])[::-1]
    if idx.size >= 2:
        i1, i2 = idx[order[0]], idx[order[1]]
        splitting = float(abs(f[i1] - f[i2]))
    else:
        splitting = 0.0
    return int(idx.size), splitting, a[idx]


def sweep(
    param: str,
    values,
    scenario: Callable[[float], TimeSeries],
    component: str = "sz",
    normalize_fft: bool = False,
    map_fn: Callable = map,
):
    """Run `scenario` per parameter value; stack traces and their spectra.

    `scenario` maps one parameter value to a TimeSeries; rows that raise
    are recorded in row_errors and left as NaN, and the sweep continues.
    Returns (time_grid, fft_grid) SweepGrids sharing param_values; the FFT
    grid is normalized to its global maximum when `normalize_fft`.
    `map_fn` lets callers substitute a parallel map; results keep input
    order either way.
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("values must be nonempty")

    results = list(map_fn(_RowRunner(scenario), values))
    t_axis = None
    spectra = []
    errors = []
    for i, (series, err) in enumerate(results):
        if err is not None:
            errors.append((i, err))
            spectra.append(None)
            continue
        if t_axis is None:
            t_axis = series.t
        elif series.t.shape != t_axis.shape or not np.allclose(series.t, t_axis):
            errors.append((i, "ValueError: row time grid differs from the first row"))
            results[i] = (None, "grid mismatch")
            spectra.append(None)
            continue
        spectra.append(fft_spectrum(series, component))
    if t_axis is None:
        raise RuntimeError("every sweep row failed: %s" % (errors,))

    f_axis = next(s for s in spectra if s is not None).freq
    tmat = np.full((values.size, t_axis.size), np.nan)
    fmat = np.full((values.size, f_axis.size), np.nan)
    for i, ((series, err), spec) in enumerate(zip(results, spectra)):
        if spec is None:
            continue
        tmat[i] = getattr(series, component)
        fmat[i] = spec.amplitude
    if normalize_fft:
        peak = np.nanmax(fmat)
        if peak > 0:
            fmat = fmat / peak
    errs = tuple(errors)
    return (
        SweepGrid(param=param, param_values=values, axis=t_axis, values=tmat, row_errors=errs),
        SweepGrid(param=param, param_values=values, axis=f_axis, values=fmat, row_errors=errs),
    )
