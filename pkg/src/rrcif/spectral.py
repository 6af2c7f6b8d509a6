"""Windowed spectra, power-law background subtraction, rate and noise index.

For each 32 s window (2 s shift) of a 5 Hz variation series: remove the mean,
apply a Hamming taper, zero-pad to 4096 points and take the magnitude-squared
FFT. A line is fitted to log(P) vs log(f) over 2-4 and 65-100 breaths/min
(excluding the 4-65 band of interest) and the implied power law

    P_fit = exp(k) * f**a

is subtracted to give the residual spectrum P_out. The rate estimate is the
frequency of the residual maximum within 4-65 breaths/min, and the noise
index is the positive residual peak over the positive residual sum in that
band.

Zero-padding refines peak localization (the native bin is 1.875 breaths/min)
but spreads each spectral feature over ``nfft / n_window`` interpolated bins,
which would shrink the peak-to-sum ratio by that same factor. The noise-index
denominator is therefore rescaled to the native (pre-padding) resolution so
its 0-1 range and the 0.13 default gate keep their meaning regardless of
padding; see :func:`estimate_rr`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BoundsError
from .riv import RivKind, RivSeries

WINDOW_S = 32.0
SHIFT_S = 2.0
NFFT = 4096
RR_BAND_BPM = (4.0, 65.0)
FIT_BANDS_BPM = ((2.0, 4.0), (65.0, 100.0))
MIN_FIT_BINS = 5
DEFAULT_THRESHOLD = 0.13


@dataclass(frozen=True)
class WindowGrid:
    """The sliding analysis windows covering one recording."""

    duration_s: float
    window_s: float = WINDOW_S
    shift_s: float = SHIFT_S

    @property
    def count(self) -> int:
        if self.duration_s < self.window_s:
            return 0
        return int(np.floor((self.duration_s - self.window_s) / self.shift_s + 1e-9)) + 1

    @property
    def windows(self) -> list[tuple[float, float]]:
        return [(i * self.shift_s, i * self.shift_s + self.window_s) for i in range(self.count)]


@dataclass(frozen=True)
class PowerSpectrum:
    """Raw and background-subtracted power on a breaths/min frequency grid."""

    freqs: np.ndarray
    P: np.ndarray
    n_window: int
    P_fit: np.ndarray | None = None
    P_out: np.ndarray | None = None
    a: float = float("nan")
    k: float = float("nan")
    fit_degenerate: bool = False


@dataclass(frozen=True)
class RrEstimate:
    """Per-variation, per-window rate estimate with quality gating."""

    kind: RivKind
    window_index: int
    rr: float | None
    ni: float | None
    valid: bool
    invalid_reason: str = "none"  # none | artifact | low_ni | fit_degenerate


def window_spectrum(series: RivSeries, window: tuple[float, float]) -> PowerSpectrum | None:
    """Magnitude-squared spectrum of one window, or None on an artifact skip.

    Raises :class:`BoundsError` when the window is not fully inside the series.
    """
    start, end = window
    n_win = int(round((end - start) * series.fs))
    i0 = int(np.ceil((start - series.t0) * series.fs - 1e-9))
    if i0 < 0 or i0 + n_win > series.values.size:
        raise BoundsError(f"window [{start:g}, {end:g}) s outside series extent")
    if series.artifact_mask[i0 : i0 + n_win].any():
        return None
    x = series.values[i0 : i0 + n_win]
    freqs = np.fft.rfftfreq(NFFT, d=1.0 / series.fs) * 60.0
    if np.ptp(x) == 0:
        # constant window: exactly zero power (mean subtraction would leave
        # rounding residue that the scale-free noise index could pick up)
        return PowerSpectrum(freqs=freqs, P=np.zeros(freqs.size), n_window=n_win)
    x = (x - np.mean(x)) * np.hamming(n_win)
    power = np.abs(np.fft.rfft(x, NFFT)) ** 2
    return PowerSpectrum(freqs=freqs, P=power, n_window=n_win)


def fit_power_law(spectrum: PowerSpectrum) -> PowerSpectrum:
    """Fit log(P) = a*log(f) + k over the fit bands and subtract the model.

    Only bins with positive power count toward the fit; with fewer than
    MIN_FIT_BINS usable bins (or a degenerate abscissa) the spectrum is
    flagged and returned with P_fit = 0, i.e. no subtraction.
    """
    f, P = spectrum.freqs, spectrum.P
    sel = np.zeros(f.size, dtype=bool)
    for lo, hi in FIT_BANDS_BPM:
        sel |= (f >= lo) & (f <= hi)
    sel &= P > 0
    if sel.sum() < MIN_FIT_BINS or np.ptp(np.log(f[sel])) == 0:
        zeros = np.zeros_like(P)
        return replace(spectrum, P_fit=zeros, P_out=P - zeros, fit_degenerate=True)
    logf, logp = np.log(f[sel]), np.log(P[sel])
    a, k = np.polyfit(logf, logp, 1)
    with np.errstate(divide="ignore"):
        P_fit = np.exp(k) * np.power(f, a, where=f > 0, out=np.zeros_like(f))
    return replace(spectrum, P_fit=P_fit, P_out=P - P_fit, a=float(a), k=float(k))


def estimate_rr(spectrum: PowerSpectrum) -> tuple[float, float]:
    """Rate and noise index from the residual spectrum.

    The rate is the frequency of the (unclamped) residual maximum within the
    4-65 breaths/min band. The noise index clamps negative residuals to zero
    and divides the peak by the in-band positive residual sum, rescaled to
    the native spectral resolution (sum times n_window/nfft) so a lone native
    -resolution peak scores ~1 and a uniform residual scores 1 over the band
    width in native bins; the result is clipped to [0, 1].
    """
    f, P_out = spectrum.freqs, spectrum.P_out
    if P_out is None:
        raise ValueError("call fit_power_law before estimate_rr")
    band = (f >= RR_BAND_BPM[0]) & (f <= RR_BAND_BPM[1])
    residual = P_out[band]
    peak_idx = int(np.argmax(residual))
    rr = float(f[band][peak_idx])
    nfft = 2 * (f.size - 1)
    denom = float(np.clip(residual, 0.0, None).sum()) * spectrum.n_window / nfft
    if denom <= 0.0:
        return rr, 0.0
    ni = max(residual[peak_idx], 0.0) / denom
    return rr, float(min(ni, 1.0))


def gate(estimate: tuple[float, float], t: float, kind: RivKind, window_index: int) -> RrEstimate:
    """Apply the noise-index threshold; ni >= t passes."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold t must lie in [0, 1], got {t}")
    rr, ni = estimate
    valid = ni >= t
    return RrEstimate(
        kind=kind,
        window_index=window_index,
        rr=rr,
        ni=ni,
        valid=valid,
        invalid_reason="none" if valid else "low_ni",
    )


def artifact_estimate(kind: RivKind, window_index: int) -> RrEstimate:
    """The placeholder estimate for an artifact-skipped window."""
    return RrEstimate(kind=kind, window_index=window_index, rr=None, ni=None, valid=False, invalid_reason="artifact")
