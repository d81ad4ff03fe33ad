"""Per-frame analyses on column-layout Gabor coefficients.

The tracker follows the largest coefficient of each frame. Resolvability
counts frames where two close components show separate maxima, and the SNR
estimator compares a calibrated peak against a robust noise floor.

For real input only the rows with frequency index in [0, N/2] are searched;
the other half mirrors them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import median_filter

from gaborfit.core import GaborWindow, Signal, TFCoefficients, WindowParams, dgt
from gaborfit.lattice import QuantizedLattice

# coefficients below this fraction of the column maximum are round-off
_REL_FLOOR = 1e-8
# noise estimates below this fraction of the squared peak count as zero
_NOISE_FLOOR = 1e-10


def _columns(coeffs: TFCoefficients, one_sided: Optional[bool]):
    if not coeffs.is_columnar:
        raise ValueError("analysis needs column-layout coefficients")
    mag = np.abs(coeffs.matrix)
    freq = coeffs.lattice.freq_index
    one_sided = coeffs.real_input if one_sided is None else one_sided
    keep = freq <= coeffs.n // 2 if one_sided else np.ones_like(freq, dtype=bool)
    return mag, freq, keep


@dataclass
class FrequencyTrack:
    times: np.ndarray
    freqs: np.ndarray  # Hz, NaN where the column is empty
    magnitudes: np.ndarray
    bins: np.ndarray  # frequency index, -1 where the column is empty

    @property
    def gaps(self) -> np.ndarray:
        return np.flatnonzero(self.bins < 0)

    def slope(self) -> float:
        """Least-squares slope of the track in Hz per second over valid frames."""
        ok = self.bins >= 0
        return float(np.polyfit(self.times[ok], self.freqs[ok], 1)[0])


def track_peak(coeffs: TFCoefficients, sample_rate: Optional[float] = None,
               one_sided: Optional[bool] = None) -> FrequencyTrack:
    """Frequency of the largest coefficient in every column (lowest bin on ties).

    All-zero columns are reported as gaps rather than raising.
    """
    fs = coeffs.sample_rate if sample_rate is None else sample_rate
    mag, freq, keep = _columns(coeffs, one_sided)
    m = np.where(keep, mag, -1.0)
    # rows are sorted by frequency, so argmax returns the lowest bin on ties
    j = np.argmax(m, axis=1)
    k = np.arange(m.shape[0])
    peak = mag[k, j]
    bins = np.where(peak > 0, freq[k, j], -1)
    hz = np.where(bins >= 0, bins * fs / coeffs.n, np.nan)
    times = coeffs.lattice.time_shifts / fs
    return FrequencyTrack(times, hz, np.where(bins >= 0, peak, 0.0), bins)


@dataclass
class ResolvabilityReport:
    peak_counts: np.ndarray
    resolved_fraction: float

    def to_json(self) -> dict:
        return {"peak_counts": self.peak_counts.tolist(),
                "resolved_fraction": self.resolved_fraction}


def local_maxima(m: np.ndarray) -> np.ndarray:
    """Boolean mask of strict local maxima along the last axis (ends compare to one side)."""
    left = np.concatenate([np.full(m.shape[:-1] + (1,), -np.inf), m[..., :-1]], axis=-1)
    right = np.concatenate([m[..., 1:], np.full(m.shape[:-1] + (1,), -np.inf)], axis=-1)
    return (m > left) & (m > right)


def resolvability(coeffs: TFCoefficients, band, sample_rate: Optional[float] = None,
                  one_sided: Optional[bool] = None) -> ResolvabilityReport:
    """Fraction of frames with at least two strict magnitude maxima in ``band``.

    ``band`` is ``(f_lo, f_hi)`` in Hz, or an array of shape (frames, 2) giving
    a band per frame (to follow a moving pair of chirps).
    """
    fs = coeffs.sample_rate if sample_rate is None else sample_rate
    mag, freq, keep = _columns(coeffs, one_sided)
    K = mag.shape[0]
    band = np.asarray(band, dtype=float)
    if band.shape == (2,):
        band = np.broadcast_to(band, (K, 2))
    if band.shape != (K, 2):
        raise ValueError(f"band must be (lo, hi) or shape ({K}, 2), got {band.shape}")
    if np.any(band[:, 1] <= band[:, 0]):
        raise ValueError("empty band")
    if np.any(band > fs / 2) or np.any(band < 0):
        raise ValueError("band must lie within [0, Nyquist]")
    hz = freq * fs / coeffs.n
    m = np.where(keep, mag, -np.inf)
    floor = _REL_FLOOR * np.max(mag, axis=1, keepdims=True)
    peaks = local_maxima(m) & (m > floor)
    inband = (hz >= band[:, :1]) & (hz <= band[:, 1:]) & keep
    if not np.all(np.any(inband, axis=1)):
        raise ValueError("band contains no lattice frequency in some frame")
    counts = np.sum(peaks & inband, axis=1)
    return ResolvabilityReport(counts, float(np.mean(counts >= 2)))


def _calibration_tone(n: int, freq_bin: float, chirp_rate: float, amplitude: float,
                      phase: float) -> np.ndarray:
    k = np.arange(n)
    t = k - n / 2
    return amplitude * np.cos(2 * np.pi * freq_bin * k / n
                              + np.pi * chirp_rate * t**2 * (n + 1) / n**2 + phase)


def _interior(K: int) -> slice:
    return slice(K // 10, K - K // 10) if K >= 10 else slice(0, K)


def peak_magnitude(window: GaborWindow, lattice: QuantizedLattice, amplitude: float = 1.0,
                   phase: float = 0.0, chirp_rate: Optional[float] = None,
                   offsets: int = 8) -> float:
    """Mean per-frame peak |coefficient| of a known sinusoid.

    The sinusoid sits at a quarter of the sampling rate and follows the
    window's own chirp rate unless ``chirp_rate`` is given (0 gives a pure
    tone). It is repeated at ``offsets`` sub-row frequency shifts so that the
    mean covers every tone position relative to the lattice rows.
    """
    n = lattice.n
    rate = window.params.s if chirp_rate is None else chirp_rate
    step = lattice.freq_step or 1.0
    peaks = []
    for d in np.arange(offsets) / offsets * step:
        x = _calibration_tone(n, n / 4 + d, rate, amplitude, phase)
        c = dgt(Signal(x), window, lattice)
        mag, _, keep = _columns(c, True)
        p = np.max(np.where(keep, mag, 0.0), axis=1)
        peaks.append(p[_interior(p.size)])
    return float(np.mean(peaks))


def calibrate_gain(window: GaborWindow, lattice: QuantizedLattice, sample_rate: float = 1.0,
                   amplitude: float = 1.0, phase: float = 0.0,
                   chirp_rate: Optional[float] = None) -> float:
    """Factor mapping a peak coefficient magnitude to sinusoid amplitude."""
    pm = peak_magnitude(window, lattice, amplitude, phase, chirp_rate)
    if not pm > 0:
        raise ValueError("degenerate window: calibration tone has no energy")
    return amplitude / pm


@dataclass
class SnrTrack:
    times: np.ndarray
    snr_db: np.ndarray
    amplitude: np.ndarray
    frame_noise: np.ndarray
    noise_power: float
    calibration_gain: float
    peak_bins: np.ndarray
    valid: np.ndarray  # window support does not wrap around the signal ends

    def to_rows(self):
        return [(float(t), float(s), float(a), bool(v)) for t, s, a, v in
                zip(self.times, self.snr_db, self.amplitude, self.valid)]


def window_extent(params: WindowParams, n: int, floor_db: float = 80.0) -> tuple:
    """Half-widths (samples, bins) where an unchirped window of ``params``
    stays above ``-floor_db`` relative to its peak."""
    c = floor_db * np.log(10) / (20 * np.pi)
    return float(np.sqrt(c * n * params.sigma)), float(np.sqrt(c * n / params.sigma))


def _local_rate(bins: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Slope of the peak track in bins per sample, median filtered over 5 frames."""
    if bins.size < 3:
        return np.zeros(bins.size)
    return median_filter(np.gradient(bins.astype(float), shifts), size=5, mode="nearest")


def estimate_snr(coeffs: TFCoefficients, gain: float, guard_bins: Optional[int] = 3,
                 harmonics: bool = True, one_sided: Optional[bool] = None) -> SnrTrack:
    """Instantaneous SNR from the per-frame peak and a robust noise floor.

    The tracked component is a real sinusoid of amplitude ``gain * peak``, so
    its power is amplitude^2 / 2; with a unit-norm window the per-coefficient
    noise power equals the noise variance per sample. Noise power is the
    median |value|^2 over rows away from the peak and its harmonics (added in
    order while at least half of the searched rows remain), divided by ln 2
    (the median of an exponential variable), then the median over valid
    frames. Rows within ``guard_bins`` of each harmonic are excluded. With
    ``guard_bins=None`` the guard around harmonic h instead covers the
    window's spectral extent plus the smear from the mismatch between h times
    the tracked chirp rate and the window chirp.
    """
    if not gain > 0:
        raise ValueError("gain must be positive")
    mag, freq, keep = _columns(coeffs, one_sided)
    K, L = mag.shape
    n = coeffs.n
    params = coeffs.meta.get("window", WindowParams(1.0, 0.0))
    t_half, f_half = window_extent(params, n)
    step = coeffs.lattice.freq_step or 1.0
    shifts = coeffs.lattice.time_shifts
    valid = (shifts >= t_half) & (shifts + t_half <= n)
    if not valid.any():
        valid = np.ones(K, dtype=bool)

    power = mag**2
    j = np.argmax(np.where(keep, mag, -1.0), axis=1)
    f0 = freq[np.arange(K), j]
    rate = _local_rate(f0, shifts)
    top = n // 2 if keep[0].sum() < L else n
    frame_noise = np.empty(K)
    for k in range(K):
        mask = keep[k].copy()
        n_rows = int(mask.sum())
        budget = n_rows // 2
        h_max = int(top / f0[k]) if harmonics and f0[k] > 0 else 1
        for h in range(1, h_max + 1):
            if guard_bins is None:
                # a chirp faster than one bin per sample would alias
                smear = min(abs(h * rate[k] - params.s), 1.0) * t_half
                guard = min(int(np.ceil((f_half + smear) / step)), n_rows // 4)
            else:
                guard = guard_bins
            trial = mask & (np.abs(freq[k] - h * f0[k]) > guard * step)
            if h > 1 and trial.sum() < budget:
                break
            mask = trial
        if mask.sum() < 8:
            raise ValueError("too few rows left for the noise estimate")
        frame_noise[k] = np.median(power[k, mask]) / np.log(2)
    peak = mag[np.arange(K), j]
    amp = gain * peak
    noise = float(np.median(frame_noise[valid]))
    with np.errstate(divide="ignore"):
        if noise <= _NOISE_FLOOR * np.max(peak) ** 2:
            snr = np.full(K, np.inf)
        else:
            snr = 10 * np.log10(amp**2 / 2 / noise)
    return SnrTrack(shifts / coeffs.sample_rate, snr, amp, frame_noise, noise, float(gain),
                    f0, valid)
