"""Chirped Gaussian windows and the discrete Gabor transform on integer lattices.

Coefficients are inner products with time-frequency shifted windows,

    V_g f(x, xi) = sum_n f(n) conj(g((n - x) mod N)) exp(-2j pi xi n / N),

evaluated with one length-N FFT per distinct time shift ``x``. Pass
``conjugate=False`` to drop the conjugate on ``g`` (the phase of chirped-window
coefficients changes, magnitudes of real-window coefficients do not).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

if TYPE_CHECKING:
    from gaborfit.lattice import QuantizedLattice

# columns per FFT batch; bounds peak memory at _CHUNK * N complex values
_CHUNK = 256


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim != 1:
            raise ValueError("signal samples must be one-dimensional")
        if x.size < 2:
            raise ValueError(f"signal needs at least 2 samples, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal samples must be finite")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples) or not np.any(self.samples.imag)

    def scaled(self, c) -> "Signal":
        return Signal(c * self.samples, self.sample_rate)


@dataclass(frozen=True)
class WindowParams:
    sigma: float
    s: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and np.isfinite(self.s)):
            raise ValueError(f"window parameters must be finite, got {self}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "s", float(self.s))


@dataclass(frozen=True)
class GaborWindow:
    params: WindowParams
    samples: np.ndarray

    @property
    def n(self) -> int:
        return self.samples.size


def centered_time(n: int) -> np.ndarray:
    """Signed time of each index: 0..ceil(n/2)-1 then -floor(n/2)..-1."""
    i = np.arange(n)
    return np.where(i < (n + 1) // 2, i, i - n).astype(float)


def _window_samples(sigma, s, n: int) -> np.ndarray:
    # sigma, s may be arrays of shape (K, 1) to build K windows at once
    t = centered_time(n)
    sigma = np.asarray(sigma, dtype=float)
    s = np.asarray(s, dtype=float)
    amp = (2.0 / (n * sigma)) ** 0.25 * np.exp(-np.pi * t**2 / (n * sigma))
    g = amp * np.exp(1j * np.pi * s * t**2 * (n + 1) / n**2)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / norm


def synth_window(params: WindowParams, n: int) -> GaborWindow:
    """Unit-norm chirped Gaussian of length ``n`` centred on index 0.

    ``sigma`` is the time spread relative to the balanced Gaussian
    exp(-pi t^2 / n) (``sigma=1``); ``s`` is the chirp rate, a window with
    rate ``s`` sweeps ``s`` cycles/sample of frequency across ``n`` samples.
    """
    if n < 2:
        raise ValueError(f"window length must be >= 2, got {n}")
    if not isinstance(params, WindowParams):
        params = WindowParams(*params)
    return GaborWindow(params, _window_samples(params.sigma, params.s, n))


@dataclass(frozen=True)
class TFCoefficients:
    """DGT values aligned with ``lattice.points``.

    When the lattice has column layout, ``matrix`` exposes the values as a
    (time column x frequency row) array with rows sorted by frequency index.
    """

    lattice: "QuantizedLattice"
    values: np.ndarray
    sample_rate: float = 1.0
    real_input: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def points(self) -> np.ndarray:
        return self.lattice.points

    @property
    def is_columnar(self) -> bool:
        return self.lattice.freq_index is not None

    @property
    def matrix(self) -> np.ndarray:
        if not self.is_columnar:
            raise ValueError("coefficients are not in column layout")
        return self.values.reshape(self.lattice.freq_index.shape)

    @property
    def times(self) -> np.ndarray:
        return self.lattice.time_shifts / self.sample_rate


def _fft_columns(f: np.ndarray, windows: np.ndarray, shifts: np.ndarray,
                 conjugate: bool) -> np.ndarray:
    n = f.size
    if windows.ndim == 1:
        # row k is the window circularly shifted by shifts[k]
        w = sliding_window_view(np.concatenate([windows, windows]), n)[n - shifts]
    else:
        idx = (np.arange(n)[None, :] - shifts[:, None]) % n
        w = np.take_along_axis(windows, idx, axis=1)
    if conjugate:
        np.conjugate(w, out=w)
    w *= f[None, :]
    return np.fft.fft(w, axis=1)


def _transform(f: np.ndarray, lattice, window_for_column, conjugate: bool) -> np.ndarray:
    # lattice points are grouped by column in ascending time-shift order
    shifts = lattice.time_shifts
    starts = lattice.column_starts
    xi = lattice.points[:, 1]
    col = lattice.column_of_point
    values = np.empty(lattice.size, dtype=complex)
    for c0 in range(0, shifts.size, _CHUNK):
        c1 = min(c0 + _CHUNK, shifts.size)
        spec = _fft_columns(f, window_for_column(c0, c1), shifts[c0:c1], conjugate)
        sl = slice(starts[c0], starts[c1])
        if lattice.freq_index is not None and lattice.freq_index.shape[1] == f.size:
            values[sl] = spec.ravel()
        elif lattice.freq_index is not None:
            values[sl] = np.take_along_axis(spec, lattice.freq_index[c0:c1], axis=1).ravel()
        else:
            values[sl] = spec[col[sl] - c0, xi[sl]]
    return values


def _check_lattice(n: int, lattice) -> None:
    if lattice.n != n:
        raise ValueError(f"lattice is for N={lattice.n}, signal has N={n}")
    pts = lattice.points
    if pts.size and (pts.min() < 0 or pts.max() >= n):
        raise ValueError("lattice points must lie in Z_N x Z_N")


def dgt(f: Signal, g: GaborWindow, lattice: "QuantizedLattice",
        conjugate: bool = True) -> TFCoefficients:
    """Gabor coefficients of ``f`` against ``g`` at every lattice point."""
    if f.n != g.n:
        raise ValueError(f"signal length {f.n} != window length {g.n}")
    _check_lattice(f.n, lattice)
    values = _transform(f.samples.astype(complex), lattice, lambda c0, c1: g.samples, conjugate)
    return TFCoefficients(lattice, values, f.sample_rate, f.is_real, {"window": g.params})


def ambiguity(g: GaborWindow, lattice: "QuantizedLattice") -> TFCoefficients:
    """The window analysed by itself, ``dgt(g, g)``."""
    return dgt(Signal(g.samples), g, lattice)


@dataclass(frozen=True)
class FramewiseWindowTrack:
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise ValueError("window track is empty")

    def __len__(self):
        return len(self.params)

    def __getitem__(self, k) -> WindowParams:
        return self.params[k]

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.params])

    @property
    def chirps(self) -> np.ndarray:
        return np.array([p.s for p in self.params])

    @classmethod
    def constant(cls, params: WindowParams, frames: int) -> "FramewiseWindowTrack":
        return cls((params,) * frames)


def nsdgt(f: Signal, track: FramewiseWindowTrack, lattice: "QuantizedLattice",
          conjugate: bool = True) -> TFCoefficients:
    """Non-stationary DGT: column ``k`` uses the window ``track[k]``."""
    _check_lattice(f.n, lattice)
    if len(track) != lattice.time_shifts.size:
        raise ValueError(
            f"track has {len(track)} frames, lattice has {lattice.time_shifts.size} time shifts")
    sig = track.sigmas[:, None]
    chirp = track.chirps[:, None]

    def windows(c0, c1):
        return _window_samples(sig[c0:c1], chirp[c0:c1], f.n)

    values = _transform(f.samples.astype(complex), lattice, windows, conjugate)
    return TFCoefficients(lattice, values, f.sample_rate, f.is_real, {"track": track})


def column_concentration(coeffs: TFCoefficients, p: float = 2.5,
                         one_sided: Optional[bool] = None) -> np.ndarray:
    """Per-column ratio ||c||_p / ||c||_2; larger means sparser columns.

    For real input only frequency indices in [0, N/2] count by default, as in
    the window objective: the mirrored half carries the conjugate chirp.
    """
    m = np.abs(coeffs.matrix)
    one_sided = coeffs.real_input if one_sided is None else one_sided
    if one_sided:
        m = np.where(coeffs.lattice.freq_index <= coeffs.n // 2, m, 0.0)
    l2 = np.linalg.norm(m, axis=1)
    lp = np.sum(m**p, axis=1) ** (1.0 / p)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(l2 > 0, lp / l2, 0.0)


def as_signal(x, sample_rate: float = 1.0) -> Signal:
    return x if isinstance(x, Signal) else Signal(np.asarray(x), sample_rate)


__all__: Sequence[str] = [
    "Signal", "WindowParams", "GaborWindow", "TFCoefficients", "FramewiseWindowTrack",
    "synth_window", "dgt", "ambiguity", "nsdgt", "column_concentration", "centered_time",
]
