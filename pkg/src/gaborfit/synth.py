"""Seeded test-signal generators with ground truth.

Chirp rates follow the window convention: a chirp with rate ``s`` sweeps
``s * sample_rate`` Hz over the N samples of the signal.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from gaborfit.core import Signal, WindowParams, synth_window

KINDS = ("tone", "linear_chirp", "chirped_gaussian", "two_chirp_pair",
         "square_chirp_decay", "bubble_train", "white_noise")

_DEFAULTS = {
    "tone": {"amplitude": 1.0, "freq": None, "phase": 0.0},
    "linear_chirp": {"amplitude": 1.0, "f0": None, "f1": None, "chirp_rate": None, "phase": 0.0},
    "chirped_gaussian": {"amplitude": 1.0, "sigma": 1.0, "s": 0.0, "center": 0, "freq": 0.0},
    "two_chirp_pair": {"amplitude": 1.0, "f0": None, "chirp_rate": 0.2, "spacing": None},
    "square_chirp_decay": {"amplitude": 1.0, "f0": None, "f1": None, "chirp_rate": None,
                           "start_db": 0.0, "decay_db_per_s": None},
    "bubble_train": {"amplitude": 1.0, "times": None, "freq": None, "glide": 0.1,
                     "tau": None, "jitter": 0.02},
    "white_noise": {},
}


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    n: int
    sample_rate: float = 1.0
    seed: int = 0
    noise_std: float = 0.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        extra = set(self.params) - set(_DEFAULTS[self.kind]) - {"std"}
        if extra:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(extra)}")

    def get(self, key):
        return self.params.get(key, _DEFAULTS[self.kind].get(key))

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data) -> "SynthSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(**data)


@dataclass
class GroundTruth:
    inst_freq: np.ndarray  # Hz per sample; (components, N)
    amplitude: np.ndarray  # tracked-component amplitude per sample
    component_freqs: list
    snr_db: Optional[np.ndarray] = None
    noise_std: float = 0.0

    def frame_snr_db(self, shifts) -> Optional[np.ndarray]:
        return None if self.snr_db is None else self.snr_db[np.asarray(shifts, dtype=int)]


def _nyquist_check(spec: SynthSpec, *freqs):
    for f in freqs:
        if f is not None and not (0 <= f < spec.sample_rate / 2):
            raise ValueError(f"frequency {f} Hz outside [0, {spec.sample_rate / 2}) Hz")


def _chirp_endpoints(spec: SynthSpec):
    fs = spec.sample_rate
    f0 = spec.get("f0")
    f0 = fs / 8 if f0 is None else f0
    f1, rate = spec.get("f1"), spec.get("chirp_rate")
    if f1 is None:
        f1 = f0 + (0.0 if rate is None else rate) * fs
    _nyquist_check(spec, f0, f1)
    return f0, f1


def chirp_phase(n: int, fs: float, f0: float, f1: float) -> np.ndarray:
    """Phase (radians) of a linear chirp from f0 Hz at sample 0 to f1 Hz at sample n."""
    k = np.arange(n)
    return 2 * np.pi * (f0 * k / fs + 0.5 * (f1 - f0) * k**2 / (n * fs))


def _tone(spec):
    fs, n = spec.sample_rate, spec.n
    f = spec.get("freq")
    f = fs / 8 if f is None else f
    _nyquist_check(spec, f)
    a = spec.get("amplitude")
    x = a * np.cos(2 * np.pi * f * np.arange(n) / fs + spec.get("phase"))
    return x, GroundTruth(np.full((1, n), f), np.full(n, a), [f])


def _linear_chirp(spec):
    fs, n = spec.sample_rate, spec.n
    f0, f1 = _chirp_endpoints(spec)
    a = spec.get("amplitude")
    x = a * np.cos(chirp_phase(n, fs, f0, f1) + spec.get("phase"))
    inst = f0 + (f1 - f0) * np.arange(n) / n
    return x, GroundTruth(inst[None, :], np.full(n, a), [f0, f1])


def _chirped_gaussian(spec):
    fs, n = spec.sample_rate, spec.n
    g = synth_window(WindowParams(spec.get("sigma"), spec.get("s")), n).samples
    g = np.roll(g, int(spec.get("center")))
    f = spec.get("freq")
    x = spec.get("amplitude") * g * np.exp(2j * np.pi * f * np.arange(n) / fs)
    t = np.arange(n) - int(spec.get("center"))
    t = np.where(t < -(n // 2), t + n, np.where(t >= (n + 1) // 2, t - n, t))
    inst = f + spec.get("s") * t * (n + 1) / n**2 * fs
    return x, GroundTruth(inst[None, :], np.abs(x), [f])


def _two_chirp_pair(spec):
    fs, n = spec.sample_rate, spec.n
    f0 = spec.get("f0")
    f0 = fs / 8 if f0 is None else f0
    spacing = spec.get("spacing")
    spacing = 3 * fs / n if spacing is None else spacing
    sweep = spec.get("chirp_rate") * fs
    _nyquist_check(spec, f0, f0 + sweep, f0 + spacing + sweep)
    a = spec.get("amplitude")
    k = np.arange(n)
    x = a * (np.cos(chirp_phase(n, fs, f0, f0 + sweep))
             + np.cos(chirp_phase(n, fs, f0 + spacing, f0 + spacing + sweep)))
    lo = f0 + sweep * k / n
    return x, GroundTruth(np.vstack([lo, lo + spacing]), np.full(n, a), [f0, f0 + spacing])


def _square_chirp_decay(spec):
    fs, n = spec.sample_rate, spec.n
    f0, f1 = _chirp_endpoints(spec)
    duration = n / fs
    decay = spec.get("decay_db_per_s")
    decay = 40.0 / duration if decay is None else decay
    t = np.arange(n) / fs
    env = spec.get("amplitude") * 10 ** ((spec.get("start_db") - decay * t) / 20)
    phi = chirp_phase(n, fs, f0, f1)
    top = max(f0, f1)
    x = np.zeros(n)
    h = 1
    while h * top < fs / 2:  # band-limited: odd harmonics below Nyquist only
        x += np.sin(h * phi) / h
        h += 2
    x *= 4 / np.pi
    inst = f0 + (f1 - f0) * np.arange(n) / n
    # the tracked component is the fundamental, amplitude 4/pi times the envelope
    return env * x, GroundTruth(inst[None, :], 4 / np.pi * env, [f0, f1])


def _bubble_train(spec):
    fs, n = spec.sample_rate, spec.n
    duration = n / fs
    times = spec.get("times")
    times = list(np.linspace(0.05, 0.85, 5) * duration) if times is None else times
    f = spec.get("freq")
    f = fs / 10 if f is None else f
    tau = spec.get("tau")
    tau = duration / 40 if tau is None else tau
    glide, jitter = spec.get("glide"), spec.get("jitter")
    rng = np.random.default_rng(spec.seed + 1)
    _nyquist_check(spec, f * (1 + glide + 3 * jitter))
    t = np.arange(n) / fs
    x = np.zeros(n)
    inst = np.zeros(n)
    amp = np.zeros(n)
    for t0 in sorted(times):
        fb = f * (1 + jitter * rng.standard_normal())
        dt = t - t0
        on = dt >= 0
        # frequency glides upward as the bubble shrinks: fb * (1 + glide * (1 - e^{-dt/tau}))
        phase = 2 * np.pi * fb * ((1 + glide) * dt - glide * tau * (1 - np.exp(-dt / tau)))
        env = np.where(on, np.exp(-dt / tau), 0.0)
        x += spec.get("amplitude") * env * np.sin(phase)
        inst = np.where(on, fb * (1 + glide * (1 - np.exp(-dt / tau))), inst)
        amp = np.where(on, spec.get("amplitude") * env, amp)
    return x, GroundTruth(inst[None, :], amp, [f])


def _white_noise(spec):
    n = spec.n
    return np.zeros(n), GroundTruth(np.zeros((1, n)), np.zeros(n), [])


_BUILDERS = {
    "tone": _tone,
    "linear_chirp": _linear_chirp,
    "chirped_gaussian": _chirped_gaussian,
    "two_chirp_pair": _two_chirp_pair,
    "square_chirp_decay": _square_chirp_decay,
    "bubble_train": _bubble_train,
    "white_noise": _white_noise,
}


def synthesize(spec: SynthSpec) -> tuple:
    """Samples and ground truth for ``spec``; identical seeds give identical output.

    For ``white_noise`` the noise level is ``params['std']`` (or ``noise_std``).
    Every other kind adds white Gaussian noise of std ``noise_std`` and reports
    the per-sample SNR of its tracked component, power amplitude^2 / 2 over
    the noise variance.
    """
    x, truth = _BUILDERS[spec.kind](spec)
    std = spec.params.get("std", spec.noise_std) if spec.kind == "white_noise" else spec.noise_std
    if std < 0:
        raise ValueError("noise std must be >= 0")
    if std > 0:
        rng = np.random.default_rng(spec.seed)
        x = x + std * rng.standard_normal(spec.n)
        truth.noise_std = float(std)
        with np.errstate(divide="ignore"):
            truth.snr_db = 10 * np.log10(truth.amplitude**2 / 2 / std**2)
    return Signal(x, spec.sample_rate), truth
