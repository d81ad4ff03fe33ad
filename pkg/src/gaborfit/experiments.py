"""Reusable experiment pipelines behind scripts/ and the acceptance suite.

Each ``run_*`` function is deterministic given its config and returns a
result object with ``to_json``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from gaborfit.analysis import calibrate_gain, estimate_snr, resolvability, track_peak
from gaborfit.core import Signal, WindowParams, column_concentration, dgt, nsdgt, synth_window
from gaborfit.lattice import (comparison_lattices, frame_condition, optimal_lattice, quantize,
                              rectangular_lattice)
from gaborfit.optimize import (ObjectiveConfig, _Recorder, optimize_chirped, optimize_real,
                               optimize_segmented)
from gaborfit.synth import SynthSpec, synthesize


# ---------------------------------------------------------------- stability

@dataclass
class StabilityConfig:
    n: int = 144
    redundancy: float = 4.0
    sigma: float = 1.0
    s: float = 0.0
    skew: int = 4


@dataclass
class StabilityResult:
    conditions: dict
    redundancies: dict

    @property
    def ordered(self) -> bool:
        c = self.conditions
        skewed = min(c[k] for k in c if k.endswith("x4"))
        return c["optimal"] < skewed and c["optimal"] <= c["square"] <= skewed

    def to_json(self):
        return {"conditions": self.conditions, "redundancies": self.redundancies,
                "ordered": self.ordered}


def run_stability(cfg: StabilityConfig = StabilityConfig()) -> StabilityResult:
    """Frame condition of the matched window on its optimal lattice versus
    rectangular lattices of equal redundancy (square and skewed)."""
    p = WindowParams(cfg.sigma, cfg.s)
    g = synth_window(p, cfg.n)
    specs = {"optimal": optimal_lattice(p, cfg.n, cfg.redundancy)}
    specs.update(comparison_lattices(cfg.n, cfg.redundancy, skews=(1, cfg.skew)))
    conds, reds = {}, {}
    for name, spec in specs.items():
        q = quantize(spec)
        conds[name] = frame_condition(g, q, max_n=max(cfg.n, 1))
        reds[name] = q.realized_redundancy
    return StabilityResult(conds, reds)


# ----------------------------------------------------------- optimizer fidelity

@dataclass
class FidelityConfig:
    n: int = 512
    sigma0: float = 0.5
    s0: float = 0.3
    lattice: tuple = (8, 8)
    oracle_grid: tuple = (200, 200)
    oracle_real: int = 2000


@dataclass
class FidelityResult:
    chirped: WindowParams
    chirped_oracle: WindowParams
    real: WindowParams
    real_oracle: WindowParams
    evaluations: int

    def to_json(self):
        return {k: (asdict(v) if isinstance(v, WindowParams) else v)
                for k, v in self.__dict__.items()}


def dense_oracle(f: Signal, cfg: ObjectiveConfig, n_sigma: int, n_s: int) -> WindowParams:
    """Argmax of the objective over a dense log(sigma) x s grid."""
    rec = _Recorder(f, cfg)
    sig = np.exp(np.linspace(*np.log(cfg.sigma_range), n_sigma))
    chirps = np.linspace(*cfg.s_range, n_s) if n_s > 1 else np.zeros(1)
    for sg in sig:
        for s in chirps:
            rec(float(sg), float(s))
    return rec.best().params


def run_fidelity(cfg: FidelityConfig = FidelityConfig()) -> FidelityResult:
    spec = SynthSpec("chirped_gaussian", cfg.n, params={"sigma": cfg.sigma0, "s": cfg.s0})
    f, _ = synthesize(spec)
    ocfg = ObjectiveConfig(quantize(rectangular_lattice(*cfg.lattice, cfg.n)))
    rc, rr = optimize_chirped(f, ocfg), optimize_real(f, ocfg)
    oc = dense_oracle(f, ocfg, *cfg.oracle_grid)
    orr = dense_oracle(f, ocfg, cfg.oracle_real, 1)
    return FidelityResult(rc.params, oc, rr.params, orr, rc.n_evals + rr.n_evals)


# ------------------------------------------------------------------ resolution

@dataclass
class ResolutionConfig:
    n: int = 1024
    chirp_rate: float = 0.2
    spacing_bins: float = 3.0
    f0: float = 0.125
    opt_lattice: tuple = (16, 8)
    analysis_lattice: tuple = (32, 1)
    band_bins: float = 6.0


@dataclass
class ResolutionResult:
    chirped: WindowParams
    real: WindowParams
    chirped_fraction: float
    real_fraction: float

    def to_json(self):
        return {"chirped": asdict(self.chirped), "real": asdict(self.real),
                "chirped_fraction": self.chirped_fraction, "real_fraction": self.real_fraction}


def run_resolution(cfg: ResolutionConfig = ResolutionConfig()) -> ResolutionResult:
    """Two close parallel chirps: fraction of frames showing two peaks."""
    n = cfg.n
    spec = SynthSpec("two_chirp_pair", n, params={
        "f0": cfg.f0, "chirp_rate": cfg.chirp_rate, "spacing": cfg.spacing_bins / n})
    f, truth = synthesize(spec)
    ocfg = ObjectiveConfig(quantize(rectangular_lattice(*cfg.opt_lattice, n)))
    rc, rr = optimize_chirped(f, ocfg), optimize_real(f, ocfg)
    lat = quantize(rectangular_lattice(*cfg.analysis_lattice, n))
    mid = truth.inst_freq.mean(axis=0)[lat.time_shifts]
    half = cfg.band_bins / n
    band = np.column_stack([mid - half, mid + half])
    frac = [resolvability(dgt(f, synth_window(r.params, n), lat), band).resolved_fraction
            for r in (rc, rr)]
    return ResolutionResult(rc.params, rr.params, *frac)


# -------------------------------------------------------------------- tracking

@dataclass
class TrackingConfig:
    n: int = 512
    tone_bin: int = 40
    f0: float = 0.1
    f1: float = 0.3
    lattice: tuple = (16, 1)
    window: WindowParams = WindowParams(1.0, 0.0)


@dataclass
class TrackingResult:
    tone_bin_errors: np.ndarray
    chirp_slope: float  # bins per frame
    chirp_slope_true: float

    def to_json(self):
        return {"tone_max_bin_error": int(np.max(np.abs(self.tone_bin_errors))),
                "chirp_slope": self.chirp_slope, "chirp_slope_true": self.chirp_slope_true}


def run_tracking(cfg: TrackingConfig = TrackingConfig()) -> TrackingResult:
    n = cfg.n
    lat = quantize(rectangular_lattice(*cfg.lattice, n))
    g = synth_window(cfg.window, n)
    tone, _ = synthesize(SynthSpec("tone", n, params={"freq": cfg.tone_bin / n}))
    tr = track_peak(dgt(tone, g, lat))
    chirp, _ = synthesize(SynthSpec("linear_chirp", n, params={"f0": cfg.f0, "f1": cfg.f1}))
    g = synth_window(WindowParams(cfg.window.sigma, cfg.f1 - cfg.f0), n)
    tc = track_peak(dgt(chirp, g, lat))
    frames = np.arange(tc.bins.size)
    inner = slice(frames.size // 8, frames.size - frames.size // 8)  # circular wrap at the ends
    slope = float(np.polyfit(frames[inner], tc.bins[inner], 1)[0])
    true = (cfg.f1 - cfg.f0) * lat.time_step
    return TrackingResult(tr.bins - cfg.tone_bin, slope, true)


# ------------------------------------------------------------------------- SNR

@dataclass
class SnrConfig:
    n: int = 4096
    f0: float = 0.04
    f1: float = 0.16
    start_db: float = 60.0  # true SNR at the first sample
    end_db: float = -20.0
    eval_range: tuple = (0.0, 40.0)
    seeds: tuple = (0, 1, 2, 3, 4)
    opt_lattice: tuple = (8, 8)
    analysis_lattice: tuple = (32, 1)
    sigma_range: tuple = (1.0, None)  # None: N / 8
    grid: tuple = (16, 13)
    mismatch: float = 8.0


@dataclass
class SnrResult:
    errors: dict  # window name -> per-seed mean absolute error (dB)
    frames: dict
    params: dict = field(default_factory=dict)

    def mean_error(self, name: str) -> float:
        return float(np.mean(self.errors[name]))

    def to_json(self):
        return {"mean_abs_error_db": {k: self.mean_error(k) for k in self.errors},
                "per_seed": self.errors, "frames": self.frames,
                "params": {k: [asdict(p) for p in v] for k, v in self.params.items()}}


def snr_signal(cfg: SnrConfig, seed: int):
    """Decaying square chirp plus white noise; the true per-sample SNR falls
    linearly in dB from ``start_db`` to ``end_db``."""
    amp = 4 / np.pi  # fundamental of a unit square wave
    std = amp / np.sqrt(2) / 10 ** (cfg.start_db / 20)
    spec = SynthSpec("square_chirp_decay", cfg.n, seed=seed, noise_std=std, params={
        "f0": cfg.f0, "f1": cfg.f1, "decay_db_per_s": (cfg.start_db - cfg.end_db) / cfg.n})
    return synthesize(spec)


def run_snr(cfg: SnrConfig = SnrConfig()) -> SnrResult:
    """Calibrated SNR error per window, averaged over noise seeds.

    The optimal real window with sigma scaled by ``mismatch`` is the
    deliberately poor reference. Frames count when the window support does
    not wrap around the signal ends and the true SNR lies in ``eval_range``.
    """
    n = cfg.n
    ref = quantize(rectangular_lattice(*cfg.opt_lattice, n))
    lat = quantize(rectangular_lattice(*cfg.analysis_lattice, n))
    hi = cfg.sigma_range[1] or n / 8
    ocfg = ObjectiveConfig(ref, sigma_range=(cfg.sigma_range[0], hi), grid=cfg.grid)
    errors = {"chirped": [], "real": [], "mismatched": []}
    frames = {k: [] for k in errors}
    params = {k: [] for k in errors}
    for seed in cfg.seeds:
        f, truth = snr_signal(cfg, seed)
        pc = optimize_chirped(f, ocfg).params
        pr = optimize_real(f, ocfg).params
        windows = {"chirped": pc, "real": pr,
                   "mismatched": WindowParams(pr.sigma * cfg.mismatch, 0.0)}
        true_db = truth.frame_snr_db(lat.time_shifts)
        for name, p in windows.items():
            g = synth_window(p, n)
            est = estimate_snr(dgt(f, g, lat), calibrate_gain(g, lat))
            sel = est.valid & (true_db >= cfg.eval_range[0]) & (true_db <= cfg.eval_range[1])
            errors[name].append(float(np.mean(np.abs(est.snr_db[sel] - true_db[sel]))))
            frames[name].append(int(sel.sum()))
            params[name].append(p)
    return SnrResult(errors, frames, params)


# ------------------------------------------------------------------- segmented

@dataclass
class SegmentedConfig:
    n: int = 1024
    sigmas: tuple = (20.0, 20.0)
    chirps: tuple = (-0.2, 0.2)
    freq: float = 0.25
    lattice: tuple = (16, 2)
    grid: tuple = (16, 17)


@dataclass
class SegmentedResult:
    fraction: float
    per_segment: list
    global_chirped: WindowParams
    global_real: WindowParams
    anchors_exact: bool

    def to_json(self):
        return {"fraction": self.fraction,
                "per_segment": [asdict(p) for p in self.per_segment],
                "global_chirped": asdict(self.global_chirped),
                "global_real": asdict(self.global_real),
                "anchors_exact": self.anchors_exact}


def two_regime_signal(cfg: SegmentedConfig) -> Signal:
    """Real sum of two chirped Gaussian atoms, one centred in each half."""
    n = cfg.n
    x = np.zeros(n, dtype=complex)
    for sigma, s, centre in zip(cfg.sigmas, cfg.chirps, (n // 4, 3 * n // 4)):
        spec = SynthSpec("chirped_gaussian", n, params={
            "sigma": sigma, "s": s, "center": centre, "freq": cfg.freq})
        x += synthesize(spec)[0].samples
    return Signal(x.real)


def run_segmented(cfg: SegmentedConfig = SegmentedConfig()) -> SegmentedResult:
    n = cfg.n
    f = two_regime_signal(cfg)
    lat = quantize(rectangular_lattice(*cfg.lattice, n))
    ocfg = ObjectiveConfig(lat, grid=cfg.grid)
    rc, rr = optimize_chirped(f, ocfg), optimize_real(f, ocfg)
    plan = optimize_segmented(f, [0, n // 2, n], ocfg)
    cs = column_concentration(nsdgt(f, plan.per_frame, lat))
    cc = column_concentration(dgt(f, synth_window(rc.params, n), lat))
    cr = column_concentration(dgt(f, synth_window(rr.params, n), lat))
    exact = all(plan.per_frame[k] == r.params for k, r in zip(plan.middle_frames, plan.per_segment))
    return SegmentedResult(float(np.mean((cs > cc) & (cs > cr))),
                           [r.params for r in plan.per_segment], rc.params, rr.params, exact)
