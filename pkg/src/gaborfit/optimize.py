"""Window selection by maximizing the l_p concentration of Gabor coefficients.

The chirped search scans a log(sigma) x s grid and refines the best cell with
Nelder-Mead; the real search scans log(sigma) and refines with golden
section. Segmented mode optimizes each user-delimited part separately and
interpolates the parameters across lattice frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from gaborfit.core import FramewiseWindowTrack, Signal, WindowParams, dgt, synth_window
from gaborfit.lattice import QuantizedLattice

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ObjectiveConfig:
    lattice: QuantizedLattice
    p: float = 2.5
    sigma_range: Optional[tuple] = None
    s_range: tuple = (-1.0, 1.0)
    grid: tuple = (24, 17)
    refine_tol: float = 1e-3
    max_evals: int = 400
    # None: sum over frequencies in [0, N/2] only when the signal is real
    one_sided: Optional[bool] = None

    def __post_init__(self):
        if not self.p > 2:
            raise ValueError(f"p must be > 2, got {self.p}")
        n = self.lattice.n
        if self.sigma_range is None:
            object.__setattr__(self, "sigma_range", (4.0 / n, n / 4.0))
        lo, hi = self.sigma_range
        if not (0 < lo <= hi):
            raise ValueError(f"invalid sigma range {self.sigma_range}")
        if not self.s_range[0] <= self.s_range[1]:
            raise ValueError(f"invalid s range {self.s_range}")
        if self.grid[0] < 2 or self.grid[1] < 1:
            raise ValueError(f"grid must be at least (2, 1), got {self.grid}")
        if self.refine_tol <= 0:
            raise ValueError("refine_tol must be positive")

    @property
    def n(self) -> int:
        return self.lattice.n

    def sigma_grid(self) -> np.ndarray:
        lo, hi = self.sigma_range
        return np.exp(np.linspace(np.log(lo), np.log(hi), self.grid[0]))

    def s_grid(self) -> np.ndarray:
        lo, hi = self.s_range
        if self.grid[1] == 1 or lo == hi:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, self.grid[1])


@dataclass(frozen=True)
class OptResult:
    params: WindowParams
    objective: float
    trace: tuple = field(default=(), repr=False)

    @property
    def n_evals(self) -> int:
        return len(self.trace)

    def to_json(self) -> dict:
        return {"sigma": self.params.sigma, "s": self.params.s,
                "objective": self.objective, "evaluations": self.n_evals}


def objective(f: Signal, params: WindowParams, cfg: ObjectiveConfig) -> float:
    """Sum over the lattice of |V_g f|^p with g the chirped Gaussian ``params``.

    For real signals the sum runs over frequency indices in [0, N/2]: the
    negative half carries the conjugate chirp, and including it makes the
    objective even in ``s``.
    """
    if f.n != cfg.n:
        raise ValueError(f"signal length {f.n} != lattice N {cfg.n}")
    c = dgt(f, synth_window(params, f.n), cfg.lattice)
    one_sided = f.is_real if cfg.one_sided is None else cfg.one_sided
    if one_sided:
        return lp_power(c.values[cfg.lattice.points[:, 1] <= f.n // 2], cfg.p)
    return lp_power(c.values, cfg.p)


def lp_power(values: np.ndarray, p: float) -> float:
    """sum |v|^p, computed from |v|^2 to avoid complex abs."""
    a = values.real * values.real
    a += values.imag * values.imag
    if p == 2.5:
        return float(np.sum(a * np.sqrt(np.sqrt(a))))
    return float(np.sum(a ** (0.5 * p)))


class _Recorder:
    """Evaluates the objective and keeps an ordered trace of every call.

    The search runs on f / ||f|| and reports values rescaled by ||f||^p, so
    the path taken depends only on the shape of f, not on its scale.
    """

    def __init__(self, f: Signal, cfg: ObjectiveConfig):
        norm = float(np.linalg.norm(f.samples))
        self.f = f.scaled(1.0 / norm) if norm > 0 else f
        self.scale = norm**cfg.p if norm > 0 else 1.0
        self.cfg = cfg
        self.trace = []
        self._raw = []

    def __call__(self, sigma: float, s: float) -> float:
        p = WindowParams(sigma, s)
        v = objective(self.f, p, self.cfg)
        self.trace.append((p, v * self.scale))
        self._raw.append(v)
        return v

    def best(self) -> OptResult:
        # ties: lowest sigma, then lowest s
        i = max(range(len(self._raw)),
                key=lambda k: (self._raw[k], -self.trace[k][0].sigma, -self.trace[k][0].s))
        p, v = self.trace[i]
        return OptResult(p, v, tuple(self.trace))


def _check_signal(f: Signal) -> None:
    if not np.any(f.samples):
        raise ValueError("all-zero signal: objective is identically 0")


def _grid_scan(rec: _Recorder, sigmas, chirps):
    best = None
    for i, sg in enumerate(sigmas):
        for j, s in enumerate(chirps):
            v = rec(sg, s)
            if best is None or v > best[0]:
                best = (v, i, j)
    return best


def optimize_chirped(f: Signal, cfg: ObjectiveConfig) -> OptResult:
    """Best (sigma, s): grid scan then bounded Nelder-Mead on (log sigma, s)."""
    _check_signal(f)
    sigmas, chirps = cfg.sigma_grid(), cfg.s_grid()
    rec = _Recorder(f, cfg)
    _, i, j = _grid_scan(rec, sigmas, chirps)

    lo, hi = np.log(cfg.sigma_range[0]), np.log(cfg.sigma_range[1])
    dls = (hi - lo) / (len(sigmas) - 1) if len(sigmas) > 1 else 0.1
    ds = (chirps[1] - chirps[0]) if len(chirps) > 1 else 0.0
    x0 = np.array([np.log(sigmas[i]), chirps[j]])
    if ds == 0.0:
        # s pinned by the range: reduce to the real search around that chirp
        return _golden_refine(rec, i, sigmas, chirps[j], cfg)
    simplex = np.array([x0, x0 + [0.5 * dls, 0.0], x0 + [0.0, 0.5 * ds]])

    def neg(x):
        return -rec(float(np.exp(x[0])), float(x[1]))

    minimize(neg, x0, method="Nelder-Mead",
             bounds=[(lo, hi), tuple(cfg.s_range)],
             options={"initial_simplex": simplex, "xatol": cfg.refine_tol,
                      "fatol": 0.0, "maxfev": cfg.max_evals})
    return rec.best()


def _golden_refine(rec: _Recorder, i: int, sigmas, s: float, cfg: ObjectiveConfig) -> OptResult:
    a = np.log(sigmas[max(i - 1, 0)])
    b = np.log(sigmas[min(i + 1, len(sigmas) - 1)])

    def fval(u):
        return rec(float(np.exp(u)), s)

    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = fval(c), fval(d)
    while b - a > cfg.refine_tol and len(rec.trace) < cfg.max_evals:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fval(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fval(d)
    return rec.best()


def optimize_real(f: Signal, cfg: ObjectiveConfig) -> OptResult:
    """Best real Gaussian (s = 0): log-sigma grid then golden section."""
    _check_signal(f)
    sigmas = cfg.sigma_grid()
    rec = _Recorder(f, cfg)
    _, i, _ = _grid_scan(rec, sigmas, [0.0])
    return _golden_refine(rec, i, sigmas, 0.0, cfg)


@dataclass(frozen=True)
class SegmentationPlan:
    boundaries: tuple
    per_segment: tuple
    middle_frames: tuple
    per_frame: FramewiseWindowTrack

    @property
    def m(self) -> int:
        return len(self.per_segment)

    def to_json(self) -> dict:
        return {
            "boundaries": list(self.boundaries),
            "segments": [r.to_json() for r in self.per_segment],
            "middle_frames": list(self.middle_frames),
        }


def _validate_boundaries(boundaries: Sequence[int], n: int, step: float) -> tuple:
    b = [int(v) for v in boundaries]
    if not b or b[0] != 0:
        b = [0] + b
    if b[-1] != n:
        b = b + [n]
    if any(v < 0 or v > n for v in b):
        raise ValueError(f"boundaries must lie in [0, {n}], got {boundaries}")
    for lo, hi in zip(b[:-1], b[1:]):
        if hi <= lo:
            raise ValueError(f"empty or unordered part [{lo}, {hi})")
        if hi - lo < 4 * step:
            raise ValueError(
                f"part [{lo}, {hi}) is shorter than 4 lattice time steps ({4 * step:g} samples)")
    return tuple(b)


def interpolate_track(anchors: Sequence[int], params: Sequence[WindowParams],
                      frames: int) -> FramewiseWindowTrack:
    """Per-frame parameters: s linear and sigma log-linear between anchor
    frames, held constant outside the first and last anchors."""
    k = np.arange(frames)
    log_sig = np.interp(k, anchors, [np.log(p.sigma) for p in params])
    chirp = np.interp(k, anchors, [p.s for p in params])
    track = [WindowParams(float(np.exp(a)), float(c)) for a, c in zip(log_sig, chirp)]
    # constant extrapolation and anchors use the given parameters verbatim
    track[:anchors[0] + 1] = [params[0]] * (anchors[0] + 1)
    track[anchors[-1]:] = [params[-1]] * (frames - anchors[-1])
    for a, p in zip(anchors, params):
        track[a] = p
    return FramewiseWindowTrack(track)


def optimize_segmented(f: Signal, boundaries: Sequence[int], cfg: ObjectiveConfig) -> SegmentationPlan:
    """Optimize each zero-padded part, anchor it at the part's middle frame
    and interpolate over every lattice frame."""
    lat = cfg.lattice
    b = _validate_boundaries(boundaries, f.n, lat.time_step)
    shifts = lat.time_shifts
    results, anchors = [], []
    for lo, hi in zip(b[:-1], b[1:]):
        part = np.zeros_like(f.samples)
        part[lo:hi] = f.samples[lo:hi]
        results.append(optimize_chirped(Signal(part, f.sample_rate), cfg))
        anchors.append(int(np.argmin(np.abs(shifts - 0.5 * (lo + hi)))))
    if len(set(anchors)) != len(anchors):
        raise ValueError(f"parts share a middle frame: {anchors}")
    track = interpolate_track(anchors, [r.params for r in results], shifts.size)
    return SegmentationPlan(b, tuple(results), tuple(anchors), track)


def with_lattice(cfg: ObjectiveConfig, lattice: QuantizedLattice) -> ObjectiveConfig:
    return replace(cfg, lattice=lattice)
