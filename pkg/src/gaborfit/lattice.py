"""Time-frequency lattices on Z_N x Z_N.

Optimal lattices shear and dilate a hexagonal one to match a chirped window.
Rectangular lattices serve as the comparison. Real generators are quantized
to integer points, and the frame-operator condition number measures
stability on small N.

A generator ``G`` maps integer vectors ``k`` to lattice points ``G @ k``;
the first coordinate is a time shift in samples, the second a frequency
index in DFT bins.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gaborfit.core import GaborWindow, WindowParams

HEX = np.array([
    [3 ** 0.25 / np.sqrt(2), 0.0],
    [1.0 / (3 ** 0.25 * np.sqrt(2)), np.sqrt(2) / 3 ** 0.25],
])

REDUNDANCY_TOL = 0.10
# per-axis log tolerance for snapping steps to divisors of N
SNAP_TOL = 0.10
DEFAULT_MAXN_FRAME_COND = 512
MAXN_ENV = "GABORFIT_MAXN_FRAME_COND"


def shear(s: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [s, 1.0]])


def dilate(sigma: float) -> np.ndarray:
    return np.array([[np.sqrt(sigma), 0.0], [0.0, 1.0 / np.sqrt(sigma)]])


@dataclass(frozen=True)
class LatticeSpec:
    generator: np.ndarray
    n: int
    redundancy: float
    source: tuple = ("custom",)

    def __post_init__(self):
        G = np.asarray(self.generator, dtype=float)
        if G.shape != (2, 2) or not np.all(np.isfinite(G)):
            raise ValueError("generator must be a finite 2x2 matrix")
        object.__setattr__(self, "generator", G)

    @property
    def det(self) -> float:
        return float(abs(np.linalg.det(self.generator)))

    def to_json(self) -> dict:
        return {
            "generator": self.generator.tolist(),
            "n": self.n,
            "redundancy": self.redundancy,
            "source": list(self.source),
        }


@dataclass(frozen=True)
class QuantizedLattice:
    """Integer lattice points in Z_N x Z_N.

    ``points`` is ordered column by column (ascending time shift), and within a
    column by ascending frequency index. ``freq_index`` is the (K, L) matrix of
    frequency indices when every column holds the same number of points, else
    None.
    """

    n: int
    points: np.ndarray
    time_shifts: np.ndarray
    column_of_point: np.ndarray
    freq_index: Optional[np.ndarray]
    target_redundancy: float
    spec: Optional[LatticeSpec] = None

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def realized_redundancy(self) -> float:
        return self.size / self.n

    @property
    def column_starts(self) -> np.ndarray:
        return np.searchsorted(self.column_of_point, np.arange(self.time_shifts.size + 1))

    @property
    def shear_offsets(self) -> Optional[np.ndarray]:
        return None if self.freq_index is None else self.freq_index[:, 0].copy()

    @property
    def time_step(self) -> Optional[float]:
        return self.n / self.time_shifts.size

    @property
    def freq_step(self) -> Optional[float]:
        return None if self.freq_index is None else self.n / self.freq_index.shape[1]

    @classmethod
    def from_points(cls, n: int, points, target_redundancy: Optional[float] = None,
                    spec: Optional[LatticeSpec] = None) -> "QuantizedLattice":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2) % n
        pts = np.unique(pts, axis=0)  # lexicographic: by time, then frequency
        if pts.shape[0] == 0:
            raise ValueError("empty lattice")
        shifts, col = np.unique(pts[:, 0], return_inverse=True)
        counts = np.bincount(col)
        freq = pts[:, 1].reshape(shifts.size, -1) if np.all(counts == counts[0]) else None
        target = pts.shape[0] / n if target_redundancy is None else target_redundancy
        return cls(n, pts, shifts, col, freq, float(target), spec)

    @classmethod
    def full(cls, n: int) -> "QuantizedLattice":
        return quantize(rectangular_lattice(1, 1, n))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "points": int(self.size),
            "time_shifts": int(self.time_shifts.size),
            "rows": None if self.freq_index is None else int(self.freq_index.shape[1]),
            "target_redundancy": self.target_redundancy,
            "realized_redundancy": self.realized_redundancy,
            "spec": None if self.spec is None else self.spec.to_json(),
        }


def optimal_lattice(params: WindowParams, n: int, redundancy: float) -> LatticeSpec:
    """Shear(s) . Dilate(sigma) . Hex scaled by sqrt(N/R); determinant N/R."""
    if not isinstance(params, WindowParams):
        params = WindowParams(*params)
    if not redundancy >= 1:
        raise ValueError(f"redundancy must be >= 1, got {redundancy}")
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    G = np.sqrt(n / redundancy) * shear(params.s) @ dilate(params.sigma) @ HEX
    return LatticeSpec(G, n, float(redundancy), ("optimal", params.sigma, params.s))


def rectangular_lattice(a: int, b: int, n: int) -> LatticeSpec:
    """Separable lattice with time step ``a`` samples and frequency step ``b`` bins."""
    if a <= 0 or b <= 0 or n % a or n % b:
        raise ValueError(f"time step {a} and frequency step {b} must divide N={n}")
    return LatticeSpec(np.diag([float(a), float(b)]), n, n / (a * b), ("rectangular", a, b))


def _divisors(n: int) -> np.ndarray:
    return np.array([d for d in range(1, n + 1) if n % d == 0])


def _round(v):
    return np.floor(np.asarray(v) + 0.5).astype(np.int64)


def _column_counts(n: int, a: float, b: float, redundancy: float):
    """Number of columns K and rows L; divisors of N are preferred."""
    k_star, l_star = n / a, n / b
    divs = _divisors(n)
    best = None
    for K in divs:
        for L in divs:
            dk, dl = abs(np.log(K / k_star)), abs(np.log(L / l_star))
            if dk > SNAP_TOL or dl > SNAP_TOL:
                continue
            if abs(K * L / n / redundancy - 1) > REDUNDANCY_TOL:
                continue
            cost = dk + dl + abs(np.log(K * L / n / redundancy))
            if best is None or cost < best[0]:
                best = (cost, int(K), int(L))
    if best is not None:
        return best[1], best[2]
    K = int(np.clip(_round(k_star), 1, n))
    L = int(np.clip(_round(redundancy * n / K), 1, n))
    if L == n or L == 1:
        K = int(np.clip(_round(redundancy * n / L), 1, n))
    return K, L


def _quantize_triangular(spec: LatticeSpec) -> QuantizedLattice:
    n, G = spec.n, spec.generator
    a, c, b = abs(G[0, 0]), G[1, 0], abs(G[1, 1])
    K, L = _column_counts(n, a, b, spec.redundancy)
    a2, b2 = n / K, n / L
    # keep the direction of the first basis vector, then close the shear mod N
    c2 = c * a2 / a
    if b2 == int(b2) and (K * int(_round(c2))) % int(b2) == 0:
        c2 = float(_round(c2))
    else:
        c2 = _round(K * c2 / b2) * b2 / K
    shifts = _round(np.arange(K) * a2)
    offsets = np.mod(np.arange(K) * c2, b2)
    rows = np.mod(_round(offsets[:, None] + np.arange(L)[None, :] * b2), n)
    rows.sort(axis=1)
    pts = np.column_stack([np.repeat(shifts, L), rows.ravel()])
    return QuantizedLattice(n, pts, shifts, np.repeat(np.arange(K), L), rows,
                            spec.redundancy, spec)


def _quantize_general(spec: LatticeSpec) -> QuantizedLattice:
    n, G = spec.n, spec.generator
    Ginv = np.linalg.inv(G)
    corners = np.array([[0, 0], [n, 0], [0, n], [n, n]], dtype=float).T
    kc = Ginv @ corners
    lo = np.floor(kc.min(axis=1)) - 1
    hi = np.ceil(kc.max(axis=1)) + 1
    k1, k2 = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    real_pts = G @ np.vstack([k1.ravel(), k2.ravel()])
    inside = np.all((real_pts >= 0) & (real_pts < n), axis=0)
    pts = _round(real_pts[:, inside].T)
    return QuantizedLattice.from_points(n, pts, spec.redundancy, spec)


def quantize(spec: LatticeSpec) -> QuantizedLattice:
    """Integer point set on Z_N x Z_N approximating the real lattice of ``spec``.

    Lower-triangular generators (time step, shear, frequency step) give a
    column layout: K columns at round(k N / K), L rows per column offset by a
    shear that closes modulo N. Step counts are snapped to divisors of N when
    that stays within 10% per axis, which makes integer generators map exactly
    onto themselves. Other generators are rounded point by point over one tile.
    """
    n, G = spec.n, spec.generator
    if abs(np.linalg.det(G)) < 1e-12 * max(1.0, np.abs(G).max() ** 2):
        raise ValueError("degenerate lattice generator (rank < 2)")
    if G[0, 1] == 0.0:
        q = _quantize_triangular(spec)
    else:
        q = _quantize_general(spec)
    if abs(q.realized_redundancy / spec.redundancy - 1) > REDUNDANCY_TOL:
        raise ValueError(
            f"realized redundancy {q.realized_redundancy:.4g} deviates more than "
            f"{REDUNDANCY_TOL:.0%} from target {spec.redundancy:.4g}")
    return q


def comparison_lattices(n: int, redundancy: float, skews=(1, 2, 4)) -> dict:
    """Rectangular lattices of (near) equal redundancy and varying aspect.

    For each skew factor k, returns the divisor pair (a, b) whose area a*b is
    closest to N/R and whose aspect b/a is closest to k ("more time bins") and
    1/k ("more frequency bins").
    """
    divs = _divisors(n)
    area = n / redundancy
    out = {}
    for k in skews:
        for label, target in (("time", k), ("freq", 1.0 / k)):
            if k == 1 and label == "freq":
                continue
            best = None
            for a in divs:
                for b in divs:
                    cost = (abs(np.log(a * b / area)) * 10, abs(np.log(b / a / target)))
                    if best is None or cost < best[0]:
                        best = (cost, int(a), int(b))
            name = "square" if k == 1 else f"{label}x{k}"
            out[name] = rectangular_lattice(best[1], best[2], n)
    return out


def frame_cap() -> int:
    return int(os.environ.get(MAXN_ENV, DEFAULT_MAXN_FRAME_COND))


def frame_operator(g: GaborWindow, lattice: QuantizedLattice) -> np.ndarray:
    """Dense S = sum over lattice of atom atom^H, atoms matching the DGT."""
    n = lattice.n
    if g.n != n:
        raise ValueError(f"window length {g.n} != lattice N {n}")
    if lattice.size == 0:
        raise ValueError("empty lattice")
    t = np.arange(n)
    x, xi = lattice.points[:, 0], lattice.points[:, 1]
    atoms = g.samples[(t[None, :] - x[:, None]) % n] * np.exp(2j * np.pi * np.outer(xi, t) / n)
    return atoms.T @ atoms.conj()


def frame_condition(g: GaborWindow, lattice: QuantizedLattice,
                    max_n: Optional[int] = None) -> float:
    """Frame bound ratio B/A; ``inf`` when the atoms do not span C^N."""
    cap = frame_cap() if max_n is None else max_n
    if lattice.n > cap:
        raise ValueError(f"N={lattice.n} above frame-condition cap {cap} (set {MAXN_ENV})")
    ev = np.linalg.eigvalsh(frame_operator(g, lattice))
    lo, hi = ev[0], ev[-1]
    if lo < 1e-12 * hi:
        return float("inf")
    return float(hi / lo)
