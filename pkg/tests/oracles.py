"""Slow, literal reference implementations used as test oracles.

Nothing here imports the package's numerics; everything is written from the
defining formulas with explicit loops.
"""

import cmath
import math

import numpy as np


def window(sigma, s, n):
    """Chirped Gaussian evaluated sample by sample, then normalized."""
    g = []
    for i in range(n):
        t = i if i < (n + 1) // 2 else i - n
        amp = (2.0 / (n * sigma)) ** 0.25 * math.exp(-math.pi * t * t / (n * sigma))
        g.append(amp * cmath.exp(1j * math.pi * s * t * t * (n + 1) / n**2))
    norm = math.sqrt(sum(abs(v) ** 2 for v in g))
    return [v / norm for v in g]


def dgt_triple_sum(f, g, points, conjugate=True):
    """sum_n f(n) g*((n - x) mod N) exp(-2 pi i xi n / N), one point at a time."""
    n = len(f)
    out = []
    for x, xi in points:
        acc = 0j
        for k in range(n):
            w = g[(k - x) % n]
            if conjugate:
                w = w.conjugate()
            acc += f[k] * w * cmath.exp(-2j * math.pi * xi * k / n)
        out.append(acc)
    return np.array(out)


def frame_operator(g, points):
    """S = sum over atoms of atom atom^H, atoms built entry by entry."""
    n = len(g)
    S = np.zeros((n, n), dtype=complex)
    for x, xi in points:
        atom = np.array([g[(k - x) % n] * cmath.exp(2j * math.pi * xi * k / n) for k in range(n)])
        S += np.outer(atom, atom.conj())
    return S


def condition(g, points):
    ev = np.linalg.eigvalsh(frame_operator(g, points))
    return ev[-1] / ev[0]


def rect_points(a, b, n):
    return [(x, xi) for x in range(0, n, a) for xi in range(0, n, b)]


def hex_generator(sigma, s, n, redundancy):
    """Shear(s) Dilate(sigma) Hex scaled by sqrt(N/R), multiplied out by hand."""
    q = 3 ** 0.25
    h11, h21, h22 = q / math.sqrt(2), 1 / (q * math.sqrt(2)), math.sqrt(2) / q
    d1, d2 = math.sqrt(sigma), 1 / math.sqrt(sigma)
    c = math.sqrt(n / redundancy)
    return np.array([[c * d1 * h11, 0.0],
                     [c * (s * d1 * h11 + d2 * h21), c * d2 * h22]])
