#!/usr/bin/env python3
"""Spectrogram images of the close-chirp pair with the optimal real and the
optimal chirped window, plus both windows' ambiguity functions."""

import argparse
from pathlib import Path

import numpy as np

from gaborfit.core import ambiguity, dgt, synth_window
from gaborfit.io import emit_spectrogram
from gaborfit.lattice import QuantizedLattice, optimal_lattice, quantize, rectangular_lattice
from gaborfit.optimize import ObjectiveConfig, optimize_chirped, optimize_real
from gaborfit.synth import SynthSpec, synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/images")
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--redundancy", type=float, default=8.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = args.n

    f, _ = synthesize(SynthSpec("two_chirp_pair", n, params={"spacing": 3 / n}))
    cfg = ObjectiveConfig(quantize(rectangular_lattice(16, 8, n)))
    for name, res in (("real", optimize_real(f, cfg)), ("chirped", optimize_chirped(f, cfg))):
        g = synth_window(res.params, n)
        lat = quantize(optimal_lattice(res.params, n, args.redundancy))
        emit_spectrogram(dgt(f, g, lat), out / f"pair_{name}.pgm")
        small = synth_window(res.params, 128)
        emit_spectrogram(ambiguity(small, QuantizedLattice.full(128)), out / f"ambiguity_{name}.pgm")
        print(f"{name}: sigma={res.params.sigma:.4g} s={res.params.s:.4g} "
              f"columns={lat.time_shifts.size} rows={lat.freq_index.shape[1]}")
    print("images in", out)


if __name__ == "__main__":
    main()
