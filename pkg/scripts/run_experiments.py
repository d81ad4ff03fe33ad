#!/usr/bin/env python3
"""Run the experiment pipelines and write one JSON result per experiment.

    python3 scripts/run_experiments.py --out results
    python3 scripts/run_experiments.py --only stability resolution
"""

import argparse
import logging
import time
from pathlib import Path

from gaborfit import experiments as ex
from gaborfit.io import write_json

RUNNERS = {
    "stability": ex.run_stability,
    "fidelity": ex.run_fidelity,
    "resolution": ex.run_resolution,
    "tracking": ex.run_tracking,
    "snr": ex.run_snr,
    "segmented": ex.run_segmented,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="+", choices=sorted(RUNNERS))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or RUNNERS:
        t0 = time.perf_counter()
        result = RUNNERS[name]()
        write_json(out / f"{name}.json", result)
        logging.info("%s done in %.1fs -> %s", name, time.perf_counter() - t0, out / f"{name}.json")


if __name__ == "__main__":
    main()
