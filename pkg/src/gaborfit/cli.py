"""Command-line front end: ``gaborfit <task> [options]``.

Every run writes ``report.json`` (config, chosen windows, lattice, objective
values, frame condition when N is small enough, output files) into ``--out``.
Failures write ``error.json`` instead and exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from gaborfit.analysis import calibrate_gain, estimate_snr, resolvability, track_peak
from gaborfit.core import Signal, WindowParams, ambiguity, dgt, nsdgt, synth_window
from gaborfit.io import emit_spectrogram, load_wav, write_csv, write_json, write_wav
from gaborfit.lattice import (QuantizedLattice, comparison_lattices, frame_cap, frame_condition,
                              optimal_lattice, quantize, rectangular_lattice)
from gaborfit.optimize import ObjectiveConfig, objective, optimize_chirped, optimize_real, optimize_segmented
from gaborfit.synth import SynthSpec, synthesize

log = logging.getLogger("gaborfit")

TASKS = ("synth", "analyze", "optimize", "lattice", "track", "resolve", "snr")


@dataclass
class RunConfig:
    task: str
    out: str
    input: Optional[str] = None
    synth: Optional[dict] = None
    n: Optional[int] = None
    p: float = 2.5
    redundancy: float = 4.0
    lattice: str = "optimal"
    window: str = "chirped"
    seed: Optional[int] = None
    dynamic_range_db: float = 60.0
    band: Optional[tuple] = None
    ambiguity: bool = False
    encoding: str = "float32"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if (self.input is None) == (self.synth is None):
            raise ValueError("exactly one of --input or --synth is required")
        if self.task == "synth" and self.synth is None:
            raise ValueError("synth task needs --synth")
        if self.redundancy < 1:
            raise ValueError("redundancy must be >= 1")
        if self.task == "resolve" and self.band is None:
            raise ValueError("resolve task needs --band lo,hi")
        parse_window(self.window)
        parse_lattice(self.lattice)

    def to_json(self) -> dict:
        return asdict(self)


def parse_window(text: str):
    """'real' | 'chirped' | 'segmented:b0,b1,...' -> (mode, boundaries)."""
    if text in ("real", "chirped"):
        return text, None
    if text.startswith("segmented:"):
        try:
            b = [int(v) for v in text.split(":", 1)[1].split(",") if v.strip()]
        except ValueError:
            raise ValueError(f"bad segment boundaries in {text!r}") from None
        if not b:
            raise ValueError("segmented mode needs at least one boundary")
        return "segmented", b
    raise ValueError(f"window must be real, chirped or segmented:<b0,...>, got {text!r}")


def parse_lattice(text: str):
    if text == "optimal":
        return "optimal", None
    if text.startswith("rect:"):
        try:
            a, b = (int(v) for v in text[5:].split(","))
        except ValueError:
            raise ValueError(f"rect lattice needs two integers, got {text!r}") from None
        return "rect", (a, b)
    raise ValueError(f"lattice must be optimal or rect:a,b, got {text!r}")


def _load_signal(cfg: RunConfig):
    if cfg.input is not None:
        f, info = load_wav(cfg.input, cfg.n)
        return f, None, {"wav": info.to_json()}
    data = dict(cfg.synth)
    if cfg.n is not None:
        data["n"] = cfg.n
    if cfg.seed is not None:
        data["seed"] = cfg.seed
    spec = SynthSpec.from_json(data)
    f, truth = synthesize(spec)
    return f, truth, {"synth": spec.to_json()}


def _search_lattice(cfg: RunConfig, n: int) -> QuantizedLattice:
    kind, ab = parse_lattice(cfg.lattice)
    if kind == "rect":
        return quantize(rectangular_lattice(*ab, n))
    return quantize(comparison_lattices(n, cfg.redundancy, skews=(1,))["square"])


def _choose_window(f: Signal, cfg: RunConfig, report: dict):
    """Optimized window (or framewise track) and the lattice to transform on."""
    mode, bounds = parse_window(cfg.window)
    search = _search_lattice(cfg, f.n)
    ocfg = ObjectiveConfig(search, p=cfg.p)
    if mode == "segmented":
        plan = optimize_segmented(f, bounds, ocfg)
        report["segments"] = plan.to_json()
        report["windows"] = [asdict(r.params) for r in plan.per_segment]
        return plan, search
    res = optimize_real(f, ocfg) if mode == "real" else optimize_chirped(f, ocfg)
    report["windows"] = [asdict(res.params)]
    report["search_objective"] = res.objective
    report["evaluations"] = res.n_evals
    kind, _ = parse_lattice(cfg.lattice)
    lat = quantize(optimal_lattice(res.params, f.n, cfg.redundancy)) if kind == "optimal" else search
    report["objective"] = objective(f, res.params, ObjectiveConfig(lat, p=cfg.p))
    return res, lat


def _transform(f, choice, lat):
    if hasattr(choice, "per_frame"):
        return nsdgt(f, choice.per_frame, lat), None
    g = synth_window(choice.params, f.n)
    return dgt(f, g, lat), g


def _condition(g, lat, report):
    cap = frame_cap()
    if g is not None and lat.n <= cap:
        report["frame_condition"] = frame_condition(g, lat, max_n=cap)
    else:
        report["frame_condition"] = None


def run(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "error.json").unlink(missing_ok=True)  # stale from an earlier failed run
    report = {"config": cfg.to_json(), "outputs": []}
    f, truth, source = _load_signal(cfg)
    report["source"] = source
    report["n"] = f.n

    def emit(name):
        report["outputs"].append(name)
        return out / name

    if cfg.task == "synth":
        write_wav(emit("signal.wav"), f, cfg.encoding)
        rows = [(k, float(np.real(v)), *truth.inst_freq[:, k], truth.amplitude[k])
                for k, v in enumerate(f.samples)]
        header = ["sample", "value"] + [f"inst_freq_{i}" for i in range(truth.inst_freq.shape[0])]
        write_csv(emit("truth.csv"), header + ["amplitude"], rows)
        write_json(out / "report.json", report)
        return report

    choice, lat = _choose_window(f, cfg, report)
    report["lattice"] = lat.to_json()
    report["realized_redundancy"] = lat.realized_redundancy
    coeffs, g = _transform(f, choice, lat)
    _condition(g, lat, report)

    if cfg.task == "analyze":
        emit_spectrogram(coeffs, emit("spectrogram.pgm"), cfg.dynamic_range_db)
        report["outputs"].append("spectrogram.csv")
        if cfg.ambiguity and g is not None:
            emit_spectrogram(ambiguity(g, lat), emit("ambiguity.pgm"), cfg.dynamic_range_db)
            report["outputs"].append("ambiguity.csv")
    elif cfg.task == "optimize":
        print(json.dumps({"windows": report["windows"], "objective": report.get("objective")}))
    elif cfg.task == "lattice":
        gen = None if lat.spec is None else lat.spec.generator.tolist()
        print(json.dumps({"generator": gen, "realized_redundancy": lat.realized_redundancy,
                          "frame_condition": report["frame_condition"]}))
    elif cfg.task == "track":
        tr = track_peak(coeffs)
        write_csv(emit("track.csv"), ["time_s", "freq_hz", "bin", "magnitude"],
                  zip(tr.times, tr.freqs, tr.bins, tr.magnitudes))
    elif cfg.task == "resolve":
        rep = resolvability(coeffs, cfg.band)
        report["resolved_fraction"] = rep.resolved_fraction
        write_json(emit("resolvability.json"), rep)
    elif cfg.task == "snr":
        if g is None:
            raise ValueError("snr task needs a single window (real or chirped)")
        gain = calibrate_gain(g, lat)
        st = estimate_snr(coeffs, gain)
        report["noise_power"] = st.noise_power
        report["calibration_gain"] = gain
        write_csv(emit("snr.csv"), ["time_s", "snr_db", "amplitude", "valid"],
                  [(t, s, a, int(v)) for t, s, a, v in st.to_rows()])
    write_json(out / "report.json", report)
    return report


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="WAV file (PCM16 or float32)")
    src.add_argument("--synth", help="synthesis spec: JSON text or path to a JSON file")
    common.add_argument("--n", type=int, help="transform length (truncate or zero-pad)")
    common.add_argument("--p", type=float, default=2.5)
    common.add_argument("--redundancy", type=float, default=4.0)
    common.add_argument("--lattice", default="optimal", help="optimal | rect:a,b")
    common.add_argument("--window", default="chirped", help="real | chirped | segmented:b0,b1,...")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", default="out")
    common.add_argument("--dynamic-range", type=float, default=60.0, dest="dynamic_range_db")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="gaborfit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="task", required=True)
    s = sub.add_parser("synth", parents=[common], help="write a synthetic signal and its ground truth")
    s.add_argument("--encoding", choices=("pcm16", "float32"), default="float32")
    a = sub.add_parser("analyze", parents=[common], help="spectrogram (and window ambiguity) images")
    a.add_argument("--ambiguity", action="store_true")
    sub.add_parser("optimize", parents=[common], help="print the optimal window")
    sub.add_parser("lattice", parents=[common], help="print lattice generator and condition")
    sub.add_parser("track", parents=[common], help="dominant-frequency track CSV")
    r = sub.add_parser("resolve", parents=[common], help="close-frequency resolvability")
    r.add_argument("--band", required=True, help="lo,hi in Hz")
    sub.add_parser("snr", parents=[common], help="instantaneous SNR CSV")
    return ap


def _synth_arg(text: Optional[str]):
    if text is None:
        return None
    p = Path(text)
    if not text.lstrip().startswith("{") and p.exists():
        text = p.read_text()
    return json.loads(text)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    band = None
    if getattr(ns, "band", None):
        band = tuple(float(v) for v in ns.band.split(","))
        if len(band) != 2:
            raise ValueError("--band needs lo,hi")
    return RunConfig(task=ns.task, out=ns.out, input=ns.input, synth=_synth_arg(ns.synth),
                     n=ns.n, p=ns.p, redundancy=ns.redundancy, lattice=ns.lattice,
                     window=ns.window, seed=ns.seed, dynamic_range_db=ns.dynamic_range_db,
                     band=band, ambiguity=getattr(ns, "ambiguity", False),
                     encoding=getattr(ns, "encoding", "float32"))


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = "config"
    try:
        cfg = config_from_args(ns)
        stage = "run"
        run(cfg)
    except Exception as e:  # every failure becomes a structured report
        err = {"error": type(e).__name__, "message": str(e), "stage": stage, "task": ns.task}
        try:
            Path(ns.out).mkdir(parents=True, exist_ok=True)
            write_json(Path(ns.out) / "error.json", err)
        except OSError:
            pass
        print(json.dumps(err), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
