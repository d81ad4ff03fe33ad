"""WAV input plus spectrogram (binary PGM), CSV and JSON output."""

from __future__ import annotations

import csv
import json
import logging
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.io import wavfile

from gaborfit.core import Signal, TFCoefficients

log = logging.getLogger(__name__)


class WavFormatError(ValueError):
    pass


@dataclass
class WavInfo:
    path: str
    sample_rate: int
    encoding: str
    channels: int
    original_length: int
    length: int
    policy: str

    def to_json(self) -> dict:
        return dict(self.__dict__)


def load_wav(path, n: Optional[int] = None) -> tuple:
    """Read a PCM16 or float32 WAV file as a mono Signal.

    Multichannel audio is averaged to mono (with a warning). PCM16 is scaled
    by 1/32768. When ``n`` is given the signal is truncated or zero-padded to
    ``n`` samples; the applied policy is recorded in the returned WavInfo.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.stat().st_size == 0:
        raise WavFormatError(f"{path}: empty file")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except (ValueError, EOFError) as e:
        raise WavFormatError(f"{path}: {e}") from e
    if data.dtype == np.int16:
        x, encoding = data.astype(float) / 32768.0, "pcm16"
    elif data.dtype == np.float32:
        x, encoding = data.astype(float), "float32"
    else:
        raise WavFormatError(f"{path}: unsupported encoding {data.dtype} (PCM16 or float32 only)")
    channels = 1 if x.ndim == 1 else x.shape[1]
    if channels > 1:
        warnings.warn(f"{path}: averaging {channels} channels to mono", stacklevel=2)
        x = x.mean(axis=1)
    if x.size == 0:
        raise WavFormatError(f"{path}: no samples")
    original = x.size
    policy = "as-is"
    if n is not None and n != x.size:
        if x.size > n:
            x, policy = x[:n], "truncated"
        else:
            x, policy = np.concatenate([x, np.zeros(n - x.size)]), "zero-padded"
    info = WavInfo(str(path), int(rate), encoding, channels, original, x.size, policy)
    return Signal(x, float(rate)), info


def write_wav(path, signal: Signal, encoding: str = "pcm16") -> None:
    x = np.real(signal.samples)
    rate = int(round(signal.sample_rate))
    if encoding == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif encoding == "float32":
        data = x.astype(np.float32)
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")
    wavfile.write(path, rate, data)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    """RFC-4180 CSV with shortest round-trip float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_csv(path) -> tuple:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_json"):
        return _jsonable(obj.to_json())
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def magnitude_image(coeffs: TFCoefficients, dynamic_range_db: float = 60.0) -> np.ndarray:
    """uint8 image, rows = frequency rows (highest first), columns = frames."""
    if dynamic_range_db <= 0:
        raise ValueError("dynamic_range_db must be positive")
    if coeffs.values.size == 0:
        raise ValueError("empty coefficients")
    mag = np.abs(coeffs.matrix).T[::-1]
    peak = mag.max()
    if peak == 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag / peak)
    level = np.clip((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0)
    return np.round(255 * level).astype(np.uint8)


def write_pgm(path, image: np.ndarray) -> None:
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: maxval {maxval} unsupported")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def emit_spectrogram(coeffs: TFCoefficients, path, dynamic_range_db: float = 60.0) -> tuple:
    """Write a PGM spectrogram and a CSV of raw magnitudes next to it.

    Pixel values map 20 log10(|v| / max |v|) from [-dynamic_range_db, 0] onto
    [0, 255]; the lowest frequency row is the bottom image row. The CSV holds
    one line per lattice point: time shift, frequency index, magnitude.
    """
    path = Path(path)
    if not coeffs.is_columnar:
        raise ValueError("spectrogram needs column-layout coefficients")
    image = magnitude_image(coeffs, dynamic_range_db)
    if not path.parent.exists() or not os.access(path.parent, os.W_OK):
        raise OSError(f"cannot write to {path.parent}")
    write_pgm(path, image)
    csv_path = path.with_suffix(".csv")
    pts = coeffs.points
    write_csv(csv_path, ["time_shift", "freq_index", "magnitude"],
              zip(pts[:, 0], pts[:, 1], np.abs(coeffs.values)))
    return path, csv_path
