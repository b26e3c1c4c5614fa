"""Audio buffers, stem mixing and 24-bit PCM WAV output."""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from ..errors import MixError

DEFAULT_SAMPLE_RATE = 22050
FULL_SCALE_24 = 1 << 23


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    samples: np.ndarray
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self) else 0.0


def mix(stems, gains_db=None) -> AudioBuffer:
    """Gain-weighted sum of stems, zero-padded to the longest.

    The result is scaled by ``1/peak`` only when its peak exceeds 1.
    """
    stems = list(stems)
    if not stems:
        return AudioBuffer(np.zeros(0))
    if gains_db is None:
        gains_db = [0.0] * len(stems)
    if len(gains_db) != len(stems):
        raise MixError(f"{len(stems)} stems but {len(gains_db)} gains")
    rates = {s.sample_rate_hz for s in stems}
    if len(rates) != 1:
        raise MixError(f"sample-rate mismatch: {sorted(rates)}")
    n = max(len(s) for s in stems)
    out = np.zeros(n)
    for stem, gain in zip(stems, gains_db):
        if gain == 0.0:
            out[: len(stem)] += stem.samples
        else:
            out[: len(stem)] += stem.samples * 10.0 ** (gain / 20.0)
    peak = np.max(np.abs(out)) if n else 0.0
    if peak > 1.0:
        out *= 1.0 / peak
    return AudioBuffer(out, rates.pop())


def quantize_24(samples) -> np.ndarray:
    """Float samples in [-1, 1] to signed 24-bit integers (clipped)."""
    scaled = np.round(np.asarray(samples, dtype=np.float64) * FULL_SCALE_24)
    return np.clip(scaled, -FULL_SCALE_24, FULL_SCALE_24 - 1).astype(np.int32)


def encode_wav(buf: AudioBuffer) -> bytes:
    """Mono RIFF/WAVE, PCM, 24-bit little-endian."""
    ints = quantize_24(buf.samples).astype("<i4")
    data = ints.view(np.uint8).reshape(-1, 4)[:, :3].tobytes()
    pad = b"\x00" if len(data) % 2 else b""
    fmt = struct.pack("<HHIIHH", 1, 1, buf.sample_rate_hz, buf.sample_rate_hz * 3, 3, 24)
    body = (b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(data)) + data + pad)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def atomic_write(path, data: bytes) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_wav(buf: AudioBuffer, path) -> None:
    atomic_write(path, encode_wav(buf))


def read_wav(path) -> AudioBuffer:
    """Read a mono 24-bit PCM file written by :func:`write_wav`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    rate = bits = channels = None
    while pos + 8 <= len(raw):
        cid, size = raw[pos:pos + 4], struct.unpack("<I", raw[pos + 4:pos + 8])[0]
        chunk = raw[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            _, channels, rate, _, _, bits = struct.unpack("<HHIIHH", chunk[:16])
        elif cid == b"data":
            if bits != 24 or channels != 1:
                raise ValueError(f"{path}: expected mono 24-bit PCM")
            b = np.frombuffer(chunk, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            ints = np.where(ints >= FULL_SCALE_24, ints - (1 << 24), ints)
            return AudioBuffer(ints / FULL_SCALE_24, rate)
        pos += 8 + size + (size & 1)
    raise ValueError(f"{path}: no data chunk")
