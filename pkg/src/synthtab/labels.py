"""Frame-level string/fret targets aligned with the rendered audio."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import LabelError
from .synth.audio import DEFAULT_SAMPLE_RATE, atomic_write
from .tablature import N_FRETS, N_STRINGS

LABEL_SCHEMA = "synthtab-labels/1"
DEFAULT_HOP_SAMPLES = 512
DEFAULT_HOP_S = DEFAULT_HOP_SAMPLES / DEFAULT_SAMPLE_RATE


@dataclass(frozen=True, eq=False)
class FrameLabelMatrix:
    """Boolean tensor of shape ``(n_frames, 6, 20)``; frame t covers
    ``[t * hop_s, (t + 1) * hop_s)`` and is sampled at its centre."""

    active: np.ndarray
    hop_s: float

    def __post_init__(self):
        active = np.asarray(self.active, dtype=bool)
        if active.ndim != 3 or active.shape[1:] != (N_STRINGS, N_FRETS):
            raise LabelError(f"label tensor must be (frames, {N_STRINGS}, {N_FRETS}), got {active.shape}")
        if self.hop_s <= 0:
            raise LabelError("hop_s must be positive")
        if active.size and active.sum(axis=2).max() > 1:
            raise LabelError("more than one active fret on a string in a frame")
        object.__setattr__(self, "active", active)

    @property
    def n_frames(self) -> int:
        return self.active.shape[0]

    def __eq__(self, other):
        return (isinstance(other, FrameLabelMatrix) and self.hop_s == other.hop_s
                and np.array_equal(self.active, other.active))

    def segments(self) -> int:
        """Number of contiguous runs of an active (string, fret) bin."""
        a = self.active.astype(np.int8)
        starts = np.diff(a, axis=0, prepend=0) == 1
        return int(starts.sum())


def n_frames_for(duration_s: float, hop_s: float) -> int:
    return int(math.ceil(duration_s / hop_s - 1e-9))


def labels_from_score(score, hop_s: float = DEFAULT_HOP_S, n_frames: int | None = None) -> FrameLabelMatrix:
    """Bin (t, s, f) is set when a note on string s, fret f sounds at ``(t + 0.5) * hop_s``.

    Fret numbers come from the tablature, so bends and slides do not move a
    note to another bin.
    """
    if hop_s <= 0:
        raise LabelError("hop_s must be positive")
    if n_frames is None:
        n_frames = n_frames_for(score.total_duration_s, hop_s)
    if n_frames * hop_s < score.total_duration_s - 1e-9:
        raise LabelError(f"{n_frames} frames of {hop_s}s do not cover {score.total_duration_s}s")
    active = np.zeros((n_frames, N_STRINGS, N_FRETS), dtype=bool)
    centers = (np.arange(n_frames) + 0.5) * hop_s
    for lane in score.strings:
        for ev in lane:
            if not 0 <= ev.fret < N_FRETS:
                raise LabelError(f"fret {ev.fret} on string {ev.string} has no label bin")
            lo = np.searchsorted(centers, ev.onset_s, side="left")
            hi = np.searchsorted(centers, ev.end_s, side="left")
            active[lo:hi, ev.string - 1, :] = False
            active[lo:hi, ev.string - 1, ev.fret] = True
    return FrameLabelMatrix(active, hop_s)


def sidecar(labels: FrameLabelMatrix) -> dict:
    return {
        "schema": LABEL_SCHEMA,
        "hop_s": labels.hop_s,
        "n_frames": labels.n_frames,
        "strings": N_STRINGS,
        "frets": N_FRETS,
        "encoding": "packbits",
    }


def encode_labels(labels: FrameLabelMatrix) -> bytes:
    return np.packbits(labels.active.reshape(-1)).tobytes()


def save_labels(labels: FrameLabelMatrix, path) -> None:
    """Write the packed tensor to ``path`` and its sidecar to ``path + '.json'``."""
    path = str(path)
    atomic_write(path, encode_labels(labels))
    meta = json.dumps(sidecar(labels), sort_keys=True, indent=1) + "\n"
    atomic_write(path + ".json", meta.encode("utf-8"))


def load_labels(path) -> FrameLabelMatrix:
    path = str(path)
    with open(path + ".json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("schema") != LABEL_SCHEMA:
        raise LabelError(f"{path}: unsupported label schema {meta.get('schema')!r}")
    if (meta["strings"], meta["frets"]) != (N_STRINGS, N_FRETS):
        raise LabelError(f"{path}: unexpected label shape")
    with open(path, "rb") as fh:
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    n = meta["n_frames"] * N_STRINGS * N_FRETS
    bits = np.unpackbits(packed, count=n).astype(bool)
    return FrameLabelMatrix(bits.reshape(meta["n_frames"], N_STRINGS, N_FRETS), meta["hop_s"])


def labels_to_csv(labels: FrameLabelMatrix) -> str:
    """One ``frame,string,fret`` row per active bin; strings numbered from 1."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["frame", "string", "fret"])
    for t, s, f in np.argwhere(labels.active):
        writer.writerow([int(t), int(s) + 1, int(f)])
    return out.getvalue()
