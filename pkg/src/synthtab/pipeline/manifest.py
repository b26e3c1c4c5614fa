"""Dataset manifest: line-delimited JSON records plus a summary document."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace

from ..synth.audio import atomic_write

MANIFEST_NAME = "manifest.jsonl"
SUMMARY_NAME = "summary.json"
SPLITS = ("train", "val", "test", "none")


@dataclass(frozen=True)
class ManifestEntry:
    song_id: str
    track_id: str
    program: int
    family: str  # instrument group: acoustic / electric
    instrument: str  # acoustic_nylon, acoustic_steel, electric_jazz, electric_clean
    timbre: str
    duration_s: float
    audio_path: str
    label_path: str
    split: str = "none"
    job_hash: str = ""
    audio_sha256: str = ""
    label_sha256: str = ""

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValueError(f"{self.track_id}/{self.timbre}: duration must be positive")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def key(self):
        return (self.track_id, self.timbre)


@dataclass(frozen=True)
class Rejection:
    """A track (or whole song when ``track_id`` is empty) left out of the dataset."""

    song_id: str
    track_id: str
    reason: str
    timbre: str = ""
    program: int = -1


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple = ()
    rejections: tuple = ()
    song_splits: dict = field(default_factory=dict, compare=False)
    run: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: (e.song_id, e.track_id, e.timbre)))
        keys = [e.key for e in entries]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (track_id, timbre) entries in manifest")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "rejections", tuple(sorted(
            self.rejections, key=lambda r: (r.song_id, r.track_id, r.timbre, r.reason))))

    def __len__(self):
        return len(self.entries)

    @property
    def song_ids(self) -> list:
        return sorted({e.song_id for e in self.entries})

    def with_entries(self, entries, song_splits=None) -> "DatasetManifest":
        return replace(self, entries=tuple(entries),
                       song_splits=dict(song_splits if song_splits is not None else self.song_splits))

    def to_jsonl(self) -> str:
        lines = [json.dumps({"record": "entry", **asdict(e)}, sort_keys=True) for e in self.entries]
        lines += [json.dumps({"record": "rejection", **asdict(r)}, sort_keys=True)
                  for r in self.rejections]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "DatasetManifest":
        entries, rejections = [], []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("record", None)
            if kind == "entry":
                entries.append(ManifestEntry(**rec))
            elif kind == "rejection":
                rejections.append(Rejection(**rec))
            else:
                raise ValueError(f"manifest line {lineno}: unknown record type {kind!r}")
        return cls(tuple(entries), tuple(rejections))


def write_manifest(manifest: DatasetManifest, out_dir, summary: dict | None = None) -> None:
    atomic_write(os.path.join(out_dir, MANIFEST_NAME), manifest.to_jsonl().encode("utf-8"))
    if summary is not None:
        text = json.dumps(summary, sort_keys=True, indent=1) + "\n"
        atomic_write(os.path.join(out_dir, SUMMARY_NAME), text.encode("utf-8"))


def read_manifest(path) -> DatasetManifest:
    """``path`` may be the manifest file or the directory holding it."""
    path = os.fspath(path)
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST_NAME)
    with open(path, "r", encoding="utf-8") as fh:
        return DatasetManifest.from_jsonl(fh.read())
