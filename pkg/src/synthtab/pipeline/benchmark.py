"""Throughput benchmark: build a synthetic corpus and time it."""
from __future__ import annotations

import tempfile
import time
from pathlib import Path

import numpy as np

from ..generate import riff_tablature
from ..interchange import serialize_interchange
from .build import build
from .config import PipelineConfig


def write_benchmark_corpus(corpus_dir, n_songs: int, seconds: float, seed: int = 0) -> None:
    """Alternate acoustic and electric programs so both timbre groups are exercised."""
    rng = np.random.default_rng(seed)
    corpus = Path(corpus_dir)
    corpus.mkdir(parents=True, exist_ok=True)
    for i in range(n_songs):
        tab = riff_tablature(rng, seconds, program=(24, 26, 25, 27)[i % 4], title=f"bench{i}")
        (corpus / f"bench{i:03d}.json").write_bytes(serialize_interchange(tab))


def run_benchmark(n_songs: int = 2, seconds: float = 60.0, config: PipelineConfig | None = None,
                  seed: int = 0) -> dict:
    """Render the corpus from scratch; report minutes of audio per wall-clock minute."""
    config = config or PipelineConfig()
    with tempfile.TemporaryDirectory(prefix="synthtab-bench-") as tmp:
        corpus = Path(tmp) / "corpus"
        write_benchmark_corpus(corpus, n_songs, seconds, seed)
        start = time.perf_counter()
        manifest = build(corpus, config, Path(tmp) / "out")
        wall = time.perf_counter() - start
    audio_s = sum(e.duration_s for e in manifest.entries)
    return {
        "songs": n_songs,
        "renders": len(manifest.entries),
        "failed": manifest.run["failed"],
        "workers": manifest.run["workers"],
        "audio_minutes": audio_s / 60.0,
        "wall_minutes": wall / 60.0,
        "audio_minutes_per_minute": (audio_s / wall) if wall > 0 else float("inf"),
    }
