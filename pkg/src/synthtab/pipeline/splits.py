"""Song-level train/val/test splits with timbre and song holdouts."""
from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np

from ..errors import SplitError
from .config import SplitSpec
from .manifest import DatasetManifest

SPLIT_NAMES = ("train", "val", "test")
HOLDOUT = "holdout"


def allocate(n: int, ratios) -> list:
    """Split ``n`` items by ``ratios`` with the largest-remainder method."""
    total = sum(ratios)
    quotas = [Fraction(n * r, total) for r in ratios]
    counts = [math.floor(q) for q in quotas]
    remainders = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    return counts


def assign_songs(song_ids, spec: SplitSpec) -> dict:
    """Map each song to ``train``, ``val``, ``test`` or ``holdout``.

    Songs are shuffled with ``spec.seed``; the first ``round(fraction * n)``
    are held out, the rest are cut by ``spec.ratios``.
    """
    songs = sorted(set(song_ids))
    if not songs:
        raise SplitError("no songs to split")
    rng = np.random.default_rng(spec.seed)
    order = [songs[i] for i in rng.permutation(len(songs))]
    n_hold = math.floor(spec.holdout_song_fraction * len(songs) + Fraction(1, 2))
    rest = order[n_hold:]
    counts = allocate(len(rest), spec.ratios)
    if min(counts) < 1:
        raise SplitError(f"{len(rest)} songs cannot fill ratios {spec.ratios} with one song each")
    out = {s: HOLDOUT for s in order[:n_hold]}
    pos = 0
    for name, count in zip(SPLIT_NAMES, counts):
        for s in rest[pos:pos + count]:
            out[s] = name
        pos += count
    return out


def make_splits(manifest: DatasetManifest, spec: SplitSpec) -> DatasetManifest:
    """Assign every entry a split.

    Entries rendered with a held-out timbre, and every entry of a held-out
    song, go to validation; everything else follows its song's split.
    """
    if not manifest.entries:
        raise SplitError("manifest has no entries")
    song_split = assign_songs(manifest.song_ids, spec)
    entries = []
    for e in manifest.entries:
        split = song_split[e.song_id]
        if split == HOLDOUT or e.timbre in spec.holdout_timbres:
            split = "val"
        entries.append(replace(e, split=split))
    return manifest.with_entries(entries, song_split)
