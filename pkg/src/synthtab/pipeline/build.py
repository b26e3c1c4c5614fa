"""Batch dataset build: scan, filter, compile, render, label, index.

Each (track, timbre) pair is an independent job whose randomness is derived
from the song id, track index and timbre name, so outputs are identical
whatever the worker count or completion order.  Files are written to a
temporary name and renamed into place; a rerun skips every job whose recorded
hash and output checksums still match.
"""
from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing
import os
import tempfile
import time
import zlib
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..compiler import compile_track, filter_tracks
from ..dsl import parse_tab_dsl
from ..errors import ConfigError, SynthTabError
from ..interchange import parse_interchange, to_dict
from ..labels import labels_from_score, n_frames_for, save_labels
from ..synth.audio import mix, write_wav
from ..synth.karplus import render_string
from ..synth.timbre import PROGRAM_FAMILY, load_presets, program_group
from ..tablature import Tablature
from .config import PipelineConfig, config_to_dict
from .manifest import MANIFEST_NAME, DatasetManifest, ManifestEntry, Rejection, read_manifest, write_manifest
from .stats import stats

log = logging.getLogger(__name__)

PIPELINE_VERSION = "synthtab-build/1"
CORPUS_SUFFIXES = (".json", ".tab")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def job_seed(base_seed: int, song_id: str, track_index: int, timbre: str) -> int:
    """Stable per-job seed (``hash()`` is salted per process, crc32 is not)."""
    seq = np.random.SeedSequence([base_seed, zlib.crc32(song_id.encode()), track_index,
                                  zlib.crc32(timbre.encode())])
    return int(seq.generate_state(1)[0])


def render_track(tab: Tablature, track_index: int, profile, config: PipelineConfig, seed: int):
    """Compile, render and label one track under one timbre."""
    track = tab.tracks[track_index]
    sr = config.synth.sample_rate
    score = compile_track(track, tab.tempo_bpm, tab.ticks_per_beat, config.humanize,
                          seed=seed, track_index=track_index)
    stems = [render_string(lane, profile, sr, seed=seed, total_duration_s=score.total_duration_s,
                           string_index=k)
             for k, lane in enumerate(score.strings)]
    audio = mix(stems)
    labels = labels_from_score(score, config.hop_s, n_frames_for(audio.duration_s, config.hop_s))
    return audio, labels, score


@dataclass(frozen=True)
class Job:
    song_id: str
    track_id: str
    track_index: int
    program: int
    timbre: str
    seed: int
    job_hash: str
    audio_path: str
    label_path: str


def load_song(path: Path) -> Tablature:
    data = path.read_bytes()
    if path.suffix == ".tab":
        return parse_tab_dsl(data.decode("utf-8"))
    return parse_interchange(data)


def scan_corpus(corpus_dir) -> list:
    corpus = Path(corpus_dir)
    if not corpus.is_dir():
        raise FileNotFoundError(f"corpus directory {corpus} does not exist")
    return sorted(p for p in corpus.iterdir() if p.suffix in CORPUS_SUFFIXES and p.is_file())


def select_timbres(program: int, presets: dict, config: PipelineConfig) -> list:
    names = list(config.synth.timbres) or sorted(presets)
    unknown = [n for n in names if n not in presets]
    if unknown:
        raise ConfigError(f"unknown timbres {unknown}")
    if config.synth.timbre_policy == "all":
        return sorted(names)
    if program not in PROGRAM_FAMILY:
        return []
    group = program_group(program)
    return sorted(n for n in names if presets[n].group == group)


def _job_hash(tab: Tablature, track_index: int, profile, config: PipelineConfig, seed: int) -> str:
    single = Tablature(tab.tempo_bpm, tab.ticks_per_beat, [tab.tracks[track_index]])
    payload = {
        "version": PIPELINE_VERSION,
        "track": to_dict(single),
        "timbre": profile.to_dict(),
        "humanize": asdict(config.humanize),
        "sample_rate": config.synth.sample_rate,
        "hop_samples": config.labels.hop_samples,
        "seed": seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def plan_jobs(corpus_dir, config: PipelineConfig, presets: dict):
    """Return ``(songs, jobs, rejections)``; ``songs`` maps song id to Tablature."""
    songs, jobs, rejections = {}, [], []
    programs = frozenset(config.synth.programs)
    for path in scan_corpus(corpus_dir):
        song_id = path.stem
        try:
            tab = load_song(path)
        except (SynthTabError, UnicodeDecodeError, OSError) as exc:
            rejections.append(Rejection(song_id, "", f"parse_error: {exc}"))
            continue
        songs[song_id] = tab
        report = filter_tracks(tab, programs)
        for idx, reason in report.rejected:
            rejections.append(Rejection(song_id, f"{song_id}#{idx}", reason,
                                        program=tab.tracks[idx].midi_program))
        for idx in report.kept:
            track = tab.tracks[idx]
            track_id = f"{song_id}#{idx}"
            if not track.notes:
                rejections.append(Rejection(song_id, track_id, "empty_track", program=track.midi_program))
                continue
            timbres = select_timbres(track.midi_program, presets, config)
            if not timbres:
                rejections.append(Rejection(song_id, track_id, "no_timbre", program=track.midi_program))
            for name in timbres:
                seed = job_seed(config.humanize.seed, song_id, idx, name)
                stem = f"{song_id}/track{idx}__{name}"
                jobs.append(Job(
                    song_id=song_id, track_id=track_id, track_index=idx,
                    program=track.midi_program, timbre=name, seed=seed,
                    job_hash=_job_hash(tab, idx, presets[name], config, seed),
                    audio_path=f"audio/{stem}.wav", label_path=f"labels/{stem}.labels",
                ))
    return songs, jobs, rejections


def _run_job(job: Job, tab: Tablature, profile, config: PipelineConfig, out_dir: str):
    try:
        audio, labels, _ = render_track(tab, job.track_index, profile, config, job.seed)
        audio_abs = os.path.join(out_dir, job.audio_path)
        label_abs = os.path.join(out_dir, job.label_path)
        os.makedirs(os.path.dirname(audio_abs), exist_ok=True)
        os.makedirs(os.path.dirname(label_abs), exist_ok=True)
        save_labels(labels, label_abs)
        write_wav(audio, audio_abs)
        entry = ManifestEntry(
            song_id=job.song_id, track_id=job.track_id, program=job.program,
            family=program_group(job.program), instrument=PROGRAM_FAMILY.get(job.program, "other"),
            timbre=job.timbre, duration_s=audio.duration_s,
            audio_path=job.audio_path, label_path=job.label_path,
            job_hash=job.job_hash, audio_sha256=sha256_file(audio_abs),
            label_sha256=sha256_file(label_abs),
        )
        return job, entry, None
    except Exception as exc:  # one bad job never aborts the batch
        return job, None, f"{type(exc).__name__}: {exc}"


def _reusable(entry: ManifestEntry | None, job: Job, out_dir: str) -> bool:
    if entry is None or entry.job_hash != job.job_hash:
        return False
    audio_abs = os.path.join(out_dir, entry.audio_path)
    label_abs = os.path.join(out_dir, entry.label_path)
    if not (os.path.isfile(audio_abs) and os.path.isfile(label_abs)
            and os.path.isfile(label_abs + ".json")):
        return False
    return (sha256_file(audio_abs) == entry.audio_sha256
            and sha256_file(label_abs) == entry.label_sha256)


def _check_writable(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    fd, probe = tempfile.mkstemp(dir=out_dir, prefix=".probe-")
    os.close(fd)
    os.unlink(probe)


def build(corpus_dir, config: PipelineConfig | None = None, out_dir=".") -> DatasetManifest:
    """Render every kept track under its assigned timbres into ``out_dir``.

    Returns the manifest; ``manifest.run`` holds counts of rendered, skipped
    and failed jobs for this invocation.
    """
    config = config or PipelineConfig()
    out_dir = os.fspath(out_dir)
    _check_writable(out_dir)
    started = time.perf_counter()
    presets = load_presets(config.synth.presets or None)
    songs, jobs, rejections = plan_jobs(corpus_dir, config, presets)

    previous = {}
    if os.path.isfile(os.path.join(out_dir, MANIFEST_NAME)):
        try:
            previous = {e.key: e for e in read_manifest(out_dir).entries}
        except (ValueError, TypeError, KeyError) as exc:
            log.warning("ignoring unreadable previous manifest: %s", exc)

    entries, pending = [], []
    for job in jobs:
        old = previous.get((job.track_id, job.timbre))
        if _reusable(old, job, out_dir):
            entries.append(ManifestEntry(**{**asdict(old), "split": "none"}))
        else:
            pending.append(job)
    skipped = len(entries)

    results = []
    workers = min(config.worker_count, max(1, len(pending)))
    if workers <= 1:
        for job in pending:
            results.append(_run_job(job, songs[job.song_id], presets[job.timbre], config, out_dir))
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = [pool.submit(_run_job, job, songs[job.song_id], presets[job.timbre],
                                   config, out_dir) for job in pending]
            for fut in as_completed(futures):
                results.append(fut.result())

    failed = 0
    for job, entry, error in results:
        if entry is not None:
            entries.append(entry)
        else:
            failed += 1
            log.error("job %s / %s failed: %s", job.track_id, job.timbre, error)
            rejections.append(Rejection(job.song_id, job.track_id, f"render_failed: {error}",
                                        timbre=job.timbre, program=job.program))

    manifest = DatasetManifest(tuple(entries), tuple(rejections))
    summary = {"stats": stats(manifest), "config": config_to_dict(config),
               "version": PIPELINE_VERSION}
    write_manifest(manifest, out_dir, summary)
    elapsed = time.perf_counter() - started
    rendered_s = sum(e.duration_s for _, e, _ in results if e is not None)
    run = {"jobs": len(jobs), "rendered": len(results) - failed, "skipped": skipped,
           "failed": failed, "elapsed_s": elapsed, "rendered_audio_s": rendered_s,
           "workers": workers}
    log.info("build finished: %s", run)
    return DatasetManifest(manifest.entries, manifest.rejections, run=run)
