"""Command-line entry point: ``synthtab <subcommand> ...``.

Exit status is 0 on success, 2 when some entries failed, 1 on fatal errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .compiler import compile_track, filter_tracks, score_to_dict
from .dsl import parse_tab_dsl
from .errors import SynthTabError
from .interchange import serialize_interchange
from .labels import labels_to_csv, load_labels, save_labels
from .metrics import aggregate, tab_f1
from .midi import KeyswitchMap, export_smf
from .pipeline.benchmark import run_benchmark
from .pipeline.build import build, job_seed, load_song, render_track, select_timbres
from .pipeline.config import SplitSpec, load_config
from .pipeline.manifest import read_manifest, write_manifest
from .pipeline.splits import make_splits
from .pipeline.stats import format_table, stats
from .synth.audio import atomic_write, write_wav
from .synth.timbre import load_presets

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2

log = logging.getLogger("synthtab")


def _config(args, **overrides):
    kw = {}
    if getattr(args, "workers", None) is not None:
        kw["workers"] = args.workers
    if getattr(args, "sample_rate", None) is not None:
        overrides.setdefault("synth", {})["sample_rate"] = args.sample_rate
    if overrides:
        kw.update(overrides)
    return load_config(args.config, **kw)


def _emit(text: str, out):
    if out:
        atomic_write(out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _track_jobs(args, config):
    """Yield ``(song_id, tab, track_index, timbre_name, seed)`` for the kept tracks of one file."""
    path = Path(args.src)
    tab = load_song(path)
    presets = load_presets(config.synth.presets or None)
    report = filter_tracks(tab, frozenset(config.synth.programs))
    indices = report.kept if args.track is None else [args.track]
    for idx in indices:
        if idx not in report.kept:
            raise SynthTabError(f"track {idx} was filtered out: {report.reason_for(idx)}")
        names = args.timbre or select_timbres(tab.tracks[idx].midi_program, presets, config)
        for name in names:
            if name not in presets:
                raise SynthTabError(f"unknown timbre {name!r}")
            seed = job_seed(config.humanize.seed, path.stem, idx, name)
            yield path.stem, tab, idx, presets[name], seed


def cmd_convert(args):
    tab = parse_tab_dsl(Path(args.src).read_text("utf-8"))
    data = serialize_interchange(tab)
    if args.output:
        atomic_write(args.output, data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def cmd_filter(args):
    config = _config(args)
    tab = load_song(Path(args.src))
    report = filter_tracks(tab, frozenset(config.synth.programs))
    doc = {"kept": list(report.kept),
           "rejected": [{"track": i, "reason": r} for i, r in report.rejected]}
    _emit(json.dumps(doc, indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_compile(args):
    config = _config(args)
    tab = load_song(Path(args.src))
    report = filter_tracks(tab, frozenset(config.synth.programs))
    indices = report.kept if args.track is None else [args.track]
    doc = []
    for idx in indices:
        score = compile_track(tab.tracks[idx], tab.tempo_bpm, tab.ticks_per_beat,
                              config.humanize, track_index=idx)
        doc.append({"track": idx, "score": score_to_dict(score)})
    _emit(json.dumps(doc, indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_export_midi(args):
    config = _config(args)
    ks = KeyswitchMap(bend_range_semitones=args.bend_range)
    os.makedirs(args.output, exist_ok=True)
    for song_id, tab, idx, profile, seed in _track_jobs(args, config):
        score = compile_track(tab.tracks[idx], tab.tempo_bpm, tab.ticks_per_beat,
                              config.humanize, seed=seed, track_index=idx)
        data = export_smf(score, ks, ppq=args.ppq, tempo_bpm=tab.tempo_bpm)
        out = os.path.join(args.output, f"{song_id}_track{idx}__{profile.name}.mid")
        atomic_write(out, data)
        print(out)
    return EXIT_OK


def cmd_render(args):
    config = _config(args)
    os.makedirs(args.output, exist_ok=True)
    for song_id, tab, idx, profile, seed in _track_jobs(args, config):
        audio, labels, _ = render_track(tab, idx, profile, config, seed)
        stem = os.path.join(args.output, f"{song_id}_track{idx}__{profile.name}")
        write_wav(audio, stem + ".wav")
        if args.labels:
            save_labels(labels, stem + ".labels")
        print(stem + ".wav")
    return EXIT_OK


def cmd_labels(args):
    config = _config(args)
    os.makedirs(args.output, exist_ok=True)
    for song_id, tab, idx, profile, seed in _track_jobs(args, config):
        _, labels, _ = render_track(tab, idx, profile, config, seed)
        stem = os.path.join(args.output, f"{song_id}_track{idx}__{profile.name}")
        save_labels(labels, stem + ".labels")
        if args.csv:
            atomic_write(stem + ".csv", labels_to_csv(labels).encode("utf-8"))
        print(stem + ".labels")
    return EXIT_OK


def cmd_build(args):
    config = _config(args)
    manifest = build(args.corpus, config, args.out)
    print(json.dumps(manifest.run, indent=1))
    return EXIT_PARTIAL if manifest.run["failed"] else EXIT_OK


def cmd_split(args):
    config = _config(args)
    spec = config.splits
    if args.ratios or args.holdout_timbre is not None or args.holdout_fraction is not None \
            or args.seed is not None:
        spec = SplitSpec(
            ratios=tuple(int(r) for r in args.ratios.split(":")) if args.ratios else spec.ratios,
            holdout_timbres=args.holdout_timbre if args.holdout_timbre is not None else spec.holdout_timbres,
            holdout_song_fraction=(args.holdout_fraction if args.holdout_fraction is not None
                                   else spec.holdout_song_fraction),
            seed=args.seed if args.seed is not None else spec.seed,
        )
    manifest = make_splits(read_manifest(args.manifest), spec)
    summary = {"stats": stats(manifest), "song_splits": dict(sorted(manifest.song_splits.items()))}
    write_manifest(manifest, args.manifest, summary)
    print(json.dumps(summary["stats"]["splits"], indent=1))
    return EXIT_OK


def cmd_stats(args):
    report = stats(read_manifest(args.manifest))
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        print(format_table(report))
    return EXIT_OK


def _label_pairs(pred, truth):
    pred, truth = Path(pred), Path(truth)
    if pred.is_dir():
        pairs = []
        for p in sorted(pred.rglob("*.labels")):
            rel = p.relative_to(pred)
            pairs.append((str(rel), p, truth / rel))
        return pairs
    return [(pred.name, pred, truth)]


def _evaluate(pred, truth, mode):
    reports = {}
    for name, p, t in _label_pairs(pred, truth):
        reports[name] = tab_f1(load_labels(p), load_labels(t))
    return aggregate(list(reports.values()), mode), reports


def cmd_eval(args):
    doc = {}
    if args.pred and args.truth:
        total, per_file = _evaluate(args.pred, args.truth, args.mode)
        doc = {"mode": args.mode, "aggregate": total.to_dict(),
               "files": {k: v.to_dict() for k, v in per_file.items()}}
    if args.cell:
        cells = {}
        for train, test, pred, truth in args.cell:
            cells[(test, train)] = _evaluate(pred, truth, args.mode)[0].f1
        trains = sorted({k[1] for k in cells})
        tests = sorted({k[0] for k in cells})
        doc["matrix"] = {test: {train: cells.get((test, train)) for train in trains} for test in tests}
        if args.matrix_csv:
            with open(args.matrix_csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["test\\train", *trains])
                for test in tests:
                    writer.writerow([test, *("" if cells.get((test, tr)) is None
                                             else f"{cells[(test, tr)]:.4f}" for tr in trains)])
    if not doc:
        raise SynthTabError("eval needs PRED and TRUTH or at least one --cell")
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def cmd_benchmark(args):
    config = _config(args)
    result = run_benchmark(args.songs, args.seconds, config, seed=args.seed)
    print(json.dumps(result, indent=1))
    return EXIT_PARTIAL if result["failed"] else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthtab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML pipeline config")
        p.set_defaults(func=func)
        return p

    def add_track_opts(p):
        p.add_argument("src", help="interchange .json or DSL .tab file")
        p.add_argument("-o", "--output", required=True, help="output directory")
        p.add_argument("--track", type=int, help="only this track index")
        p.add_argument("--timbre", action="append", help="timbre preset (repeatable)")

    p = add("convert", cmd_convert, "tab DSL -> interchange JSON")
    p.add_argument("src")
    p.add_argument("-o", "--output")

    p = add("filter", cmd_filter, "report kept and rejected tracks")
    p.add_argument("src")
    p.add_argument("-o", "--output")

    p = add("compile", cmd_compile, "dump compiled per-string events as JSON")
    p.add_argument("src")
    p.add_argument("--track", type=int)
    p.add_argument("-o", "--output")

    p = add("export-midi", cmd_export_midi, "write six-channel SMF files")
    add_track_opts(p)
    p.add_argument("--ppq", type=int, default=960)
    p.add_argument("--bend-range", type=int, default=2)

    p = add("render", cmd_render, "render tracks to 24-bit WAV")
    add_track_opts(p)
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--labels", action="store_true", help="also write label files")

    p = add("labels", cmd_labels, "write frame label files")
    add_track_opts(p)
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--csv", action="store_true")

    p = add("build", cmd_build, "render a whole corpus into a dataset")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--workers", type=int)
    p.add_argument("--sample-rate", type=int)

    p = add("split", cmd_split, "assign train/val/test splits in a manifest")
    p.add_argument("manifest", help="dataset directory or manifest.jsonl")
    p.add_argument("--ratios", help="e.g. 8:1:1")
    p.add_argument("--holdout-timbre", action="append")
    p.add_argument("--holdout-fraction", type=float)
    p.add_argument("--seed", type=int)

    p = add("stats", cmd_stats, "per-instrument corpus statistics")
    p.add_argument("manifest")
    p.add_argument("--json", action="store_true")

    p = add("eval", cmd_eval, "tablature precision/recall/F1")
    p.add_argument("pred", nargs="?")
    p.add_argument("truth", nargs="?")
    p.add_argument("--mode", choices=("micro", "macro"), default="micro")
    p.add_argument("--cell", nargs=4, action="append",
                   metavar=("TRAIN", "TEST", "PRED", "TRUTH"), help="one cross-dataset matrix cell")
    p.add_argument("--matrix-csv")
    p.add_argument("-o", "--output")

    p = add("benchmark", cmd_benchmark, "time a build of a synthetic corpus")
    p.add_argument("--songs", type=int, default=2)
    p.add_argument("--seconds", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--sample-rate", type=int)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SynthTabError, OSError, ValueError) as exc:
        print(f"synthtab: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
