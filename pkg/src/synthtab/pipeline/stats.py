"""Corpus statistics in the shape of a per-instrument distribution table."""
from __future__ import annotations

from collections import Counter, defaultdict

from .manifest import DatasetManifest

GROUPS = ("acoustic", "electric")


def _pct(part, whole) -> float:
    return 100.0 * part / whole if whole else 0.0


def _table(counts: dict, keys, total) -> dict:
    return {str(k): {"count": counts.get(k, 0), "percent": _pct(counts.get(k, 0), total)}
            for k in keys}


def stats(manifest: DatasetManifest) -> dict:
    """Track counts, rendered-audio counts and hours per family and per program."""
    entries = manifest.entries
    track_program = {}
    track_family = {}
    for e in entries:
        track_program[e.track_id] = e.program
        track_family[e.track_id] = e.family
    programs = sorted(set(track_program.values()))
    families = sorted(set(GROUPS) | set(track_family.values()))

    tracks_by_family = Counter(track_family.values())
    tracks_by_program = Counter(track_program.values())
    renders_by_family = Counter(e.family for e in entries)
    renders_by_program = Counter(e.program for e in entries)
    seconds_by_family = defaultdict(float)
    seconds_by_program = defaultdict(float)
    timbres_by_family = defaultdict(set)
    for e in entries:
        seconds_by_family[e.family] += e.duration_s
        seconds_by_program[e.program] += e.duration_s
        timbres_by_family[e.family].add(e.timbre)
    n_tracks = len(track_program)
    n_renders = len(entries)
    total_seconds = sum(e.duration_s for e in entries)

    return {
        "tracks": {
            "total": n_tracks,
            "by_family": _table(tracks_by_family, families, n_tracks),
            "by_program": _table(tracks_by_program, programs, n_tracks),
        },
        "rendered_audio": {
            "total": n_renders,
            "by_family": _table(renders_by_family, families, n_renders),
            "by_program": _table(renders_by_program, programs, n_renders),
        },
        "hours": {
            "total": total_seconds / 3600.0,
            "by_family": {f: seconds_by_family.get(f, 0.0) / 3600.0 for f in families},
            "by_program": {str(p): seconds_by_program[p] / 3600.0 for p in programs},
        },
        "timbres": {f: len(timbres_by_family.get(f, ())) for f in families},
        "rejections": dict(sorted(Counter(r.reason.split(":")[0] for r in manifest.rejections).items())),
        "splits": dict(sorted(Counter(e.split for e in entries).items())),
    }


def format_table(report: dict) -> str:
    """Plain-text table: program, tracks (%), rendered audio (%), hours."""
    lines = [f"{'program':>8} {'tracks':>16} {'rendered':>16} {'hours':>10}"]
    for prog, row in report["tracks"]["by_program"].items():
        rend = report["rendered_audio"]["by_program"][prog]
        hours = report["hours"]["by_program"][prog]
        lines.append(f"{prog:>8} {row['count']:>7} ({row['percent']:5.2f}%) "
                     f"{rend['count']:>7} ({rend['percent']:5.2f}%) {hours:>10.3f}")
    lines.append(f"{'total':>8} {report['tracks']['total']:>16} "
                 f"{report['rendered_audio']['total']:>16} {report['hours']['total']:>10.3f}")
    return "\n".join(lines)
