import pytest

from synthtab.pipeline.manifest import DatasetManifest, ManifestEntry, Rejection
from synthtab.pipeline.stats import format_table, stats

FAMILY = {24: ("acoustic", "acoustic_nylon"), 25: ("acoustic", "acoustic_steel"),
          26: ("electric", "electric_jazz"), 27: ("electric", "electric_clean")}


def entries_for(program, n_tracks, n_renders, hours, prefix):
    """Spread ``n_renders`` renders over ``n_tracks`` tracks with total ``hours``."""
    group, inst = FAMILY[program]
    out = []
    per = n_renders // n_tracks
    extra = n_renders - per * n_tracks
    seconds = hours * 3600.0 / n_renders
    for t in range(n_tracks):
        for k in range(per + (1 if t < extra else 0)):
            out.append(ManifestEntry(
                song_id=f"{prefix}{t}", track_id=f"{prefix}{t}#0", program=program,
                family=group, instrument=inst, timbre=f"tim{k}", duration_s=seconds,
                audio_path="", label_path=""))
    return out


def test_small_fixture_shares():
    entries = entries_for(24, 2, 4, 1.0, "a") + entries_for(26, 2, 6, 2.0, "b")
    report = stats(DatasetManifest(tuple(entries)))
    assert report["tracks"]["by_program"]["24"]["percent"] == 50.0
    assert report["tracks"]["by_family"]["electric"]["percent"] == 50.0
    assert report["rendered_audio"]["by_program"]["26"]["count"] == 6
    assert report["hours"]["total"] == pytest.approx(3.0)


def test_empty_manifest():
    report = stats(DatasetManifest())
    assert report["tracks"]["total"] == 0
    assert report["hours"]["total"] == 0.0
    assert all(v["count"] == 0 and v["percent"] == 0.0 for v in report["tracks"]["by_family"].values())


def test_table_shaped_distribution():
    # a four-program reference distribution; shares are compared at two decimals
    rows = {24: (5501, 38507, 1510), 25: (5149, 36043, 1690),
            26: (2989, 47824, 1162), 27: (1572, 25152, 2338)}
    entries = []
    for program, (tracks, renders, hours) in rows.items():
        entries += entries_for(program, tracks, renders, hours, f"p{program}_")
    report = stats(DatasetManifest(tuple(entries)))
    track_pct = {p: round(report["tracks"]["by_program"][str(p)]["percent"], 2) for p in rows}
    render_pct = {p: round(report["rendered_audio"]["by_program"][str(p)]["percent"], 2) for p in rows}
    assert track_pct == {24: 36.16, 25: 33.85, 26: 19.65, 27: 10.33}
    assert render_pct == {24: 26.10, 25: 24.43, 26: 32.42, 27: 17.05}
    assert report["tracks"]["total"] == 15211
    assert report["hours"]["total"] == pytest.approx(6700.0)


def test_rejections_and_table_text():
    m = DatasetManifest(tuple(entries_for(25, 1, 2, 0.5, "s")),
                        (Rejection("x", "x#0", "too_many_strings"),
                         Rejection("y", "y#1", "render_failed: RenderError: boom")))
    report = stats(m)
    assert report["rejections"] == {"render_failed": 1, "too_many_strings": 1}
    text = format_table(report)
    assert "25" in text and "total" in text
