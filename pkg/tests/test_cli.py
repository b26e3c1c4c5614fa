import csv
import json

import mido
import pytest

from synthtab.cli import main
from synthtab.labels import load_labels
from synthtab.synth import read_wav

TAB = """\
tempo 120
tpq 480
track 25 steel
note s1 f3 v100 @0 d480
note s2 f5 @480 d480 vibrato=30:5
note s6 f0 @0 d960
track 27 lead
note s1 f7 @0 d480 slide
note s1 f9 @480 d480
track 33 bass
note s1 f3 @0 d960
"""


@pytest.fixture
def song(tmp_path):
    path = tmp_path / "riff.tab"
    path.write_text(TAB)
    return path


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in list(__import__("os").environ):
        if key.startswith("SYNTHTAB_"):
            monkeypatch.delenv(key)


def test_convert_and_filter(song, tmp_path, capsys):
    out = tmp_path / "riff.json"
    assert main(["convert", str(song), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["schema"] == "synthtab-ir/1"
    assert main(["filter", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {"kept": [0, 1], "rejected": [{"track": 2, "reason": "program_out_of_range"}]}


def test_compile_dump(song, capsys):
    assert main(["compile", str(song), "--track", "1"]) == 0
    (item,) = json.loads(capsys.readouterr().out)
    lane = item["score"]["strings"][0]
    assert [e["fret"] for e in lane] == [7, 9]


def test_export_render_labels(song, tmp_path):
    d = tmp_path / "o"
    assert main(["export-midi", str(song), "-o", str(d), "--track", "0", "--timbre", "steel_parlor_pick"]) == 0
    mid = mido.MidiFile(d / "riff_track0__steel_parlor_pick.mid")
    assert len(mid.tracks) == 7
    assert main(["render", str(song), "-o", str(d), "--track", "0", "--timbre", "steel_parlor_pick",
                 "--sample-rate", "16000", "--labels"]) == 0
    assert read_wav(d / "riff_track0__steel_parlor_pick.wav").sample_rate_hz == 16000
    assert load_labels(d / "riff_track0__steel_parlor_pick.labels").hop_s == 512 / 16000
    assert main(["labels", str(song), "-o", str(d / "l"), "--track", "0", "--timbre", "steel_parlor_pick",
                 "--csv"]) == 0
    rows = list(csv.reader(open(d / "l" / "riff_track0__steel_parlor_pick.csv")))
    assert rows[0] == ["frame", "string", "fret"] and len(rows) > 1


def test_filtered_track_is_an_error(song, tmp_path, capsys):
    assert main(["render", str(song), "-o", str(tmp_path), "--track", "2"]) == 1
    assert "program_out_of_range" in capsys.readouterr().err


def test_build_split_stats_eval(song, tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i in range(3):
        (corpus / f"song{i}.tab").write_text(TAB)
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[synth]\ntimbres = ['steel_parlor_pick', 'tele_neck']\n")
    out = tmp_path / "ds"
    assert main(["build", str(corpus), str(out), "--config", str(cfg), "--workers", "1"]) == 0
    run = json.loads(capsys.readouterr().out)
    assert run["rendered"] == 6
    assert main(["build", str(corpus), str(out), "--config", str(cfg), "--workers", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["rendered"] == 0

    assert main(["split", str(out), "--ratios", "1:1:1", "--holdout-timbre", "tele_neck"]) == 0
    capsys.readouterr()
    entries = [json.loads(l) for l in (out / "manifest.jsonl").read_text().splitlines()]
    assert all(e["split"] == "val" for e in entries if e.get("timbre") == "tele_neck")

    assert main(["stats", str(out), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["tracks"]["total"] == 6
    assert main(["stats", str(out)]) == 0
    assert "total" in capsys.readouterr().out

    labels = out / "labels"
    report_path = tmp_path / "eval.json"
    assert main(["eval", str(labels), str(labels), "-o", str(report_path)]) == 0
    assert json.loads(report_path.read_text())["aggregate"]["f1"] == 1.0
    matrix = tmp_path / "m.csv"
    assert main(["eval", "--cell", "A", "B", str(labels / "song0"), str(labels / "song0"),
                 "--matrix-csv", str(matrix)]) == 0
    assert list(csv.reader(open(matrix))) == [["test\\train", "A"], ["B", "1.0000"]]


def test_partial_failure_exit_code(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "ok.tab").write_text("tempo 120 tpq 480\nnote s1 f0 @0 d480\n")
    (corpus / "high.tab").write_text(
        "tempo 120 tpq 480\ntrack 24\ntuning 76 71 67 62 57 52\nnote s1 f19 @0 d480 bend=2\n")
    code = main(["build", str(corpus), str(tmp_path / "o"), "--workers", "1", "--sample-rate", "8000"])
    assert code == 2


def test_fatal_exit_code(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "missing")]) == 1
    assert main(["convert", str(tmp_path / "missing.tab")]) == 1


def test_benchmark_subcommand(capsys):
    assert main(["benchmark", "--songs", "1", "--seconds", "2", "--workers", "1"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["renders"] == 7 and result["audio_minutes_per_minute"] > 0
