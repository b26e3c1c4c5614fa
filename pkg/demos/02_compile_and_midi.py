# Tick-based notes -> timed per-string events -> six-channel MIDI file.
import io
import sys
from pathlib import Path

import mido

from synthtab import HumanizeConfig, compile_track, export_smf, filter_tracks, parse_tab_dsl
from synthtab.compiler import tick_to_seconds
from synthtab.midi import KeyswitchMap

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

tab = parse_tab_dsl("""
tempo 120 tpq 960
track 27 lead
note s2 f5 @0 d960 bend=2
note s1 f3 @960 d960 vibrato=40:5
note s3 f4 @960 d480 slide
note s3 f6 @1440 d480
track 40 violin
note s1 f0 @0 d960
""")

report = filter_tracks(tab)
print("kept", report.kept, "rejected", report.rejected)

print(tick_to_seconds(960, 120, 960))   # 0.5

track = tab.tracks[0]
exact = compile_track(track, tab.tempo_bpm, tab.ticks_per_beat, HumanizeConfig.off())
human = compile_track(track, tab.tempo_bpm, tab.ticks_per_beat, HumanizeConfig(seed=7))
for a, b in zip(exact.events, human.events):
    print(a.string, a.pitch, f"{a.onset_s:.4f} -> {b.onset_s:.4f}", a.velocity, "->", b.velocity,
          f"curve max {a.pitch_curve.max_abs():.0f} cents")

bend = exact.strings[1][0]
print([round(float(bend.pitch_curve(t)), 1) for t in (0.0, 0.125, 0.25, 0.4)])  # rise then hold

data = export_smf(human, KeyswitchMap(bend_range_semitones=2), ppq=960, tempo_bpm=tab.tempo_bpm)
(out / "lead.mid").write_bytes(data)

mid = mido.MidiFile(file=io.BytesIO(data))
for i, t in enumerate(mid.tracks):
    kinds = [m.type for m in t if not m.is_meta]
    print(i, len(kinds), sorted(set(kinds)))
