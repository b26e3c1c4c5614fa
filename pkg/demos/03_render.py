# Per-string plucked-string synthesis, mixing and 24-bit WAV output.
import sys
from pathlib import Path

import numpy as np

from synthtab import HumanizeConfig, compile_track, load_presets, mix, parse_tab_dsl, render_string, write_wav
from synthtab.compiler import PerformanceEvent, PitchCurve
from synthtab.synth import read_wav

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)
presets = load_presets()
print(len(presets), "presets:", ", ".join(sorted(presets)[:5]), "...")

# tuning check: A4 should peak at 440 Hz
sr = 22050
ev = PerformanceEvent(1, 5, 69, 0.0, 1.0, 100, PitchCurve.flat(1.0))
x = render_string([ev], presets["strat_neck"], sr).samples[int(0.1 * sr):int(0.9 * sr)]
spec = np.abs(np.fft.rfft(x * np.hanning(len(x)), 1 << 18))
print("peak Hz", np.argmax(spec) * sr / (1 << 18))

tab = parse_tab_dsl("""
tempo 100 tpq 480
track 24
note s6 f0 @0 d1920
note s4 f2 @0 d1920
note s3 f2 @480 d480
note s2 f1 @960 d480 hammer_on
note s1 f0 @1440 d480 vibrato=35:5
note s5 f2 @1920 d960 palm_mute
""")
score = compile_track(tab.tracks[0], tab.tempo_bpm, tab.ticks_per_beat, HumanizeConfig(seed=1))

profile = presets["nylon_classical_finger"]
stems = [render_string(lane, profile, sr, seed=1, total_duration_s=score.total_duration_s, string_index=k)
         for k, lane in enumerate(score.strings)]
audio = mix(stems)
print("samples", len(audio), "duration", round(audio.duration_s, 3), "peak", round(audio.peak, 3))

path = out / "nylon.wav"
write_wav(audio, path)
back = read_wav(path)
print(back.sample_rate_hz, np.max(np.abs(back.samples - audio.samples)) <= 2.0 ** -23)
