# Tablature model, tab DSL and the JSON interchange format.
import numpy as np

from synthtab import parse_interchange, parse_tab_dsl, serialize_interchange
from synthtab.generate import random_tablature

text = """
tempo 96 tpq 480
track 25 "steel"
tuning E4 B3 G3 D3 A2 E2
note s6 f0 v110 @0 d960          # open low E
note s3 f2 @0 d480
note s2 f3 @480 d480 hammer_on
note s1 f5 @960 d960 bend=1 vibrato=30:5.5
"""

tab = parse_tab_dsl(text)
track = tab.tracks[0]
print(tab.tempo_bpm, tab.ticks_per_beat, track.midi_program, track.tuning.pitches)
for n in track.notes:
    print(n.string, n.fret, track.pitch_of(n), n.onset_tick, n.duration_tick, sorted(n.technique_kinds))

data = serialize_interchange(tab)   # canonical bytes, sorted keys
print(data.decode()[:200])
assert parse_interchange(data) == tab

# a later onset on the same string cuts the earlier note short
overlap = parse_tab_dsl("tempo 120 tpq 480\nnote s1 f0 @0 d960\nnote s1 f2 @240 d240\n")
print([n.duration_tick for n in overlap.tracks[0].notes])   # [240, 240]

# random corpus round trip
rng = np.random.default_rng(0)
tabs = [random_tablature(rng, n_tracks=3) for _ in range(20)]
print(all(parse_interchange(serialize_interchange(t)) == t for t in tabs))
