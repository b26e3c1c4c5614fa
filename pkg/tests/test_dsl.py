import json
from fractions import Fraction

import pytest

from synthtab.dsl import note_name_to_pitch, parse_tab_dsl
from synthtab.errors import DslError
from synthtab.interchange import parse_interchange
from synthtab.tablature import STANDARD_TUNING, NoteEvent, Tablature, Technique, Track, Tuning

from test_interchange import MINIMAL


def test_matches_minimal_interchange_document():
    tab = parse_tab_dsl("tempo 120 tpq 960\nnote s1 f0 v96 @0 d960\n")
    assert tab == parse_interchange(json.dumps(MINIMAL))


def test_unknown_directive_reports_line():
    with pytest.raises(DslError) as err:
        parse_tab_dsl("tempo 120 tpq 960\n# comment\nstrum s1\n")
    assert err.value.line == 3


@pytest.mark.parametrize("line", [
    "note s1 f0 @0",              # missing duration
    "note s1 f20 @0 d10",         # fret out of range
    "note s1 f0 @0 d10 bend=9",   # bend too wide
    "note s1 f0 @0 d10 tapping",  # unknown technique
    "note s7 f0 @0 d10",          # string not in tuning
])
def test_bad_notes(line):
    with pytest.raises(DslError) as err:
        parse_tab_dsl(f"tempo 120 tpq 960\n{line}\n")
    assert err.value.line == 2


def test_needs_tempo_and_tpq():
    with pytest.raises(DslError):
        parse_tab_dsl("note s1 f0 @0 d10\n")


def test_note_names():
    assert note_name_to_pitch("C4") == 60
    assert note_name_to_pitch("E2") == 40
    assert note_name_to_pitch("F#3") == 54
    assert note_name_to_pitch("Bb3") == 58


FIXTURE = """\
# twelve-note fixture
tempo 90
tpq 480
track 25 "Steel Rhythm"
tuning D4 A3 F3 C3 G2 D2   # drop-ish open tuning
note s6 f0 v110 @0 d960
note s1 f3 @0 d480
note s2 f5 v80 @480 d480 hammer_on
note s3 f7 @960 d240 pull_off
note s4 f2 @960 d960 bend=1/2
note s5 f0 @1200 d240 palm_mute
note s1 f12 @1440 d480 harmonic
note s2 f8 @1440 d480 vibrato=40:5.5
track 27
note s1 f1 @0 d240 slide
note s1 f3 @240 d240
note s6 f0 @0 d480 dead_note
note s3 f9 @480 d480 bend=2 vibrato=20:6
"""


def test_twelve_note_fixture_equals_hand_built():
    def n(s, f, on, d, v=96, tech=()):
        return NoteEvent(s, f, v, on, d, tech)

    open_d = Tuning((62, 57, 53, 48, 43, 38))
    expected = Tablature(90, 480, [
        Track(25, open_d, [
            n(1, 3, 0, 480), n(6, 0, 0, 960, v=110),
            n(2, 5, 480, 480, v=80, tech=["hammer_on"]),
            n(3, 7, 960, 240, tech=["pull_off"]),
            n(4, 2, 960, 960, tech=[Technique.bend(Fraction(1, 2))]),
            n(5, 0, 1200, 240, tech=["palm_mute"]),
            n(1, 12, 1440, 480, tech=["harmonic"]),
            n(2, 8, 1440, 480, tech=[Technique.vibrato(40, 5.5)]),
        ], "Steel Rhythm"),
        Track(27, STANDARD_TUNING, [
            n(1, 1, 0, 240, tech=["slide"]), n(6, 0, 0, 480, tech=["dead_note"]),
            n(1, 3, 240, 240),
            n(3, 9, 480, 480, tech=[Technique.bend(2), Technique.vibrato(20, 6)]),
        ]),
    ])
    tab = parse_tab_dsl(FIXTURE)
    assert sum(len(t.notes) for t in tab.tracks) == 12
    assert tab == expected
