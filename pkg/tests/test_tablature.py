from fractions import Fraction

import pytest

from synthtab.errors import InvariantError
from synthtab.tablature import (
    STANDARD_TUNING,
    NoteEvent,
    Tablature,
    Technique,
    Track,
    Tuning,
    as_fraction,
    resolve_overlaps,
)


def note(s, f, on, dur, v=96, tech=()):
    return NoteEvent(s, f, v, on, dur, tech)


def test_as_fraction_keeps_decimal_meaning():
    assert as_fraction(120.5) == Fraction(241, 2)
    assert as_fraction("3/2") == Fraction(3, 2)
    assert as_fraction(7) == 7
    with pytest.raises(TypeError):
        as_fraction(True)


@pytest.mark.parametrize("kwargs", [
    dict(fret=20), dict(fret=-1), dict(velocity=0), dict(velocity=128),
    dict(duration_tick=0), dict(onset_tick=-5),
])
def test_note_bounds(kwargs):
    base = dict(string=1, fret=0, velocity=96, onset_tick=0, duration_tick=10)
    base.update(kwargs)
    with pytest.raises(InvariantError):
        NoteEvent(**base)


def test_fret_19_is_the_last_position():
    assert NoteEvent(1, 19, 96, 0, 10).fret == 19


def test_bend_limit():
    assert Technique.bend(4).target_semitones == 4
    with pytest.raises(InvariantError):
        Technique.bend(Fraction(9, 2))
    with pytest.raises(InvariantError):
        Technique.bend(0)


def test_vibrato_needs_params():
    with pytest.raises(InvariantError):
        Technique("vibrato")
    with pytest.raises(InvariantError):
        Technique.vibrato(0, 5)


def test_techniques_none_dropped_and_unknown_rejected():
    assert note(1, 0, 0, 1, tech=["none"]).techniques == frozenset()
    with pytest.raises(InvariantError):
        note(1, 0, 0, 1, tech=["tapping"])
    with pytest.raises(InvariantError):
        note(1, 0, 0, 1, tech=[Technique.bend(1), Technique.bend(2)])


def test_tuning_invariants():
    assert STANDARD_TUNING.string_count == 6
    with pytest.raises(InvariantError):
        Tuning((40, 45))  # increasing
    with pytest.raises(InvariantError):
        Tuning((77, 60))
    with pytest.raises(InvariantError):
        Tuning(())


def test_overlap_truncation():
    notes = resolve_overlaps([note(2, 3, 100, 50), note(1, 0, 0, 500), note(1, 2, 200, 100)])
    assert [(n.string, n.onset_tick, n.duration_tick) for n in notes] == [
        (1, 0, 200), (2, 100, 50), (1, 200, 100)]


def test_same_onset_same_string_is_an_error():
    with pytest.raises(InvariantError):
        resolve_overlaps([note(1, 0, 0, 10), note(1, 5, 0, 10)])


def test_track_rejects_unsorted_or_overlapping():
    with pytest.raises(InvariantError):
        Track(24, STANDARD_TUNING, [note(1, 0, 10, 5), note(1, 0, 0, 5)])
    with pytest.raises(InvariantError):
        Track(24, STANDARD_TUNING, [note(1, 0, 0, 20), note(1, 0, 10, 5)])
    with pytest.raises(InvariantError):
        Track(24, Tuning((64, 59)), [note(3, 0, 0, 5)])


def test_pitch_of():
    t = Track(24, STANDARD_TUNING, [note(3, 5, 0, 1)])
    assert t.pitch_of(t.notes[0]) == 60


def test_tablature_validation():
    assert Tablature("120", 960).tempo_bpm == 120
    with pytest.raises(InvariantError):
        Tablature(0, 960)
    with pytest.raises(InvariantError):
        Tablature(120, 0)
