"""Standard MIDI File export: one track and channel per string, keyswitches and pitch wheel."""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from .compiler import PerformanceScore
from .errors import ExportError
from .tablature import N_STRINGS

log = logging.getLogger(__name__)

KEYSWITCH_CEILING = 36
WHEEL_CENTER = 8192
WHEEL_MAX = 16383
WHEEL_RATE_HZ = 100.0
DEFAULT_PPQ = 960

# highest priority first; an event gets the keyswitch of its first matching technique
KEYSWITCH_PRIORITY = ("dead_note", "harmonic", "palm_mute", "hammer_on", "pull_off",
                      "slide", "bend", "vibrato")

DEFAULT_KEYSWITCHES = {
    "hammer_on": 25,
    "pull_off": 26,
    "slide": 27,
    "bend": 28,
    "palm_mute": 29,
    "vibrato": 30,
    "harmonic": 31,
    "dead_note": 32,
}

# ordering of simultaneous messages within a tick
_TAIL, _NOTE_OFF, _WHEEL_RESET, _KS_ON, _KS_OFF, _WHEEL, _NOTE_ON = range(7)


@dataclass(frozen=True)
class KeyswitchMap:
    pitches: dict = field(default_factory=lambda: dict(DEFAULT_KEYSWITCHES))
    default_pitch: int = 24
    bend_range_semitones: int = 2

    def __post_init__(self):
        values = list(self.pitches.values()) + [self.default_pitch]
        for p in values:
            if not 0 <= p < KEYSWITCH_CEILING:
                raise ValueError(f"keyswitch pitch {p} outside [0, {KEYSWITCH_CEILING - 1}]")
        if len(set(values)) != len(values):
            raise ValueError("keyswitch map is not injective")
        unknown = set(self.pitches) - set(KEYSWITCH_PRIORITY)
        if unknown:
            raise ValueError(f"unknown techniques in keyswitch map: {sorted(unknown)}")
        if not 1 <= self.bend_range_semitones <= 24:
            raise ValueError("bend_range_semitones must be in [1, 24]")

    def keyswitch_for(self, techniques) -> int | None:
        """Keyswitch pitch for an event, or None for plain notes."""
        for kind in KEYSWITCH_PRIORITY:
            if kind in techniques and kind in self.pitches:
                return self.pitches[kind]
        return None


def cents_to_wheel(cents, bend_range_semitones: int):
    value = WHEEL_CENTER + np.round(8191 * np.asarray(cents, dtype=float) / (100.0 * bend_range_semitones))
    return np.clip(value, 0, WHEEL_MAX).astype(int)


def wheel_to_cents(value, bend_range_semitones: int):
    return (np.asarray(value, dtype=float) - WHEEL_CENTER) * 100.0 * bend_range_semitones / 8191


def tempo_to_us_per_beat(tempo_bpm) -> int:
    return int(round(60_000_000 / float(tempo_bpm)))


def _vlq(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(events) -> bytes:
    """``events``: (tick, order, seq, message bytes); an end-of-track meta is appended."""
    body = bytearray()
    last = 0
    for tick, _, _, msg in sorted(events):
        body += _vlq(tick - last) + msg
        last = tick
    body += _vlq(0) + b"\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def _meta_name(text: str) -> bytes:
    data = text.encode("utf-8")
    return b"\xff\x03" + _vlq(len(data)) + data


def _wheel_msg(channel: int, value: int) -> bytes:
    return bytes((0xE0 | channel, value & 0x7F, (value >> 7) & 0x7F))


def _string_events(events, channel: int, ks: KeyswitchMap, to_tick) -> list:
    out = []
    seq = 0

    def add(tick, order, msg):
        nonlocal seq
        out.append((tick, order, seq, msg))
        seq += 1

    # RPN 0 announces the pitch-wheel range to the receiving instrument
    for cc, val in ((101, 0), (100, 0), (6, ks.bend_range_semitones), (38, 0), (101, 127), (100, 127)):
        add(0, _WHEEL_RESET, bytes((0xB0 | channel, cc, val)))
    add(0, _WHEEL_RESET, _wheel_msg(channel, WHEEL_CENTER))

    articulation = ks.default_pitch
    wheel = WHEEL_CENTER
    for ev in events:
        if ev.pitch < KEYSWITCH_CEILING:
            raise ExportError(
                f"string {ev.string} pitch {ev.pitch} at {ev.onset_s:.3f}s collides with keyswitch range"
            )
        on = to_tick(ev.onset_s)
        off = max(on + 1, to_tick(ev.end_s))
        switch = ks.keyswitch_for(ev.techniques)
        if switch is None and articulation != ks.default_pitch:
            switch = ks.default_pitch
        if switch is not None:
            add(on, _KS_ON, bytes((0x90 | channel, switch, 1)))
            add(on + 1, _KS_OFF, bytes((0x80 | channel, switch, 0)))
            articulation = switch

        if not ev.pitch_curve.is_flat:
            n = max(1, int(np.ceil(ev.duration_s * WHEEL_RATE_HZ)))
            times = np.linspace(0.0, ev.duration_s, n + 1)
            values = cents_to_wheel(ev.pitch_curve(times), ks.bend_range_semitones)
            if values.max() == WHEEL_MAX or values.min() == 0:
                limit = ev.pitch_curve.max_abs()
                if limit > 100.0 * ks.bend_range_semitones:
                    log.warning("pitch curve of %.0f cents exceeds bend range; clamped", limit)
            for t, v in zip(times, values):
                if v != wheel:
                    tick = min(off, to_tick(ev.onset_s + t))
                    order = _TAIL if tick == off else _WHEEL
                    add(tick, order, _wheel_msg(channel, int(v)))
                    wheel = int(v)
        add(on, _NOTE_ON, bytes((0x90 | channel, ev.pitch, ev.velocity)))
        add(off, _NOTE_OFF, bytes((0x80 | channel, ev.pitch, 0)))
        if wheel != WHEEL_CENTER:
            add(off, _WHEEL_RESET, _wheel_msg(channel, WHEEL_CENTER))
            wheel = WHEEL_CENTER
    return out


def export_smf(score: PerformanceScore, ks: KeyswitchMap | None = None, ppq: int = DEFAULT_PPQ,
               tempo_bpm=120) -> bytes:
    """Encode a performance as a format-1 SMF.

    Track 0 carries the tempo; track k (1..6) carries string k on channel k-1.
    Times are converted with the tempo as stored in the file (whole
    microseconds per beat) so a reader recovers onsets to within one tick.
    """
    if ppq < 96 or ppq > 0x7FFF:
        raise ExportError(f"ppq {ppq} outside [96, 32767]")
    ks = ks or KeyswitchMap()
    us_per_beat = tempo_to_us_per_beat(tempo_bpm)
    ticks_per_second = ppq * 1_000_000 / us_per_beat

    def to_tick(seconds):
        return int(round(seconds * ticks_per_second))

    chunks = [b"MThd" + struct.pack(">IHHH", 6, 1, N_STRINGS + 1, ppq)]
    conductor = [
        (0, 0, 0, _meta_name("synthtab")),
        (0, 0, 1, b"\xff\x51\x03" + us_per_beat.to_bytes(3, "big")),
    ]
    chunks.append(_track_chunk(conductor))
    for k, events in enumerate(score.strings, start=1):
        body = [(0, -1, -1, _meta_name(f"string {k}"))]
        body += _string_events(events, k - 1, ks, to_tick)
        chunks.append(_track_chunk(body))
    return b"".join(chunks)


def write_smf(path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)
