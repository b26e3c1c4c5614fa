"""Extended Karplus-Strong string voice.

Each string is a delay-line loop containing an integer delay, a first-order
allpass for the fractional part of the period, a one-pole lowpass and a loop
gain.  The allpass coefficient is solved so that the total phase delay of the
loop (integer delay + allpass + lowpass) equals ``sr / f0`` exactly at the
fundamental, which keeps tuning within a fraction of a cent across the neck.
Pitch curves are applied at a control rate of ``CONTROL_BLOCK`` samples.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.signal import lfilter

from ..errors import RenderError
from .audio import AudioBuffer, DEFAULT_SAMPLE_RATE

CONTROL_BLOCK = 16
DELAY_SIZE = 8192
RELEASE_TAIL_S = 0.5
# per-10 ms retention while a released string dies away (about 60 dB in 40 ms)
RELEASE_RETENTION = 10.0 ** (-3.0 * 0.010 / 0.040)
RELEASE_RENDER_S = 0.12
DAMPING_LOSS_SCALE = {"normal": 1.0, "muted": 10.0, "dead": 100.0}
EXCITATION_HEADROOM = 0.9
# noise share of the pluck at brightness 0 and 1
NOISE_SHARE = (0.15, 0.45)


def midi_to_hz(pitch):
    return 440.0 * 2.0 ** ((np.asarray(pitch, dtype=float) - 69.0) / 12.0)


@njit(cache=True)
def _ks_loop(buf, state, widx, exc, n_ctl, c_ctl, g_ctl, lp_coef, block, out):
    """Run the string loop for ``len(out)`` samples, accumulating into ``out``.

    ``state`` holds the allpass input/output and lowpass memories and is
    updated in place; the new write index is returned.
    """
    mask = buf.shape[0] - 1
    ap_x1 = state[0]
    ap_y1 = state[1]
    lp_y1 = state[2]
    n_exc = exc.shape[0]
    one_minus = 1.0 - lp_coef
    for i in range(out.shape[0]):
        k = i // block
        c = c_ctl[k]
        x = buf[(widx - n_ctl[k]) & mask]
        a = c * x + ap_x1 - c * ap_y1
        ap_x1 = x
        ap_y1 = a
        lp = one_minus * a + lp_coef * lp_y1
        lp_y1 = lp
        v = g_ctl[k] * lp
        if i < n_exc:
            v += exc[i]
        buf[widx] = v
        out[i] += v
        widx = (widx + 1) & mask
    state[0] = ap_x1
    state[1] = ap_y1
    state[2] = lp_y1
    return widx


def lowpass_coefficient(f0: float, sr: int, brightness: float) -> float:
    """One-pole coefficient whose loss at ``f0`` removes a fixed fraction of
    fundamental amplitude per second, whatever the pitch.

    Brightness 1 gives a lossless filter; brightness 0 loses 10% per second.
    """
    retention = 0.9 + 0.1 * brightness
    if retention >= 1.0:
        return 0.0
    h2 = retention ** (2.0 / f0)
    w = 2.0 * math.pi * f0 / sr
    a = 1.0 - h2 * math.cos(w)
    b = 1.0 - h2
    # smaller root of b s^2 - 2 a s + b = 0, in the cancellation-free form
    return b / (a + math.sqrt(max(a * a - b * b, 0.0)))


def lowpass_phase_delay(w, s):
    return np.arctan2(s * np.sin(w), 1.0 - s * np.cos(w)) / w


def lowpass_magnitude(w, s):
    return (1.0 - s) / np.sqrt(1.0 - 2.0 * s * np.cos(w) + s * s)


def allpass_coefficient(delay, w):
    """First-order allpass coefficient with phase delay exactly ``delay`` at ``w``."""
    return np.sin((1.0 - delay) * w / 2.0) / np.sin((1.0 + delay) * w / 2.0)


def loop_controls(freqs, sr: int, lp_coef: float, retention_10ms):
    """Integer delay, allpass coefficient and loop gain per control point."""
    w = 2.0 * np.pi * freqs / sr
    period = sr / freqs
    effective = period - lowpass_phase_delay(w, lp_coef)
    n_int = np.floor(effective - 0.5).astype(np.int64)
    frac = effective - n_int
    c = allpass_coefficient(frac, w)
    gain = np.power(retention_10ms, period / (0.010 * sr))
    return n_int, c, gain


def velocity_gain(velocity: int) -> float:
    """Pluck amplitude for a MIDI velocity; a softened linear curve (1 -> 0.21, 127 -> 1)."""
    return 0.2 + 0.8 * velocity / 127.0


def _excitation(rng, period: int, amplitude: float, profile, harmonic: bool):
    """One period of initial string displacement.

    An ideal pluck is a triangle peaking at the pick point (partials fall as
    ``sin(n pi b) / n**2``); seeded lowpassed noise adds attack and makes
    every note slightly different.  Brighter profiles get more noise.
    """
    x = np.arange(period) / period
    b = profile.pick_position
    shape = np.where(x < b, x / b, (1.0 - x) / (1.0 - b))
    shape -= shape.mean()
    noise = rng.uniform(-1.0, 1.0, period)
    pole = 0.9 * (1.0 - profile.excitation_brightness)
    noise = lfilter([1.0 - pole], [1.0, -pole], noise)
    noise -= noise.mean()
    mix = NOISE_SHARE[0] + (NOISE_SHARE[1] - NOISE_SHARE[0]) * profile.excitation_brightness
    exc = (1.0 - mix) * shape / np.max(np.abs(shape)) + mix * noise / max(np.max(np.abs(noise)), 1e-12)
    if harmonic:
        # touching the string at its midpoint suppresses odd partials
        shift = max(1, int(round(period / 2)))
        exc = exc + np.concatenate([np.zeros(shift), exc[:-shift]])
        exc -= exc.mean()
    peak = np.max(np.abs(exc))
    if peak > 0:
        exc *= amplitude / peak
    return exc


def _damped_retention(profile, damping: str) -> float:
    loss = (1.0 - profile.loop_damping) * DAMPING_LOSS_SCALE[damping]
    return max(1.0 - loss, RELEASE_RETENTION)


def _peaking_biquad(freq, gain_db, q, sr):
    amp = 10.0 ** (gain_db / 40.0)
    w0 = 2.0 * math.pi * freq / sr
    alpha = math.sin(w0) / (2.0 * q)
    cw = math.cos(w0)
    b = np.array([1 + alpha * amp, -2 * cw, 1 - alpha * amp])
    a = np.array([1 + alpha / amp, -2 * cw, 1 - alpha / amp])
    return b / a[0], a / a[0]


def apply_body(samples, profile, sr: int):
    for freq, gain, q in profile.body_resonance:
        if freq >= sr / 2:
            continue
        b, a = _peaking_biquad(freq, gain, q, sr)
        samples = lfilter(b, a, samples)
    return samples


def buffer_length(total_duration_s: float, sr: int) -> int:
    return int(math.ceil((total_duration_s + RELEASE_TAIL_S) * sr))


def render_string(events, profile, sr: int = DEFAULT_SAMPLE_RATE, seed: int = 0,
                  total_duration_s: float | None = None, string_index: int = 0) -> AudioBuffer:
    """Render the events of one string.

    Plucks reset the loop and inject a seeded noise burst; legato events
    retune the running loop.  After a note ends the loop gain drops to the
    release retention so the string dies out within a few tens of
    milliseconds.  Output length is ``ceil((total + 0.5 s) * sr)`` where
    ``total`` defaults to the end of the last event.
    """
    events = list(events)
    if total_duration_s is None:
        total_duration_s = max((e.end_s for e in events), default=0.0)
    n_total = buffer_length(total_duration_s, sr)
    out = np.zeros(n_total)
    if not events:
        return AudioBuffer(out, sr)

    limit = sr / 4.0
    buf = np.zeros(DELAY_SIZE)
    state = np.zeros(3)
    widx = 0
    prev_end = -1.0
    for idx, ev in enumerate(events):
        f0 = float(midi_to_hz(ev.pitch))
        peak_cents = max(ev.pitch_curve.cents)
        if f0 * 2.0 ** (peak_cents / 1200.0) > limit:
            raise RenderError(f"fundamental {f0:.1f} Hz (+{peak_cents:.0f} cents) exceeds sr/4")
        start = int(round(ev.onset_s * sr))
        if start >= n_total:
            break
        note_end = int(round(ev.end_s * sr))
        stop = min(n_total, note_end + int(RELEASE_RENDER_S * sr))
        if idx + 1 < len(events):
            stop = min(stop, int(round(events[idx + 1].onset_s * sr)))
        stop = max(stop, start + 1)
        stop = min(stop, n_total)
        n = stop - start

        contiguous = ev.onset_s - prev_end <= 1e-3
        rng = np.random.default_rng(np.random.SeedSequence([seed, string_index, idx]))
        lp_coef = lowpass_coefficient(f0, sr, profile.excitation_brightness)
        if ev.excitation == "legato" and contiguous:
            exc = np.zeros(0)
        else:
            buf[:] = 0.0
            state[:] = 0.0
            period = max(2, int(round(sr / f0)))
            amplitude = EXCITATION_HEADROOM * velocity_gain(ev.velocity)
            if ev.excitation == "legato":
                # no running loop to retune; a fretting-hand tap stands in for the pluck
                amplitude *= 0.5
            exc = _excitation(rng, period, amplitude, profile, "harmonic" in ev.techniques)

        n_ctl = (n + CONTROL_BLOCK - 1) // CONTROL_BLOCK
        t_ctl = np.arange(n_ctl) * (CONTROL_BLOCK / sr)
        if ev.pitch_curve.is_flat:
            freqs = np.full(n_ctl, f0)
        else:
            freqs = f0 * 2.0 ** (ev.pitch_curve(np.minimum(t_ctl, ev.duration_s)) / 1200.0)
        sustain = _damped_retention(profile, ev.damping)
        retention = np.where(t_ctl < ev.duration_s, sustain, RELEASE_RETENTION)
        n_int, c, gain = loop_controls(freqs, sr, lp_coef, retention)
        widx = _ks_loop(buf, state, widx, exc, n_int, c, gain, lp_coef, CONTROL_BLOCK,
                        out[start:stop])
        prev_end = ev.end_s

    out = apply_body(out, profile, sr)
    if profile.output_gain_db:
        out *= 10.0 ** (profile.output_gain_db / 20.0)
    return AudioBuffer(out, sr)
