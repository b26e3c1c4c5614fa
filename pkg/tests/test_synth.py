import struct

import numpy as np
import pytest
from scipy.io import wavfile
from scipy.signal import butter, hilbert, sosfiltfilt

from synthtab.compiler import PerformanceEvent, PitchCurve, build_pitch_curve
from synthtab.errors import MixError, RenderError
from synthtab.synth import AudioBuffer, TimbreProfile, mix, read_wav, render_string, write_wav
from synthtab.synth.audio import encode_wav
from synthtab.synth.karplus import RELEASE_TAIL_S, buffer_length, midi_to_hz
from synthtab.synth.timbre import PROGRAM_FAMILY, program_group

SR = 22050


def event(pitch, dur=1.0, onset=0.0, velocity=100, curve=None, **kw):
    return PerformanceEvent(1, 0, pitch, onset, dur, velocity, curve or PitchCurve.flat(dur), **kw)


def peak_frequency(x, sr, lo_hz, hi_hz):
    """Hann-windowed zero-padded FFT peak with parabolic interpolation (log magnitude)."""
    nfft = 1 << 20
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x)), nfft))
    freqs = np.fft.rfftfreq(nfft, 1 / sr)
    lo, hi = np.searchsorted(freqs, [lo_hz, hi_hz])
    k = lo + int(np.argmax(spec[lo:hi]))
    a, b, c = np.log(spec[k - 1:k + 2])
    return (k + 0.5 * (a - c) / (a - 2 * b + c)) * sr / nfft


def rms_frames(x, hop):
    n = len(x) // hop
    return np.sqrt(np.mean(x[:n * hop].reshape(n, hop) ** 2, axis=1))


def test_presets_mirror_timbre_counts(presets):
    groups = [p.group for p in presets.values()]
    assert len(presets) == 23
    assert groups.count("acoustic") == 7 and groups.count("electric") == 16


def test_program_families():
    assert program_group(24) == program_group(25) == "acoustic"
    assert program_group(26) == program_group(27) == "electric"
    assert PROGRAM_FAMILY[24] == "acoustic_nylon"
    assert program_group(30) == "other"


@pytest.mark.parametrize("kwargs", [
    dict(loop_damping=1.0), dict(excitation_brightness=1.5), dict(pick_position=0.0),
    dict(body_resonance=[(100.0, 3.0, 0.0)]), dict(family="banjo"),
])
def test_profile_validation(kwargs):
    base = dict(name="x", family="electric_clean")
    base.update(kwargs)
    with pytest.raises(ValueError):
        TimbreProfile(**base)


@pytest.mark.parametrize("name", ["strat_neck", "nylon_classical_pick", "archtop_floating"])
def test_a440_is_the_dominant_peak(presets, name):
    for seed in range(3):
        buf = render_string([event(69, 1.0)], presets[name], SR, seed=seed)
        seg = buf.samples[int(0.1 * SR):int(0.9 * SR)]
        # whole audible band, so a stronger overtone would win
        assert abs(peak_frequency(seg, SR, 20, 5000) - 440.0) < 1.0


@pytest.mark.parametrize("pitch", [40, 52, 64, 76, 88])
def test_tuning_across_range(presets, pitch):
    f0 = float(midi_to_hz(pitch))
    buf = render_string([event(pitch, 1.5)], presets["nylon_classical_finger"], SR)
    f = peak_frequency(buf.samples[int(0.1 * SR):int(1.4 * SR)], SR, f0 * 0.97, f0 * 1.03)
    assert abs(1200 * np.log2(f / f0)) < 5.0


def test_empty_events_give_silence(presets):
    buf = render_string([], presets["tele_neck"], SR, total_duration_s=2.0)
    assert len(buf) == buffer_length(2.0, SR) == int(np.ceil(2.5 * SR))
    assert not buf.samples.any()


def test_duration_contract(presets):
    buf = render_string([event(60, 0.7, onset=0.3)], presets["tele_neck"], SR)
    assert len(buf) == int(np.ceil((1.0 + RELEASE_TAIL_S) * SR))
    buf = render_string([event(60, 0.7)], presets["tele_neck"], 44100, total_duration_s=3.0)
    assert len(buf) == int(np.ceil(3.5 * 44100))


def test_vibrato_rate_from_instantaneous_frequency(presets):
    curve = build_pitch_curve(2.0, vibrato_depth=50.0, vibrato_rate=5.0)
    buf = render_string([event(57, 2.0, curve=curve)], presets["semihollow_neck"], SR)
    x = buf.samples[:int(2.0 * SR)]
    sos = butter(4, [170, 280], btype="band", fs=SR, output="sos")
    phase = np.unwrap(np.angle(hilbert(sosfiltfilt(sos, x))))
    inst = np.diff(phase) * SR / (2 * np.pi)
    inst = inst[int(0.2 * SR):int(1.8 * SR)]
    inst -= inst.mean()
    rate = peak_frequency(inst, SR, 1.0, 20.0)
    assert abs(rate - 5.0) <= 0.5
    # depth: +-50 cents around 220 Hz is roughly +-6.4 Hz
    assert 3.0 < np.percentile(np.abs(inst), 99) < 10.0


def test_determinism_and_seed(presets):
    evs = [event(50, 0.5), event(55, 0.5, onset=0.5)]
    a = render_string(evs, presets["lespaul_neck"], SR, seed=3).samples
    b = render_string(evs, presets["lespaul_neck"], SR, seed=3).samples
    c = render_string(evs, presets["lespaul_neck"], SR, seed=4).samples
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_fundamental_limit(presets):
    with pytest.raises(RenderError):
        render_string([event(96, 0.2)], presets["tele_neck"], 8000)


def test_energy_decays_after_excitation(presets):
    for name in ("steel_dreadnought_pick", "strat_bridge", "archtop_neck"):
        buf = render_string([event(45, 3.0)], presets[name], SR)
        env = rms_frames(buf.samples, 2205)  # 100 ms frames
        k = int(np.argmax(env))
        assert np.all(np.diff(env[k + 1:]) <= 0)


def test_damping_shortens_decay(presets):
    def level_after(damping):
        buf = render_string([event(52, 1.0, damping=damping)], presets["strat_neck"], SR)
        return rms_frames(buf.samples, 2205)[4]

    normal, muted, dead = level_after("normal"), level_after("muted"), level_after("dead")
    assert normal > muted > dead


def test_legato_does_not_reexcite(presets):
    evs = [event(60, 0.5), event(62, 0.5, onset=0.5, excitation="legato")]
    legato = render_string(evs, presets["strat_neck"], SR).samples
    plucked = render_string([evs[0], event(62, 0.5, onset=0.5)], presets["strat_neck"], SR).samples
    at = int(0.5 * SR)
    before = np.sqrt(np.mean(legato[at - 441:at] ** 2))
    after_legato = np.sqrt(np.mean(legato[at:at + 441] ** 2))
    after_pluck = np.sqrt(np.mean(plucked[at:at + 441] ** 2))
    assert after_legato < 1.2 * before
    assert after_pluck > after_legato


def test_mix_identity_and_commutativity():
    rng = np.random.default_rng(0)
    s = AudioBuffer(rng.uniform(-0.5, 0.5, 1000))
    silent = [AudioBuffer(np.zeros(1000)) for _ in range(5)]
    assert np.array_equal(mix(silent + [s]).samples, s.samples)
    a, b = AudioBuffer(rng.uniform(-0.3, 0.3, 800)), AudioBuffer(rng.uniform(-0.3, 0.3, 1000))
    assert np.allclose(mix([a, b], [-3.0, 1.0]).samples, mix([b, a], [1.0, -3.0]).samples)
    assert len(mix([a, b])) == 1000


def test_mix_linearity():
    rng = np.random.default_rng(1)
    a, b = rng.uniform(-0.1, 0.1, 500), rng.uniform(-0.1, 0.1, 500)
    alpha = 0.37
    out = mix([AudioBuffer(alpha * a), AudioBuffer(b)]).samples
    assert np.max(np.abs(out - (alpha * a + b))) <= 2.0 ** -23


def test_mix_normalizes_only_above_full_scale():
    rng = np.random.default_rng(2)
    stems = []
    for _ in range(6):
        x = rng.uniform(-1, 1, 400)
        stems.append(AudioBuffer(0.9 * x / np.max(np.abs(x))))
    direct = sum(s.samples for s in stems)
    out = mix(stems)
    assert np.max(np.abs(direct)) > 1.0
    assert out.peak == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.samples, direct / np.max(np.abs(direct)))


def test_mix_rate_mismatch():
    with pytest.raises(MixError):
        mix([AudioBuffer(np.zeros(10), 22050), AudioBuffer(np.zeros(10), 44100)])


def test_wav_size_and_header(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(AudioBuffer(np.zeros(22050), 22050), path)
    raw = path.read_bytes()
    assert raw[:4] == b"RIFF" and raw[8:16] == b"WAVEfmt "
    fmt, channels, rate, byte_rate, align, bits = struct.unpack("<HHIIHH", raw[20:36])
    assert (fmt, channels, rate, byte_rate, align, bits) == (1, 1, 22050, 66150, 3, 24)
    assert raw[36:40] == b"data" and struct.unpack("<I", raw[40:44])[0] == 66150
    assert struct.unpack("<I", raw[4:8])[0] == len(raw) - 8


def test_wav_full_scale_negative():
    data = encode_wav(AudioBuffer(np.array([-1.0, 0.0, 1.0])))
    pcm = data[44:53]
    assert pcm[:3] == b"\x00\x00\x80"      # 0x800000
    assert pcm[6:9] == b"\xff\xff\x7f"     # clipped to 0x7fffff


def test_wav_reference_reader_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, 5001)
    path = tmp_path / "b.wav"
    write_wav(AudioBuffer(x, 22050), path)
    rate, data = wavfile.read(path)
    assert rate == 22050 and data.dtype == np.int32
    # scipy left-aligns 24-bit samples in int32
    assert np.max(np.abs(data / 2.0 ** 31 - x)) <= 2.0 ** -23
    ours = read_wav(path)
    assert np.max(np.abs(ours.samples - x)) <= 2.0 ** -23
