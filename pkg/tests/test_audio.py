import struct

import numpy as np
import pytest

from sepforge.audio import (
    AudioClip,
    ImpulseResponse,
    WavFormatError,
    convolve,
    load_wav,
    mix_pointwise,
    pad_to,
    resample_to_8k,
    save_wav,
)


def wav_bytes(fmt_chunk: bytes | None, data: bytes | None, *, riff_tag=b"RIFF",
              wave_tag=b"WAVE", extra=b"") -> bytes:
    """Hand-assemble a RIFF container so reader tests don't trust the writer."""
    body = wave_tag + extra
    if fmt_chunk is not None:
        body += b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    if data is not None:
        body += b"data" + struct.pack("<I", len(data)) + data
        if len(data) % 2:
            body += b"\x00"
    return riff_tag + struct.pack("<I", len(body)) + body


def fmt_pcm16(channels=1, rate=8000) -> bytes:
    block = channels * 2
    return struct.pack("<HHIIHH", 1, channels, rate, rate * block, block, 16)


def fmt_float32(channels=1, rate=8000) -> bytes:
    block = channels * 4
    return struct.pack("<HHIIHH", 3, channels, rate, rate * block, block, 32)


class TestAudioClip:
    def test_coerces_to_float64(self):
        clip = AudioClip(np.array([1, 2, 3], dtype=np.int16), 8000)
        assert clip.samples.dtype == np.float64
        assert len(clip) == 3
        assert clip.duration_s == pytest.approx(3 / 8000)

    def test_rejects_2d(self):
        with pytest.raises(ValueError, match="1-D"):
            AudioClip(np.zeros((4, 2)), 8000)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError, match="rate"):
            AudioClip(np.zeros(4), 0)

    def test_impulse_response_rejects_empty(self):
        with pytest.raises(ValueError):
            ImpulseResponse(np.zeros(0), 8000)


class TestLoadWav:
    def test_pcm16_mono(self, tmp_path):
        raw = struct.pack("<4h", 0, 16384, -16384, 32767)
        p = tmp_path / "a.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(), raw))
        (clip,) = load_wav(p)
        assert clip.rate == 8000
        np.testing.assert_allclose(
            clip.samples, [0.0, 0.5, -0.5, 32767 / 32768], atol=1e-12)

    def test_pcm16_stereo_demux(self, tmp_path):
        raw = struct.pack("<6h", 100, -100, 200, -200, 300, -300)
        p = tmp_path / "s.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(channels=2), raw))
        left, right = load_wav(p)
        np.testing.assert_allclose(left.samples * 32768, [100, 200, 300])
        np.testing.assert_allclose(right.samples * 32768, [-100, -200, -300])

    def test_float32(self, tmp_path):
        raw = struct.pack("<3f", 0.5, -0.25, 1.0)
        p = tmp_path / "f.wav"
        p.write_bytes(wav_bytes(fmt_float32(rate=16000), raw))
        (clip,) = load_wav(p)
        assert clip.rate == 16000
        np.testing.assert_allclose(clip.samples, [0.5, -0.25, 1.0], atol=1e-7)

    def test_skips_unknown_chunks(self, tmp_path):
        junk = b"LIST" + struct.pack("<I", 4) + b"info"
        raw = struct.pack("<2h", 1, 2)
        p = tmp_path / "j.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(), raw, extra=junk))
        (clip,) = load_wav(p)
        assert len(clip) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "absent.wav")

    def test_not_riff(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(b"FORM" + b"\x00" * 40)
        with pytest.raises(WavFormatError):
            load_wav(p)

    def test_not_wave(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(), b"\x00\x00", wave_tag=b"AVI "))
        with pytest.raises(WavFormatError):
            load_wav(p)

    def test_missing_fmt(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(None, b"\x00\x00"))
        with pytest.raises(WavFormatError):
            load_wav(p)

    def test_missing_data(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(), None))
        with pytest.raises(WavFormatError):
            load_wav(p)

    def test_truncated_payload(self, tmp_path):
        good = wav_bytes(fmt_pcm16(), struct.pack("<4h", 1, 2, 3, 4))
        p = tmp_path / "x.wav"
        p.write_bytes(good[:-3])
        with pytest.raises(WavFormatError, match="truncated"):
            load_wav(p)

    def test_24_bit_rejected(self, tmp_path):
        fmt = struct.pack("<HHIIHH", 1, 1, 8000, 8000 * 3, 3, 24)
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt, b"\x00" * 6))
        with pytest.raises(WavFormatError, match="unsupported"):
            load_wav(p)

    def test_three_channels_rejected(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(channels=3), b"\x00" * 12))
        with pytest.raises(WavFormatError):
            load_wav(p)

    def test_empty_payload_rejected(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(), b""))
        with pytest.raises(WavFormatError, match="empty"):
            load_wav(p)

    def test_partial_frame_rejected(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(wav_bytes(fmt_pcm16(channels=2), b"\x00" * 6))
        with pytest.raises(WavFormatError):
            load_wav(p)


class TestSaveWav:
    def test_round_trip_within_one_lsb(self, tmp_path):
        rng = np.random.default_rng(11)
        clip = AudioClip(rng.uniform(-1, 1, 3000), 8000)
        p = tmp_path / "r.wav"
        save_wav(p, clip)
        (back,) = load_wav(p)
        assert len(back) == len(clip)
        assert back.rate == clip.rate
        assert np.max(np.abs(back.samples - clip.samples)) <= 1.0 / 32768

    def test_out_of_range_clamped(self, tmp_path):
        p = tmp_path / "c.wav"
        save_wav(p, AudioClip(np.array([2.0, -2.0]), 8000))
        (back,) = load_wav(p)
        np.testing.assert_allclose(back.samples, [32767 / 32768, -1.0])

    def test_length_preserved_exactly(self, tmp_path):
        for n in (1, 2, 17460):
            p = tmp_path / f"n{n}.wav"
            save_wav(p, AudioClip(np.zeros(n), 8000))
            assert len(load_wav(p)[0]) == n


class TestResample:
    def test_8k_returned_unchanged(self):
        clip = AudioClip(np.arange(5.0), 8000)
        out = resample_to_8k(clip)
        np.testing.assert_array_equal(out.samples, clip.samples)
        assert out.rate == 8000

    @pytest.mark.parametrize("rate,n,expected", [
        (16000, 2 * 17460, 17460),
        (16000, 101, 51),
        (48000, 600, 100),
        (48000, 601, 101),
    ])
    def test_length_law(self, rate, n, expected):
        out = resample_to_8k(AudioClip(np.zeros(n), rate))
        assert len(out) == expected
        assert out.rate == 8000

    @pytest.mark.parametrize("rate", [16000, 48000])
    def test_passband_tone_amplitude(self, rate):
        # quadrature projection is phase-blind, so filter delay doesn't matter
        f = 1000.0
        t = np.arange(rate) / rate
        out = resample_to_8k(AudioClip(np.sin(2 * np.pi * f * t), rate))
        mid = out.samples[1000:-1000]
        tt = np.arange(1000, 1000 + len(mid)) / 8000
        c = 2 * np.mean(mid * np.cos(2 * np.pi * f * tt))
        s = 2 * np.mean(mid * np.sin(2 * np.pi * f * tt))
        assert np.hypot(c, s) == pytest.approx(1.0, abs=0.05)

    def test_stopband_tone_suppressed(self):
        # 7 kHz would alias to 1 kHz at 8 kHz rate; the anti-alias filter
        # must remove nearly all of it
        rate = 16000
        t = np.arange(rate) / rate
        out = resample_to_8k(AudioClip(np.sin(2 * np.pi * 7000 * t), rate))
        assert np.sqrt(np.mean(out.samples[500:-500] ** 2)) < 0.02

    def test_unsupported_rate(self):
        with pytest.raises(ValueError, match="44100"):
            resample_to_8k(AudioClip(np.zeros(10), 44100))


class TestConvolveMixPad:
    def test_delta_shifts(self):
        x = np.array([1.0, 2.0, 3.0])
        ir = ImpulseResponse(np.array([0.0, 0.0, 1.0]), 8000)
        out = convolve(AudioClip(x, 8000), ir)
        np.testing.assert_allclose(out.samples, [0, 0, 1, 2, 3])

    def test_single_clip_identity(self):
        c = AudioClip(np.array([0.1, -0.2]), 8000)
        out = mix_pointwise([c])
        np.testing.assert_array_equal(out.samples, c.samples)

    def test_pads_and_weights(self):
        a = AudioClip(np.array([1.0, 1.0, 1.0, 1.0]), 8000)
        b = AudioClip(np.array([1.0, 1.0]), 8000)
        out = mix_pointwise([a, b], [0.5, 0.25])
        np.testing.assert_allclose(out.samples, [0.75, 0.75, 0.5, 0.5])

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            mix_pointwise([])

    def test_rate_mismatch_rejected(self):
        with pytest.raises(ValueError, match="rate"):
            mix_pointwise([AudioClip(np.zeros(4), 8000),
                           AudioClip(np.zeros(4), 16000)])

    def test_pad_to(self):
        c = AudioClip(np.array([1.0, 2.0]), 8000)
        out = pad_to(c, 5)
        np.testing.assert_array_equal(out.samples, [1, 2, 0, 0, 0])
        assert len(pad_to(c, 2)) == 2
