import numpy as np
import pytest

from sepforge.audio import AudioClip
from sepforge.corpus import TOY_PROFILES, generate_toy_utterance
from sepforge.metrics import si_sdr
from sepforge.spectral import (
    LOG_EPS,
    MaskSet,
    Spectrogram,
    StftConfig,
    analysis_window,
    ideal_binary_mask,
    istft,
    log_magnitude,
    mask_resynthesize,
    stft,
    training_example,
)

CFG = StftConfig()


class TestConfigAndWindow:
    def test_defaults(self):
        assert CFG.window_len == 256
        assert CFG.hop == 64
        assert CFG.bins == 129

    def test_validation(self):
        with pytest.raises(ValueError):
            StftConfig(window_len=255)
        with pytest.raises(ValueError):
            StftConfig(hop=0)
        with pytest.raises(ValueError):
            StftConfig(hop=512)

    @pytest.mark.parametrize("n,m", [(1, 1), (63, 1), (64, 1), (65, 2),
                                     (256, 4), (17460, 273)])
    def test_frame_count_law(self, n, m):
        assert CFG.frames_for(n) == m

    def test_window_positive_symmetric(self):
        w = analysis_window(CFG)
        assert np.all(w > 0)
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
        assert w.max() == pytest.approx(1.0, abs=1e-4)

    def test_overlap_add_constant_mid_signal(self):
        # sum of squared windows shifted by hop must be flat away from edges
        w = analysis_window(CFG) ** 2
        m = 20
        den = np.zeros(m * CFG.hop + CFG.window_len - CFG.hop)
        for k in range(m):
            den[k * CFG.hop: k * CFG.hop + CFG.window_len] += w
        interior = den[CFG.window_len: (m - 1) * CFG.hop]
        np.testing.assert_allclose(interior, 1.5, atol=1e-10)


class TestStft:
    def test_headline_shape(self):
        rng = np.random.default_rng(0)
        spec = stft(AudioClip(rng.standard_normal(17460), 8000), CFG)
        assert spec.data.shape == (273, 129)
        assert spec.original_len == 17460

    def test_matches_naive_dft(self):
        # single-frame oracle: plain loop evaluation of the windowed DFT
        rng = np.random.default_rng(1)
        x = rng.standard_normal(64)
        spec = stft(AudioClip(x, 8000), CFG)
        padded = np.zeros(256)
        padded[:64] = x
        w = analysis_window(CFG)
        for k in range(129):
            ref = sum(w[i] * padded[i] * np.exp(-2j * np.pi * k * i / 256)
                      for i in range(256))
            assert abs(spec.data[0, k] - ref) < 1e-9

    def test_dc_clip_energy_in_lowest_bins(self):
        spec = stft(AudioClip(np.ones(4000), 8000), CFG)
        w = analysis_window(CFG)
        mid = np.abs(spec.data[20])
        assert mid[0] == pytest.approx(w.sum(), abs=1e-9)
        assert np.all(mid[2:] < 1e-9)

    def test_parseval_with_window_normalizer(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(17460)
        spec = stft(AudioClip(x, 8000), CFG)
        p = np.abs(spec.data) ** 2
        e_spec = (2 * p[:, 1:-1].sum() + p[:, 0].sum() + p[:, -1].sum()) / 256
        assert e_spec / (1.5 * np.sum(x ** 2)) == pytest.approx(1.0, abs=0.01)

    def test_rejects_empty_and_rate_mismatch(self):
        with pytest.raises(ValueError, match="empty"):
            stft(AudioClip(np.zeros(0), 8000), CFG)
        with pytest.raises(ValueError, match="rate"):
            stft(AudioClip(np.zeros(100), 16000), CFG)

    def test_spectrogram_shape_validation(self):
        with pytest.raises(ValueError):
            Spectrogram(np.zeros((4, 100), dtype=complex), CFG, 256)


class TestIstft:
    @pytest.mark.parametrize("n", [1, 2, 63, 64, 65, 255, 256, 257, 1000, 17460])
    def test_round_trip(self, n):
        rng = np.random.default_rng(n)
        x = rng.uniform(-1, 1, n)
        back = istft(stft(AudioClip(x, 8000), CFG))
        assert len(back) == n
        assert np.max(np.abs(back.samples - x)) <= 1e-6

    def test_zero_spectrogram(self):
        spec = Spectrogram(np.zeros((5, 129), dtype=complex), CFG, 300)
        out = istft(spec)
        assert len(out) == 300
        assert np.all(out.samples == 0)

    def test_round_trip_many_random_lengths(self):
        rng = np.random.default_rng(99)
        for _ in range(30):
            n = int(rng.integers(1, 3000))
            x = rng.uniform(-1, 1, n)
            back = istft(stft(AudioClip(x, 8000), CFG))
            assert np.max(np.abs(back.samples - x)) <= 1e-6


class TestMasks:
    def test_ibm_one_hot_partition(self):
        a = Spectrogram(np.array([[3.0, 1.0, 2.0]], dtype=complex),
                        StftConfig(window_len=4, hop=2), 2)
        b = Spectrogram(np.array([[1.0, 4.0, 2.0]], dtype=complex),
                        StftConfig(window_len=4, hop=2), 2)
        ms = ideal_binary_mask([a, b])
        np.testing.assert_array_equal(ms.masks[0], [[1.0, 0.0, 1.0]])  # tie -> first
        np.testing.assert_array_equal(ms.masks[1], [[0.0, 1.0, 0.0]])
        np.testing.assert_array_equal(ms.masks.sum(axis=0), 1.0)

    def test_ibm_needs_two_matching_sources(self):
        a = stft(AudioClip(np.ones(100), 8000), CFG)
        b = stft(AudioClip(np.ones(200), 8000), CFG)
        with pytest.raises(ValueError):
            ideal_binary_mask([a])
        with pytest.raises(ValueError):
            ideal_binary_mask([a, b])

    def test_maskset_validation(self):
        with pytest.raises(ValueError):
            MaskSet(np.zeros((2, 4)))

    def test_all_ones_mask_is_round_trip(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-1, 1, 2000)
        spec = stft(AudioClip(x, 8000), CFG)
        out = mask_resynthesize(spec, np.ones((spec.frames, 129)))
        assert np.max(np.abs(out.samples - x)) <= 1e-6

    def test_all_zeros_mask_is_silence(self):
        spec = stft(AudioClip(np.ones(500), 8000), CFG)
        out = mask_resynthesize(spec, np.zeros((spec.frames, 129)))
        assert np.all(out.samples == 0)

    def test_mask_shape_mismatch(self):
        spec = stft(AudioClip(np.ones(500), 8000), CFG)
        with pytest.raises(ValueError, match="shape"):
            mask_resynthesize(spec, np.ones((1, 129)))

    def test_ibm_beats_unprocessed_mixture(self):
        a = generate_toy_utterance(TOY_PROFILES[0], 1.2, (10, 0))
        b = generate_toy_utterance(TOY_PROFILES[1], 1.2, (10, 1))
        mix = AudioClip(a.samples + b.samples, 8000)
        spec = stft(mix, CFG)
        ms = ideal_binary_mask([stft(a, CFG), stft(b, CFG)])
        est = mask_resynthesize(spec, ms.masks[0])
        assert si_sdr(est, a) > si_sdr(mix, a)


class TestFeatures:
    def test_log_magnitude_values(self):
        data = np.array([[1.0 - LOG_EPS, 0.0]], dtype=complex)
        spec = Spectrogram(data, StftConfig(window_len=2, hop=1), 1)
        feats = log_magnitude(spec)
        assert feats[0, 0] == pytest.approx(0.0, abs=1e-9)
        assert feats[0, 1] == pytest.approx(np.log(LOG_EPS))

    def test_log_magnitude_monotonic(self):
        rng = np.random.default_rng(8)
        mags = rng.uniform(0, 2, (50, 2))
        data = mags.astype(complex)
        spec = Spectrogram(data, StftConfig(window_len=2, hop=1), 50)
        feats = log_magnitude(spec)
        lo, hi = mags.min(axis=1), mags.max(axis=1)
        flo = np.where(mags[:, 0] < mags[:, 1], feats[:, 0], feats[:, 1])
        fhi = np.where(mags[:, 0] < mags[:, 1], feats[:, 1], feats[:, 0])
        assert np.all(fhi[lo < hi] > flo[lo < hi])

    def test_training_example_shapes(self):
        a = generate_toy_utterance(TOY_PROFILES[2], 0.8, (11, 0))
        b = generate_toy_utterance(TOY_PROFILES[3], 0.6, (11, 1))
        n = max(len(a), len(b))
        mix = AudioClip(np.pad(a.samples, (0, n - len(a))), 8000)
        feats, targets = training_example(mix, [a, b], CFG)
        m = CFG.frames_for(n)
        assert feats.shape == (m, 129)
        assert targets.shape == (2, m, 129)
        np.testing.assert_array_equal(targets.sum(axis=0), 1.0)
