import numpy as np
import pytest

from tfloc.core import ClipLabel
from tfloc.errors import ConfigError
from tfloc.proposals import extract_proposals
from tfloc.synth import (
    SynthConfig,
    fragmentation_benchmark,
    generate,
    generator_means,
    oracle_sequences,
)

SMALL = SynthConfig(n_clips=60, seed=11)


@pytest.fixture(scope="module")
def small_clips():
    return generate(SMALL)


class TestGenerate:
    def test_fake_count_contract(self, small_clips):
        n_fake = sum(1 for c in small_clips if c.label == ClipLabel.FAKE)
        assert n_fake == round(SMALL.fake_ratio * SMALL.n_clips)

    def test_deterministic(self, small_clips):
        again = generate(SMALL)
        for a, b in zip(small_clips, again):
            assert a.clip_id == b.clip_id
            assert a.hidden_type == b.hidden_type
            assert a.gt_segments == b.gt_segments
            np.testing.assert_array_equal(a.features, b.features)

    def test_hidden_types_balanced(self, small_clips):
        counts = np.bincount(
            [c.hidden_type for c in small_clips if c.hidden_type > 0],
            minlength=SMALL.m_true + 1,
        )[1:]
        assert counts.max() - counts.min() <= 1

    def test_real_clips_clean(self, small_clips):
        for c in small_clips:
            if c.label == ClipLabel.REAL:
                assert c.hidden_type == 0
                assert c.gt_segments == ()

    def test_segment_geometry(self, small_clips):
        for c in small_clips:
            prev_end = None
            for seg in c.gt_segments:
                assert SMALL.seg_len_range[0] <= seg.length <= SMALL.seg_len_range[1]
                assert seg.end <= c.num_frames
                if prev_end is not None:
                    assert seg.start - prev_end >= SMALL.min_gap
                prev_end = seg.end

    def test_noise_free_features_classify_exactly(self):
        cfg = SynthConfig(n_clips=30, noise_std=0.0, seed=4)
        clips = generate(cfg)
        means = generator_means(cfg)
        for c in clips:
            if c.label == ClipLabel.FAKE:
                for seg in c.gt_segments:
                    frame = c.features[seg.start]
                    dists = np.linalg.norm(means - frame, axis=1)
                    assert int(np.argmin(dists)) + 1 == c.hidden_type

    def test_mean_separation_default_rule(self):
        cfg = SynthConfig()
        means = generator_means(cfg)
        for g in range(cfg.m_true):
            for h in range(g + 1, cfg.m_true):
                assert np.linalg.norm(means[g] - means[h]) >= 4 * cfg.noise_std
            assert np.linalg.norm(means[g]) >= 4 * cfg.noise_std

    def test_infeasible_packing_rejected(self):
        with pytest.raises(ConfigError):
            SynthConfig(t_range=(10, 12), seg_len_range=(6, 8), segs_per_clip_range=(2, 2))

    def test_bad_ratio_rejected(self):
        with pytest.raises(ConfigError):
            SynthConfig(fake_ratio=1.0)


class TestOracleSequences:
    def test_real_clip_all_background(self, small_clips):
        clip = next(c for c in small_clips if c.label == ClipLabel.REAL)
        seq = oracle_sequences(clip, m=SMALL.m_true)
        assert np.all(seq.attention == 0.0)
        assert np.all(seq.attributes[:, 0] == 1.0)

    def test_pulses_recover_segments_exactly(self, small_clips):
        clip = next(c for c in small_clips if c.label == ClipLabel.FAKE)
        seq = oracle_sequences(clip, m=SMALL.m_true)
        props = extract_proposals(seq.attributes)
        intervals = sorted(p.interval for p in props)
        assert intervals == sorted(clip.gt_segments)
        assert all(p.attribute == clip.hidden_type for p in props)

    def test_smoothing_recovers_within_width(self, small_clips):
        clip = next(
            c for c in small_clips if c.label == ClipLabel.FAKE and len(c.gt_segments) == 1
        )
        w = 2
        seq = oracle_sequences(clip, m=SMALL.m_true, smoothing_width=w)
        (seg,) = clip.gt_segments
        col = seq.attributes[:, clip.hidden_type]
        crossing = np.flatnonzero(col > 0.5)
        assert abs(crossing[0] - seg.start) <= w
        assert abs(crossing[-1] + 1 - seg.end) <= w

    def test_rows_remain_simplex_after_smoothing(self, small_clips):
        clip = next(c for c in small_clips if c.label == ClipLabel.FAKE)
        seq = oracle_sequences(clip, m=SMALL.m_true, smoothing_width=3)
        np.testing.assert_allclose(seq.attributes.sum(axis=1), 1.0, atol=1e-9)


class TestFragmentationBenchmark:
    def test_structure(self):
        clips = fragmentation_benchmark(n_clips=10, seed=1)
        for c in clips:
            assert len(c.proposals) == 3
            assert len(c.gt_segments) == 1
            gt = c.gt_segments[0]
            attrs = {p.attribute for p in c.proposals}
            assert len(attrs) == 1
            union_start = min(p.interval.start for p in c.proposals)
            union_end = max(p.interval.end for p in c.proposals)
            assert union_start <= gt.start + 3
            assert union_end >= gt.end - 3

    def test_deterministic(self):
        a = fragmentation_benchmark(n_clips=5, seed=2)
        b = fragmentation_benchmark(n_clips=5, seed=2)
        assert [c.proposals for c in a] == [c.proposals for c in b]
