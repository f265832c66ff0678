import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfloc.core import Interval
from tfloc.proposals import ExtractConfig, Proposal, extract_proposals, oic_score


def pulse(T, start, end, high, low=0.0, M=2, channel=1):
    Q = np.zeros((T, M))
    Q[:, channel] = low
    Q[start:end, channel] = high
    Q[:, 0] = 1.0 - Q[:, 1:].sum(axis=1)
    return Q


class TestOicScore:
    def test_constant_channel_zero(self):
        ch = np.full(10, 0.4)
        assert oic_score(ch, Interval(3, 6), 0.25) == pytest.approx(0.0)

    def test_extremes(self):
        ch = np.zeros(12)
        ch[4:8] = 1.0
        assert oic_score(ch, Interval(4, 8), 0.25) == pytest.approx(1.0)

    def test_derived_small_case(self):
        ch = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
        # one outer frame each side, both zero
        assert oic_score(ch, Interval(2, 4), 0.25) == pytest.approx(1.0)

    def test_boundary_clipping(self):
        ch = np.array([1.0, 1.0, 0.0, 0.0])
        # left outer region is clipped away entirely; right survives
        assert oic_score(ch, Interval(0, 2), 0.5) == pytest.approx(1.0)

    def test_whole_timeline_outer_empty(self):
        ch = np.full(6, 0.7)
        assert oic_score(ch, Interval(0, 6), 0.25) == pytest.approx(0.7)

    @given(
        st.integers(min_value=0, max_value=800),
        st.floats(min_value=-3, max_value=3, allow_nan=False),
    )
    @settings(max_examples=40)
    def test_shift_invariance(self, seed, shift):
        rng = np.random.default_rng(seed)
        ch = rng.uniform(0, 1, 30)
        p = Interval(10, 18)  # interior proposal: outer region non-empty
        base = oic_score(ch, p, 0.25)
        assert oic_score(ch + shift, p, 0.25) == pytest.approx(base, abs=1e-9)

    @given(
        st.integers(min_value=0, max_value=800),
        st.floats(min_value=0.1, max_value=7, allow_nan=False),
    )
    @settings(max_examples=40)
    def test_positive_scaling(self, seed, scale):
        rng = np.random.default_rng(seed)
        ch = rng.uniform(0, 1, 30)
        p = Interval(10, 18)
        assert oic_score(ch * scale, p, 0.25) == pytest.approx(
            scale * oic_score(ch, p, 0.25), rel=1e-9
        )


class TestExtractProposals:
    def test_silent_channel_gives_nothing(self):
        Q = np.zeros((20, 3))
        Q[:, 0] = 1.0
        assert extract_proposals(Q) == []

    def test_rectangular_pulse_single_dedup(self):
        Q = pulse(40, 10, 20, 0.8, low=0.05)
        props = extract_proposals(Q)
        assert len(props) == 1
        p = props[0]
        assert p.interval == Interval(10, 20)
        assert p.attribute == 1
        assert p.confidence == pytest.approx(
            oic_score(Q[:, 1], Interval(10, 20), 0.25)
        )

    def test_two_pulses_with_gap(self):
        Q = pulse(40, 5, 10, 0.8)
        Q[20:25, 1] = 0.8
        Q[:, 0] = 1.0 - Q[:, 1:].sum(axis=1)
        props = extract_proposals(Q)
        assert [p.interval for p in props] == [Interval(5, 10), Interval(20, 25)]

    def test_staircase_yields_nested_runs(self):
        Q = np.zeros((30, 2))
        Q[5:25, 1] = 0.35
        Q[10:20, 1] = 0.75
        Q[:, 0] = 1.0 - Q[:, 1]
        props = extract_proposals(Q)
        assert {(p.interval.start, p.interval.end) for p in props} == {
            (5, 25),
            (10, 20),
        }

    def test_min_len_filters_short_runs(self):
        Q = pulse(30, 4, 6, 0.9)
        assert extract_proposals(Q, ExtractConfig(min_len=3)) == []

    def test_run_values_exceed_generating_threshold(self):
        rng = np.random.default_rng(8)
        Q = rng.dirichlet(np.ones(3), size=64)
        cfg = ExtractConfig()
        for prop in extract_proposals(Q, cfg):
            lo = Q[prop.interval.start : prop.interval.end, prop.attribute].min()
            assert any(lo > th for th in cfg.thresholds)

    def test_lower_threshold_covers_more(self):
        rng = np.random.default_rng(9)
        col = rng.uniform(0, 1, 80)
        from tfloc import backend

        covered_prev: set[int] = set()
        for thr in (0.7, 0.5, 0.3, 0.1):
            starts, ends = backend.threshold_runs(col, thr, 1)
            covered = {t for s, e in zip(starts, ends) for t in range(s, e)}
            assert covered_prev <= covered
            covered_prev = covered

    def test_no_duplicate_keys(self):
        rng = np.random.default_rng(10)
        Q = rng.dirichlet(np.ones(4), size=100)
        props = extract_proposals(Q)
        keys = [(p.interval, p.attribute) for p in props]
        assert len(keys) == len(set(keys))

    def test_output_sorted(self):
        rng = np.random.default_rng(11)
        Q = rng.dirichlet(np.ones(3), size=50)
        props = extract_proposals(Q)
        keys = [(p.attribute, p.interval.start, p.interval.end) for p in props]
        assert keys == sorted(keys)


class TestConfigsAndTypes:
    def test_proposal_rejects_real_class(self):
        with pytest.raises(ValueError):
            Proposal(Interval(0, 5), 0.5, 0)

    @pytest.mark.parametrize(
        "thresholds",
        [(), (0.0, 0.5), (0.5, 0.5), (0.9, 0.1)],
    )
    def test_bad_thresholds(self, thresholds):
        with pytest.raises(ValueError):
            ExtractConfig(thresholds=thresholds)

    def test_default_grid(self):
        cfg = ExtractConfig()
        assert cfg.thresholds == tuple(round(0.1 * i, 1) for i in range(1, 10))
        assert cfg.alpha == 0.25
