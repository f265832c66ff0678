import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfloc.core import (
    ClipLabel,
    Distribution,
    FrameSequence,
    Interval,
    clip_to_simplex,
    diou_1d,
    iou_1d,
)

intervals = st.builds(
    lambda s, length: Interval(s, s + length),
    st.integers(min_value=0, max_value=500),
    st.integers(min_value=1, max_value=200),
)


class TestInterval:
    def test_valid(self):
        iv = Interval(3, 7)
        assert iv.length == 4
        assert iv.center == 5.0

    @pytest.mark.parametrize("start,end", [(-1, 4), (5, 5), (5, 3)])
    def test_invalid(self, start, end):
        with pytest.raises(ValueError):
            Interval(start, end)

    def test_seconds_round_trip(self):
        iv = Interval(10, 35)
        s, e = iv.to_seconds(25.0)
        assert (s, e) == (0.4, 1.4)
        back = Interval.from_seconds(s, e, 25.0)
        assert back == iv

    @given(intervals, st.floats(min_value=0.5, max_value=120.0))
    def test_round_trip_any_rate(self, iv, rate):
        s, e = iv.to_seconds(rate)
        back = Interval.from_seconds(s, e, rate)
        assert abs(back.start - iv.start) <= 1
        assert abs(back.end - iv.end) <= 1

    def test_degenerate_seconds_widened(self):
        iv = Interval.from_seconds(1.0, 1.001, 25.0)
        assert iv.length == 1


class TestIoU:
    def test_identity(self):
        assert iou_1d(Interval(10, 20), Interval(10, 20)) == 1.0

    def test_disjoint(self):
        assert iou_1d(Interval(0, 10), Interval(10, 20)) == 0.0

    def test_partial(self):
        # [0,2) vs [1,3): one shared frame of three covered
        assert iou_1d(Interval(0, 2), Interval(1, 3)) == pytest.approx(1 / 3)

    @given(intervals, intervals)
    def test_symmetric_and_bounded(self, a, b):
        assert iou_1d(a, b) == iou_1d(b, a)
        assert 0.0 <= iou_1d(a, b) <= 1.0


class TestDIoU:
    def test_identity(self):
        assert diou_1d(Interval(5, 9), Interval(5, 9)) == 1.0

    def test_partial(self):
        # IoU 1/3, centers 1 and 2, enclosing span 3
        assert diou_1d(Interval(0, 2), Interval(1, 3)) == pytest.approx(2 / 9)

    def test_distant_negative(self):
        val = diou_1d(Interval(0, 1), Interval(99, 100))
        assert -1.0 <= val < 0.0

    @given(intervals, intervals)
    def test_symmetric(self, a, b):
        assert diou_1d(a, b) == diou_1d(b, a)

    @given(intervals, intervals)
    def test_never_exceeds_iou(self, a, b):
        assert diou_1d(a, b) <= iou_1d(a, b) + 1e-12
        if a.center == b.center:
            assert diou_1d(a, b) == pytest.approx(iou_1d(a, b))

    @given(intervals, intervals)
    def test_range(self, a, b):
        assert -1.0 <= diou_1d(a, b) <= 1.0


class TestDistribution:
    def test_valid(self):
        d = Distribution(np.array([0.25, 0.75]))
        assert d.m == 1
        assert d[1] == 0.75

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            Distribution(np.array([0.5, 0.4]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Distribution(np.array([-0.1, 1.1]))

    def test_uniform(self):
        assert np.allclose(Distribution.uniform(4).probs, 0.25)

    def test_immutable(self):
        d = Distribution(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            d.probs[0] = 1.0


class TestClipToSimplex:
    def test_already_valid(self):
        assert np.allclose(clip_to_simplex(np.array([0.5, 0.5])).probs, [0.5, 0.5])

    def test_clamps_negative(self):
        assert np.allclose(clip_to_simplex(np.array([-1.0, 1.0])).probs, [0.0, 1.0])

    def test_all_zero_uniform(self):
        assert np.allclose(clip_to_simplex(np.zeros(3)).probs, 1 / 3)

    @given(
        st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=8)
    )
    def test_always_valid(self, values):
        d = clip_to_simplex(np.array(values))
        assert np.all(d.probs >= 0)
        assert d.probs.sum() == pytest.approx(1.0, abs=1e-9)


class TestFrameSequence:
    def test_valid(self):
        seq = FrameSequence(np.array([0.2, 0.8]), np.array([[0.5, 0.5], [0.1, 0.9]]))
        assert seq.num_frames == 2
        assert seq.num_attributes == 1

    def test_rejects_attention_out_of_range(self):
        with pytest.raises(ValueError):
            FrameSequence(np.array([1.5]), np.array([[0.5, 0.5]]))

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            FrameSequence(np.array([0.5]), np.array([[0.6, 0.6]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            FrameSequence(np.array([0.5, 0.5]), np.array([[0.5, 0.5]]))


def test_clip_label_values():
    assert int(ClipLabel.REAL) == 0
    assert int(ClipLabel.FAKE) == 1
