import json

import numpy as np
import pytest

from tfloc.errors import SchemaError
from tfloc.records import (
    ClipRecord,
    ProposalRecord,
    SCHEMA_VERSION,
    read_clips,
    read_jsonl,
    read_proposals,
    write_clips,
    write_jsonl,
    write_proposals,
)


def make_clip(clip_id="c0", T=6, m=2, rng=None):
    rng = rng or np.random.default_rng(0)
    return ClipRecord(
        clip_id=clip_id,
        frame_rate=25.0,
        label=1,
        attention=rng.uniform(0, 1, T),
        attributes=rng.dirichlet(np.ones(m + 1), size=T),
        gt_segments=[(0.2, 0.44)],
        hidden_type=1,
    )


class TestClipRoundTrip:
    def test_values_survive_within_1e8(self, tmp_path):
        rng = np.random.default_rng(1)
        clips = [make_clip(f"c{i}", rng=rng) for i in range(4)]
        path = tmp_path / "clips.jsonl"
        write_clips(path, "test", clips)
        header, back = read_clips(path)
        assert header["schema_version"] == SCHEMA_VERSION
        assert header["kind"] == "clips"
        assert len(back) == 4
        for a, b in zip(clips, back):
            assert a.clip_id == b.clip_id
            assert np.abs(a.attention - b.attention).max() <= 1e-8
            assert np.abs(a.attributes - b.attributes).max() <= 1e-8
            assert b.gt_segments == [(0.2, 0.44)]

    def test_sorted_by_clip_id(self, tmp_path):
        clips = [make_clip("zz"), make_clip("aa")]
        path = tmp_path / "clips.jsonl"
        write_clips(path, "test", clips)
        _, back = read_clips(path)
        assert [c.clip_id for c in back] == ["aa", "zz"]

    def test_gzip_round_trip(self, tmp_path):
        clips = [make_clip()]
        path = tmp_path / "clips.jsonl.gz"
        write_clips(path, "test", clips)
        assert path.read_bytes()[:2] == b"\x1f\x8b"
        _, back = read_clips(path)
        assert back[0].clip_id == "c0"

    def test_rewrite_is_byte_identical(self, tmp_path):
        clips = [make_clip(f"c{i}") for i in range(3)]
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_clips(p1, "test", clips)
        _, back = read_clips(p1)
        write_clips(p2, "test", back)
        assert p1.read_bytes() == p2.read_bytes()


class TestClipValidation:
    def test_row_drift_renormalized_with_warning(self, tmp_path, caplog):
        clip = make_clip()
        rec = clip.to_dict()
        rec["attributes"][0][0] += 5e-4  # beyond warn, below reject
        path = tmp_path / "clips.jsonl"
        write_jsonl(path, "clips", "test", [rec])
        with caplog.at_level("WARNING", logger="tfloc.records"):
            _, back = read_clips(path)
        assert "renormalizing" in caplog.text
        np.testing.assert_allclose(back[0].attributes.sum(axis=1), 1.0, atol=1e-9)

    def test_row_drift_rejected(self, tmp_path):
        clip = make_clip()
        rec = clip.to_dict()
        rec["attributes"][0][0] += 0.1
        path = tmp_path / "clips.jsonl"
        write_jsonl(path, "clips", "test", [rec])
        with pytest.raises(SchemaError, match="line 2"):
            read_clips(path)

    def test_attention_out_of_range_rejected(self, tmp_path):
        rec = make_clip().to_dict()
        rec["attention"][0] = 1.5
        path = tmp_path / "clips.jsonl"
        write_jsonl(path, "clips", "test", [rec])
        with pytest.raises(SchemaError):
            read_clips(path)

    def test_missing_field_names_line(self, tmp_path):
        rec = make_clip().to_dict()
        del rec["frame_rate"]
        path = tmp_path / "clips.jsonl"
        write_jsonl(path, "clips", "test", [rec])
        with pytest.raises(SchemaError, match="line 2"):
            read_clips(path)


class TestHeaderHandling:
    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            json.dumps({"schema_version": SCHEMA_VERSION, "kind": "clips", "stage": "x"})
            + "\n{not json\n"
        )
        with pytest.raises(SchemaError, match="line 2"):
            read_jsonl(path, "clips")

    def test_major_version_mismatch_names_both(self, tmp_path):
        path = tmp_path / "v9.jsonl"
        path.write_text(json.dumps({"schema_version": "9.0", "kind": "clips"}) + "\n")
        with pytest.raises(SchemaError, match="9.0"):
            read_jsonl(path, "clips")

    def test_minor_version_accepted(self, tmp_path):
        path = tmp_path / "minor.jsonl"
        path.write_text(json.dumps({"schema_version": "1.7", "kind": "clips"}) + "\n")
        header, records = read_jsonl(path, "clips")
        assert records == []

    def test_wrong_kind(self, tmp_path):
        path = tmp_path / "k.jsonl"
        write_jsonl(path, "proposals", "test", [])
        with pytest.raises(SchemaError, match="clips"):
            read_jsonl(path, "clips")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(SchemaError, match="header"):
            read_jsonl(path, "clips")


class TestProposalRecords:
    def test_round_trip(self, tmp_path):
        props = [
            ProposalRecord("c1", 0.4, 1.2, 0.87654321, 2, "p0"),
            ProposalRecord("c0", 0.0, 0.5, 0.5, 1, "p0"),
        ]
        path = tmp_path / "props.jsonl"
        write_proposals(path, "propose", props)
        _, back = read_proposals(path)
        assert back[0].clip_id == "c0"
        assert back[1].confidence == pytest.approx(0.87654321, abs=1e-8)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(start_s=1.0, end_s=0.5),
            dict(attribute=0),
            dict(stage="bogus"),
        ],
    )
    def test_validation(self, kwargs):
        base = dict(clip_id="c", start_s=0.0, end_s=1.0, confidence=0.5, attribute=1, stage="p0")
        base.update(kwargs)
        with pytest.raises(ValueError):
            ProposalRecord(**base)
